#include "sitsq/measurement.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

#include "sitsq/constants.hpp"

namespace sitsq {

using namespace constants;

cxd quadrature_m(const FieldSlice& slice, const std::vector<cxd>& f_lo,
                 double theta, double dt) {
    if (slice.omega.size() != f_lo.size())
        throw std::invalid_argument("quadrature_m: grid mismatch");
    const cxd eip(std::cos(theta), std::sin(theta));
    cxd sum = 0.0;
    for (std::size_t i = 0; i < f_lo.size(); ++i)
        sum += f_lo[i] * slice.omega_dag[i] * eip +
               std::conj(f_lo[i]) * slice.omega[i] * std::conj(eip);
    return sum * dt;
}

double squeezing_ratio(const std::vector<cxd>& m_values, double field_norm) {
    if (m_values.size() < 2)
        throw std::invalid_argument("squeezing_ratio: need >= 2 trajectories");
    if (field_norm <= 0.0)
        throw std::invalid_argument("squeezing_ratio: field_norm must be > 0");
    cxd m1 = 0.0, m2 = 0.0;
    for (const auto& m : m_values) {
        m1 += m;
        m2 += m * m;
    }
    const double n = static_cast<double>(m_values.size());
    const double re1 = (m1 / n).real();
    const double re2 = (m2 / n).real();
    return 1.0 + (re2 - re1 * re1) / field_norm;
}

double to_decibels(double s) {
    if (s <= 0.0) throw std::domain_error("to_decibels: S must be > 0");
    return 10.0 * std::log10(s);
}

namespace {

struct Moments {
    cxd i1 = 0.0, i2 = 0.0, i1sq = 0.0, i2sq = 0.0, i1i2 = 0.0;
    cxd ref1 = 0.0, ref2 = 0.0;  // zero-noise reference overlaps
    std::size_t n = 0;
};

// S at phase theta from the reference-shifted overlap moments:
// M = Ms + R(theta) with Ms = Is1 e^{it} + Is2 e^{-it}. R(theta) is real for
// a zero-noise reference (conjugate pair), so the shift cancels exactly in
// the variance and the shifted form is free of large-number cancellation.
double s_from_moments(const Moments& m, double theta, double field_norm,
                      double* imag_diag) {
    const double n = static_cast<double>(m.n);
    const cxd e1(std::cos(theta), std::sin(theta));
    const cxd e2(std::cos(2.0 * theta), std::sin(2.0 * theta));
    const cxd mean_s = (m.i1 * e1 + m.i2 * std::conj(e1)) / n;
    const cxd msq_s = (m.i1sq * e2 + m.i2sq * std::conj(e2) + 2.0 * m.i1i2) / n;
    if (imag_diag) {
        const cxd mean_full = mean_s + m.ref1 * e1 + m.ref2 * std::conj(e1);
        const double d = std::fabs(mean_full.real()) > 0.0
                             ? std::fabs(mean_full.imag()) / std::fabs(mean_full.real())
                             : 0.0;
        *imag_diag = std::max(*imag_diag, d);
    }
    const double var = msq_s.real() - mean_s.real() * mean_s.real();
    return 1.0 + var / field_norm;
}

} // namespace

SqueezingSurface scan_phase_length(const EnsembleResult& ensemble,
                                   const std::vector<double>& z_positions,
                                   const std::vector<double>& theta_grid,
                                   double field_norm) {
    const std::size_t nz = z_positions.size();
    const std::size_t nth = theta_grid.size();
    if (nz != ensemble.n_samples)
        throw std::invalid_argument("scan_phase_length: z positions do not match "
                                    "the ensemble's recorded samples");
    if (ensemble.n_used < 2)
        throw std::runtime_error("scan_phase_length: all trajectories discarded");

    SqueezingSurface surf;
    surf.z = z_positions;
    surf.theta = theta_grid;
    surf.s.resize(nz * nth);
    surf.s_db.resize(nz * nth);
    surf.std_err.resize(nz * nth);
    surf.n_traj_used = ensemble.n_used;
    surf.n_discarded = ensemble.n_discarded;

    const std::size_t nb = ensemble.batches.size();
    std::vector<Moments> total(nz);
    for (std::size_t k = 0; k < nz; ++k) {
        total[k].ref1 = ensemble.ref_i1[k];
        total[k].ref2 = ensemble.ref_i2[k];
    }
    for (const auto& b : ensemble.batches) {
        for (std::size_t k = 0; k < nz; ++k) {
            total[k].i1 += b.i1[k];
            total[k].i2 += b.i2[k];
            total[k].i1sq += b.i1sq[k];
            total[k].i2sq += b.i2sq[k];
            total[k].i1i2 += b.i1i2[k];
            total[k].n += b.n;
        }
    }

    for (std::size_t k = 0; k < nz; ++k) {
        for (std::size_t j = 0; j < nth; ++j) {
            const double s =
                s_from_moments(total[k], theta_grid[j], field_norm,
                               &surf.imag_diagnostic);
            // batch-mean standard error
            double bsum = 0.0, bsq = 0.0;
            std::size_t nb_eff = 0;
            for (const auto& b : ensemble.batches) {
                if (b.n < 2) continue;
                Moments mb;
                mb.i1 = b.i1[k];
                mb.i2 = b.i2[k];
                mb.i1sq = b.i1sq[k];
                mb.i2sq = b.i2sq[k];
                mb.i1i2 = b.i1i2[k];
                mb.ref1 = ensemble.ref_i1[k];
                mb.ref2 = ensemble.ref_i2[k];
                mb.n = b.n;
                const double sb = s_from_moments(mb, theta_grid[j], field_norm, nullptr);
                bsum += sb;
                bsq += sb * sb;
                ++nb_eff;
            }
            double se = 0.0;
            if (nb_eff >= 2) {
                const double mean_b = bsum / nb_eff;
                const double var_b =
                    std::max(0.0, bsq / nb_eff - mean_b * mean_b);
                se = std::sqrt(var_b / (nb_eff - 1));
            }
            surf.s[k * nth + j] = s;
            surf.std_err[k * nth + j] = se;
            surf.s_db[k * nth + j] =
                s > 0.0 ? 10.0 * std::log10(s)
                        : std::numeric_limits<double>::quiet_NaN();
        }
    }
    (void)nb;

    // optimum: global minimum; ties toward smaller z, then theta closest to 0
    std::size_t best_k = 0, best_j = 0;
    bool first = true;
    for (std::size_t k = 0; k < nz; ++k) {
        for (std::size_t j = 0; j < nth; ++j) {
            const double s = surf.s[k * nth + j];
            if (first || s < surf.s_opt) {
                first = false;
                surf.s_opt = s;
                best_k = k;
                best_j = j;
            } else if (s == surf.s_opt) {
                const bool smaller_z = z_positions[k] < z_positions[best_k];
                const bool same_z = z_positions[k] == z_positions[best_k];
                const bool closer_theta =
                    std::fabs(theta_grid[j]) < std::fabs(theta_grid[best_j]);
                if (smaller_z || (same_z && closer_theta)) {
                    best_k = k;
                    best_j = j;
                }
            }
        }
    }
    surf.z_opt = z_positions[best_k];
    surf.theta_opt = theta_grid[best_j];
    surf.stderr_opt = surf.std_err[best_k * nth + best_j];
    surf.s_opt_db = surf.s_opt > 0.0
                        ? 10.0 * std::log10(surf.s_opt)
                        : std::numeric_limits<double>::quiet_NaN();
    return surf;
}

MeanField mean_field(const FieldStats& stats) {
    MeanField mf;
    mf.n = stats.n;
    mf.n_t = stats.n_t;
    const std::size_t total = stats.sum_re.size();
    mf.mean.resize(total);
    mf.se_re.resize(total);
    mf.se_im.resize(total);
    const double n = static_cast<double>(stats.n);
    for (std::size_t i = 0; i < total; ++i) {
        const double mre = stats.sum_re[i] / n;
        const double mim = stats.sum_im[i] / n;
        mf.mean[i] = cxd(mre, mim);
        const double vre = std::max(0.0, stats.sum_re2[i] / n - mre * mre);
        const double vim = std::max(0.0, stats.sum_im2[i] / n - mim * mim);
        mf.se_re[i] = std::sqrt(vre / (n - 1));
        mf.se_im[i] = std::sqrt(vim / (n - 1));
    }
    return mf;
}

std::vector<double> default_theta_grid(std::size_t n) {
    std::vector<double> g(n);
    for (std::size_t i = 0; i < n; ++i)
        g[i] = -0.5 * pi + pi * static_cast<double>(i) / static_cast<double>(n - 1);
    return g;
}

} // namespace sitsq
