#ifndef SITSQ_MEASUREMENT_HPP
#define SITSQ_MEASUREMENT_HPP

#include <cstddef>
#include <vector>

#include "sitsq/field.hpp"
#include "sitsq/sde.hpp"

namespace sitsq {

struct HomodyneConfig {
    std::vector<cxd> f_lo;        // L2-normalized on the grid
    std::vector<double> theta;    // LO phases, rad
    std::vector<double> z_samples;// m
};

// S(z, theta) with batch-mean errors and the optimum cell.
struct SqueezingSurface {
    std::vector<double> z;       // [nz]
    std::vector<double> theta;   // [nth]
    std::vector<double> s;       // row-major [nz][nth]
    std::vector<double> s_db;    // NaN where s <= 0
    std::vector<double> std_err; // batch-mean standard error of s
    double z_opt = 0.0, theta_opt = 0.0, s_opt = 0.0, s_opt_db = 0.0;
    double stderr_opt = 0.0;
    std::size_t n_traj_used = 0, n_discarded = 0;
    // sampling-quality diagnostic: max |Im moment| / |Re moment|
    double imag_diagnostic = 0.0;

    double at(std::size_t iz, std::size_t ith) const { return s[iz * theta.size() + ith]; }
    double err_at(std::size_t iz, std::size_t ith) const { return std_err[iz * theta.size() + ith]; }
};

// homodyne overlap of one trajectory record at LO phase theta
cxd quadrature_m(const FieldSlice& slice, const std::vector<cxd>& f_lo,
                 double theta, double dt);

// S = 1 + Var_{+P}[M] / field_norm with Var over the given per-trajectory
// M values (real parts of the moments).
double squeezing_ratio(const std::vector<cxd>& m_values, double field_norm);

// 10 log10(S); throws domain_error for S <= 0.
double to_decibels(double s);

// Builds the full surface from ensemble batch moments. Ties in the optimum
// break toward smaller z, then theta closest to 0.
SqueezingSurface scan_phase_length(const EnsembleResult& ensemble,
                                   const std::vector<double>& z_positions,
                                   const std::vector<double>& theta_grid,
                                   double field_norm);

// Mean field and its standard error per (sample, tau), from ensemble stats.
struct MeanField {
    std::size_t n = 0;
    std::vector<cxd> mean;      // [sample][tau] flattened
    std::vector<double> se_re;  // standard error of the mean, per component
    std::vector<double> se_im;
    std::size_t n_t = 0;
};
MeanField mean_field(const FieldStats& stats);

// default LO phase grid, [-pi/2, pi/2]
std::vector<double> default_theta_grid(std::size_t n = 157);

} // namespace sitsq

#endif
