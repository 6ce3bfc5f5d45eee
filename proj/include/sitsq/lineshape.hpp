#ifndef SITSQ_LINESHAPE_HPP
#define SITSQ_LINESHAPE_HPP

#include <cstddef>
#include <vector>

namespace sitsq {

struct LineshapeParams {
    double lorentz_fwhm = 0.0;  // rad/s
    double doppler_fwhm = 0.0;  // rad/s
    double voigt_fwhm = 0.0;    // rad/s
    double center = 0.0;        // rad/s
};

// Weighted frequency bins used to realize the lineshape integral as a sum.
struct FrequencyGrid {
    std::vector<double> bin_centers;  // rad/s (absolute, around center)
    std::vector<double> weights;      // nonnegative, sum to 1
    double bin_width = 0.0;           // rad/s (0 for the single-bin case)
};

// Doppler FWHM (4 pi / lambda0) sqrt(2 ln2 kB T / m). T = 0 gives 0.
double doppler_fwhm(double temperature, double mass, double lambda0);

// Voigt FWHM combination rule. The Lorentzian coefficient is 0.5 by default;
// exposed because other fits in the literature use 0.5346.
double voigt_fwhm(double lorentz_fwhm, double doppler_fwhm,
                  double lorentz_coeff = 0.5);

// Pseudo-Voigt spectral density (Lorentzian/Gaussian mix keyed to the Voigt
// FWHM), normalized to unit integral. Units: s (density per rad/s).
double voigt_profile(double omega, const LineshapeParams& params);

// Convenience constructor computing the Voigt width from the other two.
LineshapeParams make_lineshape_params(double lorentz_fwhm, double doppler_fwhm,
                                      double center, double lorentz_coeff = 0.5);

// n_bins must be odd (a center bin must exist). n_bins = 1 is the cold-gas
// delta-line case. Otherwise bins span +- span_fwhm * voigt_fwhm / 2 with
// weights proportional to the profile, renormalized to sum 1.
FrequencyGrid discretize_lineshape(const LineshapeParams& params,
                                   std::size_t n_bins, double span_fwhm);

} // namespace sitsq

#endif
