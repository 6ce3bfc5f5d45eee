#ifndef SITSQ_SVG_HPP
#define SITSQ_SVG_HPP

#include <stdexcept>
#include <string>

namespace sitsq {

// Bad plot input (malformed CSV, missing column, unknown kind).
class plot_error : public std::runtime_error {
public:
    explicit plot_error(const std::string& msg) : std::runtime_error(msg) {}
};

// Renders a self-contained SVG from CSV content.
// kinds: "phase"   S_dB vs theta at the optimal z (surface csv)
//        "length"  S_dB vs z at the optimal theta (surface csv)
//        "heatmap" S_dB over (z, theta)           (surface csv)
//        "detuning" S_opt_dB vs log10(delta + 1)  (detuning csv)
//        "pressure" S_opt_dB vs pressure          (pressure csv)
std::string plot_from_csv(const std::string& csv_content, const std::string& kind);

} // namespace sitsq

#endif
