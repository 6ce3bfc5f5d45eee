#ifndef SITSQ_OUTPUT_HPP
#define SITSQ_OUTPUT_HPP

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "sitsq/config.hpp"
#include "sitsq/measurement.hpp"

namespace sitsq {

// Scientific notation with 9 significant digits; the frozen CSV number format.
std::string format_sci(double v);

// Writes to "<path>.partial" then renames, so an interrupted run never leaves
// a bare partial file. Throws io_error.
void atomic_write_file(const std::string& path, const std::string& content);

std::uint64_t fnv1a64(const std::string& bytes);

std::string surface_csv(const SqueezingSurface& surf);
std::string optimum_csv(const SqueezingSurface& surf);

struct DetuningRow {
    double delta = 0.0;  // units of 1/tau_p
    double s_opt = 0.0, s_opt_db = 0.0, l_opt = 0.0, std_err = 0.0;
};
std::string detuning_csv(const std::vector<DetuningRow>& rows);

struct PressureRow {
    double pressure_pa = 0.0, temperature_k = 0.0;
    double s_opt = 0.0, s_opt_db = 0.0, l_opt = 0.0, std_err = 0.0;
    std::string mode;
};
std::string pressure_csv(const std::vector<PressureRow>& rows);

struct ManifestInfo {
    std::string scan_kind;
    std::uint64_t master_seed = 0;
    unsigned threads = 0;
    double wall_seconds = 0.0;
    std::size_t n_traj = 0, n_used = 0, n_discarded = 0;
    double rho_tot = 0.0, rho_ideal_gas = 0.0, pressure_pa = 0.0;
    double g_principal = 0.0, field_norm = 0.0;
    std::vector<std::string> warnings;
    std::string optimum_line;  // empty when not applicable
};

// files: (name, content checksummed). The echoed config reparses to an equal
// RunConfig.
std::string manifest_text(const RunConfig& cfg, const ManifestInfo& info,
                          const std::vector<std::pair<std::string, std::string>>& files);

// Extracts the config echo from a manifest (for round-trip checks).
std::string manifest_config_echo(const std::string& manifest);

} // namespace sitsq

#endif
