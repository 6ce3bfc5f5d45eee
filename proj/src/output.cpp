#include "sitsq/output.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>

#include "sitsq/errors.hpp"

namespace sitsq {

std::string format_sci(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.8e", v);
    return buf;
}

void atomic_write_file(const std::string& path, const std::string& content) {
    const std::string tmp = path + ".partial";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw io_error("cannot open for writing: " + tmp);
        out.write(content.data(), static_cast<std::streamsize>(content.size()));
        if (!out) throw io_error("write failed: " + tmp);
    }
    if (std::rename(tmp.c_str(), path.c_str()) != 0)
        throw io_error("rename failed: " + tmp + " -> " + path);
}

std::uint64_t fnv1a64(const std::string& bytes) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

std::string surface_csv(const SqueezingSurface& surf) {
    std::string out = "z_m,theta_rad,S,S_dB,stderr\n";
    const std::size_t nth = surf.theta.size();
    for (std::size_t k = 0; k < surf.z.size(); ++k)
        for (std::size_t j = 0; j < nth; ++j)
            out += format_sci(surf.z[k]) + "," + format_sci(surf.theta[j]) + "," +
                   format_sci(surf.s[k * nth + j]) + "," +
                   format_sci(surf.s_db[k * nth + j]) + "," +
                   format_sci(surf.std_err[k * nth + j]) + "\n";
    return out;
}

std::string optimum_csv(const SqueezingSurface& surf) {
    std::string out = "z_opt_m,theta_opt_rad,S_opt,S_opt_dB,stderr,n_traj_used,n_discarded\n";
    out += format_sci(surf.z_opt) + "," + format_sci(surf.theta_opt) + "," +
           format_sci(surf.s_opt) + "," + format_sci(surf.s_opt_db) + "," +
           format_sci(surf.stderr_opt) + "," + std::to_string(surf.n_traj_used) +
           "," + std::to_string(surf.n_discarded) + "\n";
    return out;
}

std::string detuning_csv(const std::vector<DetuningRow>& rows) {
    // delta is in units of 1/tau_p; the log column applies the plotting
    // convention log10(delta + 1)
    std::string out = "delta,S_opt,S_opt_dB,L_opt,stderr,log10_delta_plus1\n";
    for (const auto& r : rows)
        out += format_sci(r.delta) + "," + format_sci(r.s_opt) + "," +
               format_sci(r.s_opt_db) + "," + format_sci(r.l_opt) + "," +
               format_sci(r.std_err) + "," +
               format_sci(std::log10(r.delta + 1.0)) + "\n";
    return out;
}

std::string pressure_csv(const std::vector<PressureRow>& rows) {
    std::string out = "pressure_Pa,temperature_K,S_opt,S_opt_dB,L_opt,stderr,mode\n";
    for (const auto& r : rows)
        out += format_sci(r.pressure_pa) + "," + format_sci(r.temperature_k) + "," +
               format_sci(r.s_opt) + "," + format_sci(r.s_opt_db) + "," +
               format_sci(r.l_opt) + "," + format_sci(r.std_err) + "," + r.mode +
               "\n";
    return out;
}

std::string manifest_text(const RunConfig& cfg, const ManifestInfo& info,
                          const std::vector<std::pair<std::string, std::string>>& files) {
    std::string m = "# sit-squeeze run manifest\n";
    m += "version = sit-squeeze 0.1.0\n";
    m += "scan = " + info.scan_kind + "\n";
    m += "master_seed = " + std::to_string(info.master_seed) + "\n";
    m += "threads = " + std::to_string(info.threads) + "\n";
    m += "wall_seconds = " + format_sci(info.wall_seconds) + "\n";
    m += "n_traj = " + std::to_string(info.n_traj) + "\n";
    m += "n_used = " + std::to_string(info.n_used) + "\n";
    m += "n_discarded = " + std::to_string(info.n_discarded) + "\n";
    m += "pressure_Pa = " + format_sci(info.pressure_pa) + "\n";
    m += "rho_tot_m3 = " + format_sci(info.rho_tot) + "\n";
    m += "rho_ideal_gas_m3 = " + format_sci(info.rho_ideal_gas) + "\n";
    m += "g_principal = " + format_sci(info.g_principal) + "\n";
    m += "field_norm = " + format_sci(info.field_norm) + "\n";
    if (!info.optimum_line.empty()) m += "optimum = " + info.optimum_line + "\n";
    for (const auto& w : info.warnings) m += "warning = " + w + "\n";
    m += "--- begin config ---\n";
    m += serialize_config(cfg);
    m += "--- end config ---\n";
    char buf[32];
    for (const auto& [name, content] : files) {
        std::snprintf(buf, sizeof buf, "%016llx",
                      static_cast<unsigned long long>(fnv1a64(content)));
        m += "file = " + name + " fnv1a64 = " + buf + "\n";
    }
    return m;
}

std::string manifest_config_echo(const std::string& manifest) {
    const std::string begin = "--- begin config ---\n";
    const std::string end = "--- end config ---\n";
    const auto b = manifest.find(begin);
    const auto e = manifest.find(end);
    if (b == std::string::npos || e == std::string::npos || e < b)
        throw io_error("manifest lacks a config echo");
    const auto start = b + begin.size();
    return manifest.substr(start, e - start);
}

} // namespace sitsq
