#include <doctest.h>

#include <cstdio>
#include <filesystem>
#include <fstream>

#include "sitsq/errors.hpp"
#include "sitsq/output.hpp"
#include "sitsq/svg.hpp"

using namespace sitsq;

TEST_CASE("scientific format is fixed at nine significant digits") {
    CHECK(format_sci(1.0) == "1.00000000e+00");
    CHECK(format_sci(-0.272) == "-2.72000000e-01");
    CHECK(format_sci(7.216439488508639e19) == "7.21643949e+19");
}

TEST_CASE("atomic write leaves no partial file") {
    const std::string path = "atomic_test.txt";
    atomic_write_file(path, "hello\n");
    CHECK(std::filesystem::exists(path));
    CHECK(!std::filesystem::exists(path + ".partial"));
    std::ifstream in(path);
    std::string s;
    std::getline(in, s);
    CHECK(s == "hello");
    std::remove(path.c_str());
}

TEST_CASE("fnv1a64 reference values") {
    CHECK(fnv1a64("") == 0xcbf29ce484222325ULL);
    CHECK(fnv1a64("a") == 0xaf63dc4c8601ec8cULL);
}

TEST_CASE("manifest embeds a reparseable config") {
    RunConfig cfg;
    cfg.ensemble.master_seed = 42;
    cfg.scan.delta_over_taup = {0.0, 2.0};
    ManifestInfo info;
    info.scan_kind = "phase";
    info.master_seed = 42;
    const std::string m = manifest_text(cfg, info, {{"a.csv", "x,y\n1,2\n"}});
    const std::string echo = manifest_config_echo(m);
    const RunConfig back = parse_config_text(echo, "echo");
    CHECK(back == cfg);
    CHECK(m.find("file = a.csv fnv1a64 = ") != std::string::npos);
}

TEST_CASE("svg plots render and reject bad input") {
    const std::string surface =
        "z_m,theta_rad,S,S_dB,stderr\n"
        "0,-0.5,1.0,0,0.01\n0,0,0.9,-0.457,0.01\n0,0.5,1.0,0,0.01\n"
        "1,-0.5,1.1,0.414,0.01\n1,0,0.8,-0.969,0.01\n1,0.5,1.05,0.212,0.01\n";
    for (const std::string kind : {"phase", "length", "heatmap"}) {
        const std::string svg = plot_from_csv(surface, kind);
        CHECK(svg.find("<svg") != std::string::npos);
        CHECK(svg.find("</svg>") != std::string::npos);
    }
    const std::string det =
        "delta,S_opt,S_opt_dB,L_opt,stderr,log10_delta_plus1\n"
        "0,0.9,-0.45,0.01,0.005,0\n1,0.95,-0.22,0.01,0.005,0.301\n";
    CHECK(plot_from_csv(det, "detuning").find("<svg") != std::string::npos);
    const std::string pres =
        "pressure_Pa,temperature_K,S_opt,S_opt_dB,L_opt,stderr,mode\n"
        "0.272,273,0.9,-0.45,0.01,0.005,202-only\n"
        "0.889,293,0.95,-0.22,0.008,0.005,202-only\n";
    CHECK(plot_from_csv(pres, "pressure").find("<svg") != std::string::npos);

    CHECK_THROWS_WITH_AS((void)plot_from_csv("a,b\n1,2\n", "phase"),
                         doctest::Contains("z_m"), plot_error);
    CHECK_THROWS_AS((void)plot_from_csv(surface, "nope"), plot_error);
    CHECK_THROWS_AS((void)plot_from_csv("", "phase"), plot_error);
}
