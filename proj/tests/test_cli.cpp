// End-to-end checks of the sit-squeeze executable: artifacts, determinism,
// exit codes.
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>

namespace fs = std::filesystem;

namespace {

int failures = 0;

void check(bool ok, const std::string& what) {
    std::cout << (ok ? "[ok]   " : "[FAIL] ") << what << "\n";
    if (!ok) ++failures;
}

int run_cmd(const std::string& cmd) {
    const int rc = std::system(cmd.c_str());
    return WIFEXITED(rc) ? WEXITSTATUS(rc) : -1;
}

std::string slurp(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

const char* kTinyConfig =
    "[gas]\n"
    "temperature_K = 273\n"
    "[pulse]\n"
    "duration_fs = 4\n"
    "[grid]\n"
    "n_z = 20\n"
    "n_t = 1600\n"
    "n_z_samples = 10\n"
    "[ensemble]\n"
    "n_traj = 40\n"
    "master_seed = 11\n"
    "[scan]\n"
    "n_theta = 21\n"
    "delta_over_taup = 0,8\n"
    "pressures_K = 273,293\n";

} // namespace

int main() {
    const std::string cli = SITSQ_CLI_PATH;
    const fs::path work = fs::temp_directory_path() / "sitsq_cli_test";
    fs::remove_all(work);
    fs::create_directories(work);
    const std::string cfg = (work / "run.cfg").string();
    {
        std::ofstream f(cfg);
        f << kTinyConfig;
    }
    const std::string out1 = (work / "out1").string();
    const std::string out2 = (work / "out2").string();

    // phase scan produces the artifact set
    int rc = run_cmd(cli + " run --config " + cfg + " --out " + out1 +
                     " > /dev/null 2>&1");
    check(rc == 0, "run exits 0");
    check(fs::exists(out1 + "/squeezing_surface.csv"), "surface csv written");
    check(fs::exists(out1 + "/optimum.csv"), "optimum csv written");
    check(fs::exists(out1 + "/manifest.txt"), "manifest written");
    check(!fs::exists(out1 + "/squeezing_surface.csv.partial"), "no partial files");

    // deterministic rerun: byte-identical CSVs (different threads)
    rc = run_cmd(cli + " run --config " + cfg + " --out " + out2 +
                 " --threads 1 > /dev/null 2>&1");
    check(rc == 0, "rerun exits 0");
    check(slurp(out1 + "/squeezing_surface.csv") ==
              slurp(out2 + "/squeezing_surface.csv"),
          "rerun is byte-identical across thread counts");

    // seed override changes the numbers
    rc = run_cmd(cli + " run --config " + cfg + " --out " + out2 +
                 " --seed 99 > /dev/null 2>&1");
    check(rc == 0, "seeded rerun exits 0");
    check(slurp(out1 + "/squeezing_surface.csv") !=
              slurp(out2 + "/squeezing_surface.csv"),
          "different seed gives different statistics");

    // plots from the surface
    for (const std::string kind : {"phase", "length", "heatmap"}) {
        const std::string svg = (work / (kind + ".svg")).string();
        rc = run_cmd(cli + " plot --csv " + out1 + "/squeezing_surface.csv --kind " +
                     kind + " --out " + svg + " > /dev/null 2>&1");
        check(rc == 0 && fs::exists(svg), "plot kind " + kind);
    }

    // exit codes
    rc = run_cmd(cli + " run --config /no/such/file.cfg > /dev/null 2>&1");
    check(rc == 1, "missing config exits 1");
    {
        std::ofstream f(work / "bad.cfg");
        f << "[gas]\nfoo = 1\n";
    }
    rc = run_cmd(cli + " run --config " + (work / "bad.cfg").string() +
                 " > /dev/null 2>&1");
    check(rc == 1, "unknown key exits 1");
    {
        std::ofstream f(work / "bad.csv");
        f << "a,b\n1,2\n";
    }
    rc = run_cmd(cli + " plot --csv " + (work / "bad.csv").string() +
                 " --kind phase --out " + (work / "x.svg").string() +
                 " > /dev/null 2>&1");
    check(rc == 4, "missing column exits 4");

    if (failures == 0) fs::remove_all(work);
    std::cout << (failures ? "FAILED" : "PASSED") << " cli tests\n";
    return failures ? 1 : 0;
}
