#ifndef SITSQ_RUNNER_HPP
#define SITSQ_RUNNER_HPP

#include <string>
#include <vector>

#include "sitsq/config.hpp"
#include "sitsq/measurement.hpp"
#include "sitsq/output.hpp"

namespace sitsq {

// One full ensemble for the given config: build, run, fold into a surface.
struct PhaseScanRun {
    BuiltModel model;
    EnsembleResult ensemble;
    SqueezingSurface surface;
};
PhaseScanRun compute_phase_scan(const RunConfig& cfg, unsigned threads,
                                bool field_stats = false);

std::vector<DetuningRow> compute_detuning_scan(const RunConfig& cfg, unsigned threads);
std::vector<PressureRow> compute_pressure_scan(const RunConfig& cfg, unsigned threads);

// Executes the requested scan and writes CSV (+ optional SVG) artifacts and
// the manifest into cfg.output.directory. Returns the file names written.
std::vector<std::string> run_and_write(const RunConfig& cfg, const std::string& scan,
                                       unsigned threads);

} // namespace sitsq

#endif
