#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "ibc/regulator.hpp"

namespace ibc {

enum class ControllerMode { none, lq, lqi };

std::string to_string(ControllerMode mode);
ControllerMode controller_mode_from_string(const std::string& name);

/// One experiment: which controller, which weights, capacity drop on or off,
/// and when the controller activates (in control steps).
struct ExperimentConfig {
    ControllerMode mode = ControllerMode::none;
    WeightConfig weights;
    double sigma = 0.95;
    bool capacity_drop = true;
    int activation_step = 0;
    /// No-control TTS for the improvement column; computed when absent.
    std::optional<double> baseline_tts;
};

struct ExperimentRow {
    std::string scenario;
    ControllerMode mode = ControllerMode::none;
    bool capacity_drop = true;
    double sigma = 0.95;
    std::optional<double> p1;
    double p2 = 0.0;
    int activation_step = 0;
    double tts = 0.0;
    double baseline_tts = 0.0;
    double improvement_pct = 0.0;  ///< 100 (baseline - tts) / baseline
    int saturation_count = 0;
    double max_rel_density = 0.0;
    bool failed = false;
    std::string error;
};

struct ExperimentResult {
    ExperimentRow row;
    SimulationTrace trace;
};

/// Runs one experiment; lq/lqi designs gains at the scenario's nominal point
/// (lq forces S = 0 regardless of the configured p1). Deterministic.
ExperimentResult run_experiment(const Scenario& scenario, const ExperimentConfig& config);

/// Randomized (p1, p2) robustness sweep. The sample set is a pure function
/// of the seed; rows keep sample order regardless of how many worker threads
/// execute them. Individual design failures are recorded per row, not fatal.
struct SweepSpec {
    int count = 1000;
    std::pair<double, double> p1_range{-5.0, 2.0};
    std::pair<double, double> p2_range{-5.0, 2.0};
    std::uint64_t seed = 0;
    ControllerMode mode = ControllerMode::lqi;
    double sigma = 0.95;
    bool capacity_drop = true;
    int threads = 0;  ///< 0 selects the hardware concurrency
};

std::vector<std::pair<double, double>> sweep_samples(const SweepSpec& spec);

std::vector<ExperimentRow> run_sweep(const Scenario& scenario, const SweepSpec& spec);

/// Report rows as comma-separated text (schema documented in the README).
void write_report(std::ostream& out, const std::vector<ExperimentRow>& rows);
std::vector<ExperimentRow> read_report(std::istream& in);
std::vector<ExperimentRow> read_report_file(const std::string& path);

/// Scenario x controller TTS/improvement grid over the given rows, one line
/// per (scenario, capacity drop) pair. Empty input yields just the header.
std::string summarize(const std::vector<ExperimentRow>& rows);

}  // namespace ibc
