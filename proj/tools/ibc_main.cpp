// Command-line front end for the internal boundary control toolkit:
//   simulate   run the plant open- or closed-loop and report TTS
//   design     solve the Riccati design and write a reusable gain file
//   sweep      randomized (p1, p2) robustness sweep
//   summarize  merge experiment reports into a TTS/improvement table
//
// Exit codes: 0 success, 2 input/validation error, 3 design error,
// 4 runtime error. Failures print a single machine-readable line to stderr:
//   error<TAB>category<TAB>message

#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "ibc/experiments.hpp"

namespace {

int fail(const char* category, const std::string& message, int code) {
    std::cerr << "error\t" << category << '\t' << message << '\n';
    return code;
}

std::optional<double> parse_p1(const std::string& text) {
    if (text == "-inf" || text == "none") return std::nullopt;
    return std::stod(text);
}

struct SimulateArgs {
    std::string scenario_path;
    std::string controller = "none";
    std::string p1 = "-2.5";
    double p2 = -3.0;
    double sigma = 0.95;
    std::string capacity_drop = "on";
    int activation_step = 0;
    std::string trace_path;
    std::string gains_path;
    std::string report_path;
};

int cmd_simulate(const SimulateArgs& args) {
    const ibc::Scenario scenario = ibc::load_scenario(args.scenario_path);

    ibc::ExperimentConfig cfg;
    cfg.mode = ibc::controller_mode_from_string(args.controller);
    cfg.weights.p1 = parse_p1(args.p1);
    cfg.weights.p2 = args.p2;
    cfg.sigma = args.sigma;
    cfg.capacity_drop = args.capacity_drop == "on";
    cfg.activation_step = args.activation_step;

    ibc::ExperimentResult result;
    if (!args.gains_path.empty() && cfg.mode != ibc::ControllerMode::none) {
        const ibc::GainSet gains = ibc::load_gains_file(args.gains_path);
        const ibc::Scenario sc = scenario.with_capacity_drop(cfg.capacity_drop);
        result.trace = ibc::run_closed_loop(sc, gains, cfg.activation_step);
        result.row.scenario = sc.name;
        result.row.mode = cfg.mode;
        result.row.capacity_drop = cfg.capacity_drop;
        result.row.sigma = gains.sigma;
        result.row.p1 = gains.p1;
        result.row.p2 = gains.p2;
        result.row.activation_step = cfg.activation_step;
        result.row.tts = result.trace.total_time_spent;
        result.row.baseline_tts =
            ibc::run_open_loop(sc, ibc::constant_schedule(sc, sc.design.eps)).total_time_spent;
        result.row.improvement_pct = 100.0 * (result.row.baseline_tts - result.row.tts) / result.row.baseline_tts;
        result.row.saturation_count = result.trace.saturation_count;
        result.row.max_rel_density = ibc::max_relative_density(sc, result.trace);
    } else {
        result = ibc::run_experiment(scenario, cfg);
    }
    if (result.row.failed) return fail("design", result.row.error, 3);

    if (!args.trace_path.empty()) {
        std::ofstream out(args.trace_path);
        if (!out) return fail("io", "cannot write trace file: " + args.trace_path, 2);
        ibc::write_trace(out, result.trace);
    }
    if (!args.report_path.empty()) {
        std::ofstream out(args.report_path);
        if (!out) return fail("io", "cannot write report file: " + args.report_path, 2);
        ibc::write_report(out, {result.row});
    }

    std::cout << "scenario           " << result.row.scenario << '\n'
              << "controller         " << ibc::to_string(result.row.mode) << '\n'
              << "capacity_drop      " << (result.row.capacity_drop ? "on" : "off") << '\n'
              << "tts_vehh           " << result.row.tts << '\n'
              << "no_control_vehh    " << result.row.baseline_tts << '\n'
              << "improvement_pct    " << result.row.improvement_pct << '\n'
              << "max_rel_density    " << result.row.max_rel_density << '\n'
              << "saturation_count   " << result.row.saturation_count << '\n';
    return 0;
}

struct DesignArgs {
    std::string scenario_path;
    std::string p1 = "-2.5";
    double p2 = -3.0;
    double sigma = 0.95;
    std::string output_path;
};

int cmd_design(const DesignArgs& args) {
    const ibc::Scenario scenario = ibc::load_scenario(args.scenario_path);
    ibc::WeightConfig weights;
    weights.p1 = parse_p1(args.p1);
    weights.p2 = args.p2;

    const ibc::GainSet gains = ibc::design_gains(scenario, args.sigma, weights);

    if (args.output_path.empty()) {
        ibc::save_gains(std::cout, gains);
    } else {
        std::ofstream out(args.output_path);
        if (!out) return fail("io", "cannot write gain file: " + args.output_path, 2);
        ibc::save_gains(out, gains);
        std::cout << "gains written to " << args.output_path << " (riccati iterations "
                  << gains.riccati_iterations << ", residual " << gains.riccati_residual << ")\n";
    }
    return 0;
}

struct SweepArgs {
    std::string scenario_path;
    int count = 1000;
    double p1_min = -5.0, p1_max = 2.0;
    double p2_min = -5.0, p2_max = 2.0;
    std::uint64_t seed = 0;
    std::string controller = "lqi";
    double sigma = 0.95;
    std::string capacity_drop = "on";
    int threads = 0;
    std::string output_path;
};

int cmd_sweep(const SweepArgs& args) {
    const ibc::Scenario scenario = ibc::load_scenario(args.scenario_path);

    ibc::SweepSpec spec;
    spec.count = args.count;
    spec.p1_range = {args.p1_min, args.p1_max};
    spec.p2_range = {args.p2_min, args.p2_max};
    spec.seed = args.seed;
    spec.mode = ibc::controller_mode_from_string(args.controller);
    spec.sigma = args.sigma;
    spec.capacity_drop = args.capacity_drop == "on";
    spec.threads = args.threads;

    const auto rows = ibc::run_sweep(scenario, spec);

    if (args.output_path.empty()) {
        ibc::write_report(std::cout, rows);
    } else {
        std::ofstream out(args.output_path);
        if (!out) return fail("io", "cannot write report file: " + args.output_path, 2);
        ibc::write_report(out, rows);
        int failures = 0;
        for (const auto& r : rows) failures += r.failed ? 1 : 0;
        std::cout << rows.size() << " rows written to " << args.output_path << " (" << failures << " failed)\n";
    }
    return 0;
}

int cmd_summarize(const std::vector<std::string>& report_paths, const std::string& output_path) {
    std::vector<ibc::ExperimentRow> rows;
    for (const auto& path : report_paths) {
        auto part = ibc::read_report_file(path);
        rows.insert(rows.end(), part.begin(), part.end());
    }
    const std::string table = ibc::summarize(rows);
    if (output_path.empty()) {
        std::cout << table;
    } else {
        std::ofstream out(output_path);
        if (!out) return fail("io", "cannot write summary file: " + output_path, 2);
        out << table;
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Internal boundary control for bidirectional lane-free traffic"};
    app.require_subcommand(1);

    SimulateArgs sim;
    CLI::App* simulate = app.add_subcommand("simulate", "Run one open- or closed-loop experiment");
    simulate->add_option("--scenario", sim.scenario_path, "Scenario file")->required();
    simulate->add_option("--controller", sim.controller, "none | lq | lqi")->default_val("none");
    simulate->add_option("--p1", sim.p1, "Integrator weight exponent, or -inf")->default_val("-2.5");
    simulate->add_option("--p2", sim.p2, "Control weight exponent")->default_val(-3.0);
    simulate->add_option("--sigma", sim.sigma, "Convex combination parameter")->default_val(0.95);
    simulate->add_option("--capacity-drop", sim.capacity_drop, "on | off")->default_val("on");
    simulate->add_option("--activation-step", sim.activation_step, "Control step the regulator activates at")
        ->default_val(0);
    simulate->add_option("--trace", sim.trace_path, "Trace output path");
    simulate->add_option("--gains", sim.gains_path, "Reuse a gain file instead of designing");
    simulate->add_option("--report", sim.report_path, "Write the single-row report here");

    DesignArgs design;
    CLI::App* design_cmd = app.add_subcommand("design", "Design a gain set and write it out");
    design_cmd->add_option("--scenario", design.scenario_path, "Scenario file")->required();
    design_cmd->add_option("--p1", design.p1, "Integrator weight exponent, or -inf")->default_val("-2.5");
    design_cmd->add_option("--p2", design.p2, "Control weight exponent")->default_val(-3.0);
    design_cmd->add_option("--sigma", design.sigma, "Convex combination parameter")->default_val(0.95);
    design_cmd->add_option("--output", design.output_path, "Gain file path (stdout when omitted)");

    SweepArgs sweep;
    CLI::App* sweep_cmd = app.add_subcommand("sweep", "Randomized (p1,p2) robustness sweep");
    sweep_cmd->add_option("--scenario", sweep.scenario_path, "Scenario file")->required();
    sweep_cmd->add_option("--count", sweep.count, "Number of samples")->default_val(1000);
    sweep_cmd->add_option("--p1-min", sweep.p1_min)->default_val(-5.0);
    sweep_cmd->add_option("--p1-max", sweep.p1_max)->default_val(2.0);
    sweep_cmd->add_option("--p2-min", sweep.p2_min)->default_val(-5.0);
    sweep_cmd->add_option("--p2-max", sweep.p2_max)->default_val(2.0);
    sweep_cmd->add_option("--seed", sweep.seed, "Sampling seed")->default_val(0);
    sweep_cmd->add_option("--controller", sweep.controller, "lq | lqi")->default_val("lqi");
    sweep_cmd->add_option("--sigma", sweep.sigma)->default_val(0.95);
    sweep_cmd->add_option("--capacity-drop", sweep.capacity_drop, "on | off")->default_val("on");
    sweep_cmd->add_option("--threads", sweep.threads, "Worker threads (0 = hardware)")->default_val(0);
    sweep_cmd->add_option("--output", sweep.output_path, "Report path (stdout when omitted)");

    std::vector<std::string> report_paths;
    std::string summary_output;
    CLI::App* summarize_cmd = app.add_subcommand("summarize", "Merge reports into a TTS table");
    summarize_cmd->add_option("reports", report_paths, "Report files")->required()->expected(-1);
    summarize_cmd->add_option("--output", summary_output, "Table path (stdout when omitted)");

    CLI11_PARSE(app, argc, argv);

    try {
        if (simulate->parsed()) return cmd_simulate(sim);
        if (design_cmd->parsed()) return cmd_design(design);
        if (sweep_cmd->parsed()) return cmd_sweep(sweep);
        if (summarize_cmd->parsed()) return cmd_summarize(report_paths, summary_output);
    } catch (const ibc::ScenarioError& e) {
        return fail("scenario", e.what(), 2);
    } catch (const ibc::ModelError& e) {
        return fail("model", e.what(), 2);
    } catch (const ibc::DesignError& e) {
        return fail("design", e.what(), 3);
    } catch (const std::exception& e) {
        return fail("runtime", e.what(), 4);
    }
    return 0;
}
