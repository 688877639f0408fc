#include "ibc/experiments.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <fstream>
#include <map>
#include <mutex>
#include <sstream>
#include <thread>

namespace ibc {

std::string to_string(ControllerMode mode) {
    switch (mode) {
        case ControllerMode::none: return "none";
        case ControllerMode::lq: return "lq";
        case ControllerMode::lqi: return "lqi";
    }
    return "none";
}

ControllerMode controller_mode_from_string(const std::string& name) {
    if (name == "none") return ControllerMode::none;
    if (name == "lq") return ControllerMode::lq;
    if (name == "lqi") return ControllerMode::lqi;
    throw ScenarioError("unknown controller mode: " + name);
}

namespace {

// Designed gains keyed by everything the design depends on, so repeated
// runs over the same scenario reuse the Riccati solve.
class GainCache {
public:
    GainSet get(const Scenario& sc, double sigma, const WeightConfig& weights) {
        std::ostringstream key;
        key.precision(17);
        key << sc.name << '|' << sc.section_count() << '|' << sigma << '|' << weights.p2 << '|';
        if (weights.p1.has_value()) key << *weights.p1;
        key << '|' << sc.design.eps << '|' << sc.design.rel_density << '|' << sc.design.mainstream_a << '|'
            << sc.design.mainstream_b;
        for (double v : sc.design.onramp_a) key << ',' << v;
        for (double v : sc.design.onramp_b) key << ',' << v;
        for (double v : sc.lengths) key << ',' << v;

        {
            std::lock_guard lock(mutex_);
            auto it = cache_.find(key.str());
            if (it != cache_.end()) return it->second;
        }
        GainSet gains = design_gains(sc, sigma, weights);
        std::lock_guard lock(mutex_);
        return cache_.emplace(key.str(), std::move(gains)).first->second;
    }

private:
    std::mutex mutex_;
    std::map<std::string, GainSet> cache_;
};

GainCache& gain_cache() {
    static GainCache cache;
    return cache;
}

double no_control_tts(const Scenario& sc) {
    const SimulationTrace trace = run_open_loop(sc, constant_schedule(sc, sc.design.eps));
    return trace.total_time_spent;
}

// Portable uint64 -> [0,1) mapping; the standard distributions are not
// bit-stable across implementations.
double unit_double(std::uint64_t bits) {
    return static_cast<double>(bits >> 11) * 0x1.0p-53;
}

// splitmix64; fixed algorithm keeps the sample set a pure function of the seed.
std::uint64_t splitmix64(std::uint64_t& state) {
    state += 0x9e3779b97f4a7c15ULL;
    std::uint64_t z = state;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

}  // namespace

ExperimentResult run_experiment(const Scenario& base, const ExperimentConfig& cfg) {
    const Scenario sc = base.with_capacity_drop(cfg.capacity_drop);

    ExperimentResult result;
    ExperimentRow& row = result.row;
    row.scenario = sc.name;
    row.mode = cfg.mode;
    row.capacity_drop = cfg.capacity_drop;
    row.sigma = cfg.sigma;
    row.p1 = cfg.mode == ControllerMode::lq ? std::nullopt : cfg.weights.p1;
    row.p2 = cfg.weights.p2;
    row.activation_step = cfg.activation_step;

    row.baseline_tts = cfg.baseline_tts.value_or(0.0);
    try {
        if (!cfg.baseline_tts.has_value()) row.baseline_tts = no_control_tts(sc);

        if (cfg.mode == ControllerMode::none) {
            result.trace = run_open_loop(sc, constant_schedule(sc, sc.design.eps));
        } else {
            WeightConfig weights = cfg.weights;
            if (cfg.mode == ControllerMode::lq) weights.p1.reset();
            const GainSet gains = gain_cache().get(sc, cfg.sigma, weights);
            result.trace = run_closed_loop(sc, gains, cfg.activation_step);
        }
        row.tts = result.trace.total_time_spent;
        row.improvement_pct = 100.0 * (row.baseline_tts - row.tts) / row.baseline_tts;
        row.saturation_count = result.trace.saturation_count;
        row.max_rel_density = max_relative_density(sc, result.trace);
    } catch (const std::exception& e) {
        row.failed = true;
        row.error = e.what();
    }
    return result;
}

std::vector<std::pair<double, double>> sweep_samples(const SweepSpec& spec) {
    std::vector<std::pair<double, double>> samples;
    samples.reserve(static_cast<std::size_t>(spec.count));
    std::uint64_t state = spec.seed;
    for (int i = 0; i < spec.count; ++i) {
        const double u1 = unit_double(splitmix64(state));
        const double u2 = unit_double(splitmix64(state));
        samples.emplace_back(spec.p1_range.first + u1 * (spec.p1_range.second - spec.p1_range.first),
                             spec.p2_range.first + u2 * (spec.p2_range.second - spec.p2_range.first));
    }
    return samples;
}

std::vector<ExperimentRow> run_sweep(const Scenario& base, const SweepSpec& spec) {
    if (spec.count < 1) throw ScenarioError("sweep count must be >= 1");
    if (spec.p1_range.first >= spec.p1_range.second || spec.p2_range.first >= spec.p2_range.second) {
        throw ScenarioError("sweep ranges must be non-degenerate");
    }

    const Scenario sc = base.with_capacity_drop(spec.capacity_drop);
    const double baseline = no_control_tts(sc);
    const auto samples = sweep_samples(spec);

    std::vector<ExperimentRow> rows(samples.size());
    std::atomic<std::size_t> next{0};
    const auto worker = [&] {
        for (;;) {
            const std::size_t i = next.fetch_add(1);
            if (i >= samples.size()) return;
            ExperimentConfig cfg;
            cfg.mode = spec.mode;
            cfg.weights.p1 = samples[i].first;
            cfg.weights.p2 = samples[i].second;
            cfg.sigma = spec.sigma;
            cfg.capacity_drop = spec.capacity_drop;
            cfg.baseline_tts = baseline;
            rows[i] = run_experiment(base, cfg).row;
        }
    };

    unsigned thread_count = spec.threads > 0 ? static_cast<unsigned>(spec.threads)
                                             : std::max(1u, std::thread::hardware_concurrency());
    thread_count = std::min<unsigned>(thread_count, static_cast<unsigned>(samples.size()));
    if (thread_count <= 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        pool.reserve(thread_count);
        for (unsigned t = 0; t < thread_count; ++t) pool.emplace_back(worker);
        for (auto& th : pool) th.join();
    }
    return rows;
}

namespace {

std::string field(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

std::vector<std::string> split_line(const std::string& line) {
    std::vector<std::string> out;
    std::string cur;
    for (char c : line) {
        if (c == ',') {
            out.push_back(cur);
            cur.clear();
        } else {
            cur.push_back(c);
        }
    }
    out.push_back(cur);
    return out;
}

constexpr const char* kReportHeader =
    "scenario,mode,capacity_drop,sigma,p1,p2,activation_step,tts,baseline_tts,improvement_pct,"
    "saturation_count,max_rel_density,status,error";

}  // namespace

void write_report(std::ostream& out, const std::vector<ExperimentRow>& rows) {
    out << kReportHeader << '\n';
    for (const ExperimentRow& r : rows) {
        out << r.scenario << ',' << to_string(r.mode) << ',' << (r.capacity_drop ? 1 : 0) << ',' << field(r.sigma)
            << ',' << (r.p1.has_value() ? field(*r.p1) : std::string("-inf")) << ',' << field(r.p2) << ','
            << r.activation_step << ',' << field(r.tts) << ',' << field(r.baseline_tts) << ','
            << field(r.improvement_pct) << ',' << r.saturation_count << ',' << field(r.max_rel_density) << ','
            << (r.failed ? "failed" : "ok") << ',' << r.error << '\n';
    }
}

std::vector<ExperimentRow> read_report(std::istream& in) {
    std::vector<ExperimentRow> rows;
    std::string line;
    if (!std::getline(in, line) || line != kReportHeader) {
        throw ScenarioError("report: missing or unrecognized header line");
    }
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        const auto f = split_line(line);
        if (f.size() < 14) throw ScenarioError("report: malformed row: " + line);
        ExperimentRow r;
        r.scenario = f[0];
        r.mode = controller_mode_from_string(f[1]);
        r.capacity_drop = f[2] == "1";
        r.sigma = std::stod(f[3]);
        if (f[4] != "-inf") r.p1 = std::stod(f[4]);
        r.p2 = std::stod(f[5]);
        r.activation_step = std::stoi(f[6]);
        r.tts = std::stod(f[7]);
        r.baseline_tts = std::stod(f[8]);
        r.improvement_pct = std::stod(f[9]);
        r.saturation_count = std::stoi(f[10]);
        r.max_rel_density = std::stod(f[11]);
        r.failed = f[12] == "failed";
        r.error = f[13];
        rows.push_back(std::move(r));
    }
    return rows;
}

std::vector<ExperimentRow> read_report_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ScenarioError("cannot open report file: " + path);
    return read_report(in);
}

std::string summarize(const std::vector<ExperimentRow>& rows) {
    std::ostringstream out;
    out << "scenario,capacity_drop,controller,p1,p2,tts_vehh,improvement_pct\n";

    // Group by (scenario, drop flag), keep the no-control baseline first.
    std::map<std::pair<std::string, bool>, std::vector<const ExperimentRow*>> groups;
    for (const ExperimentRow& r : rows) groups[{r.scenario, r.capacity_drop}].push_back(&r);

    char buf[64];
    const auto num = [&buf](double v) {
        std::snprintf(buf, sizeof buf, "%.4f", v);
        return std::string(buf);
    };
    for (const auto& [key, group] : groups) {
        std::vector<const ExperimentRow*> sorted(group);
        std::stable_sort(sorted.begin(), sorted.end(), [](const ExperimentRow* a, const ExperimentRow* b) {
            return static_cast<int>(a->mode) < static_cast<int>(b->mode);
        });
        for (const ExperimentRow* r : sorted) {
            out << key.first << ',' << (key.second ? "on" : "off") << ',' << to_string(r->mode) << ','
                << (r->p1.has_value() ? num(*r->p1) : std::string("-inf")) << ',' << num(r->p2) << ',';
            if (r->failed) {
                out << "failed,failed\n";
            } else {
                // Improvement recomputed from the stored TTS values.
                const double improvement =
                    r->mode == ControllerMode::none ? 0.0 : 100.0 * (r->baseline_tts - r->tts) / r->baseline_tts;
                out << num(r->tts) << ',' << num(improvement) << '\n';
            }
        }
    }
    return out.str();
}

}  // namespace ibc
