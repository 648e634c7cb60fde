// streampca: command-line front end for the streaming PCA library.
//
// Subcommands:
//   run    drive a Monte-Carlo experiment and write the aggregate trace
//   plan   print the planner's view of a stream/budget pairing
//   bound  tabulate the expected-potential guarantee over iterations
//   synth  generate a synthetic dataset file with known ground truth
//
// Exit codes: 0 success, 1 configuration error, 2 data error, 3 numeric
// failure. Outputs are written to a temporary file and renamed into place.

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <ctime>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "spca/dataset_io.hpp"
#include "spca/harness.hpp"

namespace {

using nlohmann::json;
using namespace spca;

std::uint64_t fnv1a(const std::string& bytes) {
    std::uint64_t h = 14695981039346656037ULL;
    for (unsigned char ch : bytes) {
        h ^= ch;
        h *= 1099511628211ULL;
    }
    return h;
}

std::string hash_tag(const std::string& bytes) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "fnv1a:%016llx",
                  (unsigned long long)fnv1a(bytes));
    return buf;
}

std::string read_file_bytes(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw data_error("cannot open file: " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

void publish_file(const std::string& tmp, const std::string& path) {
    if (std::rename(tmp.c_str(), path.c_str()) != 0) {
        std::remove(tmp.c_str());
        throw data_error("cannot move output into place: " + path);
    }
}

void atomic_write_text(const std::string& path, const std::string& text) {
    const std::string tmp = path + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary);
        if (!out)
            throw data_error("cannot write file: " + tmp);
        out << text;
        if (!out)
            throw data_error("write failed: " + tmp);
    }
    publish_file(tmp, path);
}

std::string utc_now() {
    const std::time_t now = std::time(nullptr);
    std::tm tm{};
    gmtime_r(&now, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

const char* algo_name(Algo a) {
    return a == Algo::krasulina ? "krasulina" : "oja";
}

const char* variant_name(Variant v) {
    switch (v) {
    case Variant::single: return "single";
    case Variant::dk: return "dk";
    default: return "dmk";
    }
}

const char* dist_name(DistKind k) {
    return k == DistKind::gaussian ? "gaussian" : "bounded";
}

const char* format_name(int f) {
    switch (DataFormat(f)) {
    case DataFormat::csv: return "csv";
    case DataFormat::idx: return "idx";
    default: return "auto";
    }
}

Algo parse_algo(const std::string& s) {
    if (s == "krasulina")
        return Algo::krasulina;
    if (s == "oja")
        return Algo::oja;
    throw config_error("unknown algorithm: " + s);
}

Variant parse_variant(const std::string& s) {
    if (s == "single")
        return Variant::single;
    if (s == "dk")
        return Variant::dk;
    if (s == "dmk")
        return Variant::dmk;
    throw config_error("unknown variant: " + s);
}

DistKind parse_dist(const std::string& s) {
    if (s == "gaussian")
        return DistKind::gaussian;
    if (s == "bounded")
        return DistKind::bounded_uniform;
    throw config_error("unknown distribution: " + s);
}

int parse_format(const std::string& s) {
    if (s == "auto")
        return int(DataFormat::automatic);
    if (s == "csv")
        return int(DataFormat::csv);
    if (s == "idx")
        return int(DataFormat::idx);
    throw config_error("unknown dataset format: " + s);
}

long long to_ll(const std::string& key, const std::string& val) {
    try {
        std::size_t used = 0;
        const long long out = std::stoll(val, &used);
        if (used != val.size())
            throw std::invalid_argument(val);
        return out;
    } catch (const std::exception&) {
        throw config_error("bad integer for " + key + ": " + val);
    }
}

double to_d(const std::string& key, const std::string& val) {
    try {
        std::size_t used = 0;
        const double out = std::stod(val, &used);
        if (used != val.size())
            throw std::invalid_argument(val);
        return out;
    } catch (const std::exception&) {
        throw config_error("bad number for " + key + ": " + val);
    }
}

bool to_bool(const std::string& key, const std::string& val) {
    if (val == "1" || val == "true" || val == "yes")
        return true;
    if (val == "0" || val == "false" || val == "no")
        return false;
    throw config_error("bad boolean for " + key + ": " + val);
}

std::string trimmed(const std::string& s) {
    const auto a = s.find_first_not_of(" \t\r");
    if (a == std::string::npos)
        return "";
    const auto b = s.find_last_not_of(" \t\r");
    return s.substr(a, b - a + 1);
}

// Flat key=value text, '#' starts a comment, later keys win.
std::vector<std::pair<std::string, std::string>>
parse_flat_config(const std::string& path) {
    std::ifstream in(path);
    if (!in)
        throw data_error("cannot open config file: " + path);
    std::vector<std::pair<std::string, std::string>> entries;
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const auto hash = line.find('#');
        if (hash != std::string::npos)
            line.erase(hash);
        line = trimmed(line);
        if (line.empty())
            continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw config_error(path + ":" + std::to_string(lineno) +
                               ": expected key=value");
        entries.emplace_back(trimmed(line.substr(0, eq)),
                             trimmed(line.substr(eq + 1)));
    }
    return entries;
}

void apply_config_entry(ExperimentConfig& cfg, const std::string& key,
                        const std::string& val, bool& c_set) {
    if (key == "data") {
        cfg.data.from_file = !val.empty();
        cfg.data.path = val;
    } else if (key == "format") {
        cfg.data.format = parse_format(val);
    } else if (key == "center") {
        cfg.data.center = to_bool(key, val);
    } else if (key == "d") {
        cfg.data.synth.d = int(to_ll(key, val));
    } else if (key == "lambda1") {
        cfg.data.synth.lambda1 = to_d(key, val);
    } else if (key == "gap") {
        cfg.data.synth.eigengap = to_d(key, val);
    } else if (key == "dist") {
        cfg.data.synth.kind = parse_dist(val);
    } else if (key == "half_range") {
        cfg.data.synth.half_range = to_d(key, val);
    } else if (key == "algo") {
        cfg.algo = parse_algo(val);
    } else if (key == "variant") {
        cfg.variant = parse_variant(val);
    } else if (key == "minibatch") {
        cfg.minibatch = long(to_ll(key, val));
    } else if (key == "nodes") {
        cfg.nodes = int(to_ll(key, val));
    } else if (key == "local_batch") {
        cfg.local_batch = long(to_ll(key, val));
    } else if (key == "mu") {
        cfg.mu = long(to_ll(key, val));
    } else if (key == "mu_override") {
        cfg.mu_is_override = to_bool(key, val);
    } else if (key == "rate_samples" || key == "rate_proc" ||
               key == "rate_sums") {
        if (!cfg.rates)
            cfg.rates = RateModel{};
        const double r = to_d(key, val);
        if (key == "rate_samples")
            cfg.rates->samples_per_sec = r;
        else if (key == "rate_proc")
            cfg.rates->node_proc_per_sec = r;
        else
            cfg.rates->sums_per_sec = r;
    } else if (key == "step_c") {
        cfg.step_c = to_d(key, val);
        c_set = true;
    } else if (key == "step_L") {
        cfg.step_L = to_d(key, val);
    } else if (key == "samples") {
        cfg.total_samples = to_ll(key, val);
    } else if (key == "trials") {
        cfg.trials = int(to_ll(key, val));
    } else if (key == "seed") {
        cfg.seed = std::uint64_t(to_ll(key, val));
    } else if (key == "stride") {
        cfg.stride = long(to_ll(key, val));
    } else if (key == "points") {
        cfg.points = int(to_ll(key, val));
    } else if (key == "threads") {
        cfg.threads = int(to_ll(key, val));
    } else {
        throw config_error("unknown config key: " + key);
    }
}

// Experiment presets. Each sets a baseline configuration; step_c is refined
// afterwards from the preset's tuning table unless the user pinned it.
const std::vector<std::string> kPresetNames = {
    "fig1a", "fig1b", "eigengap", "dims", "normbound", "mnist", "higgs"};

void apply_preset(const std::string& name, ExperimentConfig& cfg) {
    cfg.total_samples = 1000000;
    cfg.trials = 200;
    if (name == "fig1a") {
        cfg.variant = Variant::single;
        cfg.minibatch = 100;
        cfg.step_c = 80.0;
    } else if (name == "fig1b") {
        cfg.variant = Variant::dmk;
        cfg.nodes = 10;
        cfg.local_batch = 10;
        cfg.mu = 0;
        cfg.step_c = 80.0;
    } else if (name == "eigengap") {
        cfg.variant = Variant::single;
        cfg.minibatch = 1000;
        cfg.step_c = 110.0;
    } else if (name == "dims") {
        cfg.variant = Variant::single;
        cfg.minibatch = 1000;
        cfg.step_c = 110.0;
    } else if (name == "normbound") {
        cfg.data.synth.kind = DistKind::bounded_uniform;
        cfg.data.synth.half_range = 1.0;
        cfg.variant = Variant::single;
        cfg.minibatch = 1;
        cfg.step_c = 8.0;
    } else if (name == "mnist") {
        cfg.data.from_file = true;
        cfg.data.path = "mnist.csv";
        cfg.total_samples = 60000;
        cfg.variant = Variant::single;
        cfg.minibatch = 100;
        cfg.step_c = 1.1;
    } else if (name == "higgs") {
        cfg.data.from_file = true;
        cfg.data.path = "higgs.csv";
        cfg.total_samples = 11000000;
        cfg.variant = Variant::single;
        cfg.minibatch = 100;
        cfg.step_c = 0.07;
    } else {
        throw config_error("unknown preset: " + name);
    }
}

std::optional<double> lookup(const std::map<double, double>& table,
                             double key) {
    const auto it = table.find(key);
    if (it == table.end())
        return std::nullopt;
    return it->second;
}

// Tuned step constants, keyed on the knob each preset varies.
std::optional<double> preset_step_c(const std::string& name,
                                    const ExperimentConfig& cfg) {
    if (name == "fig1a" || name == "mnist") {
        static const std::map<double, double> fig1a = {
            {1, 70}, {10, 80}, {100, 80}, {500, 90}, {1000, 110}, {2000, 100}};
        static const std::map<double, double> mnist = {
            {1, 0.6}, {10, 0.9}, {100, 1.1}, {300, 1.5}, {1000, 1.6}};
        return lookup(name == "fig1a" ? fig1a : mnist,
                      double(cfg.network_batch()));
    }
    if (name == "eigengap") {
        static const std::map<double, double> table = {
            {0.1, 180}, {0.2, 110}, {0.3, 90}, {0.4, 70}, {0.5, 60}};
        return lookup(table, cfg.data.synth.eigengap);
    }
    if (name == "dims") {
        static const std::map<double, double> table = {
            {5, 110}, {10, 110}, {15, 100}, {20, 100}};
        return lookup(table, double(cfg.data.synth.d));
    }
    if (name == "normbound") {
        static const std::map<double, double> table = {
            {1, 8}, {2, 2}, {3, 1}, {10, 0.08}};
        return lookup(table, cfg.data.synth.half_range);
    }
    return std::nullopt; // fig1b and higgs use one constant
}

json config_json(const ExperimentConfig& cfg) {
    json j;
    j["data"] = cfg.data.from_file ? cfg.data.path : "";
    j["format"] = format_name(cfg.data.format);
    j["center"] = cfg.data.center;
    j["d"] = cfg.data.synth.d;
    j["lambda1"] = cfg.data.synth.lambda1;
    j["gap"] = cfg.data.synth.eigengap;
    j["dist"] = dist_name(cfg.data.synth.kind);
    j["half_range"] = cfg.data.synth.half_range;
    j["algo"] = algo_name(cfg.algo);
    j["variant"] = variant_name(cfg.variant);
    j["minibatch"] = cfg.minibatch;
    j["nodes"] = cfg.nodes;
    j["local_batch"] = cfg.local_batch;
    j["mu"] = cfg.mu;
    j["mu_override"] = cfg.mu_is_override;
    if (cfg.rates) {
        j["rate_samples"] = cfg.rates->samples_per_sec;
        j["rate_proc"] = cfg.rates->node_proc_per_sec;
        j["rate_sums"] = cfg.rates->sums_per_sec;
    }
    j["step_c"] = cfg.step_c;
    j["step_L"] = cfg.step_L;
    j["samples"] = cfg.total_samples;
    j["trials"] = cfg.trials;
    j["seed"] = cfg.seed;
    j["stride"] = cfg.stride;
    j["points"] = cfg.points;
    j["threads"] = cfg.threads;
    return j;
}

struct RunArgs {
    std::string config_path;
    std::string preset;
    std::string out = "trace.csv";
    std::string algo, variant;
    std::uint64_t seed = 0;
    int trials = 0, nodes = 0, threads = 0;
    long long samples = 0;
    long minibatch = 0, local_batch = 0, mu = 0;
    double step_c = 0.0, step_L = 0.0;
    long long scale = 1;
};

int do_run(const RunArgs& a, const CLI::App& cmd) {
    ExperimentConfig cfg;
    bool c_set = false;
    if (!a.preset.empty())
        apply_preset(a.preset, cfg);
    if (!a.config_path.empty())
        for (const auto& [key, val] : parse_flat_config(a.config_path))
            apply_config_entry(cfg, key, val, c_set);

    std::vector<std::string> overrides;
    auto given = [&](const std::string& flag) {
        if (cmd.count(flag) == 0)
            return false;
        overrides.push_back(flag);
        return true;
    };
    if (given("--seed"))
        cfg.seed = a.seed;
    if (given("--trials"))
        cfg.trials = a.trials;
    if (given("--samples"))
        cfg.total_samples = a.samples;
    if (given("--minibatch"))
        cfg.minibatch = a.minibatch;
    if (given("--nodes"))
        cfg.nodes = a.nodes;
    if (given("--local-batch"))
        cfg.local_batch = a.local_batch;
    if (given("--mu")) {
        cfg.mu = a.mu;
        // An explicit discard count pins mu even when rates are configured.
        if (cfg.rates)
            cfg.mu_is_override = true;
    }
    if (given("--step-c")) {
        cfg.step_c = a.step_c;
        c_set = true;
    }
    if (given("--step-L"))
        cfg.step_L = a.step_L;
    if (given("--algo"))
        cfg.algo = parse_algo(a.algo);
    if (given("--variant"))
        cfg.variant = parse_variant(a.variant);
    if (given("--threads"))
        cfg.threads = a.threads;
    if (!a.preset.empty() && !c_set)
        if (const auto c = preset_step_c(a.preset, cfg))
            cfg.step_c = *c;
    if (a.scale < 1)
        throw config_error("--scale must be a positive divisor");
    if (a.scale > 1) {
        cfg.total_samples = std::max(1LL, cfg.total_samples / a.scale);
        overrides.push_back("--scale");
    }

    cfg.validate();
    const PreparedExperiment exp = prepare_experiment(cfg);
    const AggregateTrace trace = run_monte_carlo(exp);

    const std::string tmp = a.out + ".tmp";
    write_trace_csv(tmp, trace);
    const std::string trace_bytes = read_file_bytes(tmp);
    publish_file(tmp, a.out);

    json manifest;
    manifest["tool"] = "streampca";
    manifest["command"] = "run";
    manifest["created_utc"] = utc_now();
    manifest["preset"] = a.preset;
    manifest["config"] = config_json(cfg);
    manifest["overrides"] = overrides;
    std::string input_bytes = manifest["config"].dump();
    if (cfg.data.from_file)
        input_bytes += read_file_bytes(cfg.data.path);
    manifest["inputs_hash"] = hash_tag(input_bytes);
    std::vector<std::uint64_t> trial_seeds;
    for (int k = 0; k < std::min(cfg.trials, 8); ++k)
        trial_seeds.push_back(trial_seed(cfg.seed, k));
    manifest["trial_seeds_head"] = trial_seeds;
    manifest["resolved_mu"] = exp.mu;
    manifest["outputs"] = json::array(
        {{{"path", a.out}, {"kind", "trace_csv"}, {"hash", hash_tag(trace_bytes)}}});
    manifest["results"] = {
        {"points", trace.points.size()},
        {"trials", trace.trials},
        {"any_partial", trace.any_partial},
        {"final_mean_psi", trace.points.back().mean_psi},
        {"final_median_psi", trace.points.back().median_psi}};
    atomic_write_text(a.out + ".manifest.json", manifest.dump(2) + "\n");

    std::printf("ran %d trials over %lld arrivals, final mean psi %.6g\n",
                trace.trials, cfg.total_samples,
                trace.points.back().mean_psi);
    std::printf("wrote %s\n", a.out.c_str());
    std::printf("wrote %s.manifest.json\n", a.out.c_str());
    return 0;
}

struct PlanArgs {
    long long samples = 1000000;
    double c0 = 4.0;
    double gap = 0.2;
    int d = 5;
    double r = 1.0;
    double sigma2 = 1.0;
    double delta = 0.1;
    int nodes = 0;
    long long minibatch = 0;
    long long mu = 0;
};

int do_plan(const PlanArgs& a) {
    BoundParams p;
    p.d = a.d;
    p.r = a.r;
    p.sigma2_eff = a.sigma2;
    p.delta = a.delta;
    p.lambda1 = 1.0;
    p.eigengap = a.gap;

    const double c = a.c0 / (2.0 * a.gap);
    const LBound lb = l_lower_bound_main(p, c);
    const long long b_max = max_minibatch(a.samples, a.c0);
    const long long B =
        a.minibatch > 0 ? a.minibatch : (a.nodes > 0 ? a.nodes : 1);

    std::printf("plan for T=%lld arrivals\n", a.samples);
    std::printf("  step constant: c0=%g  c=%.17g  (gap %g)\n", a.c0, c, a.gap);
    std::printf("  largest near-optimal mini-batch: B_max=%lld\n", b_max);
    std::printf("  offset lower bound: L1=%.17g  L2=%.17g  L=%.17g\n", lb.L1,
                lb.L2, lb.L);

    const StepSchedule sched = StepSchedule::from_c0(a.c0, a.gap, lb.L);
    const BoundTerms single = theoretical_bound_terms(a.samples, p, sched);
    std::printf("  single-sample bound at t=T: bias=%.17g variance=%.17g "
                "total=%.17g\n",
                single.bias, single.variance, single.total);

    // L1' and L2' at their smallest admissible values.
    const double l2p = lb.L2 * double(B) / a.sigma2;
    const FiniteSampleTerms terms =
        finite_sample_bound_terms(a.samples, B, a.mu, p, a.c0, lb.L1, l2p);
    std::printf("  batched run B=%lld mu=%lld over %lld iterations:\n", B,
                a.mu, a.samples / (B + a.mu));
    std::printf("    constants: C1=%.17g  C2=%.17g\n", terms.C1, terms.C2);
    std::printf("    term1 (bias)      = %.17g\n", terms.bias);
    std::printf("    term2 (batching)  = %.17g\n", terms.noise);
    std::printf("    term3 (variance)  = %.17g\n", terms.tail);
    std::printf("    total             = %.17g\n", terms.total);
    if (B > b_max)
        std::printf("  note: B exceeds B_max, the near-optimal rate guarantee "
                    "does not apply\n");
    return 0;
}

struct BoundArgs {
    long long samples = 1000000;
    double c0 = 4.0;
    double gap = 0.2;
    int d = 5;
    double r = 1.0;
    double sigma2 = 1.0;
    double delta = 0.1;
    double step_L = 0.0;
    int points = 16;
    bool epochs = false;
    std::string out;
};

int do_bound(const BoundArgs& a) {
    BoundParams p;
    p.d = a.d;
    p.r = a.r;
    p.sigma2_eff = a.sigma2;
    p.delta = a.delta;
    p.lambda1 = 1.0;
    p.eigengap = a.gap;

    const double c = a.c0 / (2.0 * a.gap);
    double L = a.step_L;
    if (L <= 0.0)
        L = l_lower_bound_main(p, c).L;
    const StepSchedule sched = StepSchedule::from_c0(a.c0, a.gap, L);

    if (a.points < 2)
        throw config_error("need at least two evaluation points");
    std::printf("expected-potential bound, c0=%g c=%.6g L=%.6g sigma2=%g\n",
                a.c0, c, L, a.sigma2);
    std::printf("%14s %16s %16s %16s\n", "t", "bias", "variance", "total");
    std::string csv = "t,bias,variance,total\n";
    const double span = std::log(double(a.samples));
    long long last = 0;
    for (int k = 0; k < a.points; ++k) {
        const double frac = double(k) / double(a.points - 1);
        long long t = std::llround(std::exp(span * frac));
        if (t <= last)
            t = last + 1;
        last = t;
        const BoundTerms terms = theoretical_bound_terms(t, p, sched);
        std::printf("%14lld %16.6e %16.6e %16.6e\n", t, terms.bias,
                    terms.variance, terms.total);
        char row[128];
        std::snprintf(row, sizeof row, "%lld,%.17g,%.17g,%.17g\n", t,
                      terms.bias, terms.variance, terms.total);
        csv += row;
    }
    if (a.epochs) {
        const EpochSchedule ep = epoch_schedule(a.delta, a.d, a.c0, L);
        std::printf("epoch schedule (J=%d):\n", ep.J);
        for (std::size_t j = 0; j < ep.t.size(); ++j)
            std::printf("  epoch %2zu: t=%lld eps=%.6g\n", j, ep.t[j],
                        ep.eps[j]);
    }
    if (!a.out.empty())
        atomic_write_text(a.out, csv);
    return 0;
}

struct SynthArgs {
    int d = 5;
    double lambda1 = 1.0;
    double gap = 0.2;
    std::string dist = "gaussian";
    double half_range = 1.0;
    long long count = 1000;
    std::uint64_t seed = 1;
    std::string out = "synth.csv";
};

int do_synth(const SynthArgs& a) {
    if (a.count < 1)
        throw config_error("sample count must be positive");
    const CovarianceSpec spec =
        make_covariance(a.d, a.lambda1, a.gap, a.seed, parse_dist(a.dist),
                        a.half_range);
    std::mt19937_64 rng(a.seed);
    const SampleBatch data = sample_stream(spec, long(a.count), rng);

    const std::string tmp = a.out + ".tmp";
    save_csv(tmp, data);
    const std::string bytes = read_file_bytes(tmp);
    publish_file(tmp, a.out);

    json manifest;
    manifest["tool"] = "streampca";
    manifest["command"] = "synth";
    manifest["created_utc"] = utc_now();
    manifest["params"] = {{"d", a.d},
                          {"lambda1", a.lambda1},
                          {"gap", a.gap},
                          {"dist", a.dist},
                          {"half_range", a.half_range},
                          {"count", a.count},
                          {"seed", a.seed}};
    std::vector<double> spectrum(spec.eigenvalues.data(),
                                 spec.eigenvalues.data() + spec.d);
    std::vector<double> q(spec.basis.col(0).data(),
                          spec.basis.col(0).data() + spec.d);
    manifest["spectrum"] = spectrum;
    manifest["q_star"] = q;
    manifest["norm_bound"] =
        std::isfinite(spec.norm_bound()) ? json(spec.norm_bound()) : json();
    manifest["outputs"] = json::array(
        {{{"path", a.out}, {"kind", "dataset_csv"}, {"hash", hash_tag(bytes)}}});
    atomic_write_text(a.out + ".manifest.json", manifest.dump(2) + "\n");

    std::printf("wrote %s (%lld samples, d=%d)\n", a.out.c_str(), a.count,
                a.d);
    std::printf("wrote %s.manifest.json\n", a.out.c_str());
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"streaming PCA workbench: run experiments, plan schedules, "
                 "generate data"};
    app.require_subcommand(1);

    RunArgs run_args;
    CLI::App* run_cmd = app.add_subcommand(
        "run", "run a Monte-Carlo experiment and write its trace");
    run_cmd->add_option("--config", run_args.config_path,
                        "flat key=value config file");
    run_cmd->add_option("--preset", run_args.preset, "experiment preset")
        ->check(CLI::IsMember(kPresetNames));
    run_cmd->add_option("--seed", run_args.seed, "master seed");
    run_cmd->add_option("--trials", run_args.trials, "number of trials");
    run_cmd->add_option("--samples", run_args.samples,
                        "total arrivals T, discards included");
    run_cmd->add_option("--minibatch", run_args.minibatch,
                        "mini-batch size B (single variant)");
    run_cmd->add_option("--nodes", run_args.nodes, "node count N (dk, dmk)");
    run_cmd->add_option("--local-batch", run_args.local_batch,
                        "per-node batch b (dmk)");
    run_cmd->add_option("--mu", run_args.mu, "discards per iteration");
    run_cmd->add_option("--step-c", run_args.step_c, "step-size constant c");
    run_cmd->add_option("--step-L", run_args.step_L, "step-size offset L");
    run_cmd->add_option("--algo", run_args.algo, "krasulina or oja")
        ->check(CLI::IsMember({"krasulina", "oja"}));
    run_cmd->add_option("--variant", run_args.variant, "single, dk, or dmk")
        ->check(CLI::IsMember({"single", "dk", "dmk"}));
    run_cmd->add_option("--scale", run_args.scale,
                        "divide the preset's T for desk-scale runs");
    run_cmd->add_option("--out", run_args.out, "trace output path");
    run_cmd->add_option("--threads", run_args.threads, "worker cap");

    PlanArgs plan_args;
    CLI::App* plan_cmd = app.add_subcommand(
        "plan", "print schedule and error-bound figures for a setup");
    plan_cmd->add_option("--samples", plan_args.samples, "sample budget T");
    plan_cmd->add_option("--c0", plan_args.c0, "guarantee exponent c0 > 2");
    plan_cmd->add_option("--gap", plan_args.gap, "eigengap");
    plan_cmd->add_option("--dim", plan_args.d, "dimension d");
    plan_cmd->add_option("--norm-bound", plan_args.r, "sample norm bound r");
    plan_cmd->add_option("--sigma2", plan_args.sigma2,
                         "single-sample variance proxy");
    plan_cmd->add_option("--delta", plan_args.delta, "failure probability");
    plan_cmd->add_option("--nodes", plan_args.nodes, "node count N");
    plan_cmd->add_option("--minibatch", plan_args.minibatch,
                         "network-wide batch B");
    plan_cmd->add_option("--mu", plan_args.mu, "discards per iteration");

    BoundArgs bound_args;
    CLI::App* bound_cmd = app.add_subcommand(
        "bound", "tabulate the expected-potential bound over iterations");
    bound_cmd->add_option("--samples", bound_args.samples, "largest t");
    bound_cmd->add_option("--c0", bound_args.c0, "guarantee exponent c0 > 2");
    bound_cmd->add_option("--gap", bound_args.gap, "eigengap");
    bound_cmd->add_option("--dim", bound_args.d, "dimension d");
    bound_cmd->add_option("--norm-bound", bound_args.r, "sample norm bound r");
    bound_cmd->add_option("--sigma2", bound_args.sigma2, "variance proxy");
    bound_cmd->add_option("--delta", bound_args.delta, "failure probability");
    bound_cmd->add_option("--step-L", bound_args.step_L,
                          "offset L (default: its lower bound)");
    bound_cmd->add_option("--points", bound_args.points, "table rows");
    bound_cmd->add_flag("--epochs", bound_args.epochs,
                        "also print the epoch schedule");
    bound_cmd->add_option("--out", bound_args.out, "optional CSV output path");

    SynthArgs synth_args;
    CLI::App* synth_cmd = app.add_subcommand(
        "synth", "generate a synthetic dataset with known ground truth");
    synth_cmd->add_option("--dim", synth_args.d, "dimension d");
    synth_cmd->add_option("--lambda1", synth_args.lambda1,
                          "largest eigenvalue");
    synth_cmd->add_option("--gap", synth_args.gap, "eigengap");
    synth_cmd->add_option("--dist", synth_args.dist, "gaussian or bounded")
        ->check(CLI::IsMember({"gaussian", "bounded"}));
    synth_cmd->add_option("--half-range", synth_args.half_range,
                          "uniform half range a (bounded)");
    synth_cmd->add_option("--count", synth_args.count, "number of samples");
    synth_cmd->add_option("--seed", synth_args.seed, "generator seed");
    synth_cmd->add_option("--out", synth_args.out, "dataset output path");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        std::cerr << "streampca: " << e.what() << "\n";
        return 1;
    }

    try {
        if (run_cmd->parsed())
            return do_run(run_args, *run_cmd);
        if (plan_cmd->parsed())
            return do_plan(plan_args);
        if (bound_cmd->parsed())
            return do_bound(bound_args);
        if (synth_cmd->parsed())
            return do_synth(synth_args);
        return 1;
    } catch (const config_error& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 1;
    } catch (const data_error& e) {
        std::cerr << "data error: " << e.what() << "\n";
        return 2;
    } catch (const numeric_error& e) {
        std::cerr << "numeric error: " << e.what() << "\n";
        return 3;
    } catch (const std::exception& e) {
        std::cerr << "internal error: " << e.what() << "\n";
        return 3;
    }
}
