#ifndef SPCA_HARNESS_HPP
#define SPCA_HARNESS_HPP

// Monte-Carlo experiment driver. A trial streams T samples (everything that
// arrives at the system, discards included) through the configured variant
// and records the potential psi against samples received. Trials are fully
// reproducible: trial k derives its RNG from (master seed, k) alone, so
// results do not depend on scheduling or the number of worker threads.

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "spca/datagen.hpp"
#include "spca/estimator.hpp"
#include "spca/network.hpp"
#include "spca/schedule.hpp"

namespace spca {

enum class Variant { single, dk, dmk };

struct SyntheticSpec {
    int d = 5;
    double lambda1 = 1.0;
    double eigengap = 0.2;
    DistKind kind = DistKind::gaussian;
    double half_range = 1.0;
};

struct DataSpec {
    bool from_file = false;
    std::string path;
    int format = 0; // DataFormat as int to keep this header light
    bool center = false;
    SyntheticSpec synth;
};

struct ExperimentConfig {
    DataSpec data;
    Algo algo = Algo::krasulina;
    Variant variant = Variant::single;
    long minibatch = 1;    // B, single variant
    int nodes = 1;         // N, dk/dmk
    long local_batch = 1;  // b, dmk
    long mu = 0;
    std::optional<RateModel> rates; // when set, mu comes from classify_and_mu
    bool mu_is_override = false;    // with rates: forwarded as an override
    double step_c = 1.0;
    double step_L = 0.0;
    long long total_samples = 100000; // T, arrivals including discards
    int trials = 1;
    std::uint64_t seed = 1;
    long stride = 0;   // >0: record every stride-th iteration
    int points = 200;  // else: about this many log-spaced records
    int threads = 1;

    long network_batch() const;
    void validate() const;
};

// Everything trials share: the resolved config, the data or its generator
// spec, the ground truth, and the derived mu.
struct PreparedExperiment {
    ExperimentConfig cfg;
    std::optional<CovarianceSpec> spec; // synthetic runs
    MatrixXd data;                      // file runs
    GroundTruth truth;
    long mu = 0;
};

PreparedExperiment prepare_experiment(const ExperimentConfig& cfg);

struct TracePoint {
    long long iteration = 0;
    long long received = 0;
    long long processed = 0;
    long long discarded = 0;
    double psi = 0.0;
};

struct TraceRecord {
    int trial = 0;
    std::vector<TracePoint> points;
    bool partial = false; // stream/budget ran out mid-block at the end
};

// Deterministic function of (cfg.seed, trial_index).
std::uint64_t trial_seed(std::uint64_t master_seed, int trial_index);

TraceRecord run_trial(const PreparedExperiment& exp, int trial_index);

struct AggregatePoint {
    long long iteration = 0;
    long long received = 0;
    double mean_psi = 0.0;
    double median_psi = 0.0;
    double p10 = 0.0;
    double p90 = 0.0;
};

struct AggregateTrace {
    std::vector<AggregatePoint> points;
    int trials = 0;
    bool any_partial = false;
};

AggregateTrace aggregate(const std::vector<TraceRecord>& records);
AggregateTrace run_monte_carlo(const PreparedExperiment& exp);
AggregateTrace run_monte_carlo(const ExperimentConfig& cfg);

// Least-squares slope of log(mean psi) vs log(samples received) over the
// trailing window covering `window` decades of the abscissa. Needs at least
// ten usable points in the window.
double fit_loglog_slope(const AggregateTrace& trace, double window = 1.0);

struct BoundRow {
    long long iteration = 0;
    long long received = 0;
    double empirical = 0.0;
    double bound = 0.0;
    bool violated = false;
};

struct BoundReport {
    std::vector<BoundRow> rows;
    bool any_violation = false;
};

// Expected-potential bound evaluated at each recorded iteration next to the
// empirical mean.
BoundReport compare_bound(const AggregateTrace& trace, const BoundParams& p,
                          const StepSchedule& sched);

// Header: samples,mean_psi,median_psi,p10,p90
void write_trace_csv(const std::string& path, const AggregateTrace& trace);

// The log-spaced c values conventionally searched when tuning the step
// constant.
std::vector<double> default_c_grid();

} // namespace spca

#endif
