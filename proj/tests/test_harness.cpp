#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <string>
#include <vector>

#include "spca/dataset_io.hpp"
#include "spca/harness.hpp"

using namespace spca;

namespace {

ExperimentConfig small_cfg() {
    ExperimentConfig cfg;
    cfg.data.synth.d = 5;
    cfg.data.synth.lambda1 = 1.0;
    cfg.data.synth.eigengap = 0.2;
    cfg.total_samples = 3000;
    cfg.trials = 4;
    cfg.seed = 42;
    cfg.step_c = 10.0;
    cfg.points = 40;
    return cfg;
}

bool same_points(const std::vector<TracePoint>& a,
                 const std::vector<TracePoint>& b) {
    if (a.size() != b.size())
        return false;
    for (std::size_t i = 0; i < a.size(); ++i) {
        if (a[i].iteration != b[i].iteration || a[i].received != b[i].received ||
            a[i].processed != b[i].processed ||
            a[i].discarded != b[i].discarded || a[i].psi != b[i].psi)
            return false;
    }
    return true;
}

struct TempFile {
    std::string path;
    explicit TempFile(const std::string& name) : path("harness_tmp_" + name) {}
    ~TempFile() { std::remove(path.c_str()); }
};

} // namespace

TEST_CASE("trial seeds separate trials and masters") {
    CHECK(trial_seed(1, 0) == trial_seed(1, 0));
    CHECK(trial_seed(1, 0) != trial_seed(1, 1));
    CHECK(trial_seed(1, 0) != trial_seed(2, 0));
}

TEST_CASE("a trial is a pure function of config and index") {
    const PreparedExperiment exp = prepare_experiment(small_cfg());
    const TraceRecord a = run_trial(exp, 2);
    const TraceRecord b = run_trial(exp, 2);
    CHECK(same_points(a.points, b.points));
    CHECK(a.partial == b.partial);
    const TraceRecord c = run_trial(exp, 3);
    CHECK_FALSE(same_points(a.points, c.points));
}

TEST_CASE("trace starts at the initial potential and ends at the budget") {
    ExperimentConfig cfg = small_cfg();
    cfg.trials = 1;
    const PreparedExperiment exp = prepare_experiment(cfg);
    const TraceRecord rec = run_trial(exp, 0);
    REQUIRE(rec.points.size() >= 2);
    CHECK(rec.points.front().iteration == 0);
    CHECK(rec.points.front().received == 0);
    CHECK(rec.points.front().psi > 0.0);
    CHECK(rec.points.front().psi <= 1.0);
    CHECK(rec.points.back().received == cfg.total_samples);
    for (const auto& pt : rec.points)
        CHECK(pt.received == pt.processed + pt.discarded);
}

TEST_CASE("one node without batching equals the single-sample run bitwise") {
    ExperimentConfig single = small_cfg();
    single.variant = Variant::single;
    single.minibatch = 1;
    ExperimentConfig dk = small_cfg();
    dk.variant = Variant::dk;
    dk.nodes = 1;

    const TraceRecord a = run_trial(prepare_experiment(single), 0);
    const TraceRecord b = run_trial(prepare_experiment(dk), 0);
    CHECK(same_points(a.points, b.points));
}

TEST_CASE("batched variants agree with the centralized batch bitwise") {
    ExperimentConfig central = small_cfg();
    central.variant = Variant::single;
    central.minibatch = 10;
    ExperimentConfig dmk = small_cfg();
    dmk.variant = Variant::dmk;
    dmk.nodes = 2;
    dmk.local_batch = 5;

    const TraceRecord a = run_trial(prepare_experiment(central), 1);
    const TraceRecord b = run_trial(prepare_experiment(dmk), 1);
    CHECK(same_points(a.points, b.points));
}

TEST_CASE("aggregation does not depend on the worker count") {
    ExperimentConfig one = small_cfg();
    one.trials = 6;
    one.threads = 1;
    ExperimentConfig four = one;
    four.threads = 4;

    const AggregateTrace a = run_monte_carlo(one);
    const AggregateTrace b = run_monte_carlo(four);
    REQUIRE(a.points.size() == b.points.size());
    for (std::size_t i = 0; i < a.points.size(); ++i) {
        CHECK(a.points[i].iteration == b.points[i].iteration);
        CHECK(a.points[i].mean_psi == b.points[i].mean_psi);
        CHECK(a.points[i].median_psi == b.points[i].median_psi);
        CHECK(a.points[i].p10 == b.points[i].p10);
        CHECK(a.points[i].p90 == b.points[i].p90);
    }
}

TEST_CASE("discard accounting flows into the trace") {
    ExperimentConfig cfg = small_cfg();
    cfg.variant = Variant::dmk;
    cfg.nodes = 2;
    cfg.local_batch = 5;
    cfg.mu = 20;
    cfg.trials = 1;
    // 100 iterations of 10 processed + 20 discarded arrivals.
    const PreparedExperiment exp = prepare_experiment(cfg);
    CHECK(exp.mu == 20);
    const TraceRecord rec = run_trial(exp, 0);
    CHECK_FALSE(rec.partial);
    const TracePoint last = rec.points.back();
    CHECK(last.iteration == 100);
    CHECK(last.received == 3000);
    CHECK(last.processed == 1000);
    CHECK(last.discarded == 2000);
}

TEST_CASE("a trailing part too small to process marks the trace partial") {
    ExperimentConfig cfg = small_cfg();
    cfg.variant = Variant::single;
    cfg.minibatch = 7;
    cfg.total_samples = 400;
    cfg.trials = 2;
    const AggregateTrace agg = run_monte_carlo(cfg);
    CHECK(agg.any_partial);
    CHECK(agg.points.back().received == 400);

    cfg.total_samples = 399; // 57 exact blocks
    const AggregateTrace exact = run_monte_carlo(cfg);
    CHECK_FALSE(exact.any_partial);
    CHECK(exact.points.back().received == 399);
}

TEST_CASE("single-trial aggregates collapse to the trial itself") {
    ExperimentConfig cfg = small_cfg();
    cfg.trials = 1;
    const PreparedExperiment exp = prepare_experiment(cfg);
    const TraceRecord rec = run_trial(exp, 0);
    const AggregateTrace agg = run_monte_carlo(exp);
    REQUIRE(agg.points.size() == rec.points.size());
    for (std::size_t i = 0; i < agg.points.size(); ++i) {
        CHECK(agg.points[i].mean_psi == rec.points[i].psi);
        CHECK(agg.points[i].median_psi == rec.points[i].psi);
        CHECK(agg.points[i].p10 == rec.points[i].psi);
        CHECK(agg.points[i].p90 == rec.points[i].psi);
    }
}

TEST_CASE("aggregate percentiles interpolate between order statistics") {
    TraceRecord base;
    base.points.push_back({0, 0, 0, 0, 0.0});
    std::vector<TraceRecord> records(4, base);
    records[0].points[0].psi = 0.3;
    records[1].points[0].psi = 0.1;
    records[2].points[0].psi = 0.4;
    records[3].points[0].psi = 0.2;
    const AggregateTrace agg = aggregate(records);
    CHECK(agg.points[0].mean_psi == doctest::Approx(0.25).epsilon(1e-12));
    CHECK(agg.points[0].median_psi == doctest::Approx(0.25).epsilon(1e-12));
    CHECK(agg.points[0].p10 == doctest::Approx(0.13).epsilon(1e-12));
    CHECK(agg.points[0].p90 == doctest::Approx(0.37).epsilon(1e-12));

    CHECK_THROWS_AS(aggregate({}), config_error);
    std::vector<TraceRecord> ragged(2, base);
    ragged[1].points.push_back({1, 10, 10, 0, 0.5});
    CHECK_THROWS_AS(aggregate(ragged), config_error);
}

TEST_CASE("initial potential matches the uniform-direction mean") {
    ExperimentConfig cfg = small_cfg();
    cfg.total_samples = 50;
    cfg.points = 2;
    const PreparedExperiment exp = prepare_experiment(cfg);
    const int n = 64;
    double mean = 0.0, sq = 0.0;
    for (int k = 0; k < n; ++k) {
        const double p0 = run_trial(exp, k).points.front().psi;
        mean += p0;
        sq += p0 * p0;
    }
    mean /= n;
    const double se = std::sqrt((sq / n - mean * mean) / n);
    CHECK(mean <= 1.0 - 1.0 / 5.0 + 3.0 * se);
    CHECK(mean >= 1.0 - 1.0 / 5.0 - 3.0 * se);
}

TEST_CASE("monte-carlo error shrinks with the trial count") {
    // Standard error of the final mean should roughly halve from 8 to 32
    // trials; check the across-master-seed spread within a factor of two.
    auto spread = [](int trials) {
        std::vector<double> finals;
        for (std::uint64_t seed = 1; seed <= 12; ++seed) {
            ExperimentConfig cfg = small_cfg();
            cfg.total_samples = 1500;
            cfg.trials = trials;
            cfg.seed = seed;
            cfg.points = 10;
            finals.push_back(run_monte_carlo(cfg).points.back().mean_psi);
        }
        double m = 0.0;
        for (double v : finals)
            m += v;
        m /= double(finals.size());
        double s = 0.0;
        for (double v : finals)
            s += (v - m) * (v - m);
        return std::sqrt(s / double(finals.size() - 1));
    };
    const double sd8 = spread(8);
    const double sd32 = spread(32);
    CHECK(sd8 / sd32 >= 1.0);
    CHECK(sd8 / sd32 <= 4.0);
}

TEST_CASE("log-log slope recovers power laws") {
    AggregateTrace trace;
    trace.trials = 1;
    for (int k = 0; k <= 40; ++k) {
        AggregatePoint pt;
        pt.iteration = k + 1;
        pt.received = (long long)std::llround(std::pow(10.0, double(k) / 10.0));
        pt.mean_psi = 1000.0 / double(pt.received);
        trace.points.push_back(pt);
    }
    CHECK(fit_loglog_slope(trace, 1.0) == doctest::Approx(-1.0).epsilon(1e-6));
    CHECK(fit_loglog_slope(trace, 4.0) == doctest::Approx(-1.0).epsilon(1e-6));

    // Only the trailing window participates in the fit.
    AggregateTrace bent = trace;
    for (auto& pt : bent.points)
        if (pt.received < 1000)
            pt.mean_psi = 1.0;
    CHECK(fit_loglog_slope(bent, 1.0) == doctest::Approx(-1.0).epsilon(1e-6));

    AggregateTrace flat = trace;
    for (auto& pt : flat.points)
        pt.mean_psi = 0.25;
    CHECK(fit_loglog_slope(flat, 2.0) == doctest::Approx(0.0).epsilon(1e-12));

    AggregateTrace few;
    few.trials = 1;
    for (int k = 0; k < 5; ++k) {
        AggregatePoint pt;
        pt.received = 10 * (k + 1);
        pt.mean_psi = 0.5;
        few.points.push_back(pt);
    }
    CHECK_THROWS_AS(fit_loglog_slope(few, 1.0), insufficient_points_error);
    CHECK_THROWS_AS(fit_loglog_slope(trace, 0.0), config_error);

    AggregateTrace dead = trace;
    for (auto& pt : dead.points)
        pt.mean_psi = 0.0;
    CHECK_THROWS_AS(fit_loglog_slope(dead, 1.0), insufficient_points_error);
}

TEST_CASE("bound comparison flags points above the curve") {
    BoundParams p;
    p.d = 5;
    p.delta = 0.1;
    p.lambda1 = 1.0;
    p.sigma2_eff = 1.0;
    p.eigengap = 0.2;
    const StepSchedule sched = StepSchedule::from_c0(4.0, 0.2, 50000.0);

    AggregateTrace trace;
    trace.trials = 1;
    AggregatePoint lo;
    lo.iteration = 10;
    lo.received = 10;
    lo.mean_psi = 0.5;
    trace.points.push_back(lo);
    const BoundReport ok = compare_bound(trace, p, sched);
    REQUIRE(ok.rows.size() == 1);
    CHECK_FALSE(ok.rows[0].violated);
    CHECK_FALSE(ok.any_violation);
    CHECK(ok.rows[0].bound == theoretical_bound(10, p, sched));

    AggregatePoint hi = lo;
    hi.mean_psi = ok.rows[0].bound * 2.0;
    trace.points.push_back(hi);
    const BoundReport bad = compare_bound(trace, p, sched);
    CHECK(bad.rows[1].violated);
    CHECK(bad.any_violation);
}

TEST_CASE("empirical traces stay under the guarantee with a theory-size L") {
    ExperimentConfig cfg = small_cfg();
    cfg.trials = 8;
    cfg.total_samples = 4000;

    BoundParams p;
    p.d = 5;
    p.r = 1.0;
    p.delta = 0.1;
    p.lambda1 = 1.0;
    p.eigengap = 0.2;
    p.sigma2_eff = 14.1; // gaussian closed form for this spectrum
    const double c = 4.0 / (2.0 * 0.2);
    const LBound lb = l_lower_bound_main(p, c);
    cfg.step_c = c;
    cfg.step_L = lb.L;
    const StepSchedule sched = StepSchedule::from_c0(4.0, 0.2, lb.L);

    const AggregateTrace trace = run_monte_carlo(cfg);
    const BoundReport report = compare_bound(trace, p, sched);
    CHECK_FALSE(report.any_violation);
}

TEST_CASE("trace csv round-trips through the dataset loader") {
    ExperimentConfig cfg = small_cfg();
    cfg.trials = 3;
    const AggregateTrace trace = run_monte_carlo(cfg);
    TempFile f("trace.csv");
    write_trace_csv(f.path, trace);

    const MatrixXd back = load_csv(f.path); // header auto-detected
    REQUIRE(back.rows() == 5);
    REQUIRE(back.cols() == long(trace.points.size()));
    for (std::size_t i = 0; i < trace.points.size(); ++i) {
        CHECK(back(0, long(i)) == double(trace.points[i].received));
        CHECK(back(1, long(i)) == trace.points[i].mean_psi);
        CHECK(back(2, long(i)) == trace.points[i].median_psi);
        CHECK(back(3, long(i)) == trace.points[i].p10);
        CHECK(back(4, long(i)) == trace.points[i].p90);
    }
}

TEST_CASE("file-backed experiments stream a shuffled dataset") {
    const CovarianceSpec spec = make_covariance(4, 1.0, 0.3, 5);
    std::mt19937_64 rng(6);
    const SampleBatch data = sample_stream(spec, 500, rng);
    TempFile f("data.csv");
    save_csv(f.path, data);

    ExperimentConfig cfg;
    cfg.data.from_file = true;
    cfg.data.path = f.path;
    cfg.total_samples = 400;
    cfg.trials = 2;
    cfg.seed = 9;
    cfg.step_c = 5.0;
    cfg.points = 20;

    const PreparedExperiment exp = prepare_experiment(cfg);
    CHECK(exp.truth.lambda1 > exp.truth.lambda2);
    CHECK(potential(exp.truth.q_star, spec.q_star()) <= 0.2);

    const TraceRecord a = run_trial(exp, 0);
    const TraceRecord b = run_trial(exp, 0);
    CHECK(same_points(a.points, b.points));
    CHECK(a.points.back().received == 400);

    cfg.total_samples = 600;
    CHECK_THROWS_AS(prepare_experiment(cfg), config_error);
}

TEST_CASE("rate model resolves the discard count during preparation") {
    ExperimentConfig cfg = small_cfg();
    cfg.variant = Variant::dmk;
    cfg.nodes = 2;
    cfg.local_batch = 10;
    cfg.rates = RateModel{100.0, 20.0, 100.0};
    const PreparedExperiment exp = prepare_experiment(cfg);
    CHECK(exp.mu == 31);

    cfg.mu_is_override = true;
    cfg.mu = 7;
    CHECK(prepare_experiment(cfg).mu == 7);

    cfg.mu_is_override = false;
    cfg.nodes = 6;
    cfg.mu = 0;
    CHECK(prepare_experiment(cfg).mu == 0);
}

TEST_CASE("network batch per variant") {
    ExperimentConfig cfg = small_cfg();
    cfg.minibatch = 9;
    cfg.nodes = 3;
    cfg.local_batch = 4;
    cfg.variant = Variant::single;
    CHECK(cfg.network_batch() == 9);
    cfg.variant = Variant::dk;
    CHECK(cfg.network_batch() == 3);
    cfg.variant = Variant::dmk;
    CHECK(cfg.network_batch() == 12);
}

TEST_CASE("config validation") {
    ExperimentConfig cfg = small_cfg();
    cfg.trials = 0;
    CHECK_THROWS_AS(cfg.validate(), config_error);
    cfg = small_cfg();
    cfg.total_samples = 0;
    CHECK_THROWS_AS(cfg.validate(), config_error);
    cfg = small_cfg();
    cfg.step_c = 0.0;
    CHECK_THROWS_AS(cfg.validate(), config_error);
    cfg = small_cfg();
    cfg.mu = -2;
    CHECK_THROWS_AS(cfg.validate(), config_error);
    cfg = small_cfg();
    cfg.data.synth.d = 1;
    CHECK_THROWS_AS(cfg.validate(), invalid_dimension_error);
    cfg = small_cfg();
    cfg.points = 1;
    CHECK_THROWS_AS(cfg.validate(), config_error);
    cfg.stride = 5;
    cfg.validate(); // a stride makes the point count irrelevant

    // Budget smaller than one block is caught at preparation.
    cfg = small_cfg();
    cfg.minibatch = 100;
    cfg.mu = 5000;
    CHECK_THROWS_AS(prepare_experiment(cfg), config_error);
}

TEST_CASE("stride recording hits every k-th iteration") {
    ExperimentConfig cfg = small_cfg();
    cfg.trials = 1;
    cfg.minibatch = 10;
    cfg.total_samples = 1000;
    cfg.stride = 25;
    const TraceRecord rec = run_trial(prepare_experiment(cfg), 0);
    REQUIRE(rec.points.size() == 5); // t = 0, 25, 50, 75, 100
    for (std::size_t i = 1; i < rec.points.size(); ++i)
        CHECK(rec.points[i].iteration == (long long)(25 * i));
}

TEST_CASE("the default step-constant grid spans the usual decades") {
    const std::vector<double> grid = default_c_grid();
    const std::vector<double> want = {0.01, 0.02, 0.05, 0.1, 0.2, 0.5, 1.0,
                                      2.0,  5.0,  10.0, 20.0, 50.0, 100.0,
                                      200.0};
    REQUIRE(grid.size() == want.size());
    for (std::size_t i = 0; i < want.size(); ++i)
        CHECK(grid[i] == want[i]);
}

TEST_CASE("synthetic preparation exposes the exact ground truth") {
    const PreparedExperiment exp = prepare_experiment(small_cfg());
    REQUIRE(exp.spec.has_value());
    CHECK((exp.truth.q_star - exp.spec->q_star()).norm() == 0.0);
    CHECK(exp.truth.lambda1 == 1.0);
    CHECK(exp.truth.lambda2 == doctest::Approx(0.8).epsilon(1e-15));
    CHECK(std::isnan(exp.truth.sigma2));
}
