#include "spca/harness.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <mutex>
#include <thread>

#include "spca/dataset_io.hpp"

namespace spca {

long ExperimentConfig::network_batch() const {
    switch (variant) {
    case Variant::single:
        return minibatch;
    case Variant::dk:
        return long(nodes);
    case Variant::dmk:
        return long(nodes) * local_batch;
    }
    return minibatch;
}

void ExperimentConfig::validate() const {
    if (trials < 1)
        throw config_error("need at least one trial");
    if (total_samples < 1)
        throw config_error("sample budget T must be positive");
    if (threads < 1)
        throw config_error("thread count must be positive");
    if (points < 2 && stride <= 0)
        throw config_error("need at least two trace points");
    if (!(step_c > 0.0))
        throw config_error("step constant c must be positive");
    if (step_L < 0.0)
        throw config_error("step offset L must be nonnegative");
    if (variant == Variant::single && minibatch < 1)
        throw config_error("mini-batch size B must be positive");
    if (variant != Variant::single && nodes < 1)
        throw config_error("node count N must be positive");
    if (variant == Variant::dmk && local_batch < 1)
        throw config_error("local batch b must be positive");
    if (mu < 0)
        throw config_error("discard count mu must be nonnegative");
    if (!data.from_file) {
        if (data.synth.d < 2)
            throw invalid_dimension_error("dimension must be at least 2");
    }
}

std::uint64_t trial_seed(std::uint64_t master_seed, int trial_index) {
    // splitmix64 of the master seed offset by the trial index.
    std::uint64_t z = master_seed + 0x9e3779b97f4a7c15ull * (std::uint64_t(trial_index) + 1);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
}

PreparedExperiment prepare_experiment(const ExperimentConfig& cfg) {
    cfg.validate();
    PreparedExperiment exp;
    exp.cfg = cfg;

    if (cfg.data.from_file) {
        exp.data = load_dataset(cfg.data.path, DataFormat(cfg.data.format));
        if (cfg.data.center)
            center_dataset(exp.data);
        if (exp.data.rows() < 2)
            throw invalid_dimension_error("dataset dimension must be at least 2");
        if (cfg.total_samples > exp.data.cols())
            throw config_error("sample budget T exceeds the dataset size");
        exp.truth = batch_top_eigenvector(exp.data);
    } else {
        exp.spec = make_covariance(cfg.data.synth.d, cfg.data.synth.lambda1,
                                   cfg.data.synth.eigengap, cfg.seed,
                                   cfg.data.synth.kind,
                                   cfg.data.synth.half_range);
        exp.truth = ground_truth_of(*exp.spec);
    }

    if (cfg.rates) {
        SystemModel model;
        model.nodes = cfg.variant == Variant::single ? 1 : cfg.nodes;
        model.local_batch =
            cfg.variant == Variant::dmk ? cfg.local_batch
            : cfg.variant == Variant::dk ? 1
                                         : cfg.minibatch;
        model.rates = *cfg.rates;
        if (cfg.mu_is_override)
            model.mu_override = cfg.mu;
        exp.mu = classify_and_mu(model).second;
    } else {
        exp.mu = cfg.mu;
    }

    const long long block = exp.cfg.network_batch() + exp.mu;
    if (exp.cfg.total_samples < block)
        throw config_error("sample budget T is smaller than one B + mu block");
    return exp;
}

namespace {

std::vector<long long> recorded_iterations(long long total_iters, long stride,
                                           int points) {
    std::vector<long long> marks;
    if (total_iters < 1)
        return marks;
    if (stride > 0) {
        for (long long t = stride; t <= total_iters; t += stride)
            marks.push_back(t);
    } else {
        const double span = std::log(double(total_iters));
        for (int k = 0; k < points; ++k) {
            const double frac = points == 1 ? 1.0 : double(k) / double(points - 1);
            marks.push_back((long long)std::llround(std::exp(span * frac)));
        }
    }
    if (marks.empty() || marks.back() != total_iters)
        marks.push_back(total_iters);
    std::sort(marks.begin(), marks.end());
    marks.erase(std::unique(marks.begin(), marks.end()), marks.end());
    return marks;
}

double percentile(std::vector<double> sorted_vals, double q) {
    const std::size_t n = sorted_vals.size();
    if (n == 1)
        return sorted_vals[0];
    const double pos = q * double(n - 1);
    const std::size_t lo = std::size_t(pos);
    const std::size_t hi = lo + 1 < n ? lo + 1 : lo;
    const double frac = pos - double(lo);
    return sorted_vals[lo] + (sorted_vals[hi] - sorted_vals[lo]) * frac;
}

} // namespace

TraceRecord run_trial(const PreparedExperiment& exp, int trial_index) {
    const ExperimentConfig& cfg = exp.cfg;
    std::mt19937_64 rng(trial_seed(cfg.seed, trial_index));

    EigenEstimate est = random_unit_init(
        exp.spec ? exp.spec->d : int(exp.data.rows()), rng);

    std::unique_ptr<SampleSource> source;
    if (exp.spec) {
        source = make_source(*exp.spec, rng);
    } else {
        std::vector<long> order(exp.data.cols());
        for (long i = 0; i < long(order.size()); ++i)
            order[i] = i;
        std::shuffle(order.begin(), order.end(), rng);
        source = std::make_unique<DatasetSource>(exp.data, std::move(order));
    }

    const long B = cfg.network_batch();
    const long mu = exp.mu;
    const long long total_iters = cfg.total_samples / (long long)(B + mu);
    const auto marks = recorded_iterations(total_iters, cfg.stride, cfg.points);

    const StepSchedule sched = StepSchedule::from_c(
        cfg.step_c, exp.spec ? exp.spec->eigengap()
                             : std::max(exp.truth.lambda1 - exp.truth.lambda2, 1e-12),
        cfg.step_L);

    TraceRecord rec;
    rec.trial = trial_index;
    rec.points.push_back({0, 0, 0, 0, potential(est.v, exp.truth.q_star)});

    Splitter splitter(*source, cfg.total_samples);
    MatrixXd block(est.v.size(), B);
    std::size_t next_mark = 0;
    auto exit_status = Splitter::BlockStatus::done;
    while (true) {
        const auto status = splitter.next_block(B, mu, block);
        if (status != Splitter::BlockStatus::full) {
            exit_status = status;
            break;
        }
        const long long t = splitter.cursor().iteration;
        const double gamma = step_size(t, sched);
        switch (cfg.variant) {
        case Variant::single:
            est = cfg.algo == Algo::krasulina ? krasulina_step(est, block, gamma)
                                              : oja_step(est, block, gamma);
            break;
        case Variant::dk:
            est = run_dk_iteration(est, block, gamma, cfg.algo);
            break;
        case Variant::dmk:
            est = run_dmk_iteration(est, block, cfg.nodes, cfg.local_batch,
                                    gamma, mu, cfg.algo)
                      .est;
            break;
        }
        if (next_mark < marks.size() && t == marks[next_mark]) {
            const auto& cur = splitter.cursor();
            rec.points.push_back({t, cur.received, cur.processed, cur.discarded,
                                  potential(est.v, exp.truth.q_star)});
            ++next_mark;
        }
    }

    const auto& cur = splitter.cursor();
    if (rec.points.back().received < cur.received) {
        // Trailing arrivals too few to form a block were pulled and
        // discarded; record the final state at the full abscissa.
        rec.partial = exit_status == Splitter::BlockStatus::exhausted;
        rec.points.push_back({cur.iteration, cur.received, cur.processed,
                              cur.discarded,
                              potential(est.v, exp.truth.q_star)});
    }
    return rec;
}

AggregateTrace aggregate(const std::vector<TraceRecord>& records) {
    if (records.empty())
        throw config_error("nothing to aggregate");
    const std::size_t npts = records.front().points.size();
    for (const auto& r : records)
        if (r.points.size() != npts)
            throw config_error("trials recorded different trace shapes");

    AggregateTrace agg;
    agg.trials = int(records.size());
    agg.points.resize(npts);
    std::vector<double> vals(records.size());
    for (std::size_t k = 0; k < npts; ++k) {
        const TracePoint& ref = records.front().points[k];
        for (std::size_t r = 0; r < records.size(); ++r) {
            const TracePoint& pt = records[r].points[k];
            if (pt.iteration != ref.iteration || pt.received != ref.received)
                throw config_error("trials recorded different abscissas");
            vals[r] = pt.psi;
        }
        std::vector<double> sorted = vals;
        std::sort(sorted.begin(), sorted.end());
        double mean = 0.0;
        for (double v : sorted)
            mean += v;
        mean /= double(sorted.size());
        agg.points[k] = {ref.iteration, ref.received, mean,
                         percentile(sorted, 0.5), percentile(sorted, 0.1),
                         percentile(sorted, 0.9)};
    }
    for (const auto& r : records)
        agg.any_partial = agg.any_partial || r.partial;
    return agg;
}

AggregateTrace run_monte_carlo(const PreparedExperiment& exp) {
    const int trials = exp.cfg.trials;
    std::vector<TraceRecord> records{std::size_t(trials)};
    const int workers = std::min(exp.cfg.threads, trials);
    if (workers <= 1) {
        for (int k = 0; k < trials; ++k)
            records[std::size_t(k)] = run_trial(exp, k);
    } else {
        std::atomic<int> next{0};
        std::vector<std::thread> pool;
        pool.reserve(std::size_t(workers));
        std::exception_ptr failure;
        std::mutex failure_mutex;
        for (int w = 0; w < workers; ++w)
            pool.emplace_back([&] {
                while (true) {
                    const int k = next.fetch_add(1);
                    if (k >= trials)
                        return;
                    try {
                        records[std::size_t(k)] = run_trial(exp, k);
                    } catch (...) {
                        std::lock_guard<std::mutex> lock(failure_mutex);
                        if (!failure)
                            failure = std::current_exception();
                        return;
                    }
                }
            });
        for (auto& th : pool)
            th.join();
        if (failure)
            std::rethrow_exception(failure);
    }
    return aggregate(records);
}

AggregateTrace run_monte_carlo(const ExperimentConfig& cfg) {
    return run_monte_carlo(prepare_experiment(cfg));
}

double fit_loglog_slope(const AggregateTrace& trace, double window) {
    if (!(window > 0.0))
        throw config_error("window must be positive");
    double smax = 0.0;
    for (const auto& pt : trace.points)
        if (pt.received > 0 && pt.mean_psi > 0.0)
            smax = std::max(smax, double(pt.received));
    if (smax <= 0.0)
        throw insufficient_points_error("trace has no usable points");
    const double cutoff = smax / std::pow(10.0, window);

    std::vector<double> xs, ys;
    for (const auto& pt : trace.points) {
        if (pt.received <= 0 || pt.mean_psi <= 0.0)
            continue;
        if (double(pt.received) < cutoff)
            continue;
        xs.push_back(std::log(double(pt.received)));
        ys.push_back(std::log(pt.mean_psi));
    }
    if (xs.size() < 10)
        throw insufficient_points_error(
            "need at least ten trace points in the fit window");

    double mx = 0.0, my = 0.0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        mx += xs[i];
        my += ys[i];
    }
    mx /= double(xs.size());
    my /= double(xs.size());
    double sxx = 0.0, sxy = 0.0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        sxx += (xs[i] - mx) * (xs[i] - mx);
        sxy += (xs[i] - mx) * (ys[i] - my);
    }
    if (sxx <= 0.0)
        throw insufficient_points_error("fit window has no abscissa spread");
    return sxy / sxx;
}

BoundReport compare_bound(const AggregateTrace& trace, const BoundParams& p,
                          const StepSchedule& sched) {
    BoundReport report;
    report.rows.reserve(trace.points.size());
    for (const auto& pt : trace.points) {
        BoundRow row;
        row.iteration = pt.iteration;
        row.received = pt.received;
        row.empirical = pt.mean_psi;
        row.bound = theoretical_bound(pt.iteration, p, sched);
        row.violated = row.empirical > row.bound;
        report.any_violation = report.any_violation || row.violated;
        report.rows.push_back(row);
    }
    return report;
}

void write_trace_csv(const std::string& path, const AggregateTrace& trace) {
    std::ofstream out(path);
    if (!out)
        throw data_error("cannot write trace file: " + path);
    out << "samples,mean_psi,median_psi,p10,p90\n";
    char buf[256];
    for (const auto& pt : trace.points) {
        std::snprintf(buf, sizeof buf, "%lld,%.17g,%.17g,%.17g,%.17g\n",
                      pt.received, pt.mean_psi, pt.median_psi, pt.p10, pt.p90);
        out << buf;
    }
    if (!out)
        throw data_error("write failed: " + path);
}

std::vector<double> default_c_grid() {
    std::vector<double> grid;
    for (double base : {0.01, 0.1, 1.0, 10.0}) {
        grid.push_back(base);
        grid.push_back(2.0 * base);
        grid.push_back(5.0 * base);
    }
    grid.push_back(100.0);
    grid.push_back(200.0);
    return grid;
}

} // namespace spca
