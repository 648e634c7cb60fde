#include "spca/network.hpp"

#include <cmath>

namespace spca {

std::pair<Scenario, long> classify_and_mu(const SystemModel& model) {
    if (model.nodes < 1 || model.local_batch < 1)
        throw config_error("need at least one node and local batch >= 1");
    const RateModel& r = model.rates;
    if (!(r.samples_per_sec > 0.0) || !(r.node_proc_per_sec > 0.0) ||
        !(r.sums_per_sec > 0.0))
        throw config_error("all rates must be positive");

    const double b = double(model.local_batch);
    const double demand =
        r.samples_per_sec / r.node_proc_per_sec +
        r.samples_per_sec / (b * r.sums_per_sec);
    const Scenario scenario = double(model.nodes) >= demand
                                  ? Scenario::resourceful
                                  : Scenario::constrained;

    if (model.mu_override) {
        if (*model.mu_override < 0)
            throw config_error("discard override must be nonnegative");
        return {scenario, *model.mu_override};
    }
    if (scenario == Scenario::resourceful)
        return {scenario, 0};

    const double B = double(model.network_batch());
    const double backlog = b * r.samples_per_sec / r.node_proc_per_sec +
                           r.samples_per_sec / r.sums_per_sec - B;
    const long mu = long(std::ceil(backlog - 1e-12));
    if (mu < 0)
        throw model_inconsistency_error(
            "constrained system computed a negative discard count");
    return {scenario, mu};
}

long long reindex_dk(int node, long long iteration, int N) {
    if (N < 1 || node < 1 || node > N)
        throw config_error("node index out of range");
    if (iteration < 1)
        throw config_error("iteration index must be positive");
    return (long long)node + (iteration - 1) * (long long)N;
}

long long reindex_dmk(int node, long slot, long long iteration, long b, long B) {
    if (b < 1 || B < 1 || B % b != 0)
        throw config_error("network batch must be a multiple of local batch");
    const long N = B / b;
    if (node < 1 || node > N)
        throw config_error("node index out of range");
    if (slot < 1 || slot > b)
        throw config_error("slot index out of range");
    if (iteration < 1)
        throw config_error("iteration index must be positive");
    return (long long)slot + (long long)(node - 1) * b +
           (iteration - 1) * (long long)B;
}

VectorXd distributed_vector_sum(const std::vector<VectorXd>& parts) {
    if (parts.empty())
        throw invalid_batch_error("vector sum needs at least one part");
    const Eigen::Index d = parts.front().size();
    for (const auto& p : parts)
        if (p.size() != d)
            throw invalid_dimension_error("vector sum dimension mismatch");
    VectorXd acc = VectorXd::Zero(d);
    for (const auto& p : parts)
        acc += p;
    return acc;
}

EigenEstimate run_dk_iteration(const EigenEstimate& est,
                               const SampleBatch& node_samples, double gamma,
                               Algo algo) {
    const long N = node_samples.cols();
    if (N < 1)
        throw invalid_batch_error("need one sample per node");
    if (node_samples.rows() != est.v.size())
        throw invalid_batch_error("sample dimension does not match iterate");
    const double vnorm2 = squared_norm(est.v);
    if (!(vnorm2 > 0.0))
        throw degenerate_iterate_error("iterate has zero norm");

    std::vector<VectorXd> parts(std::size_t(N), VectorXd(est.v.size()));
    for (long i = 0; i < N; ++i)
        sample_direction(algo, node_samples.col(i), est.v, vnorm2, parts[i]);
    const VectorXd xi = distributed_vector_sum(parts) / double(N);
    return apply_update(est, xi, gamma, N);
}

DmkOutcome run_dmk_iteration(const EigenEstimate& est, const SampleBatch& block,
                             int nodes, long local_batch, double gamma, long mu,
                             Algo algo) {
    if (nodes < 1 || local_batch < 1)
        throw config_error("need at least one node and local batch >= 1");
    if (mu < 0)
        throw config_error("discard count must be nonnegative");
    const long B = long(nodes) * local_batch;
    if (block.cols() != B)
        throw invalid_batch_error("block size does not match nodes * local batch");
    // Ring reduction in global arrival order; see header. Identical to the
    // centralized mini-batch direction on the same block.
    const VectorXd xi = update_direction(algo, est.v, block);
    DmkOutcome out{apply_update(est, xi, gamma, B), mu};
    return out;
}

Splitter::Splitter(SampleSource& source, long long total_budget)
    : source_(source), budget_(total_budget) {
    if (total_budget < 1)
        throw config_error("arrival budget must be positive");
}

long long Splitter::pull(MatrixXd& sink, long long want) {
    const long long remaining = budget_ - cursor_.received;
    const long long ask = want < remaining ? want : remaining;
    if (ask <= 0)
        return 0;
    const long produced = source_.fill(sink.leftCols(ask), long(ask));
    cursor_.received += produced;
    return produced;
}

Splitter::BlockStatus Splitter::next_block(long B, long mu, MatrixXd& block) {
    if (B < 1 || mu < 0)
        throw config_error("require B >= 1 and mu >= 0");
    if (block.cols() < B)
        throw invalid_batch_error("block buffer too small");
    if (cursor_.received >= budget_)
        return BlockStatus::done;

    const long long got = pull(block, B);
    if (got < B) {
        cursor_.discarded += got;
        return BlockStatus::exhausted;
    }
    // The discards arrive during processing, so a complete B-part makes a
    // valid iteration even when the trailing arrivals get cut short.
    long long skipped = 0;
    if (mu > 0) {
        if (scratch_.rows() != block.rows() || scratch_.cols() < mu)
            scratch_.resize(block.rows(), mu);
        skipped = pull(scratch_, mu);
    }
    cursor_.processed += B;
    cursor_.discarded += skipped;
    cursor_.iteration += 1;
    return BlockStatus::full;
}

} // namespace spca
