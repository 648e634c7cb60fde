#ifndef SPCA_NETWORK_HPP
#define SPCA_NETWORK_HPP

// Simulation of the distributed mini-batch estimator on N nodes.
//
// Rates: the stream delivers R_s samples/s, each node processes R_p
// samples/s, and the network completes R_c vector sums/s. With per-node
// batch b and network batch B = bN, a deployment is
//   resourceful  if N >= R_s/R_p + R_s/(b R_c)   -> no samples are lost
//   constrained  otherwise                        -> each iteration receives
//                B + mu samples and discards the trailing mu, with
//                mu = ceil(b R_s/R_p + R_s/R_c - B)
//
// Sample routing is by global arrival index (1-based):
//   D-K   iteration t, node i:            t' = i + (t-1) N
//   DM-K  iteration t, node i, slot j:    t' = j + (i-1) b + (t-1) B
//
// The network vector sum is simulated as an ordered ring reduction: node
// contributions enter a single accumulator in ascending (node, slot) order,
// i.e. in global arrival order, at per-sample granularity. That fixed order
// makes a simulated distributed iteration bitwise equal to the centralized
// mini-batch update on the same samples, for every factorization B = bN,
// which is the equivalence the tests pin down. A real deployment would sum
// pre-accumulated node vectors and could differ from the centralized result
// in the low-order bits.

#include <optional>
#include <utility>
#include <vector>

#include "spca/datagen.hpp"
#include "spca/estimator.hpp"

namespace spca {

enum class Scenario { resourceful, constrained };

struct RateModel {
    double samples_per_sec = 0.0;   // R_s
    double node_proc_per_sec = 0.0; // R_p
    double sums_per_sec = 0.0;      // R_c
};

struct SystemModel {
    int nodes = 1;       // N
    long local_batch = 1; // b
    RateModel rates;
    std::optional<long> mu_override;

    long network_batch() const { return local_batch * long(nodes); }
};

// Scenario classification and the per-iteration discard count mu. An
// explicit mu_override wins regardless of the rates.
std::pair<Scenario, long> classify_and_mu(const SystemModel& model);

long long reindex_dk(int node, long long iteration, int N);
long long reindex_dmk(int node, long slot, long long iteration, long b, long B);

// Sum of the parts in ascending index order. All parts must share one
// dimension.
VectorXd distributed_vector_sum(const std::vector<VectorXd>& parts);

// One D-K iteration: node i computes its single-sample direction, the
// network sums them in node order, and the iterate advances by gamma times
// the average. `node_samples` holds one column per node.
EigenEstimate run_dk_iteration(const EigenEstimate& est,
                               const SampleBatch& node_samples, double gamma,
                               Algo algo = Algo::krasulina);

struct DmkOutcome {
    EigenEstimate est;
    long discarded = 0;
};

// One DM-K iteration on a block of B = nodes * local_batch samples in global
// arrival (node-major) order. `mu` is the number of trailing samples the
// caller discarded for this iteration and is passed through for accounting.
DmkOutcome run_dmk_iteration(const EigenEstimate& est, const SampleBatch& block,
                             int nodes, long local_batch, double gamma, long mu,
                             Algo algo = Algo::krasulina);

struct StreamCursor {
    long long received = 0;
    long long processed = 0;
    long long discarded = 0;
    long long iteration = 0;
};

// Feeds fixed-size blocks from a sample source under a total arrival budget,
// discarding mu trailing samples per block. Every sample that arrives is
// counted: received = processed + discarded at all times.
class Splitter {
  public:
    enum class BlockStatus {
        full,      // a complete block was produced
        exhausted, // stream or budget ran out mid-block; leftovers discarded
        done,      // budget already consumed
    };

    Splitter(SampleSource& source, long long total_budget);

    // On `full`, block columns [0, B) hold the samples to process and the
    // cursor has advanced past B + mu arrivals.
    BlockStatus next_block(long B, long mu, MatrixXd& block);

    const StreamCursor& cursor() const { return cursor_; }

  private:
    long long pull(MatrixXd& sink, long long want); // returns arrivals
    SampleSource& source_;
    long long budget_;
    StreamCursor cursor_;
    MatrixXd scratch_;
};

} // namespace spca

#endif
