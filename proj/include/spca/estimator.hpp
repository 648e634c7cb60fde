#ifndef SPCA_ESTIMATOR_HPP
#define SPCA_ESTIMATOR_HPP

// Stochastic top-eigenvector estimation from sample streams.
//
// The iterate v is updated from mini-batches of samples x with
//
//   Krasulina:  v <- v + gamma * ( A v - (v'Av / |v|^2) v ),   A = mean x x'
//   Oja:        v <- v + gamma * ( A v - (v'Av) v )
//
// All computations are matrix-free: A is never materialized, only per-sample
// inner products (x'v) x are used, so one update costs O(d * m).
//
// The progress measure used throughout is the potential
//   psi(v) = 1 - (v'q)^2 / |v|^2  in [0, 1]
// against a unit ground-truth eigenvector q. psi is invariant to the scale
// and sign of v.

#include <Eigen/Dense>
#include <cstdint>
#include <random>

#include "spca/errors.hpp"

namespace spca {

using Eigen::MatrixXd;
using Eigen::VectorXd;

// A batch of m samples of dimension d, one sample per column.
using SampleBatch = Eigen::MatrixXd;

enum class Algo { krasulina, oja };

// Current state of the streaming estimator. When `normalized` is set the
// iterate is rescaled to unit norm after every update; the unnormalized mode
// exists for the norm-recursion diagnostics and should not be used otherwise.
struct EigenEstimate {
    VectorXd v;
    long long iterations = 0;
    long long samples_processed = 0;
    bool normalized = true;
};

// Uniform random direction on the unit sphere in R^d. d >= 2.
EigenEstimate random_unit_init(int d, std::mt19937_64& rng);

// Single shared reduction so every code path sums coordinates identically.
double squared_norm(const VectorXd& v);

// v'Av / |v|^2 for the batch mean A, via per-sample dot products.
double rayleigh_quotient(const VectorXd& v, const SampleBatch& batch);

// Gradient of f(v) = -v'Av / (2 |v|^2) at v; the update direction satisfies
// xi = -|v|^2 grad f exactly.
VectorXd gradient_f(const VectorXd& v, const SampleBatch& batch);

// Per-sample update direction, written to `out` (preallocated, size d).
// Krasulina: (x'v) x - ((x'v)^2 / vnorm2) v. Oja drops the 1/vnorm2.
void sample_direction(Algo algo, const Eigen::Ref<const VectorXd>& x,
                      const VectorXd& v, double vnorm2, VectorXd& out);

// Mean update direction over a batch, accumulated one sample at a time in
// column order. The accumulation order is part of the contract: the
// distributed simulation reproduces it bit for bit.
VectorXd update_direction(Algo algo, const VectorXd& v, const SampleBatch& batch);

// Krasulina direction xi = Av - (v'Av / |v|^2) v. xi is orthogonal to v.
VectorXd krasulina_direction(const VectorXd& v, const SampleBatch& batch);

// v <- v + gamma * xi, plus renormalization and counter bookkeeping.
// Throws numeric_overflow_error if the update leaves finite range.
EigenEstimate apply_update(const EigenEstimate& est, const VectorXd& xi,
                           double gamma, long long batch_size);

EigenEstimate krasulina_step(const EigenEstimate& est, const SampleBatch& batch,
                             double gamma);
EigenEstimate oja_step(const EigenEstimate& est, const SampleBatch& batch,
                       double gamma);

// psi(v) = 1 - (v'q)^2 / |v|^2, clamped to [0, 1]. q must be unit norm.
double potential(const VectorXd& v, const VectorXd& q_star);

// One-step progress term z = 2 gamma (v'q)(xi'q) / |v|^2, where v is the
// iterate before the step and xi the update direction used by it.
double z_statistic(const VectorXd& v_prev, const VectorXd& xi, double gamma,
                   const VectorXd& q_star);

} // namespace spca

#endif
