#ifndef SPCA_DATAGEN_HPP
#define SPCA_DATAGEN_HPP

// Synthetic stream generation with known ground truth, plus the batch
// oracles (top eigenvector, variance proxy sigma^2) used to score runs.
//
// A covariance is specified by its spectrum and a random orthonormal basis:
// Sigma = Q diag(lambda) Q'. The spectrum is lambda1, lambda2 = lambda1 - gap,
// and lambda3..lambdad equally spaced from lambda2 down to lambda2/2.
//
// Two sample distributions share that covariance:
//   gaussian:        x = Q diag(sqrt(lambda)) g,        g ~ N(0, I)
//   bounded-uniform: x = C u, u_i ~ U(-a, a), C = Q diag(sqrt(3 lambda / a^2))
// The bounded kind keeps the requested spectrum for every a and obeys the
// hard norm bound |x| <= sum_i sqrt(3 lambda_i) (column-norm sum of C times a).

#include <Eigen/Dense>
#include <cstdint>
#include <limits>
#include <memory>
#include <random>
#include <vector>

#include "spca/estimator.hpp"

namespace spca {

enum class DistKind { gaussian, bounded_uniform };

struct CovarianceSpec {
    int d = 0;
    VectorXd eigenvalues;  // descending
    MatrixXd basis;        // orthonormal columns, basis.col(0) is q*
    DistKind kind = DistKind::gaussian;
    double half_range = 1.0; // a, bounded-uniform only

    double lambda1() const { return eigenvalues[0]; }
    double lambda2() const { return eigenvalues[1]; }
    double eigengap() const { return eigenvalues[0] - eigenvalues[1]; }
    VectorXd q_star() const { return basis.col(0); }
    // Hard bound on |x| for the bounded kind, +inf for gaussian.
    double norm_bound() const;
};

CovarianceSpec make_covariance(int d, double lambda1, double eigengap,
                               std::uint64_t seed,
                               DistKind kind = DistKind::gaussian,
                               double half_range = 1.0);

struct GroundTruth {
    VectorXd q_star;
    double lambda1 = 0.0;
    double lambda2 = 0.0;
    double sigma2 = std::numeric_limits<double>::quiet_NaN();
};

// Pull-based sample feed; fills up to `want` columns, returns how many it
// produced (fewer only when exhausted).
struct SampleSource {
    virtual ~SampleSource() = default;
    virtual long fill(Eigen::Ref<MatrixXd> block, long want) = 0;
};

class GaussianSource : public SampleSource {
  public:
    GaussianSource(const CovarianceSpec& spec, std::mt19937_64& rng);
    long fill(Eigen::Ref<MatrixXd> block, long want) override;

  private:
    const CovarianceSpec& spec_;
    std::mt19937_64& rng_;
    MatrixXd mix_; // Q diag(sqrt(lambda))
    std::normal_distribution<double> gauss_;
};

class BoundedUniformSource : public SampleSource {
  public:
    BoundedUniformSource(const CovarianceSpec& spec, std::mt19937_64& rng);
    long fill(Eigen::Ref<MatrixXd> block, long want) override;

  private:
    const CovarianceSpec& spec_;
    std::mt19937_64& rng_;
    MatrixXd mix_; // Q diag(sqrt(3 lambda / a^2))
    std::uniform_real_distribution<double> unif_;
};

// Streams the columns of a fixed dataset in a caller-supplied order.
class DatasetSource : public SampleSource {
  public:
    DatasetSource(const MatrixXd& data, std::vector<long> order);
    long fill(Eigen::Ref<MatrixXd> block, long want) override;

  private:
    const MatrixXd& data_;
    std::vector<long> order_;
    std::size_t pos_ = 0;
};

std::unique_ptr<SampleSource> make_source(const CovarianceSpec& spec,
                                          std::mt19937_64& rng);

// n samples drawn in stream order.
SampleBatch sample_stream(const CovarianceSpec& spec, long n,
                          std::mt19937_64& rng);

// |x x' - Sigma|_F^2 = |x|^4 - 2 x'Sigma x + |Sigma|_F^2, matrix-free.
double cov_deviation_sq(const Eigen::Ref<const VectorXd>& x,
                        const CovarianceSpec& spec);

// Monte-Carlo estimate of sigma^2 = E |x x' - Sigma|_F^2 over M draws
// (M >= 100).
double estimate_sigma2(const CovarianceSpec& spec, long M, std::mt19937_64& rng);

// Same for the N-node average: sigma_N^2 = E |mean_N(x x') - Sigma|_F^2.
double estimate_sigma2_avg(const CovarianceSpec& spec, int N, long M,
                           std::mt19937_64& rng);

// Empirical-data variant: Sigma is replaced by the sample covariance of
// `data`; averages over min(M, n) samples (a random subset when M < n).
double estimate_sigma2(const SampleBatch& data, long M, std::mt19937_64& rng);

// Exact ground truth of a synthetic spec.
GroundTruth ground_truth_of(const CovarianceSpec& spec);

// Top eigenvector / eigenvalue of the sample covariance of `data` by
// matrix-free power iteration, with one deflation pass for lambda2.
// Iterates until successive-iterate potential < 1e-12 and the residual
// |A q - lambda q| <= 1e-8 lambda, capped at 10^4 iterations.
GroundTruth batch_top_eigenvector(const SampleBatch& data);
GroundTruth batch_top_eigenvector(const CovarianceSpec& spec);

// Subtracts the per-coordinate mean across columns, in place.
void center_dataset(SampleBatch& data);

} // namespace spca

#endif
