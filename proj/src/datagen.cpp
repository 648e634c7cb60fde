#include "spca/datagen.hpp"

#include <algorithm>
#include <cmath>

namespace spca {

double CovarianceSpec::norm_bound() const {
    if (kind == DistKind::gaussian)
        return std::numeric_limits<double>::infinity();
    double r = 0.0;
    for (int i = 0; i < d; ++i)
        r += std::sqrt(3.0 * eigenvalues[i]);
    return r;
}

CovarianceSpec make_covariance(int d, double lambda1, double eigengap,
                               std::uint64_t seed, DistKind kind,
                               double half_range) {
    if (d < 2)
        throw invalid_dimension_error("dimension must be at least 2");
    if (!(lambda1 > 0.0))
        throw config_error("lambda1 must be positive");
    if (!(eigengap > 0.0) || !(eigengap < lambda1))
        throw config_error("eigengap must lie strictly between 0 and lambda1");
    if (kind == DistKind::bounded_uniform && !(half_range > 0.0))
        throw config_error("half-range a must be positive");

    CovarianceSpec spec;
    spec.d = d;
    spec.kind = kind;
    spec.half_range = half_range;

    spec.eigenvalues.resize(d);
    const double lambda2 = lambda1 - eigengap;
    spec.eigenvalues[0] = lambda1;
    spec.eigenvalues[1] = lambda2;
    for (int k = 2; k < d; ++k)
        spec.eigenvalues[k] =
            lambda2 - double(k - 1) * (lambda2 / 2.0) / double(d - 2);

    std::mt19937_64 rng(seed);
    std::normal_distribution<double> gauss(0.0, 1.0);
    MatrixXd raw(d, d);
    for (int j = 0; j < d; ++j)
        for (int i = 0; i < d; ++i)
            raw(i, j) = gauss(rng);
    Eigen::HouseholderQR<MatrixXd> qr(raw);
    MatrixXd q = qr.householderQ();
    const MatrixXd r = qr.matrixQR().triangularView<Eigen::Upper>();
    for (int j = 0; j < d; ++j)
        if (r(j, j) < 0.0)
            q.col(j) = -q.col(j);
    spec.basis = q;
    return spec;
}

GaussianSource::GaussianSource(const CovarianceSpec& spec, std::mt19937_64& rng)
    : spec_(spec), rng_(rng), gauss_(0.0, 1.0) {
    mix_ = spec.basis * spec.eigenvalues.cwiseSqrt().asDiagonal();
}

long GaussianSource::fill(Eigen::Ref<MatrixXd> block, long want) {
    VectorXd g(spec_.d);
    for (long k = 0; k < want; ++k) {
        for (int i = 0; i < spec_.d; ++i)
            g[i] = gauss_(rng_);
        block.col(k).noalias() = mix_ * g;
    }
    return want;
}

BoundedUniformSource::BoundedUniformSource(const CovarianceSpec& spec,
                                           std::mt19937_64& rng)
    : spec_(spec), rng_(rng), unif_(-spec.half_range, spec.half_range) {
    const double a = spec.half_range;
    mix_ = spec.basis *
           (3.0 * spec.eigenvalues / (a * a)).cwiseSqrt().asDiagonal();
}

long BoundedUniformSource::fill(Eigen::Ref<MatrixXd> block, long want) {
    VectorXd u(spec_.d);
    for (long k = 0; k < want; ++k) {
        for (int i = 0; i < spec_.d; ++i)
            u[i] = unif_(rng_);
        block.col(k).noalias() = mix_ * u;
    }
    return want;
}

DatasetSource::DatasetSource(const MatrixXd& data, std::vector<long> order)
    : data_(data), order_(std::move(order)) {
    for (long idx : order_)
        if (idx < 0 || idx >= data_.cols())
            throw data_error("dataset stream order index out of range");
}

long DatasetSource::fill(Eigen::Ref<MatrixXd> block, long want) {
    long produced = 0;
    while (produced < want && pos_ < order_.size()) {
        block.col(produced) = data_.col(order_[pos_]);
        ++produced;
        ++pos_;
    }
    return produced;
}

std::unique_ptr<SampleSource> make_source(const CovarianceSpec& spec,
                                          std::mt19937_64& rng) {
    if (spec.kind == DistKind::gaussian)
        return std::make_unique<GaussianSource>(spec, rng);
    return std::make_unique<BoundedUniformSource>(spec, rng);
}

SampleBatch sample_stream(const CovarianceSpec& spec, long n,
                          std::mt19937_64& rng) {
    if (n < 1)
        throw invalid_batch_error("sample count must be positive");
    MatrixXd out(spec.d, n);
    auto src = make_source(spec, rng);
    src->fill(out, n);
    return out;
}

double cov_deviation_sq(const Eigen::Ref<const VectorXd>& x,
                        const CovarianceSpec& spec) {
    const double xnorm2 = x.squaredNorm();
    const VectorXd y = spec.basis.transpose() * x;
    double xsx = 0.0;
    double frob2 = 0.0;
    for (int i = 0; i < spec.d; ++i) {
        xsx += spec.eigenvalues[i] * y[i] * y[i];
        frob2 += spec.eigenvalues[i] * spec.eigenvalues[i];
    }
    return xnorm2 * xnorm2 - 2.0 * xsx + frob2;
}

double estimate_sigma2(const CovarianceSpec& spec, long M, std::mt19937_64& rng) {
    if (M < 100)
        throw config_error("sigma2 estimation needs at least 100 draws");
    auto src = make_source(spec, rng);
    MatrixXd x(spec.d, 1);
    double acc = 0.0;
    for (long k = 0; k < M; ++k) {
        src->fill(x, 1);
        acc += cov_deviation_sq(x.col(0), spec);
    }
    return acc / double(M);
}

double estimate_sigma2_avg(const CovarianceSpec& spec, int N, long M,
                           std::mt19937_64& rng) {
    if (N < 1)
        throw config_error("node count must be positive");
    if (M < 100)
        throw config_error("sigma2 estimation needs at least 100 draws");
    auto src = make_source(spec, rng);
    double frob2 = 0.0;
    for (int i = 0; i < spec.d; ++i)
        frob2 += spec.eigenvalues[i] * spec.eigenvalues[i];

    MatrixXd xs(spec.d, N);
    MatrixXd ys(spec.d, N);
    double acc = 0.0;
    for (long rep = 0; rep < M; ++rep) {
        src->fill(xs, N);
        ys.noalias() = spec.basis.transpose() * xs;
        // |mean_N(x x') - Sigma|_F^2 expanded through Gram inner products.
        double gram = 0.0;
        for (int i = 0; i < N; ++i)
            for (int j = 0; j < N; ++j) {
                const double dot = xs.col(i).dot(xs.col(j));
                gram += dot * dot;
            }
        double cross = 0.0;
        for (int i = 0; i < N; ++i)
            for (int k = 0; k < spec.d; ++k)
                cross += spec.eigenvalues[k] * ys(k, i) * ys(k, i);
        acc += gram / (double(N) * double(N)) - 2.0 * cross / double(N) + frob2;
    }
    return acc / double(M);
}

double estimate_sigma2(const SampleBatch& data, long M, std::mt19937_64& rng) {
    const long n = data.cols();
    if (n < 2)
        throw invalid_batch_error("need at least two samples");
    if (M < 100)
        throw config_error("sigma2 estimation needs at least 100 draws");
    const MatrixXd cov = data * data.transpose() / double(n);
    const double frob2 = cov.squaredNorm();

    std::vector<long> idx(n);
    for (long i = 0; i < n; ++i)
        idx[i] = i;
    long use = n;
    if (M < n) {
        std::shuffle(idx.begin(), idx.end(), rng);
        use = M;
    }
    double acc = 0.0;
    for (long k = 0; k < use; ++k) {
        const auto x = data.col(idx[k]);
        const double xnorm2 = x.squaredNorm();
        acc += xnorm2 * xnorm2 - 2.0 * x.dot(cov * x) + frob2;
    }
    return acc / double(use);
}

GroundTruth ground_truth_of(const CovarianceSpec& spec) {
    GroundTruth gt;
    gt.q_star = spec.q_star();
    gt.lambda1 = spec.lambda1();
    gt.lambda2 = spec.lambda2();
    return gt;
}

GroundTruth batch_top_eigenvector(const CovarianceSpec& spec) {
    return ground_truth_of(spec);
}

namespace {

// Power iteration on y -> (X (X'y))/n - lambda_defl (q'y) q, matrix-free.
struct PowerResult {
    VectorXd q;
    double lambda = 0.0;
    double residual = 0.0;
};

PowerResult power_iterate(const SampleBatch& data, const VectorXd* deflate_q,
                          double deflate_lambda, bool need_residual) {
    const long n = data.cols();
    const int d = int(data.rows());
    const int max_iters = 10000;
    const double tol = 1e-12;

    std::mt19937_64 rng(0x9c0ffee5u);
    VectorXd v = random_unit_init(d, rng).v;
    if (deflate_q)
        v -= (deflate_q->dot(v)) * (*deflate_q);
    if (v.norm() < 1e-12)
        v = random_unit_init(d, rng).v;
    v.normalize();

    const auto apply = [&](const VectorXd& y) -> VectorXd {
        VectorXd out = data * (data.transpose() * y) / double(n);
        if (deflate_q)
            out -= deflate_lambda * (deflate_q->dot(y)) * (*deflate_q);
        return out;
    };

    PowerResult res;
    double lambda = 0.0;
    for (int it = 0; it < max_iters; ++it) {
        VectorXd w = apply(v);
        if (deflate_q)
            w -= (deflate_q->dot(w)) * (*deflate_q);
        const double wnorm = w.norm();
        if (wnorm < 1e-300) {
            // Deflated operator is (numerically) zero; eigenvalue 0.
            res.q = v;
            res.lambda = 0.0;
            res.residual = 0.0;
            return res;
        }
        VectorXd v_next = w / wnorm;
        lambda = v_next.dot(apply(v_next));
        const double drift = potential(v_next, v / v.norm());
        v = v_next;
        if (drift < tol) {
            const double residual = (apply(v) - lambda * v).norm();
            if (!need_residual || residual <= 1e-8 * std::abs(lambda)) {
                res.q = v;
                res.lambda = lambda;
                res.residual = residual;
                return res;
            }
        }
    }
    const double residual = (apply(v) - lambda * v).norm();
    throw convergence_error("power iteration did not converge (residual " +
                                std::to_string(residual) + ")",
                            residual);
}

} // namespace

GroundTruth batch_top_eigenvector(const SampleBatch& data) {
    if (data.cols() < 1)
        throw invalid_batch_error("batch must contain at least one sample");
    if (data.rows() < 2)
        throw invalid_dimension_error("dimension must be at least 2");

    const PowerResult top = power_iterate(data, nullptr, 0.0, true);
    const PowerResult second = power_iterate(data, &top.q, top.lambda, false);

    GroundTruth gt;
    gt.q_star = top.q;
    gt.lambda1 = top.lambda;
    gt.lambda2 = second.lambda;
    return gt;
}

void center_dataset(SampleBatch& data) {
    if (data.cols() < 1)
        throw invalid_batch_error("batch must contain at least one sample");
    const VectorXd mean = data.rowwise().mean();
    data.colwise() -= mean;
}

} // namespace spca
