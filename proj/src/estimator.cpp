#include "spca/estimator.hpp"

#include <cmath>

namespace spca {

namespace {

void check_batch(const VectorXd& v, const SampleBatch& batch) {
    if (batch.cols() < 1)
        throw invalid_batch_error("batch must contain at least one sample");
    if (batch.rows() != v.size())
        throw invalid_batch_error("sample dimension does not match iterate");
}

double checked_vnorm2(const VectorXd& v) {
    const double vnorm2 = squared_norm(v);
    if (!(vnorm2 > 0.0))
        throw degenerate_iterate_error("iterate has zero norm");
    return vnorm2;
}

} // namespace

EigenEstimate random_unit_init(int d, std::mt19937_64& rng) {
    if (d < 2)
        throw invalid_dimension_error("dimension must be at least 2");
    std::normal_distribution<double> gauss(0.0, 1.0);
    VectorXd v(d);
    double norm = 0.0;
    do {
        for (int i = 0; i < d; ++i)
            v[i] = gauss(rng);
        norm = v.norm();
    } while (!(norm > 1e-300));
    EigenEstimate est;
    est.v = v / norm;
    return est;
}

double squared_norm(const VectorXd& v) {
    double s = 0.0;
    for (Eigen::Index i = 0; i < v.size(); ++i)
        s += v[i] * v[i];
    return s;
}

double rayleigh_quotient(const VectorXd& v, const SampleBatch& batch) {
    check_batch(v, batch);
    const double vnorm2 = checked_vnorm2(v);
    double s = 0.0;
    for (Eigen::Index k = 0; k < batch.cols(); ++k) {
        const double p = batch.col(k).dot(v);
        s += p * p;
    }
    return s / double(batch.cols()) / vnorm2;
}

VectorXd gradient_f(const VectorXd& v, const SampleBatch& batch) {
    check_batch(v, batch);
    const double vnorm2 = checked_vnorm2(v);
    VectorXd av = VectorXd::Zero(v.size());
    for (Eigen::Index k = 0; k < batch.cols(); ++k)
        av.noalias() += batch.col(k).dot(v) * batch.col(k);
    av /= double(batch.cols());
    const double vav = av.dot(v);
    return (-av + (vav / vnorm2) * v) / vnorm2;
}

void sample_direction(Algo algo, const Eigen::Ref<const VectorXd>& x,
                      const VectorXd& v, double vnorm2, VectorXd& out) {
    const double p = x.dot(v);
    const double coeff = algo == Algo::krasulina ? p * p / vnorm2 : p * p;
    out = p * x - coeff * v;
}

VectorXd update_direction(Algo algo, const VectorXd& v, const SampleBatch& batch) {
    check_batch(v, batch);
    const double vnorm2 = checked_vnorm2(v);
    VectorXd acc = VectorXd::Zero(v.size());
    VectorXd dir(v.size());
    for (Eigen::Index k = 0; k < batch.cols(); ++k) {
        sample_direction(algo, batch.col(k), v, vnorm2, dir);
        acc += dir;
    }
    return acc / double(batch.cols());
}

VectorXd krasulina_direction(const VectorXd& v, const SampleBatch& batch) {
    return update_direction(Algo::krasulina, v, batch);
}

EigenEstimate apply_update(const EigenEstimate& est, const VectorXd& xi,
                           double gamma, long long batch_size) {
    if (gamma < 0.0)
        throw config_error("step size must be nonnegative");
    EigenEstimate next = est;
    next.v = est.v + gamma * xi;
    if (!next.v.allFinite())
        throw numeric_overflow_error("iterate left finite range");
    if (next.normalized) {
        const double norm = std::sqrt(checked_vnorm2(next.v));
        next.v /= norm;
    }
    next.iterations = est.iterations + 1;
    next.samples_processed = est.samples_processed + batch_size;
    return next;
}

EigenEstimate krasulina_step(const EigenEstimate& est, const SampleBatch& batch,
                             double gamma) {
    const VectorXd xi = update_direction(Algo::krasulina, est.v, batch);
    return apply_update(est, xi, gamma, batch.cols());
}

EigenEstimate oja_step(const EigenEstimate& est, const SampleBatch& batch,
                       double gamma) {
    const VectorXd xi = update_direction(Algo::oja, est.v, batch);
    return apply_update(est, xi, gamma, batch.cols());
}

double potential(const VectorXd& v, const VectorXd& q_star) {
    if (q_star.size() != v.size())
        throw invalid_dimension_error("ground-truth vector dimension mismatch");
    if (std::abs(q_star.norm() - 1.0) > 1e-10)
        throw config_error("ground-truth vector must be unit norm");
    const double vnorm2 = checked_vnorm2(v);
    const double c = v.dot(q_star);
    const double psi = 1.0 - c * c / vnorm2;
    return psi < 0.0 ? 0.0 : (psi > 1.0 ? 1.0 : psi);
}

double z_statistic(const VectorXd& v_prev, const VectorXd& xi, double gamma,
                   const VectorXd& q_star) {
    if (xi.size() != v_prev.size() || q_star.size() != v_prev.size())
        throw invalid_dimension_error("z statistic dimension mismatch");
    const double vnorm2 = checked_vnorm2(v_prev);
    return 2.0 * gamma * v_prev.dot(q_star) * xi.dot(q_star) / vnorm2;
}

} // namespace spca
