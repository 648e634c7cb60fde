#include "spca/schedule.hpp"

#include <cmath>
#include <limits>

namespace spca {

namespace {

constexpr double kE = 2.718281828459045235360287471352662498;

void check_delta(double delta) {
    if (!(delta > 0.0 && delta < 1.0))
        throw config_error("delta must lie in (0, 1)");
}

void check_c0(double c0) {
    if (!(c0 > 2.0))
        throw unsupported_regime_error("requires c0 > 2");
}

void check_gap(double eigengap) {
    if (!(eigengap > 0.0))
        throw config_error("eigengap must be positive");
}

// Smallest integer >= x, tolerating float fuzz just below an exact integer.
long long ceil_snap(double x) {
    const double f = std::floor(x);
    if (x - f < 1e-9)
        return (long long)f;
    return (long long)std::ceil(x);
}

double bias_constant(const BoundParams& p, double c, double L) {
    const double base = 4.0 * kE * double(p.d) / (p.delta * p.delta);
    return 0.5 * std::pow(base, 5.0 / (2.0 * std::log(2.0))) *
           std::exp(2.0 * c * c * p.lambda1 * p.lambda1 / L);
}

double variance_constant(const BoundParams& p, double c, double c0, double L) {
    return 8.0 * c * c *
           std::exp((c0 + 2.0 * c * c * p.lambda1 * p.lambda1) / L) /
           (c0 - 2.0);
}

} // namespace

StepSchedule StepSchedule::from_c0(double c0, double eigengap, double L) {
    check_c0(c0);
    check_gap(eigengap);
    if (L < 0.0)
        throw config_error("offset L must be nonnegative");
    StepSchedule s;
    s.c0 = c0;
    s.eigengap = eigengap;
    s.c = c0 / (2.0 * eigengap);
    s.L = L;
    return s;
}

StepSchedule StepSchedule::from_c(double c, double eigengap, double L) {
    if (!(c > 0.0))
        throw config_error("step constant c must be positive");
    check_gap(eigengap);
    if (L < 0.0)
        throw config_error("offset L must be nonnegative");
    StepSchedule s;
    s.c = c;
    s.eigengap = eigengap;
    s.c0 = 2.0 * c * eigengap;
    s.L = L;
    return s;
}

double step_size(long long t, const StepSchedule& sched) {
    const double denom = sched.L + double(t);
    if (!(denom > 0.0))
        throw config_error("step size undefined: L + t must be positive");
    return sched.c / denom;
}

LBound l_lower_bound_main(const BoundParams& p, double c) {
    check_delta(p.delta);
    if (p.d < 2)
        throw invalid_dimension_error("dimension must be at least 2");
    if (!(p.r >= 1.0))
        throw config_error("norm bound r must be at least 1");
    if (p.sigma2_eff < 0.0)
        throw config_error("sigma2 must be nonnegative");
    const double maxc2 = std::max(1.0, c * c);
    const double log_term = std::log(4.0 / p.delta);
    const double r4 = p.r * p.r * p.r * p.r;
    LBound out;
    out.L1 = 64.0 * kE * double(p.d) * r4 * maxc2 / (p.delta * p.delta) * log_term;
    out.L2 = 512.0 * kE * kE * double(p.d) * double(p.d) * p.sigma2_eff * maxc2 /
             (p.delta * p.delta * p.delta * p.delta) * log_term;
    out.L = out.L1 + out.L2;
    return out;
}

double initial_epoch_epsilon(double delta) {
    check_delta(delta);
    return delta * delta / (8.0 * kE);
}

double epoch0_epsilon(double delta, int d) {
    check_delta(delta);
    if (d < 2)
        throw invalid_dimension_error("dimension must be at least 2");
    return delta * delta / (8.0 * kE * double(d));
}

double l_lower_bound_initial(int d, double r, double sigma2_eff, double delta,
                             double c, InitMode mode) {
    check_delta(delta);
    if (d < 2)
        throw invalid_dimension_error("dimension must be at least 2");
    if (!(r >= 1.0))
        throw config_error("norm bound r must be at least 1");
    if (sigma2_eff < 0.0)
        throw config_error("sigma2 must be nonnegative");
    const double maxc2 = std::max(1.0, c * c);
    const double log_term = std::log(4.0 / delta);
    const double r4 = r * r * r * r;
    if (mode == InitMode::initial_epoch) {
        const double eps = initial_epoch_epsilon(delta);
        return 8.0 * double(d) * r4 * maxc2 / eps * log_term +
               8.0 * double(d) * double(d) * sigma2_eff * maxc2 / (eps * eps) *
                   log_term;
    }
    const double eps0 = epoch0_epsilon(delta, d);
    return 8.0 * r4 * maxc2 / eps0 * log_term +
           8.0 * sigma2_eff * maxc2 / (eps0 * eps0) * log_term;
}

BoundTerms theoretical_bound_terms(long long t, const BoundParams& p,
                                   const StepSchedule& sched) {
    check_c0(sched.c0);
    check_delta(p.delta);
    if (p.d < 2)
        throw invalid_dimension_error("dimension must be at least 2");
    if (!(sched.L > 0.0))
        throw config_error("bound evaluation requires offset L > 0");
    if (t < 0)
        throw config_error("iteration index must be nonnegative");
    const double C1 = bias_constant(p, sched.c, sched.L);
    const double C2 = variance_constant(p, sched.c, sched.c0, sched.L);
    const double denom = double(t) + sched.L + 1.0;
    BoundTerms out;
    out.bias = C1 * std::pow((sched.L + 1.0) / denom, sched.c0 / 2.0);
    out.variance = C2 * p.sigma2_eff / denom;
    out.total = out.bias + out.variance;
    return out;
}

double theoretical_bound(long long t, const BoundParams& p,
                         const StepSchedule& sched) {
    return theoretical_bound_terms(t, p, sched).total;
}

long long max_minibatch(long long T, double c0) {
    check_c0(c0);
    if (T < 1)
        throw config_error("horizon T must be positive");
    const double val = std::pow(double(T), 1.0 - 2.0 / c0);
    double f = std::floor(val);
    if (val - f > 1.0 - 1e-9)
        f += 1.0;
    return (long long)f;
}

EpochSchedule epoch_schedule(double delta, int d, double c0, double L) {
    check_delta(delta);
    check_c0(c0);
    if (d < 2)
        throw invalid_dimension_error("dimension must be at least 2");
    if (L < 0.0)
        throw config_error("offset L must be nonnegative");

    EpochSchedule out;
    out.L = L;
    out.c0 = c0;
    const double eps0 = epoch0_epsilon(delta, d);
    const double target = 1.0 / (2.0 * eps0);
    int J = int(std::ceil(std::log2(target) - 1e-12));
    if (J < 1)
        J = 1;
    out.J = J;

    const double growth = std::exp(5.0 / c0);
    out.t.resize(J + 1);
    out.eps.resize(J + 1);
    out.t[0] = 0;
    out.eps[0] = eps0;
    for (int j = 1; j <= J; ++j) {
        out.eps[j] = 2.0 * out.eps[j - 1];
        const double next = growth * (double(out.t[j - 1]) + L + 1.0) - (L + 1.0);
        if (next > 9.0e18)
            throw config_error("epoch schedule overflows integer range");
        long long tj = ceil_snap(next);
        if (tj <= out.t[j - 1])
            tj = out.t[j - 1] + 1;
        out.t[j] = tj;
    }
    return out;
}

FiniteSampleTerms finite_sample_bound_terms(long long T, long long B,
                                            long long mu,
                                            const BoundParams& p, double c0,
                                            double L1p, double L2p) {
    check_c0(c0);
    check_delta(p.delta);
    check_gap(p.eigengap);
    if (p.d < 2)
        throw invalid_dimension_error("dimension must be at least 2");
    if (T < 1 || B < 1 || mu < 0)
        throw config_error("require T >= 1, B >= 1, mu >= 0");
    if (!(L1p > 0.0) || !(L2p >= 0.0))
        throw config_error("require L1' > 0 and L2' >= 0");

    const double sigma2 = p.sigma2_eff;
    const double sigma2_B = sigma2 / double(B);
    const double L = L1p + sigma2_B * L2p;
    const double c = c0 / (2.0 * p.eigengap);

    FiniteSampleTerms out;
    out.C1 = bias_constant(p, c, L);
    out.C2 = variance_constant(p, c, c0, L);
    const double block = double(B + mu);
    out.bias = c0 * out.C1 * std::pow(block * L1p / double(T), c0 / 2.0);
    out.noise =
        c0 * out.C1 *
        std::pow(block * sigma2 * L2p / (double(B) * double(T)), c0 / 2.0);
    out.tail = out.C2 * sigma2 * block / (double(B) * double(T));
    out.total = out.bias + out.noise + out.tail;
    return out;
}

double finite_sample_bound(long long T, long long B, long long mu,
                           const BoundParams& p, double c0, double L1p,
                           double L2p) {
    return finite_sample_bound_terms(T, B, mu, p, c0, L1p, L2p).total;
}

double batch_error_bound(long long T, long long B, const BoundParams& p,
                         double c0, double L1p, double L2p) {
    return finite_sample_bound(T, B, 0, p, c0, L1p, L2p);
}

} // namespace spca
