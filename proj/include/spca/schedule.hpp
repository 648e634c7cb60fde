#ifndef SPCA_SCHEDULE_HPP
#define SPCA_SCHEDULE_HPP

// Step-size schedules and the finite-sample analysis that goes with them.
//
// The step size is gamma_t = c / (L + t) with c = c0 / (2 (lambda1 - lambda2)).
// The evaluators below compute, for a given problem instance,
//   * lower bounds on the offset L that the convergence guarantee requires,
//   * the expected-potential bound  E psi_t <= C1 ((L+1)/(t+L+1))^(c0/2)
//                                           + C2 sigma_eff^2 / (t+L+1),
//   * the largest admissible mini-batch size B <= T^(1-2/c0),
//   * the end-to-end error bound for a distributed mini-batch run with B
//     processed and mu discarded samples per iteration,
//   * an epoch schedule (t_j, eps_j) that doubles the potential margin
//     eps_j = 2^j eps_0 from eps_0 = delta^2/(8 e d) up to 1/2 while spacing
//     iterations so that t_{j+1} + L + 1 >= e^(5/c0) (t_j + L + 1).
//
// sigma2_eff is the variance proxy E |A - Sigma|_F^2 of whatever averaged
// sample matrix A the caller feeds the estimator: sigma^2 for single samples,
// sigma^2 / N for N-node averages, sigma^2 / B for mini-batches of size B.

#include <vector>

#include "spca/errors.hpp"

namespace spca {

struct StepSchedule {
    double c = 1.0;
    double c0 = 0.0;
    double L = 0.0;
    double eigengap = 0.0;

    // c derived from the guarantee parameter c0 > 2.
    static StepSchedule from_c0(double c0, double eigengap, double L);
    // c given directly (experimental usage; c0 kept for reference).
    static StepSchedule from_c(double c, double eigengap, double L);
};

// gamma_t = c / (L + t). Requires L + t > 0.
double step_size(long long t, const StepSchedule& sched);

struct BoundParams {
    int d = 0;
    double r = 1.0;          // norm bound on samples, >= 1
    double sigma2_eff = 0.0; // variance proxy, see header comment
    double delta = 0.1;      // failure probability, in (0, 1)
    double lambda1 = 1.0;
    double eigengap = 0.0;
};

struct LBound {
    double L1 = 0.0;
    double L2 = 0.0;
    double L = 0.0; // L1 + L2
};

// Offset lower bound backing the main convergence guarantee:
//   L1 = 64 e d r^4 max(1, c^2) / delta^2 * ln(4/delta)
//   L2 = 512 e^2 d^2 sigma2_eff max(1, c^2) / delta^4 * ln(4/delta)
LBound l_lower_bound_main(const BoundParams& p, double c);

// Which epoch's high-probability argument the offset bound serves.
enum class InitMode {
    initial_epoch,      // eps = delta^2 / (8e); d-dependent constants
    intermediate_epoch, // eps0 = delta^2 / (8 e d); d factors drop out
};

double initial_epoch_epsilon(double delta);          // delta^2 / (8 e)
double epoch0_epsilon(double delta, int d);          // delta^2 / (8 e d)

double l_lower_bound_initial(int d, double r, double sigma2_eff, double delta,
                             double c, InitMode mode = InitMode::initial_epoch);

struct BoundTerms {
    double bias = 0.0;     // C1 ((L+1)/(t+L+1))^(c0/2)
    double variance = 0.0; // C2 sigma2_eff / (t+L+1)
    double total = 0.0;
};

// Expected-potential bound at iteration t. Requires c0 > 2 and L > 0.
BoundTerms theoretical_bound_terms(long long t, const BoundParams& p,
                                   const StepSchedule& sched);
double theoretical_bound(long long t, const BoundParams& p,
                         const StepSchedule& sched);

// Largest mini-batch size that keeps the mini-batch guarantee intact.
long long max_minibatch(long long T, double c0);

struct EpochSchedule {
    std::vector<long long> t;  // epoch boundaries, t[0] = 0
    std::vector<double> eps;   // potential margins, eps[j] = 2^j eps0
    int J = 0;                 // index of the final epoch boundary
    double L = 0.0;
    double c0 = 0.0;
};

EpochSchedule epoch_schedule(double delta, int d, double c0, double L);

struct FiniteSampleTerms {
    double C1 = 0.0;
    double C2 = 0.0;
    double bias = 0.0;  // c0 C1 ((B+mu) L1' / T)^(c0/2)
    double noise = 0.0; // c0 C1 ((B+mu) sigma^2 L2' / (B T))^(c0/2)
    double tail = 0.0;  // C2 sigma^2 (B+mu) / (B T)
    double total = 0.0;
};

// Error bound after a stream of T samples processed in batches of B with mu
// further samples discarded per iteration. L1p/L2p play the roles of L1' and
// L2' (L1' >= L1, L2' >= L2 / sigma_B^2); p.sigma2_eff must hold the
// single-sample sigma^2.
FiniteSampleTerms finite_sample_bound_terms(long long T, long long B,
                                            long long mu,
                                            const BoundParams& p, double c0,
                                            double L1p, double L2p);
double finite_sample_bound(long long T, long long B, long long mu,
                           const BoundParams& p, double c0, double L1p,
                           double L2p);

// The mu = 0 specialization.
double batch_error_bound(long long T, long long B, const BoundParams& p,
                         double c0, double L1p, double L2p);

} // namespace spca

#endif
