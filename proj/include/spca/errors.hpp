#ifndef SPCA_ERRORS_HPP
#define SPCA_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace spca {

// Base class for everything thrown by this library. The CLI maps the three
// families below onto distinct process exit codes, so keep new error types
// inside one of them.
struct error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Bad arguments, bad configuration, operation outside its supported domain.
struct config_error : error {
    using error::error;
};

struct invalid_dimension_error : config_error {
    using config_error::config_error;
};

struct invalid_batch_error : config_error {
    using config_error::config_error;
};

struct unsupported_regime_error : config_error {
    using config_error::config_error;
};

struct model_inconsistency_error : config_error {
    using config_error::config_error;
};

struct insufficient_points_error : config_error {
    using config_error::config_error;
};

// Unreadable or malformed input data.
struct data_error : error {
    using error::error;
};

// Numerical failure at runtime: overflow, degenerate state, non-convergence.
struct numeric_error : error {
    using error::error;
};

struct degenerate_iterate_error : numeric_error {
    using numeric_error::numeric_error;
};

struct numeric_overflow_error : numeric_error {
    using numeric_error::numeric_error;
};

struct convergence_error : numeric_error {
    convergence_error(const std::string& what, double residual)
        : numeric_error(what), residual(residual) {}
    double residual;
};

} // namespace spca

#endif
