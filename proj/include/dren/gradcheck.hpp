#pragma once

#include <cmath>
#include <cstddef>
#include <functional>
#include <vector>

#include "dren/error.hpp"

namespace dren {

using ScalarFn = std::function<double(const std::vector<double>&)>;

/// Central-difference gradient (f(x + h e_k) - f(x - h e_k)) / (2h) per
/// coordinate. Shared test oracle for every analytic gradient in the library.
inline std::vector<double> finite_diff_grad(const ScalarFn& f,
                                            const std::vector<double>& x,
                                            double h = 1e-6) {
    if (!(h > 0.0)) {
        throw InvalidConfigError("finite_diff_grad: step must be positive");
    }
    std::vector<double> grad(x.size(), 0.0);
    std::vector<double> probe = x;
    for (std::size_t k = 0; k < x.size(); ++k) {
        probe[k] = x[k] + h;
        const double fp = f(probe);
        probe[k] = x[k] - h;
        const double fm = f(probe);
        probe[k] = x[k];
        if (!std::isfinite(fp) || !std::isfinite(fm)) {
            throw OracleFailureError("finite_diff_grad: non-finite evaluation at coordinate " +
                                     std::to_string(k));
        }
        grad[k] = (fp - fm) / (2.0 * h);
    }
    return grad;
}

/// Central difference along a subset of coordinates; entries not in `coords`
/// are left at zero. Used when probing every coordinate would be wasteful.
inline std::vector<double> finite_diff_grad_at(const ScalarFn& f,
                                               const std::vector<double>& x,
                                               const std::vector<std::size_t>& coords,
                                               double h = 1e-6) {
    if (!(h > 0.0)) {
        throw InvalidConfigError("finite_diff_grad_at: step must be positive");
    }
    std::vector<double> grad(x.size(), 0.0);
    std::vector<double> probe = x;
    for (std::size_t k : coords) {
        probe[k] = x[k] + h;
        const double fp = f(probe);
        probe[k] = x[k] - h;
        const double fm = f(probe);
        probe[k] = x[k];
        if (!std::isfinite(fp) || !std::isfinite(fm)) {
            throw OracleFailureError("finite_diff_grad_at: non-finite evaluation at coordinate " +
                                     std::to_string(k));
        }
        grad[k] = (fp - fm) / (2.0 * h);
    }
    return grad;
}

/// Per-coordinate relative error |a - b| / max(guard, |a|, |b|), maximised
/// over the compared coordinates. The absolute guard keeps coordinates whose
/// true gradient is zero from amplifying finite-difference round-off.
inline double max_rel_error(const std::vector<double>& a,
                            const std::vector<double>& b,
                            double guard = 1e-6) {
    if (a.size() != b.size()) {
        throw InvalidInputError("max_rel_error: length mismatch");
    }
    double worst = 0.0;
    for (std::size_t k = 0; k < a.size(); ++k) {
        const double denom = std::max({guard, std::fabs(a[k]), std::fabs(b[k])});
        worst = std::max(worst, std::fabs(a[k] - b[k]) / denom);
    }
    return worst;
}

inline double max_rel_error_at(const std::vector<double>& a,
                               const std::vector<double>& b,
                               const std::vector<std::size_t>& coords,
                               double guard = 1e-6) {
    if (a.size() != b.size()) {
        throw InvalidInputError("max_rel_error_at: length mismatch");
    }
    double worst = 0.0;
    for (std::size_t k : coords) {
        const double denom = std::max({guard, std::fabs(a[k]), std::fabs(b[k])});
        worst = std::max(worst, std::fabs(a[k] - b[k]) / denom);
    }
    return worst;
}

} // namespace dren
