// laguerre.hpp: generalized Laguerre polynomials by the three-term upward recurrence
//   (k + 1) L_{k+1} = (2k + 1 + a - x) L_k - (k + a) L_{k-1}

#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>

namespace qbath {

// value = mantissa * exp(log_scale)
struct ScaledValue {
    double mantissa{1.0};
    double log_scale{0.0};

    double value() const noexcept { return mantissa * std::exp(log_scale); }
};

// L_n^{(a)}(x). The pair (L_k, L_{k-1}) is renormalized whenever it leaves [1e-150, 1e150],
// so the recurrence cannot overflow for any n.
inline ScaledValue laguerre_scaled(std::uint64_t n, double x, double a = 0.0) noexcept {
    constexpr double upper = 1e150;
    constexpr double lower = 1e-150;
    ScaledValue out;
    if (n == 0) return out;
    double prev = 1.0;
    double curr = 1.0 + a - x;
    double log_scale = 0.0;
    for (std::uint64_t k = 1; k < n; ++k) {
        const double kd = static_cast<double>(k);
        const double next = ((2.0 * kd + 1.0 + a - x) * curr - (kd + a) * prev) / (kd + 1.0);
        prev = curr;
        curr = next;
        const double mag = std::max(std::abs(curr), std::abs(prev));
        if (mag > upper || (mag < lower && mag > 0.0)) {
            const double shift = std::log(mag);
            curr /= mag;
            prev /= mag;
            log_scale += shift;
        }
    }
    out.mantissa = curr;
    out.log_scale = log_scale;
    return out;
}

inline double laguerre(std::uint64_t n, double x, double a = 0.0) noexcept {
    return laguerre_scaled(n, x, a).value();
}

}  // namespace qbath
