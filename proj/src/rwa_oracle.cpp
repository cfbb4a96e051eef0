#include "qbath/rwa_oracle.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <utility>

#include "qbath/errors.hpp"

namespace qbath {

namespace {

void check_abs_a2(double abs_a2) {
    if (!(abs_a2 >= 0.0 && abs_a2 <= 1.0)) throw ParameterError("rwa oracle: |A|^2 must lie in [0, 1]");
}

}  // namespace

OverlapParams overlap_params(const CatState& cat) noexcept {
    const cplx o = coherent_overlap(cat.alpha, cat.beta);
    return {std::abs(o), std::arg(o)};
}

double purity_squeezed_rwa(double abs_a2, double r) {
    check_abs_a2(abs_a2);
    if (!(r >= 0.0)) throw ParameterError("rwa oracle: r must be >= 0");
    const double sh = std::sinh(r);
    return 1.0 / std::sqrt(1.0 + 4.0 * abs_a2 * (1.0 - abs_a2) * sh * sh);
}

double purity_cat_rwa(double abs_a2, cplx alpha, cplx beta) {
    check_abs_a2(abs_a2);
    const double norm = cat_normalization(CatState{alpha, beta});
    if (!(norm > 0.0)) throw ParameterError("rwa oracle: cat normalization must be positive");
    const double d2 = std::norm(alpha - beta);
    return 1.0 + 2.0 / (norm * norm) *
                     (std::exp(-(1.0 - abs_a2) * d2) + std::exp(-abs_a2 * d2) - std::exp(-d2) - 1.0);
}

double purity_cat_at_half(const OverlapParams& overlap) {
    const double num = 1.0 - overlap.R;
    const double den = 1.0 + overlap.R * std::cos(overlap.varphi);
    return 1.0 - num * num / (2.0 * den * den);
}

MinPurityReport min_purity_check(const std::vector<double>& purity, const std::vector<double>& abs_a2,
                                 double symmetry_tol) {
    if (purity.size() != abs_a2.size() || purity.empty()) {
        throw DataError("min_purity_check: series must be non-empty and of equal length");
    }
    MinPurityReport report;
    const auto [lo, hi] = std::minmax_element(purity.begin(), purity.end());
    report.argmin = static_cast<std::size_t>(lo - purity.begin());
    report.min_purity = *lo;
    report.abs_a2_at_min = abs_a2[report.argmin];
    if (*hi - *lo < 1e-12) {
        report.constant = true;
        return report;
    }

    std::size_t nearest = 0;
    for (std::size_t k = 1; k < abs_a2.size(); ++k) {
        if (std::abs(abs_a2[k] - 0.5) < std::abs(abs_a2[nearest] - 0.5)) nearest = k;
    }
    report.nearest_half = nearest;
    if (nearest > 0) report.resolution = std::max(report.resolution, std::abs(abs_a2[nearest] - abs_a2[nearest - 1]));
    if (nearest + 1 < abs_a2.size()) {
        report.resolution = std::max(report.resolution, std::abs(abs_a2[nearest + 1] - abs_a2[nearest]));
    }
    report.min_at_half = std::abs(report.abs_a2_at_min - 0.5) <= std::abs(abs_a2[nearest] - 0.5) + report.resolution;

    std::vector<std::pair<double, double>> curve(purity.size());
    for (std::size_t k = 0; k < purity.size(); ++k) curve[k] = {abs_a2[k], purity[k]};
    std::sort(curve.begin(), curve.end());
    auto interpolate = [&](double x) {
        const auto it = std::lower_bound(curve.begin(), curve.end(), std::make_pair(x, -1e300));
        if (it == curve.begin()) return it->second;
        if (it == curve.end()) return curve.back().second;
        const auto prev = std::prev(it);
        const double span = it->first - prev->first;
        if (span <= 0.0) return it->second;
        const double w = (x - prev->first) / span;
        return (1.0 - w) * prev->second + w * it->second;
    };
    for (const auto& [x, value] : curve) {
        const double mirror = 1.0 - x;
        if (mirror < curve.front().first || mirror > curve.back().first) continue;
        report.symmetry_defect = std::max(report.symmetry_defect, std::abs(value - interpolate(mirror)));
    }
    report.passed = report.min_at_half && report.symmetry_defect <= symmetry_tol;
    return report;
}

}  // namespace qbath
