// rwa_oracle.hpp: closed-form purity for RWA coupling with a coherent (or vacuum) bath.
// Both forms depend on time only through |A(t)|^2.

#pragma once

#include <complex>
#include <cstddef>
#include <vector>

#include "qbath/oscillator_states.hpp"

namespace qbath {

// <alpha|beta> = R e^{i varphi}
struct OverlapParams {
    double R{1.0};
    double varphi{0.0};
};

OverlapParams overlap_params(const CatState& cat) noexcept;

// 1 / sqrt(1 + 4 |A|^2 (1 - |A|^2) sinh^2 r)
double purity_squeezed_rwa(double abs_a2, double r);

// 1 + (2/N^2)(e^{-(1-|A|^2)|a-b|^2} + e^{-|A|^2 |a-b|^2} - e^{-|a-b|^2} - 1)
double purity_cat_rwa(double abs_a2, cplx alpha, cplx beta);

// Cat purity at |A|^2 = 1/2 written through the overlap: 1 - (1-R)^2 / (2 (1 + R cos varphi)^2)
double purity_cat_at_half(const OverlapParams& overlap);

struct MinPurityReport {
    std::size_t argmin{0};
    double min_purity{1.0};
    double abs_a2_at_min{0.0};
    std::size_t nearest_half{0};      // index where |A|^2 is closest to 1/2
    double resolution{0.0};           // local |A|^2 spacing around nearest_half
    bool min_at_half{true};
    double symmetry_defect{0.0};      // max |P(x) - P(1 - x)| over mirrored samples
    bool constant{false};
    bool passed{true};
};

// Checks that the purity minimum sits where |A|^2 is nearest 1/2 and that purity, viewed
// as a function of |A|^2, is symmetric about 1/2 (linear interpolation between samples).
MinPurityReport min_purity_check(const std::vector<double>& purity, const std::vector<double>& abs_a2,
                                 double symmetry_tol = 1e-7);

}  // namespace qbath
