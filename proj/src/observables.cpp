#include "qbath/observables.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <numeric>
#include <string>

#include "qbath/errors.hpp"
#include "qbath/parallel.hpp"

namespace qbath {

namespace {

// |chi|^2 below this at the boundary of the quadrature box counts as negligible.
constexpr double envelope_floor = 1e-16;
const double envelope_exponent = -std::log(envelope_floor);

Eigen::Index row_index(const PropagatorCoefficients& p, std::size_t i) {
    if (i >= p.size()) throw ParameterError("observables: grid index " + std::to_string(i) + " out of range");
    return static_cast<Eigen::Index>(i);
}

bool all_zero(const NumberState& ns) {
    return std::all_of(ns.n.begin(), ns.n.end(), [](std::uint64_t n) { return n == 0; });
}

// The number state with every n_k = 0 is the zero-temperature equilibrium bath.
BathSpec canonical(const BathSpec& bath) {
    if (const auto* ns = std::get_if<NumberState>(&bath); ns && all_zero(*ns)) return Equilibrium{zero_temperature};
    return bath;
}

// (alpha, gamma) entering the variances for each bath kind.
GaussianFParams variance_params(const PropagatorCoefficients& p, std::size_t i, const BathSpec& bath) {
    if (const auto* eq = std::get_if<Equilibrium>(&bath)) return equilibrium_F_params(p, i, eq->beta);
    if (const auto* ns = std::get_if<NumberState>(&bath)) return number_equivalent_params(p, i, ns->n);
    GaussianFParams vac = equilibrium_F_params(p, i, zero_temperature);
    return vac;
}

cplx coherent_delta(const PropagatorCoefficients& p, std::size_t i, const BathSpec& bath) {
    if (const auto* cs = std::get_if<CoherentState>(&bath)) return coherent_F_params(p, i, cs->amps).delta;
    return 0.0;
}

double x_scale(const ModelSpec& m) { return std::sqrt(m.units.hbar / (2.0 * m.units.mass * m.nu)); }
double p_scale(const ModelSpec& m) { return std::sqrt(m.units.hbar * m.units.mass * m.nu / 2.0); }

// Radius beyond which |chi|^2 < envelope_floor, from separate bounds on F and chi0.
double envelope_radius(const PropagatorCoefficients& p, std::size_t i, const BathSpec& bath,
                       const OscillatorState& s) {
    const Eigen::Index r = row_index(p, i);
    double radius = std::numeric_limits<double>::infinity();

    const GaussianFParams f = variance_params(p, i, bath);
    const double q_bath = 2.0 * f.alpha - 4.0 * std::abs(f.gamma);
    if (q_bath > 1e-12) radius = std::sqrt(envelope_exponent / q_bath);

    const double contraction = std::abs(p.A(r)) - std::abs(p.C(r));
    if (contraction > 1e-12) {
        double rho = 0.0;
        if (const auto* cat = std::get_if<CatState>(&s)) {
            rho = std::abs(cat->alpha - cat->beta) + std::sqrt(envelope_exponent) + 1.0;
        } else {
            const InitialMoments m = initial_moments(s);
            const double q_osc = 2.0 * (m.centered_n() + 0.5) - 2.0 * std::abs(m.centered_aa());
            rho = std::sqrt(envelope_exponent / q_osc);
        }
        radius = std::min(radius, rho / contraction);
    }
    if (!std::isfinite(radius)) {
        throw AccuracyError("purity: integrand has no decaying envelope at index " + std::to_string(i),
                            std::numeric_limits<double>::infinity());
    }
    return radius;
}

// Trapezoid sum of an even integrand over [-R, R]^2 with 2n+1 nodes per axis, divided by pi.
template <class Integrand>
double trapezoid(const Integrand& f, double radius, std::size_t n) {
    const double h = radius / static_cast<double>(n);
    const auto count = static_cast<long>(n);
    auto weight = [&](long j) { return (j == -count || j == count) ? 0.5 : 1.0; };
    double total = 0.0;
    // f(-eta) = f(eta): rows y > 0 counted twice, the y = 0 row folded onto x >= 0
    for (long iy = 0; iy <= count; ++iy) {
        const double wy = weight(iy) * (iy == 0 ? 1.0 : 2.0);
        const double y = h * static_cast<double>(iy);
        for (long ix = -count; ix <= count; ++ix) {
            if (iy == 0 && ix < 0) continue;
            const double wx = weight(ix) * ((iy == 0 && ix > 0) ? 2.0 : 1.0);
            total += wx * wy * f(cplx(h * static_cast<double>(ix), y));
        }
    }
    return total * h * h / std::numbers::pi;
}

template <class Integrand>
double boundary_max(const Integrand& f, double radius) {
    constexpr int samples = 64;
    double worst = 0.0;
    for (int k = 0; k < samples; ++k) {
        const double u = -radius + 2.0 * radius * k / samples;
        for (const cplx eta : {cplx(u, radius), cplx(radius, u), cplx(u, -radius), cplx(-radius, u)}) {
            worst = std::max(worst, f(eta));
        }
    }
    return worst;
}

// Grows the box until the integrand is negligible on its edge, then halves the step
// until two levels agree.
template <class Integrand>
double integrate_plane(const Integrand& f, double radius, const PurityOptions& options, std::size_t i) {
    for (int grow = 0; grow < 8 && boundary_max(f, radius) > envelope_floor; ++grow) radius *= 1.5;
    std::size_t n = 24;
    double coarse = trapezoid(f, radius, n);
    while (2 * n <= options.max_half_points) {
        n *= 2;
        const double fine = trapezoid(f, radius, n);
        if (std::abs(fine - coarse) <= options.tolerance) return fine;
        coarse = fine;
    }
    throw AccuracyError("purity: quadrature did not converge at index " + std::to_string(i), std::abs(coarse));
}

// ln I_0(y) for y >= 0 without overflow.
double log_bessel_i0(double y) {
    if (y < 600.0) return std::log(std::cyl_bessel_i(0.0, y));
    return y - 0.5 * std::log(2.0 * std::numbers::pi * y) + std::log1p(1.0 / (8.0 * y));
}

}  // namespace

cplx chi_eval(const PropagatorCoefficients& p, std::size_t i, const BathSpec& bath, const OscillatorState& s,
              cplx eta) {
    const Eigen::Index r = row_index(p, i);
    const cplx lambda = eta * std::conj(p.A(r)) - std::conj(eta) * p.C(r);
    return chi0_eval(s, lambda) * bath_F_eval(p, i, bath, eta);
}

ChiJet chi_jet(const PropagatorCoefficients& p, std::size_t i, const BathSpec& bath, const OscillatorState& s,
               cplx eta) {
    const Eigen::Index r = row_index(p, i);
    const cplx a = p.A(r), c = p.C(r), da = p.dA(r), dc = p.dC(r);
    const cplx eta_bar = std::conj(eta);
    const cplx lambda = eta * std::conj(a) - eta_bar * c;
    const Chi0Jet osc = chi0_jet(s, lambda);

    ChiJet jet;
    jet.bath = bath_log_F_jet(p, i, bath, eta);
    const cplx f = jet.bath.value;
    jet.value = osc.value * f;
    // lambda = eta A^* - eta^* C, lambda^* = eta^* A - eta C^*
    jet.d_eta = (osc.d_lambda * std::conj(a) - osc.d_lambda_bar * std::conj(c)) * f + jet.value * jet.bath.d_eta;
    jet.d_eta_bar = (-osc.d_lambda * c + osc.d_lambda_bar * a) * f + jet.value * jet.bath.d_eta_bar;
    const cplx lambda_dot = eta * std::conj(da) - eta_bar * dc;
    jet.d_t = (osc.d_lambda * lambda_dot + osc.d_lambda_bar * std::conj(lambda_dot)) * f + jet.value * jet.bath.d_t;
    return jet;
}

MeanXP mean_xp(const PropagatorCoefficients& p, std::size_t i, const BathSpec& bath, const OscillatorState& s) {
    check_bath(bath, p.modes());
    const Eigen::Index r = row_index(p, i);
    const cplx a = p.A(r), c = p.C(r);
    const cplx m = initial_moments(s).mean_a;
    const cplx delta = coherent_delta(p, i, bath);
    const cplx core_x = (std::conj(a) + c) * std::conj(m) + (a + std::conj(c)) * m + delta + std::conj(delta);
    const cplx core_p =
        cplx(0.0, 1.0) * ((std::conj(a) - c) * std::conj(m) - (a - std::conj(c)) * m + std::conj(delta) - delta);
    return {x_scale(p.model) * core_x.real(), p_scale(p.model) * core_p.real()};
}

Variances variances(const PropagatorCoefficients& p, std::size_t i, const BathSpec& bath, const OscillatorState& s) {
    check_bath(bath, p.modes());
    const Eigen::Index r = row_index(p, i);
    const cplx a = p.A(r), c = p.C(r);
    const InitialMoments m = initial_moments(s);
    const double width = m.centered_n() + 0.5;
    const cplx sq = m.centered_aa();
    const GaussianFParams f = variance_params(p, i, bath);

    const cplx plus = a + std::conj(c);
    const cplx minus = a - std::conj(c);
    const cplx core_x = std::conj(plus) * std::conj(plus) * std::conj(sq) + plus * plus * sq +
                        2.0 * std::norm(plus) * width + 2.0 * (f.alpha + 2.0 * f.gamma.real());
    const cplx core_p = -std::conj(minus) * std::conj(minus) * std::conj(sq) - minus * minus * sq +
                        2.0 * std::norm(minus) * width + 2.0 * (f.alpha - 2.0 * f.gamma.real());
    const double sx = x_scale(p.model), sp = p_scale(p.model);
    return {sx * sx * core_x.real(), sp * sp * core_p.real()};
}

TotalGaussian total_gaussian(const PropagatorCoefficients& p, std::size_t i, const BathSpec& bath,
                             const OscillatorState& s) {
    const BathSpec b = canonical(bath);
    const auto f = gaussian_F_jet(p, i, b);
    if (!f || !is_gaussian(s)) throw ParameterError("total_gaussian: needs a Gaussian state and a Gaussian bath");
    const Eigen::Index r = row_index(p, i);
    const cplx a = p.A(r), c = p.C(r);
    const InitialMoments m = initial_moments(s);
    const double width = m.centered_n() + 0.5;
    const cplx sq = m.centered_aa();

    TotalGaussian g;
    g.mean = a * m.mean_a + c * std::conj(m.mean_a) + f->value.delta;
    g.a = f->value.alpha + width * (std::norm(a) + std::norm(c)) + 2.0 * (sq * a * std::conj(c)).real();
    g.g = f->value.gamma + width * a * c + 0.5 * sq * a * a + 0.5 * std::conj(sq) * c * c;
    return g;
}

double gaussian_purity(double a, cplx g) {
    const double det = a * a - 4.0 * std::norm(g);
    if (!(det > 0.0)) {
        throw PhysicalityError("purity: Gaussian form not positive (a^2 - 4|g|^2 = " + std::to_string(det) + ")", a,
                               std::abs(g));
    }
    return 1.0 / (2.0 * std::sqrt(det));
}

double purity(const PropagatorCoefficients& p, std::size_t i, const BathSpec& bath, const OscillatorState& s,
              const PurityOptions& options) {
    check_bath(bath, p.modes());
    const BathSpec b = canonical(bath);
    if (!options.force_quadrature && is_gaussian(s) && !std::holds_alternative<NumberState>(b)) {
        const TotalGaussian g = total_gaussian(p, i, b, s);
        return gaussian_purity(g.a, g.g);
    }
    return purity_quadrature(p, i, b, s, options);
}

double purity_quadrature(const PropagatorCoefficients& p, std::size_t i, const BathSpec& bath,
                         const OscillatorState& s, const PurityOptions& options) {
    check_bath(bath, p.modes());
    check_state(s);
    const auto integrand = [&](cplx eta) { return std::norm(chi_eval(p, i, bath, s, eta)); };
    return integrate_plane(integrand, envelope_radius(p, i, bath, s), options, i);
}

double averaged_purity_number_exact(const PropagatorCoefficients& p, std::size_t i, double beta,
                                    const OscillatorState& s, const PurityOptions& options) {
    check_state(s);
    const Eigen::Index r = row_index(p, i);
    const Eigen::VectorXd occ = mean_occupations(p.model, beta);
    const GaussianFParams vac = equilibrium_F_params(p, i, zero_temperature);
    const auto integrand = [&](cplx eta) {
        const cplx eta_bar = std::conj(eta);
        const cplx lambda = eta * std::conj(p.A(r)) - eta_bar * p.C(r);
        double log_mean = 2.0 * std::log(std::abs(gaussian_F_eval(vac, eta)));
        for (Eigen::Index k = 0; k < occ.size(); ++k) {
            if (occ(k) == 0.0) continue;
            // mean of L_n(x)^2 over the geometric distribution
            const double x = std::norm(eta * std::conj(p.B(r, k)) - eta_bar * p.D(r, k));
            log_mean += -2.0 * occ(k) * x + log_bessel_i0(2.0 * x * std::sqrt(occ(k) * (occ(k) + 1.0)));
        }
        return std::norm(chi0_eval(s, lambda)) * std::exp(log_mean);
    };
    return integrate_plane(integrand, envelope_radius(p, i, Equilibrium{beta}, s), options, i);
}

Moments moments(const PropagatorCoefficients& p, std::size_t i, const BathSpec& bath, const OscillatorState& s) {
    const MeanXP mean = mean_xp(p, i, bath, s);
    const Variances var = variances(p, i, bath, s);
    return {mean.x, mean.p, var.x, var.p, purity(p, i, bath, s)};
}

double number_variance_of_variance(const PropagatorCoefficients& p, std::size_t i, double beta) {
    const Eigen::Index r = row_index(p, i);
    const Eigen::VectorXd occ = mean_occupations(p.model, beta);
    const double scale = p.model.units.hbar / (p.model.units.mass * p.model.nu);
    double total = 0.0;
    for (Eigen::Index k = 0; k < occ.size(); ++k) {
        const double w = std::norm(p.B(r, k) + std::conj(p.D(r, k)));
        total += w * w * (occ(k) * occ(k) + occ(k));
    }
    return scale * scale * total;
}

EnsembleEstimate summarize(const std::vector<double>& values, std::uint64_t seed) {
    EnsembleEstimate est;
    est.n_samples = values.size();
    est.seed = seed;
    if (values.empty()) return est;
    double sum = 0.0;
    for (const double v : values) sum += v;
    est.estimate = sum / static_cast<double>(values.size());
    if (values.size() > 1) {
        double ss = 0.0;
        for (const double v : values) ss += (v - est.estimate) * (v - est.estimate);
        const double var = ss / static_cast<double>(values.size() - 1);
        est.std_error = std::sqrt(var / static_cast<double>(values.size()));
    }
    return est;
}

EnsembleEstimate averaged_purity_number_ensemble(const PropagatorCoefficients& p, std::size_t i, double beta,
                                                 const OscillatorState& s, std::size_t n_samples,
                                                 std::uint64_t seed, unsigned threads) {
    if (std::isinf(beta)) {
        return summarize({purity(p, i, Equilibrium{zero_temperature}, s)}, seed);
    }
    if (n_samples == 0) throw ParameterError("averaged_purity_number_ensemble: need at least one sample");
    std::vector<double> values(n_samples);
    parallel_for(n_samples, threads, [&](std::size_t k) {
        const NumberState ns = sample_number_state(beta, p.model, member_seed(seed, k));
        values[k] = purity(p, i, ns, s);
    });
    return summarize(values, seed);
}

std::vector<cplx> eta_test_grid(double extent, std::size_t points) {
    std::vector<cplx> grid;
    if (points < 2) return {cplx(0.0, 0.0)};
    grid.reserve(points * points);
    for (std::size_t a = 0; a < points; ++a) {
        for (std::size_t b = 0; b < points; ++b) {
            const double x = -extent + 2.0 * extent * static_cast<double>(a) / static_cast<double>(points - 1);
            const double y = -extent + 2.0 * extent * static_cast<double>(b) / static_cast<double>(points - 1);
            grid.emplace_back(x, y);
        }
    }
    return grid;
}

double displaced_vacuum_check(const PropagatorCoefficients& p, std::size_t i, const Eigen::VectorXcd& amps,
                              const OscillatorState& s, const std::vector<cplx>& eta_grid) {
    const CoherentState bath{amps};
    const CoherentState vacuum_bath{Eigen::VectorXcd::Zero(amps.size())};
    const OscillatorState vacuum = GaussianMoments{};
    const cplx delta = coherent_F_params(p, i, amps).delta;
    double worst = 0.0;
    for (const cplx eta : eta_grid) {
        const cplx chi = chi_eval(p, i, bath, s, eta);
        const cplx displaced = std::exp(std::conj(delta) * eta - delta * std::conj(eta)) *
                               chi_eval(p, i, vacuum_bath, vacuum, eta);
        worst = std::max(worst, std::abs(chi - displaced));
    }
    return worst;
}

}  // namespace qbath
