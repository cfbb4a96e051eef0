#include "qbath/bath_states.hpp"

#include <cmath>
#include <random>
#include <string>

#include "qbath/errors.hpp"
#include "qbath/laguerre.hpp"

namespace qbath {

namespace {

Eigen::Index row_index(const PropagatorCoefficients& p, std::size_t i) {
    if (i >= p.size()) throw ParameterError("bath: grid index " + std::to_string(i) + " out of range");
    return static_cast<Eigen::Index>(i);
}

void check_beta(double beta) {
    if (!(beta > 0.0)) throw ParameterError("bath: beta must be positive (use +inf for zero temperature)");
}

std::uint64_t splitmix64(std::uint64_t x) noexcept {
    x += 0x9E3779B97F4A7C15ULL;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
}

std::mt19937_64 seeded_engine(std::uint64_t seed) {
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32)};
    return std::mt19937_64(seq);
}

Eigen::VectorXd half_shifted(const Eigen::VectorXd& occ) { return occ.array() + 0.5; }

}  // namespace

void check_bath(const BathSpec& bath, std::size_t modes) {
    if (const auto* eq = std::get_if<Equilibrium>(&bath)) {
        check_beta(eq->beta);
    } else if (const auto* ns = std::get_if<NumberState>(&bath)) {
        if (ns->n.size() != modes) throw DataError("bath: occupation array length does not match N");
    } else if (const auto* cs = std::get_if<CoherentState>(&bath)) {
        if (static_cast<std::size_t>(cs->amps.size()) != modes) {
            throw DataError("bath: amplitude array length does not match N");
        }
        if (!cs->amps.allFinite()) throw DataError("bath: non-finite coherent amplitude");
    }
}

double occupation(double beta, double omega, double hbar) {
    check_beta(beta);
    if (!(omega > 0.0)) throw ParameterError("occupation: omega must be positive");
    if (std::isinf(beta)) return 0.0;
    return 1.0 / std::expm1(beta * hbar * omega);
}

Eigen::VectorXd mean_occupations(const ModelSpec& model, double beta) {
    Eigen::VectorXd occ(model.omegas.size());
    for (Eigen::Index k = 0; k < occ.size(); ++k) occ(k) = occupation(beta, model.omegas(k), model.units.hbar);
    return occ;
}

cplx gaussian_F_eval(const GaussianFParams& f, cplx eta) {
    return std::exp(std::conj(f.delta) * eta - f.delta * std::conj(eta) - f.alpha * std::norm(eta) +
                    std::conj(f.gamma) * eta * eta + f.gamma * std::conj(eta) * std::conj(eta));
}

GaussianFJet weighted_F_jet(const PropagatorCoefficients& p, std::size_t i, const Eigen::VectorXd& weights) {
    const Eigen::Index r = row_index(p, i);
    if (weights.size() != static_cast<Eigen::Index>(p.modes())) throw DataError("bath: weight vector has wrong length");
    GaussianFJet jet;
    for (Eigen::Index k = 0; k < weights.size(); ++k) {
        const cplx b = p.B(r, k), d = p.D(r, k), db = p.dB(r, k), dd = p.dD(r, k);
        const double w = weights(k);
        jet.value.alpha += (std::norm(b) + std::norm(d)) * w;
        jet.value.gamma += b * d * w;
        jet.d_alpha += 2.0 * (std::conj(b) * db + std::conj(d) * dd).real() * w;
        jet.d_gamma += (db * d + b * dd) * w;
    }
    return jet;
}

GaussianFParams equilibrium_F_params(const PropagatorCoefficients& p, std::size_t i, double beta) {
    return equilibrium_F_jet(p, i, beta).value;
}

GaussianFJet equilibrium_F_jet(const PropagatorCoefficients& p, std::size_t i, double beta) {
    return weighted_F_jet(p, i, half_shifted(mean_occupations(p.model, beta)));
}

GaussianFParams number_equivalent_params(const PropagatorCoefficients& p, std::size_t i,
                                         const std::vector<std::uint64_t>& n) {
    check_bath(NumberState{n}, p.modes());
    Eigen::VectorXd w(static_cast<Eigen::Index>(n.size()));
    for (std::size_t k = 0; k < n.size(); ++k) w(static_cast<Eigen::Index>(k)) = static_cast<double>(n[k]) + 0.5;
    return weighted_F_jet(p, i, w).value;
}

cplx number_F_eval(const PropagatorCoefficients& p, std::size_t i, const std::vector<std::uint64_t>& n, cplx eta) {
    return bath_log_F_jet(p, i, NumberState{n}, eta).value;
}

GaussianFParams coherent_F_params(const PropagatorCoefficients& p, std::size_t i, const Eigen::VectorXcd& amps) {
    return coherent_F_jet(p, i, amps).value;
}

GaussianFJet coherent_F_jet(const PropagatorCoefficients& p, std::size_t i, const Eigen::VectorXcd& amps) {
    check_bath(CoherentState{amps}, p.modes());
    const Eigen::Index r = row_index(p, i);
    // alpha, gamma are the zero-temperature values whatever the amplitudes
    GaussianFJet jet = weighted_F_jet(p, i, Eigen::VectorXd::Constant(amps.size(), 0.5));
    for (Eigen::Index k = 0; k < amps.size(); ++k) {
        jet.value.delta += p.B(r, k) * amps(k) + p.D(r, k) * std::conj(amps(k));
        jet.d_delta += p.dB(r, k) * amps(k) + p.dD(r, k) * std::conj(amps(k));
    }
    return jet;
}

std::optional<GaussianFJet> gaussian_F_jet(const PropagatorCoefficients& p, std::size_t i, const BathSpec& bath) {
    check_bath(bath, p.modes());
    if (const auto* eq = std::get_if<Equilibrium>(&bath)) return equilibrium_F_jet(p, i, eq->beta);
    if (const auto* cs = std::get_if<CoherentState>(&bath)) return coherent_F_jet(p, i, cs->amps);
    return std::nullopt;
}

cplx bath_F_eval(const PropagatorCoefficients& p, std::size_t i, const BathSpec& bath, cplx eta) {
    if (const auto jet = gaussian_F_jet(p, i, bath)) return gaussian_F_eval(jet->value, eta);
    return bath_log_F_jet(p, i, bath, eta).value;
}

LogFJet bath_log_F_jet(const PropagatorCoefficients& p, std::size_t i, const BathSpec& bath, cplx eta) {
    check_bath(bath, p.modes());
    const cplx eta_bar = std::conj(eta);
    const double abs2 = std::norm(eta);

    auto gaussian_part = [&](const GaussianFJet& g, LogFJet& out) {
        const GaussianFParams& f = g.value;
        out.d_eta += std::conj(f.delta) - f.alpha * eta_bar + 2.0 * std::conj(f.gamma) * eta;
        out.d_eta_bar += -f.delta - f.alpha * eta + 2.0 * f.gamma * eta_bar;
        out.d_t += std::conj(g.d_delta) * eta - g.d_delta * eta_bar - g.d_alpha * abs2 +
                   std::conj(g.d_gamma) * eta * eta + g.d_gamma * eta_bar * eta_bar;
        return std::conj(f.delta) * eta - f.delta * eta_bar - f.alpha * abs2 + std::conj(f.gamma) * eta * eta +
               f.gamma * eta_bar * eta_bar;
    };

    LogFJet out;
    out.d_eta = out.d_eta_bar = out.d_t = 0.0;
    if (const auto jet = gaussian_F_jet(p, i, bath)) {
        out.value = std::exp(gaussian_part(*jet, out));
        return out;
    }

    const auto& n = std::get<NumberState>(bath).n;
    const Eigen::Index r = row_index(p, i);
    const GaussianFJet vac = weighted_F_jet(p, i, Eigen::VectorXd::Constant(static_cast<Eigen::Index>(n.size()), 0.5));
    cplx exponent = gaussian_part(vac, out);
    double mantissa = 1.0;
    for (std::size_t kk = 0; kk < n.size(); ++kk) {
        if (n[kk] == 0) continue;
        const auto k = static_cast<Eigen::Index>(kk);
        const cplx b = p.B(r, k), d = p.D(r, k);
        const cplx xi = eta * std::conj(b) - eta_bar * d;
        const cplx xi_dot = eta * std::conj(p.dB(r, k)) - eta_bar * p.dD(r, k);
        const double x = std::norm(xi);
        const ScaledValue l0 = laguerre_scaled(n[kk], x);
        const ScaledValue l1 = laguerre_scaled(n[kk] - 1, x, 1.0);
        mantissa *= l0.mantissa;
        exponent += l0.log_scale;
        if (l0.mantissa == 0.0) {
            out.flagged = true;
            continue;
        }
        // d ln L_n / dx = -L^{(1)}_{n-1} / L_n
        const double ratio = -(l1.mantissa / l0.mantissa) * std::exp(l1.log_scale - l0.log_scale);
        if (!std::isfinite(ratio) || std::abs(ratio) > 1e9) out.flagged = true;
        out.d_eta += ratio * (std::conj(b) * std::conj(xi) - std::conj(d) * xi);
        out.d_eta_bar += ratio * (b * xi - d * std::conj(xi));
        out.d_t += ratio * 2.0 * (std::conj(xi) * xi_dot).real();
    }
    out.value = mantissa * std::exp(exponent);
    return out;
}

std::uint64_t member_seed(std::uint64_t seed, std::uint64_t index) noexcept {
    return splitmix64(seed ^ splitmix64(index));
}

NumberState sample_number_state(double beta, const ModelSpec& model, std::uint64_t seed) {
    check_beta(beta);
    NumberState out;
    out.n.assign(model.modes(), 0);
    if (std::isinf(beta)) return out;
    auto engine = seeded_engine(seed);
    for (std::size_t k = 0; k < model.modes(); ++k) {
        const double success = -std::expm1(-beta * model.units.hbar * model.omegas(static_cast<Eigen::Index>(k)));
        if (success >= 1.0) continue;
        std::geometric_distribution<std::uint64_t> dist(success);
        out.n[k] = dist(engine);
    }
    return out;
}

CoherentState sample_coherent_state(double beta, const ModelSpec& model, std::uint64_t seed) {
    check_beta(beta);
    CoherentState out;
    out.amps = Eigen::VectorXcd::Zero(static_cast<Eigen::Index>(model.modes()));
    if (std::isinf(beta)) return out;
    auto engine = seeded_engine(seed);
    std::normal_distribution<double> normal(0.0, 1.0);
    const Eigen::VectorXd occ = mean_occupations(model, beta);
    for (Eigen::Index k = 0; k < occ.size(); ++k) {
        const double sd = std::sqrt(0.5 * occ(k));
        const double re = normal(engine);
        const double im = normal(engine);
        out.amps(k) = cplx(sd * re, sd * im);
    }
    return out;
}

NoiseCorrelation delta_correlations(const PropagatorCoefficients& p, std::size_t i, std::size_t j, double beta) {
    const Eigen::Index a = row_index(p, i);
    const Eigen::Index b = row_index(p, j);
    const Eigen::VectorXd occ = mean_occupations(p.model, beta);
    NoiseCorrelation c;
    for (Eigen::Index k = 0; k < occ.size(); ++k) {
        c.c1 += (p.B(a, k) * std::conj(p.B(b, k)) + p.D(a, k) * std::conj(p.D(b, k))) * occ(k);
        c.c2 += (p.B(a, k) * p.D(b, k) + p.B(b, k) * p.D(a, k)) * occ(k);
    }
    return c;
}

}  // namespace qbath
