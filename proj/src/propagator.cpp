#include "qbath/propagator.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>

#include "qbath/errors.hpp"
#include "qbath/parallel.hpp"

namespace qbath {

TimeGrid TimeGrid::uniform(double t_max, std::size_t steps) {
    if (!(t_max >= 0.0) || !std::isfinite(t_max)) throw ParameterError("time grid: t_max must be >= 0");
    TimeGrid grid;
    if (steps == 0 || t_max == 0.0) {
        grid.t = {0.0};
        return grid;
    }
    grid.t.resize(steps + 1);
    for (std::size_t i = 0; i <= steps; ++i) {
        grid.t[i] = t_max * static_cast<double>(i) / static_cast<double>(steps);
    }
    return grid;
}

void check_grid(const TimeGrid& grid) {
    if (grid.t.empty()) throw ParameterError("time grid: needs at least one point");
    if (grid.t.front() != 0.0) throw ParameterError("time grid: must start at t = 0");
    for (std::size_t i = 1; i < grid.t.size(); ++i) {
        if (!(grid.t[i] > grid.t[i - 1]) || !std::isfinite(grid.t[i])) {
            throw ParameterError("time grid: must be strictly increasing at index " + std::to_string(i));
        }
    }
}

Propagator::Propagator(const ModelSpec& model) {
    const Eigen::MatrixXcd k = 2.0 * quadratic_form(model);
    const Eigen::Index h = static_cast<Eigen::Index>(model.modes()) + 1;

    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> spectrum(k, Eigen::EigenvaluesOnly);
    if (spectrum.info() != Eigen::Success) throw NumericalError("propagator: eigensolver failed on H");
    const double lo = spectrum.eigenvalues().minCoeff();
    const double hi = spectrum.eigenvalues().maxCoeff();
    if (!(lo > 0.0)) {
        throw NumericalError("propagator: Hamiltonian is not positive definite (min eigenvalue " +
                                 std::to_string(0.5 * lo) + ")",
                             std::numeric_limits<double>::infinity());
    }

    // Number-conserving coupling: K is block diagonal and each sector evolves unitarily.
    if (k.topRightCorner(h, h).isZero(0.0)) {
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> sector(k.topLeftCorner(h, h));
        if (sector.info() != Eigen::Success) throw NumericalError("propagator: eigensolver failed on h");
        const Eigen::MatrixXcd& w = sector.eigenvectors();
        lambda_.resize(2 * h);
        lambda_ << sector.eigenvalues(), -sector.eigenvalues();
        right_ = Eigen::MatrixXcd::Zero(2 * h, 2 * h);
        right_.topLeftCorner(h, h) = w;
        right_.bottomRightCorner(h, h) = w.conjugate();
        left_ = right_.adjoint();
        first_row_ = right_.row(0);
        condition_ = 1.0;
        return;
    }

    condition_ = std::sqrt(hi / lo);
    if (condition_ > max_condition_number) {
        throw NumericalError("propagator: ill-conditioned eigenvector basis, cond(V) = " + std::to_string(condition_),
                             condition_);
    }

    Eigen::LLT<Eigen::MatrixXcd> llt(k);
    if (llt.info() != Eigen::Success) throw NumericalError("propagator: Cholesky factorization failed", condition_);
    const Eigen::MatrixXcd l = llt.matrixL();

    Eigen::MatrixXcd sigma_l = l;
    sigma_l.bottomRows(h) *= -1.0;
    Eigen::MatrixXcd s = l.adjoint() * sigma_l;
    s = 0.5 * (s + s.adjoint()).eval();

    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> eig(s);
    if (eig.info() != Eigen::Success) throw NumericalError("propagator: eigensolver failed on L^dag Sigma L", condition_);
    lambda_ = eig.eigenvalues();
    const Eigen::MatrixXcd& u = eig.eigenvectors();

    right_ = l.adjoint().triangularView<Eigen::Upper>().solve(u);
    left_ = u.adjoint() * l.adjoint();
    first_row_ = right_.row(0);
}

Eigen::RowVectorXcd Propagator::row(double t) const {
    Eigen::RowVectorXcd weights(lambda_.size());
    for (Eigen::Index m = 0; m < lambda_.size(); ++m) {
        weights(m) = first_row_(m) * std::polar(1.0, -lambda_(m) * t);
    }
    return weights * left_;
}

Eigen::RowVectorXcd Propagator::row_derivative(double t) const {
    Eigen::RowVectorXcd weights(lambda_.size());
    for (Eigen::Index m = 0; m < lambda_.size(); ++m) {
        weights(m) = first_row_(m) * cplx(0.0, -lambda_(m)) * std::polar(1.0, -lambda_(m) * t);
    }
    return weights * left_;
}

Eigen::MatrixXcd Propagator::matrix(double t) const {
    Eigen::VectorXcd phases(lambda_.size());
    for (Eigen::Index m = 0; m < lambda_.size(); ++m) phases(m) = std::polar(1.0, -lambda_(m) * t);
    return right_ * phases.asDiagonal() * left_;
}

PropagatorCoefficients compute_propagator(const ModelSpec& model, const TimeGrid& grid, unsigned threads) {
    check_grid(grid);
    const Propagator prop(model);
    const std::size_t steps = grid.size();
    const Eigen::Index n = static_cast<Eigen::Index>(model.modes());
    const auto t_count = static_cast<Eigen::Index>(steps);

    PropagatorCoefficients p;
    p.model = model;
    p.grid = grid;
    p.A.resize(t_count);
    p.C.resize(t_count);
    p.dA.resize(t_count);
    p.dC.resize(t_count);
    p.B.resize(t_count, n);
    p.D.resize(t_count, n);
    p.dB.resize(t_count, n);
    p.dD.resize(t_count, n);

    parallel_for(steps, threads, [&](std::size_t idx) {
        const auto i = static_cast<Eigen::Index>(idx);
        const double t = grid.t[idx];
        const Eigen::RowVectorXcd r = t == 0.0 ? Eigen::RowVectorXcd::Unit(2 * n + 2, 0) : prop.row(t);
        const Eigen::RowVectorXcd dr = prop.row_derivative(t);
        p.A(i) = r(0);
        p.B.row(i) = r.segment(1, n);
        p.C(i) = r(n + 1);
        p.D.row(i) = r.segment(n + 2, n);
        p.dA(i) = dr(0);
        p.dB.row(i) = dr.segment(1, n);
        p.dC(i) = dr(n + 1);
        p.dD.row(i) = dr.segment(n + 2, n);
    });
    return p;
}

double sum_rule_defect(const PropagatorCoefficients& p, std::size_t i) {
    if (i >= p.size()) throw ParameterError("sum_rule_defect: index out of range");
    const auto k = static_cast<Eigen::Index>(i);
    return std::norm(p.A(k)) - std::norm(p.C(k)) + p.B.row(k).squaredNorm() - p.D.row(k).squaredNorm() - 1.0;
}

DecayReport decay_report(const PropagatorCoefficients& p, double threshold) {
    DecayReport report;
    const std::size_t steps = p.size();
    if (steps == 0) return report;
    report.late_begin = steps - std::max<std::size_t>(1, steps / 5);
    for (std::size_t i = report.late_begin; i < steps; ++i) {
        const auto k = static_cast<Eigen::Index>(i);
        report.late_sup_A = std::max(report.late_sup_A, std::abs(p.A(k)));
        report.late_sup_C = std::max(report.late_sup_C, std::abs(p.C(k)));
    }

    auto abs_a = [&](std::size_t i) { return std::abs(p.A(static_cast<Eigen::Index>(i))); };
    std::size_t i = 0;
    while (i < steps && abs_a(i) >= threshold) ++i;
    if (i == steps) return report;
    report.decayed = true;
    while (i < steps && abs_a(i) < threshold) ++i;
    if (i == steps) return report;
    while (i + 1 < steps && abs_a(i + 1) >= abs_a(i)) ++i;
    report.recurrence_onset = p.grid.t[i];
    return report;
}

std::optional<Window> plateau_window(const PropagatorCoefficients& p, double level) {
    auto envelope = [&](std::size_t i) {
        const auto k = static_cast<Eigen::Index>(i);
        return std::max(std::abs(p.A(k)), std::abs(p.C(k)));
    };
    const std::size_t steps = p.size();
    std::size_t begin = 0;
    while (begin < steps && envelope(begin) >= level) ++begin;
    if (begin == steps) return std::nullopt;
    std::size_t end = begin;
    while (end < steps && envelope(end) < level) ++end;
    return Window{begin, end};
}

}  // namespace qbath
