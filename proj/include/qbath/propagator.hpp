// propagator.hpp: exact Heisenberg coefficients A, B_k, C, D_k of
//   a(t) = A a + sum_k B_k b_k + C a^dag + sum_k D_k b_k^dag
// obtained from a spectral decomposition of the dynamical matrix.

#pragma once

#include <cstddef>
#include <optional>
#include <vector>

#include <Eigen/Dense>

#include "qbath/core_model.hpp"

namespace qbath {

struct TimeGrid {
    std::vector<double> t;

    std::size_t size() const noexcept { return t.size(); }
    // steps + 1 equally spaced points on [0, t_max].
    static TimeGrid uniform(double t_max, std::size_t steps);
};

// Throws ParameterError unless t[0] == 0 and t is strictly increasing.
void check_grid(const TimeGrid& grid);

struct PropagatorCoefficients {
    ModelSpec model;
    TimeGrid grid;
    Eigen::VectorXcd A, C;    // [T]
    Eigen::MatrixXcd B, D;    // [T x N]
    Eigen::VectorXcd dA, dC;  // exact time derivatives
    Eigen::MatrixXcd dB, dD;

    std::size_t size() const noexcept { return grid.size(); }
    std::size_t modes() const noexcept { return model.modes(); }
};

// exp(M t) = V exp(Lambda t) V^-1 with M = -i Sigma K and K = L L^dag (Cholesky).
// K is positive definite for a valid model, so L^dag Sigma L is Hermitian and
// V = L^-dag U is built from a Hermitian eigenproblem. Without counter-rotating
// terms the two sectors decouple and V is unitary.
class Propagator {
public:
    explicit Propagator(const ModelSpec& model);

    // First row of exp(M t): coefficients of a(t).
    Eigen::RowVectorXcd row(double t) const;
    // First row of exp(M t) M.
    Eigen::RowVectorXcd row_derivative(double t) const;
    Eigen::MatrixXcd matrix(double t) const;

    // Condition number of V (sqrt of the condition number of K).
    double condition_number() const noexcept { return condition_; }
    const Eigen::VectorXd& frequencies() const noexcept { return lambda_; }

private:
    Eigen::VectorXd lambda_;        // eigenvalues of L^dag Sigma L; M has eigenvalues -i lambda
    Eigen::MatrixXcd right_;        // V = L^-dag U
    Eigen::MatrixXcd left_;         // V^-1 = U^dag L^dag
    Eigen::RowVectorXcd first_row_; // row 0 of V
    double condition_{1.0};
};

inline constexpr double max_condition_number = 1e7;

PropagatorCoefficients compute_propagator(const ModelSpec& model, const TimeGrid& grid, unsigned threads = 1);

// |A|^2 - |C|^2 + sum|B_k|^2 - sum|D_k|^2 - 1 at grid index i.
double sum_rule_defect(const PropagatorCoefficients& p, std::size_t i);

struct DecayReport {
    std::size_t late_begin{0};            // first index of the late window (last 20% of the grid)
    double late_sup_A{0.0};
    double late_sup_C{0.0};
    bool decayed{false};                  // |A| fell below the threshold at some point
    std::optional<double> recurrence_onset;
};

// Recurrence onset: after |A| first drops below threshold, the time of the first
// revival peak of |A| that reaches the threshold again.
DecayReport decay_report(const PropagatorCoefficients& p, double threshold = 0.1);

// Half-open index range [begin, end).
struct Window {
    std::size_t begin{0};
    std::size_t end{0};
    std::size_t size() const noexcept { return end - begin; }
};

// Plateau: from the first index where max(|A|, |C|) < level up to (excluding) the
// next index where it rises above level again.
std::optional<Window> plateau_window(const PropagatorCoefficients& p, double level = 0.01);

}  // namespace qbath
