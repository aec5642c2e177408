#pragma once

#include <Eigen/Dense>
#include <vector>

namespace quadsafe {

// Decision vectors have one (thrust) or two (tau_x, tau_y) entries; the fixed
// upper bound keeps them on the stack.
using QpVector = Eigen::Matrix<double, Eigen::Dynamic, 1, Eigen::ColMajor, 2, 1>;

// a . u + b >= 0
struct LinearConstraint {
    QpVector a;
    double b = 0.0;
};

// minimize 0.5 ||u - u_hat||^2  s.t.  rows, lower <= u <= upper
struct QpProblem {
    int dim = 1;
    QpVector u_hat;
    std::vector<LinearConstraint> rows;
    QpVector lower;
    QpVector upper;

    // Throws InvalidArgument.
    void validate() const;
};

enum class QpStatus { Optimal, Infeasible };

struct ActiveConstraint {
    enum class Kind { Row, Lower, Upper };
    Kind kind = Kind::Row;
    int index = 0;           // row index, or coordinate for box faces
    double multiplier = 0.0; // for the row scaled to unit-norm a
};

struct QpSolution {
    QpVector u_star;
    QpStatus status = QpStatus::Infeasible;
    std::vector<ActiveConstraint> active_set;
    double kkt_residual = 0.0;
    // Largest violation of any row at u_star, measured on unit-norm rows.
    // Zero (up to tolerance) for Optimal solutions.
    double max_violation = 0.0;
};

inline constexpr double kQpFeasibilityTol = 1e-9;
inline constexpr double kQpDegenerateRowNorm = 1e-12;

// Exact solver for dim <= 2. dim 1 intersects half-lines; dim 2 enumerates
// every active set of at most two constraints (rows and box faces) and keeps
// the feasible KKT point with the smallest objective.
QpSolution solve_qp(const QpProblem& p);

// Point in the box minimizing the largest row violation, and among those the
// one closest to u_hat. Status is Infeasible whenever that violation is
// positive.
QpSolution least_infeasible(const QpProblem& p);

// max(stationarity, primal violation, dual violation, complementarity) for a
// claimed solution with the given active set.
double kkt_residual(const QpProblem& p, const QpVector& u, const std::vector<ActiveConstraint>& active);

}  // namespace quadsafe
