#pragma once

#include <Eigen/Dense>
#include <span>
#include <vector>

namespace rkbsnet {

/// minimize objective . x  subject to  eq_matrix x = eq_rhs, lower <= x <= upper.
/// Bound entries may be +-infinity.
struct LinearProgram {
    Eigen::VectorXd objective;
    Eigen::MatrixXd eq_matrix;
    Eigen::VectorXd eq_rhs;
    Eigen::VectorXd lower;
    Eigen::VectorXd upper;

    void validate() const;
    Eigen::Index num_vars() const { return objective.size(); }
    Eigen::Index num_rows() const { return eq_rhs.size(); }
};

enum class LpStatus { optimal, infeasible, unbounded };

/// On optimal: x is a basic (vertex) solution — at most num_rows variables
/// strictly between their bounds — with equality residual and bound
/// violations within the feasibility tolerance, and dual holds the equality
/// multipliers from the final basis.
struct LpSolution {
    LpStatus status = LpStatus::optimal;
    Eigen::VectorXd x;
    double objective = 0.0;
    std::vector<int> basis;
    Eigen::VectorXd dual;
    long iterations = 0;
};

/// Two-phase primal simplex for bounded variables. Bland's rule for both the
/// entering and leaving choices, so pivoting is deterministic and cycling is
/// impossible. Infeasible and unbounded problems are reported through the
/// status, never by throwing.
LpSolution solve_lp(const LinearProgram& lp, double tol = 1e-9);

/// Same solver started from a known feasible basis (one variable index per
/// equality row; all other variables sit at a finite bound, or at zero when
/// free). Falls back to phase 1 if the proposed basis is singular or the
/// implied point is infeasible.
LpSolution solve_lp_with_basis(const LinearProgram& lp, std::span<const int> basis,
                               double tol = 1e-9);

} // namespace rkbsnet
