#include "rkbsnet/lp.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace rkbsnet {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

enum class VarStatus : unsigned char { basic, at_lower, at_upper, free_zero };

// Bounded-variable primal simplex over the columns [structural | artificial].
// The basis matrix is refactorized every iteration and the basic values are
// recomputed from the factorization, so rounding never accumulates across
// pivots. Entering and leaving variables follow Bland's smallest-index rule.
class Simplex {
public:
    Simplex(const LinearProgram& lp, double tol)
        : n_(static_cast<int>(lp.num_vars())),
          rows_(static_cast<int>(lp.num_rows())),
          ncols_(n_ + rows_),
          tol_(tol),
          lp_(lp) {
        cols_.resize(rows_, ncols_);
        cols_.leftCols(n_) = lp.eq_matrix;
        cols_.rightCols(rows_).setZero();
        lower_.resize(ncols_);
        upper_.resize(ncols_);
        lower_.head(n_) = lp.lower;
        upper_.head(n_) = lp.upper;
        lower_.tail(rows_).setZero();
        upper_.tail(rows_).setConstant(kInf);
        x_ = Eigen::VectorXd::Zero(ncols_);
        status_.assign(static_cast<std::size_t>(ncols_), VarStatus::at_lower);
        cost_ = Eigen::VectorXd::Zero(ncols_);
        iter_cap_ = 10000 + 500L * ncols_;
    }

    LpSolution run() {
        start_phase1();
        if (!phase1_feasible()) {
            LpSolution sol;
            sol.status = LpStatus::infeasible;
            sol.iterations = iterations_;
            return sol;
        }
        return run_phase2();
    }

    LpSolution run_with_basis(std::span<const int> basis) {
        if (!try_start_from_basis(basis)) {
            start_phase1();
            if (!phase1_feasible()) {
                LpSolution sol;
                sol.status = LpStatus::infeasible;
                sol.iterations = iterations_;
                return sol;
            }
        }
        return run_phase2();
    }

private:
    enum class Step { optimal, unbounded, progress };

    void set_nonbasic_start(int j) {
        if (lower_(j) > -kInf) {
            status_[static_cast<std::size_t>(j)] = VarStatus::at_lower;
            x_(j) = lower_(j);
        } else if (upper_(j) < kInf) {
            status_[static_cast<std::size_t>(j)] = VarStatus::at_upper;
            x_(j) = upper_(j);
        } else {
            status_[static_cast<std::size_t>(j)] = VarStatus::free_zero;
            x_(j) = 0.0;
        }
    }

    void start_phase1() {
        in_phase1_ = true;
        basis_.resize(static_cast<std::size_t>(rows_));
        for (int j = 0; j < n_; ++j) set_nonbasic_start(j);
        Eigen::VectorXd residual = lp_.eq_rhs - cols_.leftCols(n_) * x_.head(n_);
        for (int i = 0; i < rows_; ++i) {
            const double sign = residual(i) >= 0.0 ? 1.0 : -1.0;
            cols_.col(n_ + i).setZero();
            cols_(i, n_ + i) = sign;
            lower_(n_ + i) = 0.0;
            upper_(n_ + i) = kInf;
            x_(n_ + i) = std::abs(residual(i));
            status_[static_cast<std::size_t>(n_ + i)] = VarStatus::basic;
            basis_[static_cast<std::size_t>(i)] = n_ + i;
        }
        cost_.setZero();
        cost_.tail(rows_).setConstant(1.0);
    }

    bool phase1_feasible() {
        iterate_until_done();
        double infeasibility = 0.0;
        for (int i = n_; i < ncols_; ++i) infeasibility += x_(i);
        const double feas_tol =
            tol_ * std::max(1.0, lp_.eq_rhs.size() ? lp_.eq_rhs.cwiseAbs().maxCoeff() : 0.0);
        if (infeasibility > feas_tol) return false;
        // Pin every artificial at zero for phase 2.
        for (int i = n_; i < ncols_; ++i) {
            lower_(i) = 0.0;
            upper_(i) = 0.0;
            if (status_[static_cast<std::size_t>(i)] != VarStatus::basic) x_(i) = 0.0;
        }
        return true;
    }

    bool try_start_from_basis(std::span<const int> basis) {
        if (static_cast<int>(basis.size()) != rows_) return false;
        std::vector<bool> used(static_cast<std::size_t>(ncols_), false);
        for (int b : basis) {
            if (b < 0 || b >= n_ || used[static_cast<std::size_t>(b)]) return false;
            used[static_cast<std::size_t>(b)] = true;
        }
        in_phase1_ = false;
        basis_.assign(basis.begin(), basis.end());
        for (int i = n_; i < ncols_; ++i) {
            lower_(i) = 0.0;
            upper_(i) = 0.0;
            x_(i) = 0.0;
            status_[static_cast<std::size_t>(i)] = VarStatus::at_lower;
        }
        for (int j = 0; j < n_; ++j) set_nonbasic_start(j);
        for (int b : basis) status_[static_cast<std::size_t>(b)] = VarStatus::basic;
        if (rows_ > 0) {
            factorize();
            if (!compute_basic_values()) return false;
            for (int i = 0; i < rows_; ++i) {
                const int b = basis_[static_cast<std::size_t>(i)];
                const double slack = tol_ * std::max(1.0, std::abs(x_(b)));
                if (x_(b) < lower_(b) - slack || x_(b) > upper_(b) + slack) return false;
            }
        }
        return true;
    }

    LpSolution run_phase2() {
        in_phase1_ = false;
        cost_.setZero();
        cost_.head(n_) = lp_.objective;
        const Step last = iterate_until_done();

        LpSolution sol;
        sol.iterations = iterations_;
        if (last == Step::unbounded) {
            sol.status = LpStatus::unbounded;
            return sol;
        }
        sol.status = LpStatus::optimal;
        sol.x = x_.head(n_);
        sol.objective = lp_.objective.dot(sol.x);
        sol.basis.assign(basis_.begin(), basis_.end());
        if (rows_ > 0) {
            factorize();
            Eigen::VectorXd basic_cost(rows_);
            for (int i = 0; i < rows_; ++i)
                basic_cost(i) = cost_(basis_[static_cast<std::size_t>(i)]);
            sol.dual = lu_.transpose().solve(basic_cost);
        } else {
            sol.dual.resize(0);
        }
        return sol;
    }

    void factorize() {
        Eigen::MatrixXd basis_matrix(rows_, rows_);
        for (int i = 0; i < rows_; ++i)
            basis_matrix.col(i) = cols_.col(basis_[static_cast<std::size_t>(i)]);
        lu_.compute(basis_matrix);
    }

    // Solves B x_B = b - N x_N with the current factorization; returns false
    // if the basis is numerically singular.
    bool compute_basic_values() {
        Eigen::VectorXd xv = x_;
        for (int b : basis_) xv(b) = 0.0;
        Eigen::VectorXd rhs = lp_.eq_rhs - cols_ * xv;
        Eigen::VectorXd xb = lu_.solve(rhs);
        if (!xb.allFinite()) return false;
        Eigen::VectorXd check = Eigen::VectorXd::Zero(rows_);
        for (int i = 0; i < rows_; ++i)
            check += xb(i) * cols_.col(basis_[static_cast<std::size_t>(i)]);
        if ((check - rhs).cwiseAbs().maxCoeff() >
            1e-7 * std::max(1.0, rhs.cwiseAbs().maxCoeff()))
            return false;
        for (int i = 0; i < rows_; ++i) x_(basis_[static_cast<std::size_t>(i)]) = xb(i);
        return true;
    }

    Step iterate_until_done() {
        while (true) {
            const Step s = step();
            if (s != Step::progress) return s;
            if (++iterations_ > iter_cap_)
                throw std::runtime_error("simplex iteration cap exceeded");
        }
    }

    Step step() {
        if (rows_ > 0) {
            factorize();
            if (!compute_basic_values())
                throw std::runtime_error("simplex basis became singular");
        }

        Eigen::VectorXd y;
        if (rows_ > 0) {
            Eigen::VectorXd basic_cost(rows_);
            for (int i = 0; i < rows_; ++i)
                basic_cost(i) = cost_(basis_[static_cast<std::size_t>(i)]);
            y = lu_.transpose().solve(basic_cost);
        }

        const double dual_tol =
            tol_ * std::max(1.0, cost_.size() ? cost_.cwiseAbs().maxCoeff() : 0.0);

        int enter = -1;
        int dir = 0;
        for (int j = 0; j < ncols_; ++j) {
            const VarStatus st = status_[static_cast<std::size_t>(j)];
            if (st == VarStatus::basic) continue;
            if (lower_(j) == upper_(j)) continue; // fixed
            const double reduced =
                cost_(j) - (rows_ > 0 ? y.dot(cols_.col(j)) : 0.0);
            if (st == VarStatus::at_lower && reduced < -dual_tol) {
                enter = j;
                dir = +1;
                break;
            }
            if (st == VarStatus::at_upper && reduced > dual_tol) {
                enter = j;
                dir = -1;
                break;
            }
            if (st == VarStatus::free_zero && std::abs(reduced) > dual_tol) {
                enter = j;
                dir = reduced < 0.0 ? +1 : -1;
                break;
            }
        }
        if (enter < 0) return Step::optimal;

        Eigen::VectorXd w;
        if (rows_ > 0) w = lu_.solve(cols_.col(enter));
        const double piv_tol =
            std::max(1e-11, 1e-12 * (rows_ > 0 ? w.cwiseAbs().maxCoeff() : 0.0));

        // Ratio test: basic values move by -dir * step * w.
        double best = kInf;
        int best_row = -1;
        bool leave_at_upper = false;
        for (int i = 0; i < rows_; ++i) {
            const double wi = dir * w(i);
            const int b = basis_[static_cast<std::size_t>(i)];
            double ratio;
            bool to_upper;
            if (wi > piv_tol) {
                if (lower_(b) == -kInf) continue;
                ratio = std::max(0.0, (x_(b) - lower_(b)) / wi);
                to_upper = false;
            } else if (wi < -piv_tol) {
                if (upper_(b) == kInf) continue;
                ratio = std::max(0.0, (upper_(b) - x_(b)) / (-wi));
                to_upper = true;
            } else {
                continue;
            }
            if (ratio < best ||
                (ratio == best && best_row >= 0 &&
                 b < basis_[static_cast<std::size_t>(best_row)])) {
                best = ratio;
                best_row = i;
                leave_at_upper = to_upper;
            }
        }

        const double own_span = upper_(enter) - lower_(enter); // inf unless boxed
        if (best_row < 0 && !(own_span < kInf)) return Step::unbounded;

        if (own_span < best) {
            // Bound flip: the entering variable crosses to its other bound.
            for (int i = 0; i < rows_; ++i)
                x_(basis_[static_cast<std::size_t>(i)]) -= dir * own_span * w(i);
            const bool was_lower = status_[static_cast<std::size_t>(enter)] == VarStatus::at_lower;
            x_(enter) = was_lower ? upper_(enter) : lower_(enter);
            status_[static_cast<std::size_t>(enter)] =
                was_lower ? VarStatus::at_upper : VarStatus::at_lower;
            return Step::progress;
        }

        const double delta = best;
        for (int i = 0; i < rows_; ++i)
            x_(basis_[static_cast<std::size_t>(i)]) -= dir * delta * w(i);
        const VarStatus enter_status = status_[static_cast<std::size_t>(enter)];
        const double enter_base = enter_status == VarStatus::at_lower
                                      ? lower_(enter)
                                      : (enter_status == VarStatus::at_upper ? upper_(enter) : 0.0);
        x_(enter) = enter_base + dir * delta;

        const int leaving = basis_[static_cast<std::size_t>(best_row)];
        x_(leaving) = leave_at_upper ? upper_(leaving) : lower_(leaving);
        status_[static_cast<std::size_t>(leaving)] =
            leave_at_upper ? VarStatus::at_upper : VarStatus::at_lower;
        basis_[static_cast<std::size_t>(best_row)] = enter;
        status_[static_cast<std::size_t>(enter)] = VarStatus::basic;

        // An artificial that leaves the basis is pinned at zero for good.
        if (in_phase1_ && leaving >= n_) {
            lower_(leaving) = 0.0;
            upper_(leaving) = 0.0;
            x_(leaving) = 0.0;
        }
        return Step::progress;
    }

    int n_;
    int rows_;
    int ncols_;
    double tol_;
    const LinearProgram& lp_;
    Eigen::MatrixXd cols_;
    Eigen::VectorXd lower_, upper_, cost_, x_;
    std::vector<VarStatus> status_;
    std::vector<int> basis_;
    Eigen::PartialPivLU<Eigen::MatrixXd> lu_;
    bool in_phase1_ = false;
    long iterations_ = 0;
    long iter_cap_ = 0;
};

} // namespace

void LinearProgram::validate() const {
    const Eigen::Index n = objective.size();
    if (n == 0) throw std::invalid_argument("linear program has no variables");
    if (!objective.allFinite())
        throw std::invalid_argument("objective entries must be finite");
    if (eq_matrix.rows() != eq_rhs.size() || (eq_matrix.rows() > 0 && eq_matrix.cols() != n))
        throw std::invalid_argument("equality system dimensions are inconsistent");
    if (lower.size() != n || upper.size() != n)
        throw std::invalid_argument("bound vectors must match the variable count");
    if (eq_matrix.size() > 0 && !eq_matrix.allFinite())
        throw std::invalid_argument("equality matrix entries must be finite");
    if (eq_rhs.size() > 0 && !eq_rhs.allFinite())
        throw std::invalid_argument("equality right-hand side must be finite");
    for (Eigen::Index j = 0; j < n; ++j) {
        if (std::isnan(lower(j)) || std::isnan(upper(j)))
            throw std::invalid_argument("bounds must not be NaN");
        if (lower(j) > upper(j))
            throw std::invalid_argument("lower bound exceeds upper bound");
    }
}

LpSolution solve_lp(const LinearProgram& lp, double tol) {
    lp.validate();
    Simplex solver(lp, tol);
    return solver.run();
}

LpSolution solve_lp_with_basis(const LinearProgram& lp, std::span<const int> basis,
                               double tol) {
    lp.validate();
    Simplex solver(lp, tol);
    return solver.run_with_basis(basis);
}

} // namespace rkbsnet
