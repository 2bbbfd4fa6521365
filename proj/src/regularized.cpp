#include "rkbsnet/regularized.hpp"

#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

#include "rkbsnet/lp.hpp"
#include "rkbsnet/mni.hpp"

namespace rkbsnet {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double soft_threshold(double z, double lambda) {
    if (z > lambda) return z - lambda;
    if (z < -lambda) return z + lambda;
    return 0.0;
}

DiscreteMeasure measure_from_coefficients(const Eigen::VectorXd& c,
                                          const CandidateSet& cands,
                                          const NetworkSpec& spec, const WeightFn& w,
                                          double coeff_tol, double merge_tol) {
    DiscreteMeasure mu;
    mu.spec = spec;
    mu.weight = w;
    for (Eigen::Index p = 0; p < c.size(); ++p)
        if (c(p) != 0.0)
            mu.atoms.push_back({cands.points[static_cast<std::size_t>(p)], c(p)});
    return prune(mu, coeff_tol, merge_tol);
}

RegResult solve_square(const RegProblem& problem, const CandidateSet& cands,
                       const RegOptions& opts, const Eigen::VectorXd* warm_start) {
    const Eigen::MatrixXd& A = problem.A.entries;
    const Eigen::Index P = A.cols();
    const Eigen::VectorXd y = vectorize_targets(problem.Y);
    const double lambda = problem.lambda;

    Eigen::VectorXd col_sqnorm(P);
    for (Eigen::Index p = 0; p < P; ++p) col_sqnorm(p) = A.col(p).squaredNorm();

    Eigen::VectorXd c;
    if (warm_start != nullptr) {
        if (warm_start->size() != P)
            throw std::invalid_argument("warm start has wrong length");
        c = *warm_start;
    } else {
        c = Eigen::VectorXd::Zero(P);
    }

    RegResult result;
    RegReport& report = result.report;
    report.converged = false;

    Eigen::VectorXd residual = y - A * c;
    double prev_objective = 0.5 * residual.squaredNorm() + lambda * c.lpNorm<1>();
    for (long sweep = 1; sweep <= opts.max_sweeps; ++sweep) {
        report.sweeps = sweep;
        residual = y - A * c; // fresh at sweep start so rounding cannot drift
        double max_change = 0.0;
        for (Eigen::Index p = 0; p < P; ++p) {
            if (col_sqnorm(p) == 0.0) {
                if (c(p) != 0.0) {
                    max_change = std::max(max_change, std::abs(c(p)));
                    c(p) = 0.0;
                }
                continue;
            }
            const double z = A.col(p).dot(residual) + col_sqnorm(p) * c(p);
            const double updated = soft_threshold(z, lambda) / col_sqnorm(p);
            const double change = updated - c(p);
            if (change != 0.0) {
                residual -= change * A.col(p);
                c(p) = updated;
                max_change = std::max(max_change, std::abs(change));
            }
        }
        const double objective = 0.5 * residual.squaredNorm() + lambda * c.lpNorm<1>();
        if (objective > prev_objective + 1e-12 * std::max(1.0, prev_objective))
            report.objective_monotone = false;
        prev_objective = objective;
        if (max_change <= opts.tol) {
            report.converged = true;
            break;
        }
    }

    residual = y - A * c;
    report.loss_value = 0.5 * residual.squaredNorm();
    report.tv = c.lpNorm<1>();
    report.kkt_max_violation =
        kkt_check(c, problem.A, problem.Y, lambda, Loss::square, opts.support_tol);

    result.coefficients = c;
    result.measure = measure_from_coefficients(c, cands, problem.A.spec,
                                               problem.A.weight, opts.coeff_tol,
                                               opts.merge_tol);
    report.trivial_zero = result.measure.atoms.empty();
    return result;
}

RegResult solve_absolute(const RegProblem& problem, const CandidateSet& cands,
                         const RegOptions& opts) {
    const Eigen::MatrixXd& A = problem.A.entries;
    const Eigen::Index tm = A.rows();
    const Eigen::Index P = A.cols();
    const Eigen::VectorXd y = vectorize_targets(problem.Y);
    const double lambda = problem.lambda;

    // Variables [cp | cn | up | un]: minimize lambda (cp + cn) + (up + un)
    // subject to A (cp - cn) + up - un = y, all parts nonnegative.
    const Eigen::Index nvars = 2 * P + 2 * tm;
    LinearProgram lp;
    lp.objective.resize(nvars);
    lp.objective.head(2 * P).setConstant(lambda);
    lp.objective.tail(2 * tm).setConstant(1.0);
    lp.eq_matrix.resize(tm, nvars);
    lp.eq_matrix.leftCols(P) = A;
    lp.eq_matrix.middleCols(P, P) = -A;
    lp.eq_matrix.middleCols(2 * P, tm) = Eigen::MatrixXd::Identity(tm, tm);
    lp.eq_matrix.rightCols(tm) = -Eigen::MatrixXd::Identity(tm, tm);
    lp.eq_rhs = y;
    lp.lower = Eigen::VectorXd::Zero(nvars);
    lp.upper = Eigen::VectorXd::Constant(nvars, kInf);

    // c = 0 with the residual split over up/un is a feasible vertex.
    std::vector<int> basis(static_cast<std::size_t>(tm));
    for (Eigen::Index i = 0; i < tm; ++i)
        basis[static_cast<std::size_t>(i)] =
            static_cast<int>(y(i) >= 0.0 ? 2 * P + i : 2 * P + tm + i);
    const LpSolution sol = solve_lp_with_basis(lp, basis, opts.lp_tol);
    if (sol.status != LpStatus::optimal)
        throw std::runtime_error("solve_regularized: absolute-loss LP did not solve");

    Eigen::VectorXd c(P);
    for (Eigen::Index p = 0; p < P; ++p) c(p) = sol.x(p) - sol.x(P + p);

    RegResult result;
    result.coefficients = c;
    result.report.loss_value = (A * c - y).lpNorm<1>();
    result.report.tv = c.lpNorm<1>();
    // Optimality is certified by the simplex exit test; no separate residual.
    result.report.kkt_max_violation = 0.0;
    result.report.converged = true;
    result.report.sweeps = sol.iterations;
    result.measure = measure_from_coefficients(c, cands, problem.A.spec,
                                               problem.A.weight, opts.coeff_tol,
                                               opts.merge_tol);
    result.report.trivial_zero = result.measure.atoms.empty();
    return result;
}

} // namespace

Loss loss_from_string(const std::string& name) {
    if (name == "square") return Loss::square;
    if (name == "absolute") return Loss::absolute;
    throw std::invalid_argument("unknown loss '" + name + "'");
}

std::string to_string(Loss loss) {
    return loss == Loss::square ? "square" : "absolute";
}

RegResult solve_regularized(const RegProblem& problem, const CandidateSet& cands,
                            const RegOptions& opts, const Eigen::VectorXd* warm_start) {
    if (!(problem.lambda > 0.0))
        throw std::invalid_argument("regularization parameter lambda must be positive");
    if (problem.A.entries.cols() != cands.count())
        throw std::invalid_argument("feature matrix and candidate set disagree");
    if (problem.Y.rows() * problem.Y.cols() != problem.A.entries.rows())
        throw std::invalid_argument("target matrix does not match the feature matrix");

    RegResult result = problem.loss == Loss::square
                           ? solve_square(problem, cands, opts, warm_start)
                           : solve_absolute(problem, cands, opts);
    return result;
}

double kkt_check(const Eigen::VectorXd& c, const FeatureMatrix& A,
                 const Eigen::MatrixXd& Y, double lambda, Loss loss,
                 double support_tol) {
    if (loss != Loss::square)
        throw std::invalid_argument(
            "kkt_check applies to the square loss (absolute loss is certified by LP "
            "duality)");
    const Eigen::VectorXd residual = vectorize_targets(Y) - A.entries * c;
    const Eigen::VectorXd grad = A.entries.transpose() * residual;
    double violation = 0.0;
    for (Eigen::Index p = 0; p < c.size(); ++p) {
        violation = std::max(violation, std::abs(grad(p)) - lambda);
        if (std::abs(c(p)) > support_tol)
            violation = std::max(violation,
                                 std::abs(grad(p) - lambda * (c(p) > 0.0 ? 1.0 : -1.0)));
    }
    return std::max(0.0, violation);
}

ConsistencyResult mni_consistency(const DiscreteMeasure& mu, const FeatureMatrix& A,
                                  const CandidateSet& cands, double lp_tol) {
    ConsistencyResult out;
    if (mu.atoms.empty()) {
        out.trivial = true;
        return out;
    }
    const int m = A.data.count();
    const int t = mu.spec.output_dim;
    Eigen::MatrixXd predictions(t, m);
    for (int j = 0; j < m; ++j)
        predictions.col(j) = f_mu_eval(mu, A.data.x[static_cast<std::size_t>(j)]);
    if (predictions.isZero(0.0)) {
        out.trivial = true;
        return out;
    }
    const DualCertificate cert = solve_dual(A, predictions, lp_tol);
    out.gap = std::abs(tv_norm(mu) - cert.cstar);
    return out;
}

std::vector<PathRow> lambda_path(const FeatureMatrix& A, const Eigen::MatrixXd& Y,
                                 Loss loss, const std::vector<double>& lambdas,
                                 const CandidateSet& cands, const RegOptions& opts) {
    if (lambdas.empty()) throw std::invalid_argument("lambda list must be nonempty");
    for (std::size_t i = 0; i < lambdas.size(); ++i) {
        if (!(lambdas[i] > 0.0))
            throw std::invalid_argument("lambda values must be positive");
        if (i > 0 && !(lambdas[i] < lambdas[i - 1]))
            throw std::invalid_argument("lambda values must be strictly descending");
    }

    RegProblem problem;
    problem.A = A;
    problem.Y = Y;
    problem.loss = loss;

    std::vector<PathRow> rows;
    rows.reserve(lambdas.size());
    Eigen::VectorXd warm;
    for (double lambda : lambdas) {
        problem.lambda = lambda;
        const RegResult res =
            solve_regularized(problem, cands, opts,
                              (loss == Loss::square && warm.size() > 0) ? &warm : nullptr);
        rows.push_back({lambda, res.report.loss_value, res.report.tv,
                        res.report.kkt_max_violation});
        warm = res.coefficients;
    }
    return rows;
}

} // namespace rkbsnet
