#include "rkbsnet/mni.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

#include "rkbsnet/lp.hpp"

namespace rkbsnet {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

int locate_candidate(const Eigen::VectorXd& theta, const CandidateSet& cands,
                     double merge_tol) {
    for (int p = 0; p < cands.count(); ++p)
        if ((theta.array() == cands.points[static_cast<std::size_t>(p)].array()).all())
            return p;
    for (int p = 0; p < cands.count(); ++p)
        if ((theta - cands.points[static_cast<std::size_t>(p)]).cwiseAbs().maxCoeff() <=
            merge_tol)
            return p;
    throw std::runtime_error("verify_representer: atom location not in the candidate set");
}

MniReport build_report(const std::vector<int>& support_indices,
                       const std::vector<double>& support_coeffs,
                       const DualCertificate& cert, const FeatureMatrix& A,
                       const Eigen::MatrixXd& Y, const MniOptions& opts) {
    MniReport report;
    report.argmax_tol = opts.argmax_tol;
    report.atom_count = static_cast<int>(support_indices.size());

    double tv = 0.0;
    for (double c : support_coeffs) tv += std::abs(c);
    report.tv = tv;
    report.duality_gap = std::abs(tv - cert.cstar);
    report.coeff_sum_gap = std::abs(tv - cert.ghat_norm);

    Eigen::VectorXd residual = -vectorize_targets(Y);
    for (std::size_t i = 0; i < support_indices.size(); ++i)
        residual += support_coeffs[i] * A.entries.col(support_indices[i]);
    report.max_interp_residual =
        residual.size() > 0 ? residual.cwiseAbs().maxCoeff() : 0.0;

    if (cert.ghat_norm > 0.0) {
        const std::vector<int> argmax = argmax_set(cert, opts.argmax_tol);
        for (std::size_t i = 0; i < support_indices.size(); ++i) {
            const int p = support_indices[i];
            if (!std::binary_search(argmax.begin(), argmax.end(), p))
                report.support_in_argmax = false;
            const double ghat = cert.ghat_values(p);
            if (ghat == 0.0 || (support_coeffs[i] > 0.0) != (ghat > 0.0))
                report.sign_aligned = false;
        }
    } else if (!support_indices.empty()) {
        report.support_in_argmax = false;
        report.sign_aligned = false;
    }
    return report;
}

} // namespace

DualCertificate solve_dual(const FeatureMatrix& A, const Eigen::MatrixXd& Y,
                           double lp_tol) {
    const Eigen::Index tm = A.entries.rows();
    const Eigen::Index P = A.entries.cols();
    if (Y.size() == 0 || Y.rows() * Y.cols() != tm)
        throw std::invalid_argument("solve_dual: target matrix does not match A");
    if (Y.isZero(0.0))
        throw std::invalid_argument(
            "solve_dual: Y = 0 has no certificate direction (the zero measure "
            "interpolates)");

    // Variables [c (free, tm) | r (boxed, P)] with A^T c - r = 0 and
    // r in [-1, 1]; maximizing vec(Y) . c. The all-slack basis at c = 0 is
    // feasible, so phase 1 is skipped.
    LinearProgram lp;
    lp.objective.resize(tm + P);
    lp.objective.head(tm) = -vectorize_targets(Y);
    lp.objective.tail(P).setZero();
    lp.eq_matrix.resize(P, tm + P);
    lp.eq_matrix.leftCols(tm) = A.entries.transpose();
    lp.eq_matrix.rightCols(P) = -Eigen::MatrixXd::Identity(P, P);
    lp.eq_rhs = Eigen::VectorXd::Zero(P);
    lp.lower.resize(tm + P);
    lp.upper.resize(tm + P);
    lp.lower.head(tm).setConstant(-kInf);
    lp.upper.head(tm).setConstant(kInf);
    lp.lower.tail(P).setConstant(-1.0);
    lp.upper.tail(P).setConstant(1.0);

    std::vector<int> slack_basis(static_cast<std::size_t>(P));
    std::iota(slack_basis.begin(), slack_basis.end(), static_cast<int>(tm));
    const LpSolution sol = solve_lp_with_basis(lp, slack_basis, lp_tol);

    if (sol.status == LpStatus::unbounded)
        throw std::runtime_error(
            "solve_dual: dual problem unbounded — the feature matrix is rank "
            "deficient on this candidate set (linear-independence hypothesis fails)");
    if (sol.status != LpStatus::optimal)
        throw std::runtime_error("solve_dual: LP solver did not reach optimality");

    DualCertificate cert;
    const int t = static_cast<int>(Y.rows());
    const int m = static_cast<int>(Y.cols());
    cert.chat.resize(t, m);
    for (int k = 0; k < t; ++k)
        for (int j = 0; j < m; ++j) cert.chat(k, j) = sol.x(k * m + j);
    cert.cstar = -sol.objective;
    cert.ghat_values = cert.cstar * (A.entries.transpose() * sol.x.head(tm));
    cert.ghat_norm =
        cert.ghat_values.size() > 0 ? cert.ghat_values.cwiseAbs().maxCoeff() : 0.0;
    return cert;
}

std::vector<int> argmax_set(const DualCertificate& cert, double rel_tol) {
    if (!(cert.ghat_norm > 0.0))
        throw std::invalid_argument(
            "argmax_set: certificate is identically zero (C* = 0)");
    std::vector<int> indices;
    const double cutoff = cert.ghat_norm * (1.0 - rel_tol);
    for (Eigen::Index p = 0; p < cert.ghat_values.size(); ++p)
        if (std::abs(cert.ghat_values(p)) >= cutoff)
            indices.push_back(static_cast<int>(p));
    return indices;
}

MniResult solve_mni(const FeatureMatrix& A, const Eigen::MatrixXd& Y,
                    const CandidateSet& cands, const MniOptions& opts) {
    const Eigen::Index tm = A.entries.rows();
    const Eigen::Index P = A.entries.cols();
    if (P != cands.count())
        throw std::invalid_argument("solve_mni: feature matrix and candidate set disagree");
    if (Y.rows() * Y.cols() != tm)
        throw std::invalid_argument("solve_mni: target matrix does not match A");

    MniResult result;
    result.measure.spec = A.spec;
    result.measure.weight = A.weight;

    if (Y.isZero(0.0)) {
        result.certificate.chat = Eigen::MatrixXd::Zero(Y.rows(), Y.cols());
        result.certificate.ghat_values = Eigen::VectorXd::Zero(P);
        result.report.trivial = true;
        result.report.argmax_tol = opts.argmax_tol;
        return result;
    }

    if (!opts.force) {
        const RankInfo info = rank_check(A);
        if (info.warning)
            throw std::invalid_argument(
                "solve_mni: feature matrix is rank deficient (rank " +
                std::to_string(info.rank) + " < " + std::to_string(tm) +
                "); enlarge the candidate set or pass force");
    }

    // min sum(cp + cn) s.t. A (cp - cn) = vec(Y), cp, cn >= 0.
    LinearProgram lp;
    lp.objective = Eigen::VectorXd::Ones(2 * P);
    lp.eq_matrix.resize(tm, 2 * P);
    lp.eq_matrix.leftCols(P) = A.entries;
    lp.eq_matrix.rightCols(P) = -A.entries;
    lp.eq_rhs = vectorize_targets(Y);
    lp.lower = Eigen::VectorXd::Zero(2 * P);
    lp.upper = Eigen::VectorXd::Constant(2 * P, kInf);

    const LpSolution sol = solve_lp(lp, opts.lp_tol);
    if (sol.status == LpStatus::infeasible)
        throw std::runtime_error(
            "solve_mni: interpolation constraints are infeasible on this candidate set");
    if (sol.status != LpStatus::optimal)
        throw std::runtime_error("solve_mni: LP solver did not reach optimality");

    DiscreteMeasure raw;
    raw.spec = A.spec;
    raw.weight = A.weight;
    for (Eigen::Index p = 0; p < P; ++p) {
        const double c = sol.x(p) - sol.x(P + p);
        if (c != 0.0)
            raw.atoms.push_back({cands.points[static_cast<std::size_t>(p)], c});
    }
    result.measure = prune(raw, opts.coeff_tol, opts.merge_tol);

    result.certificate = solve_dual(A, Y, opts.lp_tol);

    std::vector<int> indices;
    std::vector<double> coeffs;
    for (const auto& atom : result.measure.atoms) {
        indices.push_back(locate_candidate(atom.theta, cands, opts.merge_tol));
        coeffs.push_back(atom.coeff);
    }
    result.report = build_report(indices, coeffs, result.certificate, A, Y, opts);
    return result;
}

MniReport verify_representer(const DiscreteMeasure& mu, const DualCertificate& cert,
                             const FeatureMatrix& A, const CandidateSet& cands,
                             const MniOptions& opts) {
    std::vector<int> indices;
    std::vector<double> coeffs;
    for (const auto& atom : mu.atoms) {
        indices.push_back(locate_candidate(atom.theta, cands, opts.merge_tol));
        coeffs.push_back(atom.coeff);
    }
    MniReport report = build_report(indices, coeffs, cert, A, A.data.y, opts);
    report.trivial = mu.atoms.empty() && cert.cstar == 0.0;
    return report;
}

} // namespace rkbsnet
