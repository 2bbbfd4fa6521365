#pragma once

#include <Eigen/Dense>
#include <vector>

#include "rkbsnet/candidates.hpp"
#include "rkbsnet/kernel.hpp"
#include "rkbsnet/measure.hpp"

namespace rkbsnet {

/// Solution of the dual problem: coefficients chat maximizing
/// sum_{k,j} c_kj Y(k,j) subject to |sum_{k,j} c_kj K_k(x_j, theta_p)| <= 1
/// for every candidate p, the optimal value cstar, and the certificate
/// values ghat(theta_p) = cstar * sum_{k,j} chat_kj K_k(x_j, theta_p).
struct DualCertificate {
    Eigen::MatrixXd chat; // t x m
    double cstar = 0.0;
    Eigen::VectorXd ghat_values;
    double ghat_norm = 0.0;
};

/// Verification summary for one interpolation solve. The booleans restate
/// the representer structure: the support lies where |ghat| is maximal, the
/// coefficient signs match ghat there, the atom count is bounded by t*m and
/// the absolute coefficients sum to |ghat|_inf.
struct MniReport {
    double tv = 0.0;
    double duality_gap = 0.0;
    double max_interp_residual = 0.0;
    double coeff_sum_gap = 0.0;
    bool support_in_argmax = true;
    bool sign_aligned = true;
    int atom_count = 0;
    double argmax_tol = 0.0;
    bool trivial = false; // Y = 0: the zero measure interpolates
};

struct MniOptions {
    double argmax_tol = 1e-6;
    double coeff_tol = 1e-8;
    double merge_tol = 1e-9;
    double lp_tol = 1e-9;
    bool force = false; // proceed despite a rank warning
};

/// Stage 1: maximize the data pairing over the polytope
/// |sum c_kj K_k(x_j, theta_p)| <= 1 (the sup-norm-one constraint of the
/// dual problem relaxed to <= 1; the optimum is on the boundary whenever
/// Y != 0). Throws on Y = 0; reports rank deficiency of A through an
/// unbounded LP.
DualCertificate solve_dual(const FeatureMatrix& A, const Eigen::MatrixXd& Y,
                           double lp_tol = 1e-9);

/// Candidate indices p with |ghat(theta_p)| >= ghat_norm * (1 - rel_tol),
/// ascending. Errors when ghat_norm = 0 (no certificate direction).
std::vector<int> argmax_set(const DualCertificate& cert, double rel_tol);

struct MniResult {
    DiscreteMeasure measure;
    DualCertificate certificate;
    MniReport report;
};

/// Stage 2: minimize sum_p |c_p| subject to A c = vec(Y) (split into
/// positive and negative parts, solved as an LP whose vertex solution has at
/// most t*m nonzero coefficients), then assemble the pruned measure, the
/// certificate from solve_dual, and the verification report.
MniResult solve_mni(const FeatureMatrix& A, const Eigen::MatrixXd& Y,
                    const CandidateSet& cands, const MniOptions& opts = {});

/// Recomputes every report field from scratch for a given measure and
/// certificate. Atoms must be located (bit-exactly or within merge_tol) in
/// the candidate set.
MniReport verify_representer(const DiscreteMeasure& mu, const DualCertificate& cert,
                             const FeatureMatrix& A, const CandidateSet& cands,
                             const MniOptions& opts = {});

} // namespace rkbsnet
