#pragma once

#include <Eigen/Dense>
#include <optional>
#include <vector>

#include "rkbsnet/candidates.hpp"
#include "rkbsnet/kernel.hpp"
#include "rkbsnet/measure.hpp"

namespace rkbsnet {

enum class Loss { square, absolute };

Loss loss_from_string(const std::string& name);
std::string to_string(Loss loss);

/// Data-fidelity plus lambda times the TV norm, restricted to measures
/// supported on the candidate set:
///   square   : 1/2 |A c - vec(Y)|_2^2 + lambda |c|_1
///   absolute :     |A c - vec(Y)|_1   + lambda |c|_1
struct RegProblem {
    FeatureMatrix A;
    Eigen::MatrixXd Y; // t x m
    double lambda = 1.0;
    Loss loss = Loss::square;
};

struct RegOptions {
    double tol = 1e-10;      // max coordinate change per sweep
    long max_sweeps = 100000;
    double coeff_tol = 1e-10;
    double merge_tol = 1e-9;
    double lp_tol = 1e-9;
    double support_tol = 0.0; // |c_p| above this counts as support in kkt_check
};

struct RegReport {
    double loss_value = 0.0; // fidelity term at the solution
    double tv = 0.0;
    double kkt_max_violation = 0.0;
    std::optional<double> mni_consistency_gap;
    bool converged = true;
    long sweeps = 0;
    bool objective_monotone = true;
    bool trivial_zero = false; // solution is the zero measure
};

struct RegResult {
    DiscreteMeasure measure;
    Eigen::VectorXd coefficients; // full candidate-indexed vector
    RegReport report;
};

/// Square loss: cyclic coordinate descent with soft thresholding, fixed
/// sweep order, warm-startable. Absolute loss: exact LP reformulation via
/// the simplex core.
RegResult solve_regularized(const RegProblem& problem, const CandidateSet& cands,
                            const RegOptions& opts = {},
                            const Eigen::VectorXd* warm_start = nullptr);

/// Subgradient optimality residual of the square-loss objective at c:
/// with r = vec(Y) - A c, returns
/// max(0, max_p |(A^T r)_p| - lambda, max_{p in support} |(A^T r)_p - lambda sign(c_p)|).
double kkt_check(const Eigen::VectorXd& c, const FeatureMatrix& A,
                 const Eigen::MatrixXd& Y, double lambda, Loss loss,
                 double support_tol = 0.0);

struct ConsistencyResult {
    double gap = 0.0;
    bool trivial = false; // zero measure: predictions vanish
};

/// Checks that the regularized solution also solves the interpolation
/// problem for its own predictions: forms Z = predictions of mu on the data
/// points, reruns the minimum-norm solve with Y := Z and returns
/// |tv(mu) - C*(Z)|.
ConsistencyResult mni_consistency(const DiscreteMeasure& mu, const FeatureMatrix& A,
                                  const CandidateSet& cands, double lp_tol = 1e-9);

struct PathRow {
    double lambda = 0.0;
    double loss_value = 0.0;
    double tv = 0.0;
    double kkt_max_violation = 0.0;
};

/// Warm-started sweep over a strictly descending positive lambda list.
std::vector<PathRow> lambda_path(const FeatureMatrix& A, const Eigen::MatrixXd& Y,
                                 Loss loss, const std::vector<double>& lambdas,
                                 const CandidateSet& cands, const RegOptions& opts = {});

} // namespace rkbsnet
