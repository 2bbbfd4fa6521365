#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <string>
#include <vector>

#include "rkbsnet/candidates.hpp"
#include "rkbsnet/network.hpp"

namespace rkbsnet {

/// Weight function on the parameter space. Only the gaussian of the
/// euclidean norm is shipped: rho(theta) = exp(-alpha * |theta|_2^2).
struct WeightFn {
    enum class Kind { gaussian_of_norm };
    Kind kind = Kind::gaussian_of_norm;
    double alpha = 1.0;
};

double rho(const WeightFn& w, const Eigen::VectorXd& theta);

/// K(x, theta) = N(x, theta) * rho(theta), the network output scaled by the
/// scalar weight.
Eigen::VectorXd kernel_eval(const NetworkSpec& spec, const WeightFn& w,
                            const Eigen::VectorXd& x, const Eigen::VectorXd& theta);

/// Training data: m input points x_j (distinct) and the t x m target matrix
/// Y with Y(k, j) = k-th component of y_j.
struct Dataset {
    std::vector<Eigen::VectorXd> x;
    Eigen::MatrixXd y; // t x m

    int count() const { return static_cast<int>(x.size()); }
};

/// Identity of the candidate set a feature matrix was built from.
struct CandidateRef {
    Provenance provenance = Provenance::random;
    std::uint64_t seed = 0;
    int count = 0;
};

/// Matrix A with A[(k,j), p] = K_k(x_j, theta_p); rows are the t*m data
/// constraints with row index k*m + j, columns the P candidates. Carries the
/// data and the kernel it was built from, so downstream solvers are
/// self-contained.
struct FeatureMatrix {
    Eigen::MatrixXd entries; // (t*m) x P
    Dataset data;
    CandidateRef candidates;
    NetworkSpec spec;
    WeightFn weight;
};

FeatureMatrix feature_matrix(const NetworkSpec& spec, const WeightFn& w,
                             const Dataset& data, const CandidateSet& cands);

struct RankInfo {
    int rank = 0;
    bool warning = false; // rank < t*m: data functionals dependent on this set
};

/// Numerical rank of the row space via column-pivoted QR of A^T. Entries of
/// the R diagonal below tol * (largest diagonal magnitude) are treated as
/// zero.
RankInfo rank_check(const FeatureMatrix& A, double tol = 1e-10);

/// Flattening used everywhere the t x m data matrix meets the feature
/// matrix rows: vec(Y)[k*m + j] = Y(k, j).
Eigen::VectorXd vectorize_targets(const Eigen::MatrixXd& y);

} // namespace rkbsnet
