#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <optional>
#include <vector>

#include "rkbsnet/candidates.hpp"
#include "rkbsnet/kernel.hpp"
#include "rkbsnet/measure.hpp"
#include "rkbsnet/network.hpp"
#include "rkbsnet/regularized.hpp"

namespace rkbsnet {

/// Full-batch gradient descent settings for the trainable kernel expansion
/// f(x) = sum_l beta_l N(x, theta_l): coefficients and network parameters
/// are the optimization variables.
struct TrainConfig {
    int atom_count = 1; // L
    double learning_rate = 0.1;
    long max_iters = 1000;
    std::uint64_t seed = 0;
    BoxSpec init_box;
    Loss loss = Loss::square; // only the square loss is supported

    void validate() const;
};

/// The trained expansion. Predictions are sum_l beta_l N(x, theta_l);
/// the model carries no weight-function factor.
struct Expansion {
    NetworkSpec spec;
    Eigen::VectorXd beta;
    std::vector<Eigen::VectorXd> thetas;
};

Eigen::VectorXd expansion_eval(const Expansion& e, const Eigen::VectorXd& x);

/// Measure view of an expansion: coefficients beta_l / rho(theta_l), so that
/// coeff * K(., theta) reproduces beta * N(., theta). Used to compare trained
/// models with solver outputs through predictions.
DiscreteMeasure as_measure(const Expansion& e, const WeightFn& w);

struct TrainTrace {
    std::vector<double> losses; // initial loss followed by each accepted iterate
    Eigen::VectorXd beta;
    std::vector<Eigen::VectorXd> thetas;
    std::optional<double> grad_check_max_rel_err;
    bool nonsmooth_activation = false; // relu: sigma'(0) = 0 convention in effect
    long iterations = 0;
};

/// Minimizes sum_j |f(x_j) - y_j|_2^2 by full-batch gradient descent with a
/// halving line search that only accepts non-increasing loss. Start:
/// beta = 0, theta uniform in the init box under the run seed.
std::pair<Expansion, TrainTrace> train_expansion(const NetworkSpec& spec,
                                                 const Dataset& data,
                                                 const TrainConfig& cfg);

/// Max relative error between the analytic loss gradient (over all beta and
/// theta entries) and central finite differences with step h.
double grad_check(const NetworkSpec& spec, const Dataset& data,
                  const Eigen::VectorXd& beta,
                  const std::vector<Eigen::VectorXd>& thetas, double h);

} // namespace rkbsnet
