#pragma once

#include <Eigen/Dense>
#include <vector>

#include "rkbsnet/kernel.hpp"
#include "rkbsnet/network.hpp"

namespace rkbsnet {

/// One weighted point mass: contributes coeff * K(., theta) to the
/// represented function.
struct Atom {
    Eigen::VectorXd theta;
    double coeff = 0.0;
};

/// Finite signed combination of point masses on the parameter space; the
/// computational stand-in for a Radon measure. Represents
/// f(x) = sum_l coeff_l * K(x, theta_l).
struct DiscreteMeasure {
    std::vector<Atom> atoms;
    NetworkSpec spec;
    WeightFn weight;
};

/// Sum of absolute coefficients: the total variation of a finite combination
/// of distinct point masses.
double tv_norm(const DiscreteMeasure& mu);

/// f_mu(x) = sum_l coeff_l * K(x, theta_l), length-t vector.
Eigen::VectorXd f_mu_eval(const DiscreteMeasure& mu, const Eigen::VectorXd& x);

/// Merges atoms whose locations differ by at most merge_tol in the sup norm
/// (coefficients summed, first location kept), then drops atoms with
/// |coeff| <= coeff_tol. Never increases the TV norm.
DiscreteMeasure prune(const DiscreteMeasure& mu, double coeff_tol = 1e-8,
                      double merge_tol = 1e-9);

} // namespace rkbsnet
