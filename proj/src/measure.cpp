#include "rkbsnet/measure.hpp"

#include <cmath>
#include <stdexcept>

namespace rkbsnet {

double tv_norm(const DiscreteMeasure& mu) {
    double total = 0.0;
    for (const auto& atom : mu.atoms) total += std::abs(atom.coeff);
    return total;
}

Eigen::VectorXd f_mu_eval(const DiscreteMeasure& mu, const Eigen::VectorXd& x) {
    if (x.size() != mu.spec.input_dim)
        throw std::invalid_argument("f_mu_eval: input dimension mismatch");
    Eigen::VectorXd value = Eigen::VectorXd::Zero(mu.spec.output_dim);
    for (const auto& atom : mu.atoms)
        value += atom.coeff * kernel_eval(mu.spec, mu.weight, x, atom.theta);
    return value;
}

DiscreteMeasure prune(const DiscreteMeasure& mu, double coeff_tol, double merge_tol) {
    if (coeff_tol < 0.0 || merge_tol < 0.0)
        throw std::invalid_argument("prune tolerances must be nonnegative");

    DiscreteMeasure merged;
    merged.spec = mu.spec;
    merged.weight = mu.weight;
    for (const auto& atom : mu.atoms) {
        bool absorbed = false;
        for (auto& kept : merged.atoms) {
            if ((atom.theta - kept.theta).cwiseAbs().maxCoeff() <= merge_tol) {
                kept.coeff += atom.coeff;
                absorbed = true;
                break;
            }
        }
        if (!absorbed) merged.atoms.push_back(atom);
    }

    DiscreteMeasure out;
    out.spec = mu.spec;
    out.weight = mu.weight;
    for (auto& atom : merged.atoms)
        if (std::abs(atom.coeff) > coeff_tol) out.atoms.push_back(std::move(atom));
    return out;
}

} // namespace rkbsnet
