#include "rkbsnet/trainer.hpp"

#include <cmath>
#include <stdexcept>

#include "rkbsnet/rng.hpp"

namespace rkbsnet {

namespace {

// Packs [beta | theta_1 | ... | theta_L] into one vector for the line search
// and finite differences.
struct FlatModel {
    int atom_count;
    int theta_dim;

    Eigen::VectorXd pack(const Eigen::VectorXd& beta,
                         const std::vector<Eigen::VectorXd>& thetas) const {
        Eigen::VectorXd v(atom_count + atom_count * theta_dim);
        v.head(atom_count) = beta;
        for (int l = 0; l < atom_count; ++l)
            v.segment(atom_count + l * theta_dim, theta_dim) =
                thetas[static_cast<std::size_t>(l)];
        return v;
    }

    Eigen::VectorXd beta_of(const Eigen::VectorXd& v) const {
        return v.head(atom_count);
    }

    std::vector<Eigen::VectorXd> thetas_of(const Eigen::VectorXd& v) const {
        std::vector<Eigen::VectorXd> thetas;
        thetas.reserve(static_cast<std::size_t>(atom_count));
        for (int l = 0; l < atom_count; ++l)
            thetas.push_back(v.segment(atom_count + l * theta_dim, theta_dim));
        return thetas;
    }
};

double loss_at(const NetworkSpec& spec, const Dataset& data, const Eigen::VectorXd& beta,
               const std::vector<Eigen::VectorXd>& thetas) {
    double loss = 0.0;
    for (int j = 0; j < data.count(); ++j) {
        Eigen::VectorXd pred = Eigen::VectorXd::Zero(spec.output_dim);
        for (int l = 0; l < beta.size(); ++l)
            pred += beta(l) * forward(spec, thetas[static_cast<std::size_t>(l)],
                                      data.x[static_cast<std::size_t>(j)]);
        loss += (pred - data.y.col(j)).squaredNorm();
    }
    return loss;
}

Eigen::VectorXd loss_gradient(const NetworkSpec& spec, const Dataset& data,
                              const FlatModel& layout, const Eigen::VectorXd& beta,
                              const std::vector<Eigen::VectorXd>& thetas) {
    Eigen::VectorXd grad =
        Eigen::VectorXd::Zero(layout.atom_count + layout.atom_count * layout.theta_dim);
    for (int j = 0; j < data.count(); ++j) {
        const auto& x = data.x[static_cast<std::size_t>(j)];
        std::vector<Eigen::VectorXd> outputs(static_cast<std::size_t>(layout.atom_count));
        Eigen::VectorXd pred = Eigen::VectorXd::Zero(spec.output_dim);
        for (int l = 0; l < layout.atom_count; ++l) {
            outputs[static_cast<std::size_t>(l)] =
                forward(spec, thetas[static_cast<std::size_t>(l)], x);
            pred += beta(l) * outputs[static_cast<std::size_t>(l)];
        }
        const Eigen::VectorXd residual = 2.0 * (pred - data.y.col(j));
        for (int l = 0; l < layout.atom_count; ++l) {
            grad(l) += residual.dot(outputs[static_cast<std::size_t>(l)]);
            if (beta(l) != 0.0)
                grad.segment(layout.atom_count + l * layout.theta_dim, layout.theta_dim) +=
                    beta(l) * grad_params_weighted(
                                  spec, thetas[static_cast<std::size_t>(l)], x, residual);
        }
    }
    return grad;
}

} // namespace

void TrainConfig::validate() const {
    if (atom_count < 1) throw std::invalid_argument("atom count must be >= 1");
    if (!(learning_rate > 0.0)) throw std::invalid_argument("learning rate must be positive");
    if (max_iters < 0) throw std::invalid_argument("max iterations must be >= 0");
    if (loss != Loss::square)
        throw std::invalid_argument("train_expansion supports the square loss only");
}

Eigen::VectorXd expansion_eval(const Expansion& e, const Eigen::VectorXd& x) {
    Eigen::VectorXd value = Eigen::VectorXd::Zero(e.spec.output_dim);
    for (Eigen::Index l = 0; l < e.beta.size(); ++l)
        value += e.beta(l) * forward(e.spec, e.thetas[static_cast<std::size_t>(l)], x);
    return value;
}

DiscreteMeasure as_measure(const Expansion& e, const WeightFn& w) {
    DiscreteMeasure mu;
    mu.spec = e.spec;
    mu.weight = w;
    for (Eigen::Index l = 0; l < e.beta.size(); ++l) {
        const auto& theta = e.thetas[static_cast<std::size_t>(l)];
        mu.atoms.push_back({theta, e.beta(l) / rho(w, theta)});
    }
    return mu;
}

std::pair<Expansion, TrainTrace> train_expansion(const NetworkSpec& spec,
                                                 const Dataset& data,
                                                 const TrainConfig& cfg) {
    cfg.validate();
    spec.validate();
    if (data.count() < 1) throw std::invalid_argument("training data is empty");
    const int dim = param_dim(spec);
    if (cfg.init_box.dim() != dim)
        throw std::invalid_argument("init box dimension does not match the network");

    const FlatModel layout{cfg.atom_count, dim};

    Eigen::VectorXd beta = Eigen::VectorXd::Zero(cfg.atom_count);
    std::vector<Eigen::VectorXd> thetas;
    Rng rng(cfg.seed);
    for (int l = 0; l < cfg.atom_count; ++l) {
        Eigen::VectorXd theta(dim);
        for (int d = 0; d < dim; ++d)
            theta(d) = rng.uniform(cfg.init_box.lower(d), cfg.init_box.upper(d));
        thetas.push_back(std::move(theta));
    }

    TrainTrace trace;
    trace.nonsmooth_activation = spec.activation == Activation::relu;

    double loss = loss_at(spec, data, beta, thetas);
    if (!std::isfinite(loss))
        throw std::runtime_error("train_expansion: initial loss is not finite");
    trace.losses.push_back(loss);

    Eigen::VectorXd point = layout.pack(beta, thetas);
    for (long iter = 0; iter < cfg.max_iters; ++iter) {
        const Eigen::VectorXd grad = loss_gradient(spec, data, layout, beta, thetas);
        const double grad_norm = grad.norm();
        if (!(grad_norm > 0.0)) break; // stationary

        double step = cfg.learning_rate;
        bool accepted = false;
        for (int halving = 0; halving < 60; ++halving) {
            const Eigen::VectorXd trial = point - step * grad;
            const Eigen::VectorXd trial_beta = layout.beta_of(trial);
            const auto trial_thetas = layout.thetas_of(trial);
            const double trial_loss = loss_at(spec, data, trial_beta, trial_thetas);
            if (std::isfinite(trial_loss) && trial_loss <= loss) {
                point = trial;
                beta = trial_beta;
                thetas = trial_thetas;
                loss = trial_loss;
                accepted = true;
                break;
            }
            step *= 0.5;
        }
        if (!accepted) break; // no non-increasing step left at this scale
        trace.losses.push_back(loss);
        trace.iterations = iter + 1;
    }

    Expansion model{spec, beta, thetas};
    trace.beta = beta;
    trace.thetas = thetas;
    return {std::move(model), std::move(trace)};
}

double grad_check(const NetworkSpec& spec, const Dataset& data,
                  const Eigen::VectorXd& beta,
                  const std::vector<Eigen::VectorXd>& thetas, double h) {
    if (spec.activation != Activation::sigmoid)
        throw std::invalid_argument(
            "grad_check needs a smooth activation (sigmoid); relu kinks break the "
            "finite-difference comparison");
    if (!(h >= 1e-7 && h <= 1e-3))
        throw std::invalid_argument("finite-difference step must lie in [1e-7, 1e-3]");
    const FlatModel layout{static_cast<int>(beta.size()), param_dim(spec)};
    const Eigen::VectorXd analytic = loss_gradient(spec, data, layout, beta, thetas);
    Eigen::VectorXd point = layout.pack(beta, thetas);

    double worst = 0.0;
    for (Eigen::Index i = 0; i < point.size(); ++i) {
        Eigen::VectorXd shifted = point;
        shifted(i) = point(i) + h;
        const double up =
            loss_at(spec, data, layout.beta_of(shifted), layout.thetas_of(shifted));
        shifted(i) = point(i) - h;
        const double down =
            loss_at(spec, data, layout.beta_of(shifted), layout.thetas_of(shifted));
        const double numeric = (up - down) / (2.0 * h);
        const double scale = std::max({1.0, std::abs(analytic(i)), std::abs(numeric)});
        worst = std::max(worst, std::abs(analytic(i) - numeric) / scale);
    }
    return worst;
}

} // namespace rkbsnet
