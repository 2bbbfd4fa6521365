#include "rkbsnet/network.hpp"

#include <cmath>
#include <stdexcept>

namespace rkbsnet {

namespace {

using RowMajorMatrix =
    Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

double sigmoid(double v) { return 1.0 / (1.0 + std::exp(-v)); }

Eigen::VectorXd activate(Activation a, const Eigen::VectorXd& z) {
    if (a == Activation::relu) return z.cwiseMax(0.0);
    return z.unaryExpr([](double v) { return sigmoid(v); });
}

// Derivative evaluated at the pre-activation. ReLU: sigma'(0) = 0.
Eigen::VectorXd activate_deriv(Activation a, const Eigen::VectorXd& z) {
    if (a == Activation::relu)
        return z.unaryExpr([](double v) { return v > 0.0 ? 1.0 : 0.0; });
    return z.unaryExpr([](double v) {
        const double s = sigmoid(v);
        return s * (1.0 - s);
    });
}

void check_theta_size(const NetworkSpec& spec, const Eigen::VectorXd& theta) {
    if (theta.size() != param_dim(spec))
        throw std::invalid_argument("parameter vector has length " +
                                    std::to_string(theta.size()) + ", expected " +
                                    std::to_string(param_dim(spec)));
}

void check_input_size(const NetworkSpec& spec, const Eigen::VectorXd& x) {
    if (x.size() != spec.input_dim)
        throw std::invalid_argument("input has length " + std::to_string(x.size()) +
                                    ", expected " + std::to_string(spec.input_dim));
}

} // namespace

Activation activation_from_string(const std::string& name) {
    if (name == "relu") return Activation::relu;
    if (name == "sigmoid") return Activation::sigmoid;
    throw std::invalid_argument("unknown activation '" + name + "'");
}

std::string to_string(Activation a) {
    return a == Activation::relu ? "relu" : "sigmoid";
}

int NetworkSpec::width(int j) const {
    if (j == 0) return input_dim;
    if (j == depth()) return output_dim;
    return hidden_widths[static_cast<std::size_t>(j) - 1];
}

void NetworkSpec::validate() const {
    if (input_dim < 1) throw std::invalid_argument("input_dim must be >= 1");
    if (output_dim < 1) throw std::invalid_argument("output_dim must be >= 1");
    for (int w : hidden_widths)
        if (w < 1) throw std::invalid_argument("hidden widths must be >= 1");
}

int param_dim(const NetworkSpec& spec) {
    spec.validate();
    int total = 0;
    for (int j = 1; j <= spec.depth(); ++j)
        total += spec.width(j) * (spec.width(j - 1) + 1);
    return total;
}

Eigen::VectorXd flatten(const NetworkSpec& spec, const NetworkParams& params) {
    const int depth = spec.depth();
    if (static_cast<int>(params.weights.size()) != depth ||
        static_cast<int>(params.biases.size()) != depth)
        throw std::invalid_argument("layer count does not match spec depth");

    Eigen::VectorXd theta(param_dim(spec));
    Eigen::Index off = 0;
    for (int j = 1; j <= depth; ++j) {
        const auto& weight = params.weights[static_cast<std::size_t>(j) - 1];
        const auto& bias = params.biases[static_cast<std::size_t>(j) - 1];
        if (weight.rows() != spec.width(j) || weight.cols() != spec.width(j - 1) ||
            bias.size() != spec.width(j))
            throw std::invalid_argument("layer " + std::to_string(j) +
                                        " shape does not match spec");
        Eigen::Map<RowMajorMatrix>(theta.data() + off, weight.rows(), weight.cols()) =
            weight;
        off += weight.size();
        theta.segment(off, bias.size()) = bias;
        off += bias.size();
    }
    return theta;
}

NetworkParams unflatten(const NetworkSpec& spec, const Eigen::VectorXd& theta) {
    check_theta_size(spec, theta);
    NetworkParams params;
    Eigen::Index off = 0;
    for (int j = 1; j <= spec.depth(); ++j) {
        const int rows = spec.width(j), cols = spec.width(j - 1);
        params.weights.emplace_back(
            Eigen::Map<const RowMajorMatrix>(theta.data() + off, rows, cols));
        off += rows * cols;
        params.biases.emplace_back(
            Eigen::Map<const Eigen::VectorXd>(theta.data() + off, rows));
        off += rows;
    }
    return params;
}

Eigen::VectorXd forward(const NetworkSpec& spec, const Eigen::VectorXd& theta,
                        const Eigen::VectorXd& x) {
    check_theta_size(spec, theta);
    check_input_size(spec, x);

    Eigen::VectorXd a = x;
    Eigen::Index off = 0;
    for (int j = 1; j <= spec.depth(); ++j) {
        const int rows = spec.width(j), cols = spec.width(j - 1);
        Eigen::Map<const RowMajorMatrix> weight(theta.data() + off, rows, cols);
        off += rows * cols;
        Eigen::Map<const Eigen::VectorXd> bias(theta.data() + off, rows);
        off += rows;
        Eigen::VectorXd z = weight * a + bias;
        a = (j < spec.depth()) ? activate(spec.activation, z) : std::move(z);
    }
    return a;
}

Eigen::VectorXd grad_params_weighted(const NetworkSpec& spec,
                                     const Eigen::VectorXd& theta,
                                     const Eigen::VectorXd& x,
                                     const Eigen::VectorXd& w) {
    check_theta_size(spec, theta);
    check_input_size(spec, x);
    if (w.size() != spec.output_dim)
        throw std::invalid_argument("output weight vector has wrong length");

    const int depth = spec.depth();

    // Forward, keeping pre-activations. inputs[j] is the input of layer j+1.
    std::vector<Eigen::VectorXd> inputs(static_cast<std::size_t>(depth));
    std::vector<Eigen::VectorXd> preacts(static_cast<std::size_t>(depth));
    std::vector<Eigen::Index> weight_offsets(static_cast<std::size_t>(depth));
    Eigen::VectorXd a = x;
    Eigen::Index off = 0;
    for (int j = 1; j <= depth; ++j) {
        const int rows = spec.width(j), cols = spec.width(j - 1);
        weight_offsets[static_cast<std::size_t>(j) - 1] = off;
        Eigen::Map<const RowMajorMatrix> weight(theta.data() + off, rows, cols);
        Eigen::Map<const Eigen::VectorXd> bias(theta.data() + off + rows * cols, rows);
        off += rows * (cols + 1);
        inputs[static_cast<std::size_t>(j) - 1] = a;
        Eigen::VectorXd z = weight * a + bias;
        preacts[static_cast<std::size_t>(j) - 1] = z;
        if (j < depth) a = activate(spec.activation, z);
    }

    // Backward: u holds d(w . output)/d(preact of layer j).
    Eigen::VectorXd grad = Eigen::VectorXd::Zero(param_dim(spec));
    Eigen::VectorXd u = w;
    for (int j = depth; j >= 1; --j) {
        const int rows = spec.width(j), cols = spec.width(j - 1);
        const Eigen::Index woff = weight_offsets[static_cast<std::size_t>(j) - 1];
        const Eigen::VectorXd& in = inputs[static_cast<std::size_t>(j) - 1];
        Eigen::Map<RowMajorMatrix>(grad.data() + woff, rows, cols) = u * in.transpose();
        grad.segment(woff + rows * cols, rows) = u;
        if (j > 1) {
            Eigen::Map<const RowMajorMatrix> weight(theta.data() + woff, rows, cols);
            u = (weight.transpose() * u).cwiseProduct(activate_deriv(
                spec.activation, preacts[static_cast<std::size_t>(j) - 2]));
        }
    }
    return grad;
}

Eigen::VectorXd grad_params(const NetworkSpec& spec, const Eigen::VectorXd& theta,
                            const Eigen::VectorXd& x, int k) {
    if (k < 0 || k >= spec.output_dim)
        throw std::invalid_argument("output index out of range");
    Eigen::VectorXd w = Eigen::VectorXd::Zero(spec.output_dim);
    w(k) = 1.0;
    return grad_params_weighted(spec, theta, x, w);
}

MergedNetwork merge(const NetworkSpec& spec, const std::vector<double>& coefficients,
                    const std::vector<Eigen::VectorXd>& thetas) {
    if (coefficients.empty() || coefficients.size() != thetas.size())
        throw std::invalid_argument("merge needs n >= 1 coefficient/parameter pairs");
    for (const auto& theta : thetas) check_theta_size(spec, theta);

    const int n = static_cast<int>(thetas.size());
    const int depth = spec.depth();

    if (depth == 1) {
        // Affine maps combine linearly in the flat layout.
        Eigen::VectorXd theta = Eigen::VectorXd::Zero(param_dim(spec));
        for (int l = 0; l < n; ++l) theta += coefficients[static_cast<std::size_t>(l)] * thetas[static_cast<std::size_t>(l)];
        return {spec, std::move(theta)};
    }

    NetworkSpec merged = spec;
    for (int& w : merged.hidden_widths) w *= n;

    std::vector<NetworkParams> parts;
    parts.reserve(thetas.size());
    for (const auto& theta : thetas) parts.push_back(unflatten(spec, theta));

    NetworkParams out;
    for (int j = 1; j <= depth; ++j) {
        const int rows = merged.width(j), cols = merged.width(j - 1);
        Eigen::MatrixXd weight = Eigen::MatrixXd::Zero(rows, cols);
        Eigen::VectorXd bias = Eigen::VectorXd::Zero(rows);
        const int block_rows = spec.width(j), block_cols = spec.width(j - 1);
        for (int l = 0; l < n; ++l) {
            const auto& part_w = parts[static_cast<std::size_t>(l)].weights[static_cast<std::size_t>(j) - 1];
            const auto& part_b = parts[static_cast<std::size_t>(l)].biases[static_cast<std::size_t>(j) - 1];
            const double c = coefficients[static_cast<std::size_t>(l)];
            if (j == 1) {
                weight.middleRows(l * block_rows, block_rows) = part_w;
                bias.segment(l * block_rows, block_rows) = part_b;
            } else if (j == depth) {
                weight.middleCols(l * block_cols, block_cols) = c * part_w;
                bias += c * part_b;
            } else {
                weight.block(l * block_rows, l * block_cols, block_rows, block_cols) =
                    part_w;
                bias.segment(l * block_rows, block_rows) = part_b;
            }
        }
        out.weights.push_back(std::move(weight));
        out.biases.push_back(std::move(bias));
    }
    return {merged, flatten(merged, out)};
}

} // namespace rkbsnet
