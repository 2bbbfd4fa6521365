#pragma once

#include <Eigen/Dense>
#include <string>
#include <vector>

namespace rkbsnet {

enum class Activation { relu, sigmoid };

Activation activation_from_string(const std::string& name);
std::string to_string(Activation a);

/// Architecture of a feed-forward network: input dimension s, output
/// dimension t and the hidden layer widths m_1..m_{D-1}. The depth D is the
/// number of affine layers; a network with no hidden widths is a single
/// affine map.
struct NetworkSpec {
    int input_dim = 1;
    int output_dim = 1;
    std::vector<int> hidden_widths;
    Activation activation = Activation::relu;

    int depth() const { return static_cast<int>(hidden_widths.size()) + 1; }

    /// Width of layer j with the conventions m_0 = input_dim, m_D = output_dim.
    int width(int j) const;

    void validate() const;

    bool operator==(const NetworkSpec&) const = default;
};

/// Number of entries of the flat parameter vector:
/// sum over layers of m_j * (m_{j-1} + 1).
int param_dim(const NetworkSpec& spec);

/// Structured view of the parameters: weights[j] is m_{j+1} x m_j
/// (0-based storage of W_1..W_D), biases[j] has length m_{j+1}.
struct NetworkParams {
    std::vector<Eigen::MatrixXd> weights;
    std::vector<Eigen::VectorXd> biases;
};

/// Canonical flat layout: for each layer, the weight matrix in row-major
/// order followed by the bias vector. Every module that exchanges parameter
/// vectors uses this layout.
Eigen::VectorXd flatten(const NetworkSpec& spec, const NetworkParams& params);
NetworkParams unflatten(const NetworkSpec& spec, const Eigen::VectorXd& theta);

/// Forward pass: z_1 = W_1 x + b_1, z_{j+1} = W_{j+1} sigma(z_j) + b_{j+1}.
/// The activation is applied to hidden layers only; the output layer is
/// affine.
Eigen::VectorXd forward(const NetworkSpec& spec, const Eigen::VectorXd& theta,
                        const Eigen::VectorXd& x);

/// Gradient of output component k with respect to the flat parameter vector,
/// reverse mode. ReLU uses the subgradient convention sigma'(0) = 0.
Eigen::VectorXd grad_params(const NetworkSpec& spec, const Eigen::VectorXd& theta,
                            const Eigen::VectorXd& x, int k);

/// Vector-Jacobian product: sum_k w_k * d(output_k)/d(theta) in one backward
/// pass. grad_params(k) equals grad_params_weighted with w = e_k.
Eigen::VectorXd grad_params_weighted(const NetworkSpec& spec,
                                     const Eigen::VectorXd& theta,
                                     const Eigen::VectorXd& x,
                                     const Eigen::VectorXd& w);

/// Block construction realizing sum_l c_l N(., theta_l) as a single network
/// with hidden widths n*m_j: first-layer weights stacked, interior layers
/// block diagonal, output weights concatenated and scaled by c_l, output
/// bias summed. For depth-1 (affine) networks the parameters combine
/// linearly and the spec is unchanged.
struct MergedNetwork {
    NetworkSpec spec;
    Eigen::VectorXd theta;
};
MergedNetwork merge(const NetworkSpec& spec, const std::vector<double>& coefficients,
                    const std::vector<Eigen::VectorXd>& thetas);

} // namespace rkbsnet
