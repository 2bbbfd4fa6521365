#include <doctest.h>

#include <Eigen/Dense>
#include <cmath>

#include "oracles.hpp"
#include "rkbsnet/network.hpp"
#include "rkbsnet/rng.hpp"

using namespace rkbsnet;

namespace {

Eigen::VectorXd random_vector(Rng& rng, int n, double scale = 1.0) {
    Eigen::VectorXd v(n);
    for (int i = 0; i < n; ++i) v(i) = rng.uniform(-scale, scale);
    return v;
}

} // namespace

TEST_CASE("param_dim matches the layout arithmetic") {
    CHECK(param_dim({2, 1, {3}, Activation::relu}) == 13);
    CHECK(param_dim({1, 1, {}, Activation::relu}) == 2);
    CHECK(param_dim({3, 2, {4, 4}, Activation::relu}) == 46);
}

TEST_CASE("spec validation rejects bad dimensions") {
    CHECK_THROWS_AS(param_dim({0, 1, {}, Activation::relu}), std::invalid_argument);
    CHECK_THROWS_AS(param_dim({1, 0, {}, Activation::relu}), std::invalid_argument);
    CHECK_THROWS_AS(param_dim({1, 1, {0}, Activation::relu}), std::invalid_argument);
}

TEST_CASE("depth-1 forward is the affine map") {
    const NetworkSpec spec{2, 2, {}, Activation::relu};
    NetworkParams params;
    params.weights.push_back(Eigen::MatrixXd::Identity(2, 2));
    params.biases.push_back(Eigen::VectorXd::Zero(2));
    const Eigen::VectorXd theta = flatten(spec, params);
    Eigen::VectorXd x(2);
    x << 1.0, 2.0;
    const Eigen::VectorXd out = forward(spec, theta, x);
    CHECK(out(0) == 1.0);
    CHECK(out(1) == 2.0);
}

TEST_CASE("relu hinge: max(0, x - 1)") {
    const NetworkSpec spec{1, 1, {1}, Activation::relu};
    Eigen::VectorXd theta(4);
    theta << 1.0, -1.0, 1.0, 0.0; // W1=1, b1=-1, W2=1, b2=0
    Eigen::VectorXd x(1);
    x << 0.0;
    CHECK(forward(spec, theta, x)(0) == 0.0);
    x << 2.0;
    CHECK(forward(spec, theta, x)(0) == 1.0);
}

TEST_CASE("forward matches an independent recomputation of the recursion") {
    Rng rng(91);
    for (int trial = 0; trial < 20; ++trial) {
        const bool use_relu = trial % 2 == 0;
        const NetworkSpec spec{2, 3, {4, 2},
                               use_relu ? Activation::relu : Activation::sigmoid};
        const Eigen::VectorXd theta = random_vector(rng, param_dim(spec), 2.0);
        const Eigen::VectorXd x = random_vector(rng, 2, 3.0);

        const auto expected = oracles::naive_forward(
            2, 3, {4, 2}, use_relu,
            std::vector<double>(theta.data(), theta.data() + theta.size()),
            std::vector<double>(x.data(), x.data() + x.size()));
        const Eigen::VectorXd got = forward(spec, theta, x);
        for (int k = 0; k < 3; ++k)
            CHECK(got(k) == doctest::Approx(expected[static_cast<std::size_t>(k)])
                                .epsilon(1e-14));
    }
}

TEST_CASE("flatten/unflatten round trip is bit exact") {
    Rng rng(7);
    const NetworkSpec spec{3, 2, {5, 4}, Activation::sigmoid};
    const Eigen::VectorXd theta = random_vector(rng, param_dim(spec));
    const Eigen::VectorXd back = flatten(spec, unflatten(spec, theta));
    CHECK((theta.array() == back.array()).all());
}

TEST_CASE("merge with one block reproduces the network") {
    Rng rng(17);
    const NetworkSpec spec{2, 2, {3}, Activation::relu};
    const Eigen::VectorXd theta = random_vector(rng, param_dim(spec));
    const auto merged = merge(spec, {1.0}, {theta});
    CHECK(merged.spec.hidden_widths == std::vector<int>{3});
    for (int trial = 0; trial < 20; ++trial) {
        const Eigen::VectorXd x = random_vector(rng, 2, 2.0);
        const Eigen::VectorXd a = forward(spec, theta, x);
        const Eigen::VectorXd b = forward(merged.spec, merged.theta, x);
        CHECK((a - b).cwiseAbs().maxCoeff() <= 1e-14);
    }
}

TEST_CASE("merging two networks doubles the hidden widths") {
    Rng rng(19);
    const NetworkSpec spec{2, 1, {3}, Activation::relu};
    const auto merged = merge(spec, {1.0, -0.5},
                              {random_vector(rng, param_dim(spec)),
                               random_vector(rng, param_dim(spec))});
    CHECK(merged.spec.hidden_widths == std::vector<int>{6});
}

TEST_CASE("merge equals the explicit linear combination") {
    Rng rng(23);
    for (const int n : {1, 2, 3, 5}) {
        const NetworkSpec spec{2, 2, {3, 2}, Activation::sigmoid};
        std::vector<double> coeffs;
        std::vector<Eigen::VectorXd> thetas;
        for (int l = 0; l < n; ++l) {
            coeffs.push_back(rng.uniform(-2.0, 2.0));
            thetas.push_back(random_vector(rng, param_dim(spec)));
        }
        const auto merged = merge(spec, coeffs, thetas);
        for (int j = 1; j < spec.depth(); ++j)
            CHECK(merged.spec.width(j) == n * spec.width(j));

        for (int trial = 0; trial < 100; ++trial) {
            const Eigen::VectorXd x = random_vector(rng, 2, 3.0);
            Eigen::VectorXd expected = Eigen::VectorXd::Zero(2);
            for (int l = 0; l < n; ++l)
                expected += coeffs[static_cast<std::size_t>(l)] *
                            forward(spec, thetas[static_cast<std::size_t>(l)], x);
            const Eigen::VectorXd got = forward(merged.spec, merged.theta, x);
            const double scale = std::max(1.0, expected.cwiseAbs().maxCoeff());
            CHECK((got - expected).cwiseAbs().maxCoeff() / scale <= 1e-12);
        }
    }
}

TEST_CASE("merge rejects an empty list and mismatched shapes") {
    const NetworkSpec spec{2, 1, {3}, Activation::relu};
    CHECK_THROWS_AS(merge(spec, {}, {}), std::invalid_argument);
    CHECK_THROWS_AS(merge(spec, {1.0}, {Eigen::VectorXd::Zero(5)}), std::invalid_argument);
}

TEST_CASE("depth-1 merge combines parameters linearly") {
    Rng rng(29);
    const NetworkSpec spec{2, 2, {}, Activation::relu};
    const Eigen::VectorXd t1 = random_vector(rng, param_dim(spec));
    const Eigen::VectorXd t2 = random_vector(rng, param_dim(spec));
    const auto merged = merge(spec, {2.0, -1.0}, {t1, t2});
    CHECK(merged.spec.hidden_widths.empty());
    for (int trial = 0; trial < 20; ++trial) {
        const Eigen::VectorXd x = random_vector(rng, 2);
        const Eigen::VectorXd expected =
            2.0 * forward(spec, t1, x) - forward(spec, t2, x);
        CHECK((forward(merged.spec, merged.theta, x) - expected).cwiseAbs().maxCoeff() <=
              1e-13);
    }
}

TEST_CASE("affine gradient: row k of W gets x, bias entry k gets 1") {
    const NetworkSpec spec{3, 2, {}, Activation::relu};
    Eigen::VectorXd theta = Eigen::VectorXd::Zero(param_dim(spec));
    theta << 0.5, -1.0, 2.0, 1.0, 0.0, -0.5, 0.3, -0.3;
    Eigen::VectorXd x(3);
    x << 1.0, -2.0, 0.5;

    const Eigen::VectorXd g = grad_params(spec, theta, x, 1);
    // Layout: W (2x3 row-major) then b (2). Output 1 touches W row 1 and b(1).
    CHECK(g(0) == 0.0);
    CHECK(g(1) == 0.0);
    CHECK(g(2) == 0.0);
    CHECK(g(3) == 1.0);
    CHECK(g(4) == -2.0);
    CHECK(g(5) == 0.5);
    CHECK(g(6) == 0.0);
    CHECK(g(7) == 1.0);
}

TEST_CASE("relu gradient at a kink uses sigma'(0) = 0 and is deterministic") {
    const NetworkSpec spec{1, 1, {1}, Activation::relu};
    Eigen::VectorXd theta(4);
    theta << 1.0, -1.0, 3.0, 0.0; // hidden preactivation is x - 1
    Eigen::VectorXd x(1);
    x << 1.0; // exactly at the kink
    const Eigen::VectorXd g = grad_params(spec, theta, x, 0);
    CHECK(g.allFinite());
    // sigma'(0) = 0 kills the path through W1 and b1.
    CHECK(g(0) == 0.0);
    CHECK(g(1) == 0.0);
    CHECK(g(2) == 0.0); // W2 sees sigma(0) = 0
    CHECK(g(3) == 1.0); // output bias
}

TEST_CASE("sigmoid gradient matches central finite differences") {
    Rng rng(37);
    const NetworkSpec spec{2, 2, {3, 3}, Activation::sigmoid};
    const Eigen::VectorXd theta = random_vector(rng, param_dim(spec));
    const Eigen::VectorXd x = random_vector(rng, 2, 2.0);

    for (int k = 0; k < 2; ++k) {
        const Eigen::VectorXd analytic = grad_params(spec, theta, x, k);
        const Eigen::VectorXd numeric = oracles::finite_difference_gradient(
            [&](const Eigen::VectorXd& t) { return forward(spec, t, x)(k); }, theta, 1e-5);
        double worst = 0.0;
        for (Eigen::Index i = 0; i < theta.size(); ++i) {
            const double scale =
                std::max({1.0, std::abs(analytic(i)), std::abs(numeric(i))});
            worst = std::max(worst, std::abs(analytic(i) - numeric(i)) / scale);
        }
        CHECK(worst <= 1e-5);
    }
}

TEST_CASE("shape errors are reported") {
    const NetworkSpec spec{2, 1, {3}, Activation::relu};
    CHECK_THROWS_AS(forward(spec, Eigen::VectorXd::Zero(5), Eigen::VectorXd::Zero(2)),
                    std::invalid_argument);
    CHECK_THROWS_AS(
        forward(spec, Eigen::VectorXd::Zero(param_dim(spec)), Eigen::VectorXd::Zero(3)),
        std::invalid_argument);
    CHECK_THROWS_AS(
        grad_params(spec, Eigen::VectorXd::Zero(param_dim(spec)), Eigen::VectorXd::Zero(2), 1),
        std::invalid_argument);
}
