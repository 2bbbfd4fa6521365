// Acceptance suite: every release gate in one binary. Each criterion prints
// a single PASS/FAIL line; the exit code is the number of failed criteria.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "rkbsnet/mni.hpp"
#include "rkbsnet/pipeline.hpp"
#include "rkbsnet/regularized.hpp"
#include "rkbsnet/rng.hpp"
#include "rkbsnet/trainer.hpp"

using namespace rkbsnet;
namespace fs = std::filesystem;

namespace {

int g_failures = 0;

void criterion(int number, const std::string& name, const std::function<bool(std::string&)>& body) {
    std::string detail;
    bool ok = false;
    try {
        ok = body(detail);
    } catch (const std::exception& e) {
        detail = std::string("exception: ") + e.what();
    }
    std::printf("criterion %d: %s  %s%s%s\n", number, ok ? "PASS" : "FAIL", name.c_str(),
                detail.empty() ? "" : " -- ", detail.c_str());
    if (!ok) ++g_failures;
}

struct Instance {
    NetworkSpec spec;
    WeightFn weight;
    Dataset data;
    CandidateSet cands;
    FeatureMatrix A;
    MniResult result;
};

Instance solve_instance(int s, int t, int m, int P, std::uint64_t seed) {
    Instance inst;
    inst.spec = {s, t, {2}, Activation::relu};
    inst.weight = WeightFn{};
    Rng rng(seed);
    for (int j = 0; j < m; ++j) {
        Eigen::VectorXd x(s);
        for (int d = 0; d < s; ++d) x(d) = rng.uniform(-1.0, 1.0);
        inst.data.x.push_back(std::move(x));
    }
    inst.data.y.resize(t, m);
    for (int k = 0; k < t; ++k)
        for (int j = 0; j < m; ++j) inst.data.y(k, j) = rng.uniform(-1.0, 1.0);
    inst.cands = sample_random(BoxSpec::symmetric(param_dim(inst.spec), 1.0), P,
                               derive_seed(seed, 1));
    inst.A = feature_matrix(inst.spec, inst.weight, inst.data, inst.cands);
    inst.result = solve_mni(inst.A, inst.data.y, inst.cands);
    return inst;
}

// Interpolable instance: targets generated by a sparse combination of
// candidate kernels, so the small-lambda limit is well conditioned.
Instance planted_instance(int m, int P, int spikes, std::uint64_t seed) {
    Instance inst;
    inst.spec = {1, 1, {2}, Activation::relu};
    inst.weight = WeightFn{};
    Rng rng(seed);
    for (int j = 0; j < m; ++j) {
        Eigen::VectorXd x(1);
        x << -0.8 + 1.6 * j / std::max(1, m - 1);
        inst.data.x.push_back(std::move(x));
    }
    inst.data.y.setZero(1, m);
    inst.cands = sample_random(BoxSpec::symmetric(param_dim(inst.spec), 1.0), P,
                               derive_seed(seed, 99));
    const FeatureMatrix base = feature_matrix(inst.spec, inst.weight, inst.data, inst.cands);
    Eigen::VectorXd targets = Eigen::VectorXd::Zero(m);
    for (int spike = 0; spike < spikes; ++spike) {
        const int p = static_cast<int>(rng.next_u64() % static_cast<std::uint64_t>(P));
        const double c = rng.uniform(0.5, 2.0) * (rng.uniform01() < 0.5 ? -1.0 : 1.0);
        targets += c * base.entries.col(p);
    }
    for (int j = 0; j < m; ++j) inst.data.y(0, j) = targets(j);
    inst.A = feature_matrix(inst.spec, inst.weight, inst.data, inst.cands);
    inst.result = solve_mni(inst.A, inst.data.y, inst.cands);
    return inst;
}

std::string format_sci(double v) {
    char buffer[32];
    std::snprintf(buffer, sizeof(buffer), "%.2e", v);
    return buffer;
}

std::string slurp(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    std::ostringstream buffer;
    buffer << in.rdbuf();
    return buffer.str();
}

} // namespace

int main() {
    // The 20 seeded interpolation instances shared by criteria 1-3:
    // s in {1,2}, t in {1,2}, m in {1..4}, P in {100..500}.
    std::vector<Instance> instances;
    const auto t0 = std::chrono::steady_clock::now();
    for (int i = 0; i < 20; ++i) {
        const int s = 1 + i % 2;
        const int t = 1 + (i / 2) % 2;
        const int m = 1 + i % 4;
        const int P = 100 + (i * 97) % 401;
        instances.push_back(solve_instance(s, t, m, P, 1000 + static_cast<std::uint64_t>(i)));
    }
    const double solve_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

    criterion(1, "strong duality on 20 seeded instances", [&](std::string& detail) {
        double worst = 0.0;
        for (const auto& inst : instances) {
            const double gap = std::abs(inst.result.report.tv - inst.result.certificate.cstar) /
                               std::max(1.0, inst.result.certificate.cstar);
            worst = std::max(worst, gap);
        }
        detail = "max normalized gap " + format_sci(worst) + ", solves took " +
                 format_sci(solve_seconds) + " s";
        return worst <= 1e-8 && solve_seconds < 30.0;
    });

    criterion(2, "representer structure (support, signs, sparsity, coefficient sum)",
              [&](std::string& detail) {
                  bool ok = true;
                  double worst_sum_gap = 0.0;
                  for (const auto& inst : instances) {
                      const auto& report = inst.result.report;
                      const auto& cert = inst.result.certificate;
                      const std::vector<int> argmax = argmax_set(cert, 1e-6);
                      for (const auto& atom : inst.result.measure.atoms) {
                          if (std::abs(atom.coeff) <= 1e-8) continue;
                          int index = -1;
                          for (int p = 0; p < inst.cands.count(); ++p)
                              if ((atom.theta.array() ==
                                   inst.cands.points[static_cast<std::size_t>(p)].array())
                                      .all()) {
                                  index = p;
                                  break;
                              }
                          if (index < 0 ||
                              !std::binary_search(argmax.begin(), argmax.end(), index))
                              ok = false;
                          if (cert.ghat_values(index) * atom.coeff <= 0.0) ok = false;
                      }
                      const int tm = inst.spec.output_dim * inst.data.count();
                      if (report.atom_count > tm) ok = false;
                      const double sum_gap =
                          report.coeff_sum_gap / std::max(1.0, cert.cstar);
                      worst_sum_gap = std::max(worst_sum_gap, sum_gap);
                      if (sum_gap > 1e-8) ok = false;
                  }
                  detail = "max normalized coefficient-sum gap " + format_sci(worst_sum_gap);
                  return ok;
              });

    criterion(3, "interpolation residual on every optimal solve", [&](std::string& detail) {
        double worst = 0.0;
        for (const auto& inst : instances) {
            const double scale = std::max(1.0, inst.data.y.cwiseAbs().maxCoeff());
            worst = std::max(worst, inst.result.report.max_interp_residual / scale);
        }
        detail = "max normalized residual " + format_sci(worst);
        return worst <= 1e-8;
    });

    criterion(4, "block merge equals the explicit linear combination", [&](std::string& detail) {
        Rng rng(42);
        const NetworkSpec spec{2, 2, {3, 2}, Activation::sigmoid};
        double worst = 0.0;
        bool widths_ok = true;
        for (const int n : {1, 2, 3}) {
            std::vector<double> coeffs;
            std::vector<Eigen::VectorXd> thetas;
            for (int l = 0; l < n; ++l) {
                coeffs.push_back(rng.uniform(-2.0, 2.0));
                Eigen::VectorXd theta(param_dim(spec));
                for (Eigen::Index i = 0; i < theta.size(); ++i)
                    theta(i) = rng.uniform(-1.0, 1.0);
                thetas.push_back(std::move(theta));
            }
            const MergedNetwork merged = merge(spec, coeffs, thetas);
            for (std::size_t j = 0; j < spec.hidden_widths.size(); ++j)
                if (merged.spec.hidden_widths[j] != n * spec.hidden_widths[j])
                    widths_ok = false;
            for (int trial = 0; trial < 100; ++trial) {
                Eigen::VectorXd x(2);
                x << rng.uniform(-2.0, 2.0), rng.uniform(-2.0, 2.0);
                Eigen::VectorXd expected = Eigen::VectorXd::Zero(2);
                for (int l = 0; l < n; ++l)
                    expected += coeffs[static_cast<std::size_t>(l)] *
                                forward(spec, thetas[static_cast<std::size_t>(l)], x);
                const Eigen::VectorXd got = forward(merged.spec, merged.theta, x);
                const double scale = std::max(1.0, expected.cwiseAbs().maxCoeff());
                worst = std::max(worst, (got - expected).cwiseAbs().maxCoeff() / scale);
            }
        }
        detail = "max relative deviation " + format_sci(worst);
        return worst <= 1e-12 && widths_ok;
    });

    criterion(5, "m=1 closed-form oracle for the dual and the recovery", [&](std::string& detail) {
        double worst = 0.0;
        for (const std::uint64_t seed : {7u, 8u, 9u}) {
            const Instance inst = solve_instance(1, 1, 1, 150, seed);
            const double y = inst.data.y(0, 0);
            const double peak = inst.A.entries.row(0).cwiseAbs().maxCoeff();
            worst = std::max(worst,
                             std::abs(inst.result.certificate.cstar - std::abs(y) / peak));
            // Brute force over single-atom interpolants.
            double best = std::numeric_limits<double>::infinity();
            for (Eigen::Index p = 0; p < inst.A.entries.cols(); ++p)
                if (inst.A.entries(0, p) != 0.0)
                    best = std::min(best, std::abs(y / inst.A.entries(0, p)));
            if (inst.result.measure.atoms.size() != 1) return false;
            worst = std::max(worst,
                             std::abs(std::abs(inst.result.measure.atoms[0].coeff) - best));
        }
        detail = "max deviation from brute force " + format_sci(worst);
        return worst <= 1e-10;
    });

    criterion(6, "regularization: KKT, zero threshold, consistency, lambda path",
              [&](std::string& detail) {
                  const Instance inst = planted_instance(3, 150, 2, 3);
                  bool ok = true;

                  RegProblem problem;
                  problem.A = inst.A;
                  problem.Y = inst.data.y;
                  problem.loss = Loss::square;

                  const double threshold = (inst.A.entries.transpose() *
                                            vectorize_targets(inst.data.y))
                                               .cwiseAbs()
                                               .maxCoeff();

                  // KKT at a moderate lambda.
                  problem.lambda = 0.3 * threshold;
                  const RegResult moderate = solve_regularized(problem, inst.cands);
                  if (!moderate.report.converged) ok = false;
                  if (moderate.report.kkt_max_violation >
                      1e-6 * std::max(1.0, problem.lambda))
                      ok = false;

                  // Zero-solution threshold, both sides.
                  problem.lambda = threshold * (1.0 + 1e-3);
                  if (!solve_regularized(problem, inst.cands).report.trivial_zero) ok = false;
                  problem.lambda = threshold * (1.0 - 1e-3);
                  if (solve_regularized(problem, inst.cands).report.trivial_zero) ok = false;

                  // Consistency with the interpolation problem of its own predictions.
                  const ConsistencyResult consistency =
                      mni_consistency(moderate.measure, inst.A, inst.cands);
                  if (consistency.trivial ||
                      consistency.gap > 1e-6 * std::max(1.0, moderate.report.tv))
                      ok = false;

                  // Lambda path down to 1e-6 approaches the interpolation value.
                  const std::vector<double> lambdas{1.0,  0.3,  0.1,  0.03, 0.01,
                                                    3e-3, 1e-3, 1e-4, 1e-5, 1e-6};
                  const auto rows =
                      lambda_path(inst.A, inst.data.y, Loss::square, lambdas, inst.cands);
                  for (std::size_t i = 1; i < rows.size(); ++i)
                      if (rows[i].tv < rows[i - 1].tv - 1e-9) ok = false;
                  for (const auto& row : rows)
                      if (row.kkt_max_violation > 1e-6 * std::max(1.0, row.lambda)) ok = false;
                  const double final_gap =
                      std::abs(rows.back().tv - inst.result.certificate.cstar);
                  if (final_gap > 1e-3) ok = false;
                  detail = "path endpoint gap to C* " + format_sci(final_gap) +
                           ", consistency gap " + format_sci(consistency.gap);
                  return ok;
              });

    criterion(7, "trainer: gradient fidelity, monotone descent, 10x reduction",
              [&](std::string& detail) {
                  const NetworkSpec spec{2, 1, {4}, Activation::sigmoid};
                  Rng rng(55);
                  Dataset data;
                  for (int j = 0; j < 20; ++j) {
                      Eigen::VectorXd x(2);
                      x << rng.uniform(-1.0, 1.0), rng.uniform(-1.0, 1.0);
                      data.x.push_back(std::move(x));
                  }
                  data.y.resize(1, 20);
                  for (int j = 0; j < 20; ++j) {
                      const auto& x = data.x[static_cast<std::size_t>(j)];
                      data.y(0, j) = std::sin(2.0 * x(0)) + 0.5 * x(1);
                  }

                  TrainConfig cfg;
                  cfg.atom_count = 4;
                  cfg.learning_rate = 0.1;
                  cfg.max_iters = 1000;
                  cfg.seed = 23;
                  cfg.init_box = BoxSpec::symmetric(param_dim(spec), 1.0);
                  const auto [model, trace] = train_expansion(spec, data, cfg);

                  bool monotone = true;
                  for (std::size_t i = 1; i < trace.losses.size(); ++i)
                      if (trace.losses[i] > trace.losses[i - 1]) monotone = false;
                  const double reduction = trace.losses.front() / trace.losses.back();
                  const double grad_err =
                      grad_check(spec, data, model.beta, model.thetas, 1e-5);
                  detail = "grad check " + format_sci(grad_err) + ", loss reduction " +
                           format_sci(reduction) + "x";
                  return monotone && reduction >= 10.0 && grad_err <= 1e-5;
              });

    criterion(8, "pipeline determinism and refinement-trace monotonicity",
              [&](std::string& detail) {
                  const fs::path root = fs::temp_directory_path() / "rkbsnet_acceptance";
                  fs::remove_all(root);
                  fs::create_directories(root);
                  {
                      std::ofstream cfg(root / "config.json");
                      cfg << R"({
  "network": {"input_dim": 1, "output_dim": 1, "hidden_widths": [2], "activation": "relu"},
  "weight": {"alpha": 1.0},
  "candidates": {"count": 120, "seed": 31, "refine_rounds": 2, "refine_count": 8},
  "problem": "mni",
  "dataset": "data.csv",
  "output_dir": "out"
})";
                  }
                  {
                      std::ofstream data(root / "data.csv");
                      data << "x0,y0\n-0.4,0.3\n0.5,-0.7\n0.9,0.4\n";
                  }
                  const RunConfig cfg1 =
                      load_run_config(root / "config.json", (root / "out1").string(), {});
                  const RunConfig cfg2 =
                      load_run_config(root / "config.json", (root / "out2").string(), {});
                  if (run_pipeline(cfg1).exit_code != 0) return false;
                  if (run_pipeline(cfg2).exit_code != 0) return false;
                  for (const char* artifact : {"model.json", "report.json", "plot_data.csv"})
                      if (slurp(root / "out1" / artifact) != slurp(root / "out2" / artifact))
                          return false;
                  const auto report =
                      nlohmann::json::parse(slurp(root / "out1" / "report.json"));
                  const auto trace = report["cstar_trace"].get<std::vector<double>>();
                  double worst_rise = 0.0;
                  for (std::size_t i = 1; i < trace.size(); ++i)
                      worst_rise = std::max(worst_rise, trace[i] - trace[i - 1]);
                  fs::remove_all(root);
                  detail = "trace length " + std::to_string(trace.size()) +
                           ", max C* rise " + format_sci(worst_rise);
                  return worst_rise <= 1e-10;
              });

    criterion(9, "kernel decay beyond |theta| = 10 on the unit box", [&](std::string& detail) {
        Rng rng(91);
        double worst = 0.0;
        for (const auto activation : {Activation::relu, Activation::sigmoid}) {
            const NetworkSpec spec{2, 1, {3}, activation};
            for (int trial = 0; trial < 200; ++trial) {
                Eigen::VectorXd direction(param_dim(spec));
                for (Eigen::Index i = 0; i < direction.size(); ++i)
                    direction(i) = rng.uniform(-1.0, 1.0);
                direction.normalize();
                const Eigen::VectorXd theta = rng.uniform(10.0, 40.0) * direction;
                Eigen::VectorXd x(2);
                x << rng.uniform(-1.0, 1.0), rng.uniform(-1.0, 1.0);
                worst = std::max(
                    worst, kernel_eval(spec, WeightFn{}, x, theta).cwiseAbs().maxCoeff());
            }
        }
        detail = "max |K| " + format_sci(worst);
        return worst <= 1e-20;
    });

    if (g_failures == 0)
        std::printf("all %d criteria passed\n", 9);
    else
        std::printf("%d criteria FAILED\n", g_failures);
    return g_failures;
}
