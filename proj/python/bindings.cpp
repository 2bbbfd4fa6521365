#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include "rkbsnet/candidates.hpp"
#include "rkbsnet/kernel.hpp"
#include "rkbsnet/measure.hpp"
#include "rkbsnet/mni.hpp"
#include "rkbsnet/network.hpp"
#include "rkbsnet/pipeline.hpp"
#include "rkbsnet/regularized.hpp"
#include "rkbsnet/trainer.hpp"

namespace py = pybind11;
using namespace rkbsnet;

namespace {

NetworkSpec make_spec(int input_dim, int output_dim, const std::vector<int>& hidden,
                      const std::string& activation) {
    NetworkSpec spec{input_dim, output_dim, hidden, activation_from_string(activation)};
    spec.validate();
    return spec;
}

BoxSpec make_box(const Eigen::VectorXd& lower, const Eigen::VectorXd& upper) {
    BoxSpec box{lower, upper};
    box.validate();
    return box;
}

Dataset make_dataset(const Eigen::MatrixXd& xs, const Eigen::MatrixXd& ys) {
    if (xs.rows() != ys.rows())
        throw std::invalid_argument("xs and ys must have one row per data point");
    Dataset data;
    for (Eigen::Index j = 0; j < xs.rows(); ++j) data.x.push_back(xs.row(j).transpose());
    data.y = ys.transpose();
    return data;
}

std::vector<Eigen::VectorXd> rows_of(const Eigen::MatrixXd& mat) {
    std::vector<Eigen::VectorXd> rows;
    rows.reserve(static_cast<std::size_t>(mat.rows()));
    for (Eigen::Index i = 0; i < mat.rows(); ++i) rows.push_back(mat.row(i).transpose());
    return rows;
}

Eigen::MatrixXd stack_rows(const std::vector<Eigen::VectorXd>& rows, Eigen::Index dim) {
    Eigen::MatrixXd mat(static_cast<Eigen::Index>(rows.size()), dim);
    for (std::size_t i = 0; i < rows.size(); ++i)
        mat.row(static_cast<Eigen::Index>(i)) = rows[i].transpose();
    return mat;
}

py::dict mni_report_dict(const MniReport& report) {
    py::dict out;
    out["tv"] = report.tv;
    out["duality_gap"] = report.duality_gap;
    out["max_interp_residual"] = report.max_interp_residual;
    out["coeff_sum_gap"] = report.coeff_sum_gap;
    out["support_in_argmax"] = report.support_in_argmax;
    out["sign_aligned"] = report.sign_aligned;
    out["atom_count"] = report.atom_count;
    out["argmax_tol"] = report.argmax_tol;
    out["trivial"] = report.trivial;
    return out;
}

} // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "Weighted deep-network kernels: minimum-norm interpolation and "
              "TV-regularized learning over discrete parameter measures.";

    py::class_<NetworkSpec>(m, "NetworkSpec")
        .def(py::init(&make_spec), py::arg("input_dim"), py::arg("output_dim"),
             py::arg("hidden_widths") = std::vector<int>{},
             py::arg("activation") = "relu")
        .def_readonly("input_dim", &NetworkSpec::input_dim)
        .def_readonly("output_dim", &NetworkSpec::output_dim)
        .def_readonly("hidden_widths", &NetworkSpec::hidden_widths)
        .def_property_readonly(
            "activation",
            [](const NetworkSpec& s) { return to_string(s.activation); })
        .def("__repr__", [](const NetworkSpec& s) {
            std::string widths;
            for (int w : s.hidden_widths)
                widths += (widths.empty() ? "" : ", ") + std::to_string(w);
            return "NetworkSpec(" + std::to_string(s.input_dim) + ", " +
                   std::to_string(s.output_dim) + ", [" + widths + "], " +
                   to_string(s.activation) + ")";
        });

    py::class_<CandidateSet>(m, "CandidateSet")
        .def_property_readonly("points",
                               [](const CandidateSet& c) {
                                   return stack_rows(c.points, c.box.lower.size());
                               })
        .def_property_readonly("provenance",
                               [](const CandidateSet& c) { return to_string(c.provenance); })
        .def_readonly("seed", &CandidateSet::seed)
        .def("__len__", [](const CandidateSet& c) { return c.points.size(); });

    m.def("param_dim", &param_dim, py::arg("spec"));

    m.def(
        "forward",
        [](const NetworkSpec& spec, const Eigen::VectorXd& theta, const Eigen::VectorXd& x) {
            return forward(spec, theta, x);
        },
        py::arg("spec"), py::arg("theta"), py::arg("x"));

    m.def(
        "grad_params",
        [](const NetworkSpec& spec, const Eigen::VectorXd& theta, const Eigen::VectorXd& x,
           int k) { return grad_params(spec, theta, x, k); },
        py::arg("spec"), py::arg("theta"), py::arg("x"), py::arg("k"));

    m.def(
        "merge",
        [](const NetworkSpec& spec, const std::vector<double>& coeffs,
           const Eigen::MatrixXd& thetas) {
            const MergedNetwork merged = merge(spec, coeffs, rows_of(thetas));
            return py::make_tuple(merged.spec, merged.theta);
        },
        py::arg("spec"), py::arg("coefficients"), py::arg("thetas"),
        "Block construction: returns (merged_spec, merged_theta) whose forward "
        "pass equals the coefficient-weighted sum of the inputs.");

    m.def(
        "rho",
        [](const Eigen::VectorXd& theta, double alpha) {
            return rho(WeightFn{WeightFn::Kind::gaussian_of_norm, alpha}, theta);
        },
        py::arg("theta"), py::arg("alpha") = 1.0);

    m.def(
        "kernel_eval",
        [](const NetworkSpec& spec, const Eigen::VectorXd& x, const Eigen::VectorXd& theta,
           double alpha) {
            return kernel_eval(spec, WeightFn{WeightFn::Kind::gaussian_of_norm, alpha}, x,
                               theta);
        },
        py::arg("spec"), py::arg("x"), py::arg("theta"), py::arg("alpha") = 1.0);

    m.def(
        "sample_random",
        [](const Eigen::VectorXd& lower, const Eigen::VectorXd& upper, int count,
           std::uint64_t seed) { return sample_random(make_box(lower, upper), count, seed); },
        py::arg("lower"), py::arg("upper"), py::arg("count"), py::arg("seed") = 0);

    m.def(
        "sample_grid",
        [](const Eigen::VectorXd& lower, const Eigen::VectorXd& upper, int points_per_dim) {
            return sample_grid(make_box(lower, upper), points_per_dim);
        },
        py::arg("lower"), py::arg("upper"), py::arg("points_per_dim"));

    m.def(
        "refine",
        [](const CandidateSet& cands, const Eigen::MatrixXd& centers, double radius,
           int count_per_center, std::uint64_t seed) {
            return refine(cands, rows_of(centers), radius, count_per_center, seed);
        },
        py::arg("candidates"), py::arg("centers"), py::arg("radius"),
        py::arg("count_per_center"), py::arg("seed") = 0);

    m.def(
        "feature_matrix",
        [](const NetworkSpec& spec, const Eigen::MatrixXd& xs, const Eigen::MatrixXd& ys,
           const CandidateSet& cands, double alpha) {
            return feature_matrix(spec, WeightFn{WeightFn::Kind::gaussian_of_norm, alpha},
                                  make_dataset(xs, ys), cands)
                .entries;
        },
        py::arg("spec"), py::arg("xs"), py::arg("ys"), py::arg("candidates"),
        py::arg("alpha") = 1.0,
        "Matrix of K_k(x_j, theta_p) with row index k*m + j; xs is (m, s), ys is (m, t).");

    m.def(
        "solve_mni",
        [](const NetworkSpec& spec, const Eigen::MatrixXd& xs, const Eigen::MatrixXd& ys,
           const CandidateSet& cands, double alpha, double argmax_tol, double coeff_tol,
           double lp_tol) {
            const WeightFn w{WeightFn::Kind::gaussian_of_norm, alpha};
            const Dataset data = make_dataset(xs, ys);
            const FeatureMatrix A = feature_matrix(spec, w, data, cands);
            MniOptions opts;
            opts.argmax_tol = argmax_tol;
            opts.coeff_tol = coeff_tol;
            opts.lp_tol = lp_tol;
            const MniResult result = solve_mni(A, data.y, cands, opts);

            const int dim = param_dim(spec);
            Eigen::MatrixXd thetas(static_cast<Eigen::Index>(result.measure.atoms.size()), dim);
            Eigen::VectorXd coeffs(static_cast<Eigen::Index>(result.measure.atoms.size()));
            for (std::size_t l = 0; l < result.measure.atoms.size(); ++l) {
                thetas.row(static_cast<Eigen::Index>(l)) =
                    result.measure.atoms[l].theta.transpose();
                coeffs(static_cast<Eigen::Index>(l)) = result.measure.atoms[l].coeff;
            }
            py::dict out;
            out["atom_thetas"] = thetas;
            out["atom_coeffs"] = coeffs;
            out["cstar"] = result.certificate.cstar;
            out["chat"] = result.certificate.chat;
            out["ghat_values"] = result.certificate.ghat_values;
            out["ghat_norm"] = result.certificate.ghat_norm;
            out["report"] = mni_report_dict(result.report);
            return out;
        },
        py::arg("spec"), py::arg("xs"), py::arg("ys"), py::arg("candidates"),
        py::arg("alpha") = 1.0, py::arg("argmax_tol") = 1e-6, py::arg("coeff_tol") = 1e-8,
        py::arg("lp_tol") = 1e-9,
        "Two-stage minimum-norm interpolation: dual certificate, sparse measure "
        "recovery and representer verification.");

    m.def(
        "solve_regularized",
        [](const NetworkSpec& spec, const Eigen::MatrixXd& xs, const Eigen::MatrixXd& ys,
           const CandidateSet& cands, double lam, const std::string& loss, double alpha) {
            const WeightFn w{WeightFn::Kind::gaussian_of_norm, alpha};
            const Dataset data = make_dataset(xs, ys);
            RegProblem problem;
            problem.A = feature_matrix(spec, w, data, cands);
            problem.Y = data.y;
            problem.lambda = lam;
            problem.loss = loss_from_string(loss);
            const RegResult result = solve_regularized(problem, cands);
            const ConsistencyResult consistency =
                mni_consistency(result.measure, problem.A, cands);

            py::dict out;
            out["coefficients"] = result.coefficients;
            out["loss_value"] = result.report.loss_value;
            out["tv"] = result.report.tv;
            out["kkt_max_violation"] = result.report.kkt_max_violation;
            out["converged"] = result.report.converged;
            out["sweeps"] = result.report.sweeps;
            out["objective_monotone"] = result.report.objective_monotone;
            out["trivial_zero"] = result.report.trivial_zero;
            out["mni_consistency_gap"] =
                consistency.trivial ? py::object(py::none()) : py::object(py::float_(consistency.gap));
            return out;
        },
        py::arg("spec"), py::arg("xs"), py::arg("ys"), py::arg("candidates"),
        py::arg("lam"), py::arg("loss") = "square", py::arg("alpha") = 1.0);

    m.def(
        "lambda_path",
        [](const NetworkSpec& spec, const Eigen::MatrixXd& xs, const Eigen::MatrixXd& ys,
           const CandidateSet& cands, const std::vector<double>& lambdas,
           const std::string& loss, double alpha) {
            const WeightFn w{WeightFn::Kind::gaussian_of_norm, alpha};
            const Dataset data = make_dataset(xs, ys);
            const FeatureMatrix A = feature_matrix(spec, w, data, cands);
            const auto rows = lambda_path(A, data.y, loss_from_string(loss), lambdas, cands);
            py::list out;
            for (const auto& row : rows) {
                py::dict r;
                r["lambda"] = row.lambda;
                r["loss_value"] = row.loss_value;
                r["tv"] = row.tv;
                r["kkt_max_violation"] = row.kkt_max_violation;
                out.append(std::move(r));
            }
            return out;
        },
        py::arg("spec"), py::arg("xs"), py::arg("ys"), py::arg("candidates"),
        py::arg("lambdas"), py::arg("loss") = "square", py::arg("alpha") = 1.0);

    m.def(
        "train_expansion",
        [](const NetworkSpec& spec, const Eigen::MatrixXd& xs, const Eigen::MatrixXd& ys,
           int atom_count, double learning_rate, long max_iters, std::uint64_t seed,
           double init_box_bound) {
            TrainConfig cfg;
            cfg.atom_count = atom_count;
            cfg.learning_rate = learning_rate;
            cfg.max_iters = max_iters;
            cfg.seed = seed;
            cfg.init_box = BoxSpec::symmetric(param_dim(spec), init_box_bound);
            const auto [model, trace] = train_expansion(spec, make_dataset(xs, ys), cfg);

            py::dict out;
            out["beta"] = model.beta;
            out["thetas"] = stack_rows(model.thetas, param_dim(spec));
            out["losses"] = trace.losses;
            out["iterations"] = trace.iterations;
            return out;
        },
        py::arg("spec"), py::arg("xs"), py::arg("ys"), py::arg("atom_count"),
        py::arg("learning_rate") = 0.5, py::arg("max_iters") = 500, py::arg("seed") = 0,
        py::arg("init_box_bound") = 1.0);

    m.def(
        "grad_check",
        [](const NetworkSpec& spec, const Eigen::MatrixXd& xs, const Eigen::MatrixXd& ys,
           const Eigen::VectorXd& beta, const Eigen::MatrixXd& thetas, double h) {
            return grad_check(spec, make_dataset(xs, ys), beta, rows_of(thetas), h);
        },
        py::arg("spec"), py::arg("xs"), py::arg("ys"), py::arg("beta"), py::arg("thetas"),
        py::arg("h") = 1e-5);

    m.def(
        "run_pipeline",
        [](const std::filesystem::path& config, const std::optional<std::string>& out,
           const std::optional<std::uint64_t>& seed, const std::string& problem) {
            RunConfig cfg = load_run_config(config, out, seed);
            if (!problem.empty()) cfg.problem = problem_from_string(problem);
            const PipelineOutcome outcome = run_pipeline(cfg);
            return py::make_tuple(outcome.exit_code, outcome.failure);
        },
        py::arg("config"), py::arg("out") = std::nullopt, py::arg("seed") = std::nullopt,
        py::arg("problem") = "",
        "Runs the configured problem; returns (exit_code, failing_check).");
}
