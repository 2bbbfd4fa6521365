#include "rkbsnet/pipeline.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "rkbsnet/mni.hpp"
#include "rkbsnet/rng.hpp"

namespace rkbsnet {

namespace {

using nlohmann::json;
using nlohmann::ordered_json;

// Verification thresholds; these are the pass/fail gates of the pipeline.
constexpr double kDualityGapTol = 1e-8;   // * max(1, C*)
constexpr double kInterpTol = 1e-8;       // * max(1, |Y|_inf)
constexpr double kCoeffSumTol = 1e-8;     // * max(1, C*)
constexpr double kTraceSlack = 1e-10;     // refinement C* trace non-increase
constexpr double kKktTol = 1e-6;          // * max(1, lambda)
constexpr double kConsistencyTol = 1e-6;  // * max(1, tv)
constexpr double kPathSlack = 1e-9;       // tv monotonicity along the path
constexpr double kGradCheckTol = 1e-5;
constexpr double kRoundTripTol = 1e-12;

std::string read_text_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("cannot open '" + path.string() + "'");
    std::ostringstream buffer;
    buffer << in.rdbuf();
    return buffer.str();
}

void write_text_file(const std::filesystem::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw ConfigError("cannot write '" + path.string() + "'");
    out << text;
    if (!out) throw ConfigError("write failed for '" + path.string() + "'");
}

json parse_json_file(const std::filesystem::path& path) {
    try {
        return json::parse(read_text_file(path));
    } catch (const json::exception& e) {
        throw ConfigError("failed to parse '" + path.string() + "': " + e.what());
    }
}

double get_double(const json& obj, const std::string& key, double fallback) {
    if (!obj.contains(key)) return fallback;
    if (!obj[key].is_number()) throw ConfigError("field '" + key + "' must be a number");
    return obj[key].get<double>();
}

long get_integer(const json& obj, const std::string& key, long fallback) {
    if (!obj.contains(key)) return fallback;
    if (!obj[key].is_number_integer())
        throw ConfigError("field '" + key + "' must be an integer");
    return obj[key].get<long>();
}

bool get_bool(const json& obj, const std::string& key, bool fallback) {
    if (!obj.contains(key)) return fallback;
    if (!obj[key].is_boolean()) throw ConfigError("field '" + key + "' must be a boolean");
    return obj[key].get<bool>();
}

std::string get_string(const json& obj, const std::string& key,
                       const std::string& fallback) {
    if (!obj.contains(key)) return fallback;
    if (!obj[key].is_string()) throw ConfigError("field '" + key + "' must be a string");
    return obj[key].get<std::string>();
}

ordered_json network_to_json(const NetworkSpec& spec) {
    ordered_json out;
    out["input_dim"] = spec.input_dim;
    out["output_dim"] = spec.output_dim;
    out["hidden_widths"] = spec.hidden_widths;
    out["activation"] = to_string(spec.activation);
    return out;
}

NetworkSpec network_from_json(const json& obj) {
    NetworkSpec spec;
    spec.input_dim = static_cast<int>(get_integer(obj, "input_dim", 0));
    spec.output_dim = static_cast<int>(get_integer(obj, "output_dim", 0));
    if (obj.contains("hidden_widths")) {
        if (!obj["hidden_widths"].is_array())
            throw ConfigError("network.hidden_widths must be an array");
        for (const auto& w : obj["hidden_widths"]) {
            if (!w.is_number_integer())
                throw ConfigError("network.hidden_widths entries must be integers");
            spec.hidden_widths.push_back(w.get<int>());
        }
    }
    spec.activation = activation_from_string(get_string(obj, "activation", "relu"));
    try {
        spec.validate();
    } catch (const std::exception& e) {
        throw ConfigError(std::string("invalid network: ") + e.what());
    }
    return spec;
}

ordered_json atoms_to_json(const std::vector<Atom>& atoms) {
    ordered_json out = ordered_json::array();
    for (const auto& atom : atoms) {
        ordered_json a;
        a["theta"] = std::vector<double>(atom.theta.data(),
                                         atom.theta.data() + atom.theta.size());
        a["coeff"] = atom.coeff;
        out.push_back(std::move(a));
    }
    return out;
}

struct LoadedModel {
    std::string kind; // "measure" | "expansion"
    NetworkSpec spec;
    WeightFn weight;
    std::vector<Atom> atoms;
};

LoadedModel load_model_json(const std::filesystem::path& path) {
    const json obj = parse_json_file(path);
    LoadedModel model;
    model.kind = get_string(obj, "kind", "");
    if (model.kind != "measure" && model.kind != "expansion")
        throw ConfigError("model kind must be 'measure' or 'expansion'");
    if (!obj.contains("network")) throw ConfigError("model is missing 'network'");
    model.spec = network_from_json(obj["network"]);
    if (obj.contains("weight")) model.weight.alpha = get_double(obj["weight"], "alpha", 1.0);
    if (!obj.contains("atoms") || !obj["atoms"].is_array())
        throw ConfigError("model is missing the atom list");
    const int dim = param_dim(model.spec);
    for (const auto& a : obj["atoms"]) {
        if (!a.contains("theta") || !a["theta"].is_array() || !a.contains("coeff"))
            throw ConfigError("malformed atom entry");
        Eigen::VectorXd theta(a["theta"].size());
        Eigen::Index i = 0;
        for (const auto& v : a["theta"]) theta(i++) = v.get<double>();
        if (theta.size() != dim)
            throw ConfigError("atom parameter length does not match the network");
        model.atoms.push_back({std::move(theta), a["coeff"].get<double>()});
    }
    return model;
}

Eigen::VectorXd model_predict(const LoadedModel& model, const Eigen::VectorXd& x) {
    Eigen::VectorXd value = Eigen::VectorXd::Zero(model.spec.output_dim);
    for (const auto& atom : model.atoms) {
        Eigen::VectorXd term = forward(model.spec, atom.theta, x);
        if (model.kind == "measure") term *= rho(model.weight, atom.theta);
        value += atom.coeff * term;
    }
    return value;
}

double prediction_residual_inf(const LoadedModel& model, const Dataset& data) {
    double worst = 0.0;
    for (int j = 0; j < data.count(); ++j) {
        const Eigen::VectorXd pred = model_predict(model, data.x[static_cast<std::size_t>(j)]);
        worst = std::max(worst, (pred - data.y.col(j)).cwiseAbs().maxCoeff());
    }
    return worst;
}

CandidateSet build_candidates(const RunConfig& cfg) {
    const int dim = param_dim(cfg.network);
    const double bound =
        cfg.candidates.box_bound.value_or(default_box_bound(cfg.weight.alpha));
    const BoxSpec box = BoxSpec::symmetric(dim, bound);
    if (cfg.candidates.grid) return sample_grid(box, cfg.candidates.grid_points_per_dim);
    return sample_random(box, cfg.candidates.count, cfg.candidates.seed);
}

struct CheckCollector {
    PipelineOutcome outcome;

    void require(bool ok, const std::string& name) {
        if (!ok && outcome.exit_code == 0) {
            outcome.exit_code = 1;
            outcome.failure = name;
        }
    }
};

ordered_json mni_report_json(const MniResult& result, const std::vector<double>& trace,
                             double residual_inf) {
    ordered_json report;
    report["format_version"] = 1;
    report["problem"] = "mni";
    report["trivial"] = result.report.trivial;
    report["cstar"] = result.certificate.cstar;
    report["tv"] = result.report.tv;
    report["duality_gap"] = result.report.duality_gap;
    report["max_interp_residual"] = result.report.max_interp_residual;
    report["coeff_sum_gap"] = result.report.coeff_sum_gap;
    report["support_in_argmax"] = result.report.support_in_argmax;
    report["sign_aligned"] = result.report.sign_aligned;
    report["atom_count"] = result.report.atom_count;
    report["argmax_tol"] = result.report.argmax_tol;
    report["ghat_norm"] = result.certificate.ghat_norm;
    report["cstar_trace"] = trace;
    report["prediction_residual_inf"] = residual_inf;
    report["candidate_count"] = static_cast<int>(result.certificate.ghat_values.size());
    return report;
}

void emit_model(const std::filesystem::path& out_dir, const std::string& kind,
                const NetworkSpec& spec, const WeightFn& weight,
                const std::vector<Atom>& atoms) {
    ordered_json model;
    model["format_version"] = 1;
    model["kind"] = kind;
    model["network"] = network_to_json(spec);
    model["weight"] = {{"kind", "gaussian_of_norm"}, {"alpha", weight.alpha}};
    model["atoms"] = atoms_to_json(atoms);
    write_text_file(out_dir / "model.json", model.dump(2) + "\n");
}

void emit_report_file(const std::filesystem::path& out_dir, const ordered_json& report) {
    write_text_file(out_dir / "report.json", report.dump(2) + "\n");
}

PipelineOutcome run_mni(const RunConfig& cfg, const Dataset& data) {
    CandidateSet cands = build_candidates(cfg);
    const Eigen::MatrixXd& Y = data.y;

    MniOptions opts;
    opts.argmax_tol = cfg.tolerances.argmax_tol;
    opts.coeff_tol = cfg.tolerances.coeff_tol;
    opts.lp_tol = cfg.tolerances.lp_tol;

    std::vector<double> cstar_trace;
    if (!Y.isZero(0.0)) {
        const double bound =
            cfg.candidates.box_bound.value_or(default_box_bound(cfg.weight.alpha));
        const double radius = cfg.candidates.refine_radius.value_or(bound / 10.0);
        for (int round = 0; round < cfg.candidates.refine_rounds; ++round) {
            const FeatureMatrix A = feature_matrix(cfg.network, cfg.weight, data, cands);
            const DualCertificate cert = solve_dual(A, Y, opts.lp_tol);
            cstar_trace.push_back(cert.cstar);
            std::vector<Eigen::VectorXd> centers;
            for (int p : argmax_set(cert, opts.argmax_tol))
                centers.push_back(cands.points[static_cast<std::size_t>(p)]);
            cands = refine(cands, centers, radius, cfg.candidates.refine_count,
                           derive_seed(cfg.candidates.seed, 1000 + static_cast<std::uint64_t>(round)));
        }
    }

    const FeatureMatrix A = feature_matrix(cfg.network, cfg.weight, data, cands);
    MniResult result = solve_mni(A, Y, cands, opts);
    cstar_trace.push_back(result.certificate.cstar);

    // Independent re-check of the report fields.
    result.report = verify_representer(result.measure, result.certificate, A, cands, opts);

    LoadedModel view{"measure", cfg.network, cfg.weight, result.measure.atoms};
    const double residual_inf = prediction_residual_inf(view, data);

    emit_model(cfg.output_dir, "measure", cfg.network, cfg.weight, result.measure.atoms);
    emit_report_file(cfg.output_dir, mni_report_json(result, cstar_trace, residual_inf));

    {
        std::string csv = "index,ghat,selected\n";
        std::vector<bool> selected(static_cast<std::size_t>(cands.count()), false);
        for (const auto& atom : result.measure.atoms)
            for (int p = 0; p < cands.count(); ++p)
                if ((atom.theta.array() == cands.points[static_cast<std::size_t>(p)].array()).all())
                    selected[static_cast<std::size_t>(p)] = true;
        for (int p = 0; p < cands.count(); ++p) {
            const double ghat = result.certificate.ghat_values.size() > 0
                                    ? result.certificate.ghat_values(p)
                                    : 0.0;
            csv += std::to_string(p) + "," + format_double(ghat) + "," +
                   (selected[static_cast<std::size_t>(p)] ? "1" : "0") + "\n";
        }
        write_text_file(cfg.output_dir / "plot_data.csv", csv);
    }

    CheckCollector checks;
    if (!result.report.trivial) {
        const double cstar = result.certificate.cstar;
        checks.require(result.report.duality_gap <= kDualityGapTol * std::max(1.0, cstar),
                       "duality_gap");
        checks.require(result.report.max_interp_residual <=
                           kInterpTol * std::max(1.0, Y.cwiseAbs().maxCoeff()),
                       "max_interp_residual");
        checks.require(result.report.support_in_argmax, "support_in_argmax");
        checks.require(result.report.sign_aligned, "sign_aligned");
        checks.require(result.report.atom_count <=
                           cfg.network.output_dim * data.count(),
                       "atom_count");
        checks.require(result.report.coeff_sum_gap <= kCoeffSumTol * std::max(1.0, cstar),
                       "coeff_sum_gap");
        for (std::size_t i = 1; i < cstar_trace.size(); ++i)
            checks.require(cstar_trace[i] <= cstar_trace[i - 1] + kTraceSlack,
                           "cstar_trace_monotonicity");
    }
    return checks.outcome;
}

PipelineOutcome run_reg(const RunConfig& cfg, const Dataset& data) {
    const CandidateSet cands = build_candidates(cfg);
    const FeatureMatrix A = feature_matrix(cfg.network, cfg.weight, data, cands);

    RegProblem problem;
    problem.A = A;
    problem.Y = data.y;
    problem.lambda = cfg.reg.lambda;
    problem.loss = cfg.reg.loss;

    RegOptions opts;
    opts.lp_tol = cfg.tolerances.lp_tol;

    const RegResult result = solve_regularized(problem, cands, opts);
    const ConsistencyResult consistency =
        mni_consistency(result.measure, A, cands, opts.lp_tol);

    LoadedModel view{"measure", cfg.network, cfg.weight, result.measure.atoms};
    const double residual_inf = prediction_residual_inf(view, data);

    emit_model(cfg.output_dir, "measure", cfg.network, cfg.weight, result.measure.atoms);

    ordered_json report;
    report["format_version"] = 1;
    report["problem"] = "reg";
    report["lambda"] = cfg.reg.lambda;
    report["loss"] = to_string(cfg.reg.loss);
    report["loss_value"] = result.report.loss_value;
    report["tv"] = result.report.tv;
    report["kkt_max_violation"] = result.report.kkt_max_violation;
    if (!consistency.trivial) report["mni_consistency_gap"] = consistency.gap;
    report["consistency_trivial"] = consistency.trivial;
    report["converged"] = result.report.converged;
    report["sweeps"] = result.report.sweeps;
    report["objective_monotone"] = result.report.objective_monotone;
    report["trivial_zero"] = result.report.trivial_zero;
    report["atom_count"] = static_cast<int>(result.measure.atoms.size());
    report["prediction_residual_inf"] = residual_inf;
    emit_report_file(cfg.output_dir, report);

    CheckCollector checks;
    checks.require(result.report.converged, "converged");
    if (cfg.reg.loss == Loss::square) {
        checks.require(result.report.kkt_max_violation <=
                           kKktTol * std::max(1.0, cfg.reg.lambda),
                       "kkt_max_violation");
        checks.require(result.report.objective_monotone, "objective_monotone");
    }
    if (!consistency.trivial)
        checks.require(consistency.gap <= kConsistencyTol * std::max(1.0, result.report.tv),
                       "mni_consistency_gap");
    return checks.outcome;
}

PipelineOutcome run_train(const RunConfig& cfg, const Dataset& data) {
    TrainConfig tc;
    tc.atom_count = cfg.train.atom_count > 0
                        ? cfg.train.atom_count
                        : cfg.network.output_dim * data.count();
    tc.learning_rate = cfg.train.learning_rate;
    tc.max_iters = cfg.train.max_iters;
    tc.seed = cfg.train.seed;
    tc.init_box = BoxSpec::symmetric(param_dim(cfg.network), cfg.train.init_box_bound);

    auto [model, trace] = train_expansion(cfg.network, data, tc);

    std::optional<double> grad_err;
    if (cfg.train.run_grad_check && cfg.network.activation == Activation::sigmoid)
        grad_err = grad_check(cfg.network, data, model.beta, model.thetas, 1e-5);

    std::vector<Atom> atoms;
    for (Eigen::Index l = 0; l < model.beta.size(); ++l)
        atoms.push_back({model.thetas[static_cast<std::size_t>(l)], model.beta(l)});

    LoadedModel view{"expansion", cfg.network, cfg.weight, atoms};
    const double residual_inf = prediction_residual_inf(view, data);

    emit_model(cfg.output_dir, "expansion", cfg.network, cfg.weight, atoms);

    bool monotone = true;
    for (std::size_t i = 1; i < trace.losses.size(); ++i)
        if (trace.losses[i] > trace.losses[i - 1]) monotone = false;

    ordered_json report;
    report["format_version"] = 1;
    report["problem"] = "train";
    report["atom_count"] = tc.atom_count;
    report["initial_loss"] = trace.losses.front();
    report["final_loss"] = trace.losses.back();
    report["iterations"] = trace.iterations;
    report["losses"] = trace.losses;
    report["loss_monotone"] = monotone;
    report["nonsmooth_activation"] = trace.nonsmooth_activation;
    if (grad_err) report["grad_check_max_rel_err"] = *grad_err;
    report["prediction_residual_inf"] = residual_inf;
    emit_report_file(cfg.output_dir, report);

    CheckCollector checks;
    checks.require(monotone, "loss_monotone");
    checks.require(std::isfinite(trace.losses.back()), "final_loss_finite");
    if (grad_err) checks.require(*grad_err <= kGradCheckTol, "grad_check");
    return checks.outcome;
}

PipelineOutcome run_path(const RunConfig& cfg, const Dataset& data) {
    if (cfg.reg.lambdas.empty())
        throw ConfigError("path problem needs a descending reg.lambdas list");
    const CandidateSet cands = build_candidates(cfg);
    const FeatureMatrix A = feature_matrix(cfg.network, cfg.weight, data, cands);

    RegOptions opts;
    opts.lp_tol = cfg.tolerances.lp_tol;
    const std::vector<PathRow> rows =
        lambda_path(A, data.y, cfg.reg.loss, cfg.reg.lambdas, cands, opts);

    std::string csv = "lambda,loss_value,tv,kkt_max_violation\n";
    for (const auto& row : rows)
        csv += format_double(row.lambda) + "," + format_double(row.loss_value) + "," +
               format_double(row.tv) + "," + format_double(row.kkt_max_violation) + "\n";
    write_text_file(cfg.output_dir / "path.csv", csv);

    ordered_json report;
    report["format_version"] = 1;
    report["problem"] = "path";
    report["loss"] = to_string(cfg.reg.loss);
    ordered_json rows_json = ordered_json::array();
    for (const auto& row : rows) {
        ordered_json r;
        r["lambda"] = row.lambda;
        r["loss_value"] = row.loss_value;
        r["tv"] = row.tv;
        r["kkt_max_violation"] = row.kkt_max_violation;
        rows_json.push_back(std::move(r));
    }
    report["rows"] = rows_json;
    emit_report_file(cfg.output_dir, report);

    CheckCollector checks;
    for (std::size_t i = 1; i < rows.size(); ++i)
        checks.require(rows[i].tv >= rows[i - 1].tv - kPathSlack, "tv_monotonicity");
    if (cfg.reg.loss == Loss::square)
        for (const auto& row : rows)
            checks.require(row.kkt_max_violation <= kKktTol * std::max(1.0, row.lambda),
                           "kkt_max_violation");
    return checks.outcome;
}

PipelineOutcome run_sample(const RunConfig& cfg) {
    const CandidateSet cands = build_candidates(cfg);
    ordered_json out;
    out["format_version"] = 1;
    out["provenance"] = to_string(cands.provenance);
    out["seed"] = cands.seed;
    out["box"] = {{"lower", std::vector<double>(cands.box.lower.data(),
                                                cands.box.lower.data() + cands.box.lower.size())},
                  {"upper", std::vector<double>(cands.box.upper.data(),
                                                cands.box.upper.data() + cands.box.upper.size())}};
    ordered_json points = ordered_json::array();
    for (const auto& p : cands.points)
        points.push_back(std::vector<double>(p.data(), p.data() + p.size()));
    out["points"] = points;
    write_text_file(cfg.output_dir / "candidates.json", out.dump(2) + "\n");
    return {};
}

} // namespace

ProblemKind problem_from_string(const std::string& name) {
    if (name == "sample") return ProblemKind::sample;
    if (name == "mni") return ProblemKind::mni;
    if (name == "reg") return ProblemKind::reg;
    if (name == "train") return ProblemKind::train;
    if (name == "path") return ProblemKind::path;
    throw ConfigError("unknown problem '" + name + "'");
}

std::string to_string(ProblemKind p) {
    switch (p) {
        case ProblemKind::sample: return "sample";
        case ProblemKind::mni: return "mni";
        case ProblemKind::reg: return "reg";
        case ProblemKind::train: return "train";
        case ProblemKind::path: return "path";
    }
    return "mni";
}

std::string format_double(double value) {
    char buffer[64];
    const auto res = std::to_chars(buffer, buffer + sizeof(buffer), value);
    return std::string(buffer, res.ptr);
}

RunConfig load_run_config(const std::filesystem::path& config_path,
                          const std::optional<std::string>& out_override,
                          const std::optional<std::uint64_t>& seed_override) {
    const json obj = parse_json_file(config_path);
    RunConfig cfg;

    if (!obj.contains("network")) throw ConfigError("config is missing 'network'");
    cfg.network = network_from_json(obj["network"]);

    if (obj.contains("weight")) {
        cfg.weight.alpha = get_double(obj["weight"], "alpha", 1.0);
        if (!(cfg.weight.alpha > 0.0)) throw ConfigError("weight.alpha must be positive");
        const std::string kind = get_string(obj["weight"], "kind", "gaussian_of_norm");
        if (kind != "gaussian_of_norm")
            throw ConfigError("unsupported weight kind '" + kind + "'");
    }

    if (obj.contains("candidates")) {
        const json& c = obj["candidates"];
        cfg.candidates.count = static_cast<int>(get_integer(c, "count", 200));
        cfg.candidates.seed = static_cast<std::uint64_t>(get_integer(c, "seed", 0));
        if (c.contains("box_bound")) cfg.candidates.box_bound = get_double(c, "box_bound", 0.0);
        cfg.candidates.grid = get_bool(c, "grid", false);
        cfg.candidates.grid_points_per_dim =
            static_cast<int>(get_integer(c, "grid_points_per_dim", 3));
        cfg.candidates.refine_rounds = static_cast<int>(get_integer(c, "refine_rounds", 2));
        if (c.contains("refine_radius"))
            cfg.candidates.refine_radius = get_double(c, "refine_radius", 0.0);
        cfg.candidates.refine_count = static_cast<int>(get_integer(c, "refine_count", 10));
        if (cfg.candidates.count < 1) throw ConfigError("candidates.count must be >= 1");
        if (cfg.candidates.refine_rounds < 0)
            throw ConfigError("candidates.refine_rounds must be >= 0");
        if (cfg.candidates.refine_count < 0)
            throw ConfigError("candidates.refine_count must be >= 0");
        if (cfg.candidates.box_bound && !(*cfg.candidates.box_bound > 0.0))
            throw ConfigError("candidates.box_bound must be positive");
        if (cfg.candidates.refine_radius && !(*cfg.candidates.refine_radius > 0.0))
            throw ConfigError("candidates.refine_radius must be positive");
    }

    if (obj.contains("tolerances")) {
        const json& t = obj["tolerances"];
        cfg.tolerances.argmax_tol = get_double(t, "argmax_tol", 1e-6);
        cfg.tolerances.coeff_tol = get_double(t, "coeff_tol", 1e-8);
        cfg.tolerances.lp_tol = get_double(t, "lp_tol", 1e-9);
        if (!(cfg.tolerances.argmax_tol >= 0.0 && cfg.tolerances.coeff_tol >= 0.0 &&
              cfg.tolerances.lp_tol > 0.0))
            throw ConfigError("tolerances out of range");
    }

    cfg.problem = problem_from_string(get_string(obj, "problem", "mni"));

    if (obj.contains("reg")) {
        const json& r = obj["reg"];
        cfg.reg.lambda = get_double(r, "lambda", 0.1);
        cfg.reg.loss = loss_from_string(get_string(r, "loss", "square"));
        if (r.contains("lambdas")) {
            if (!r["lambdas"].is_array()) throw ConfigError("reg.lambdas must be an array");
            for (const auto& v : r["lambdas"]) {
                if (!v.is_number()) throw ConfigError("reg.lambdas entries must be numbers");
                cfg.reg.lambdas.push_back(v.get<double>());
            }
        }
        if (!(cfg.reg.lambda > 0.0)) throw ConfigError("reg.lambda must be positive");
    }

    if (obj.contains("train")) {
        const json& t = obj["train"];
        cfg.train.atom_count = static_cast<int>(get_integer(t, "atom_count", 0));
        cfg.train.learning_rate = get_double(t, "learning_rate", 0.5);
        cfg.train.max_iters = get_integer(t, "max_iters", 500);
        cfg.train.seed = static_cast<std::uint64_t>(get_integer(t, "seed", 0));
        cfg.train.init_box_bound = get_double(t, "init_box_bound", 1.0);
        cfg.train.run_grad_check = get_bool(t, "grad_check", false);
        if (cfg.train.atom_count < 0) throw ConfigError("train.atom_count must be >= 0");
        if (!(cfg.train.learning_rate > 0.0))
            throw ConfigError("train.learning_rate must be positive");
        if (!(cfg.train.init_box_bound > 0.0))
            throw ConfigError("train.init_box_bound must be positive");
    }

    if (seed_override) {
        cfg.candidates.seed = *seed_override;
        cfg.train.seed = *seed_override;
    }

    const std::string dataset = get_string(obj, "dataset", "");
    if (cfg.problem != ProblemKind::sample) {
        if (dataset.empty()) throw ConfigError("config is missing 'dataset'");
        cfg.dataset_path = config_path.parent_path() / dataset;
        if (!std::filesystem::exists(cfg.dataset_path))
            throw ConfigError("dataset '" + cfg.dataset_path.string() + "' does not exist");
    }

    std::string out_dir = get_string(obj, "output_dir", "");
    if (out_override) out_dir = *out_override;
    if (out_dir.empty()) throw ConfigError("no output directory (config output_dir or --out)");
    cfg.output_dir = out_dir;
    std::error_code ec;
    std::filesystem::create_directories(cfg.output_dir, ec);
    if (ec) throw ConfigError("cannot create output directory '" + out_dir + "'");

    return cfg;
}

Dataset load_dataset_csv(const std::filesystem::path& path, int input_dim,
                         int output_dim) {
    const std::string text = read_text_file(path);
    std::istringstream stream(text);
    std::string line;

    std::string expected_header;
    for (int d = 0; d < input_dim; ++d)
        expected_header += (d ? "," : "") + std::string("x") + std::to_string(d);
    for (int k = 0; k < output_dim; ++k)
        expected_header += ",y" + std::to_string(k);

    if (!std::getline(stream, line)) throw ConfigError("dataset is empty");
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line != expected_header)
        throw ConfigError("dataset header must be '" + expected_header + "', found '" +
                          line + "'");

    Dataset data;
    std::vector<Eigen::VectorXd> targets;
    int line_no = 1;
    while (std::getline(stream, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        std::vector<double> fields;
        std::size_t start = 0;
        while (start <= line.size()) {
            const std::size_t comma = line.find(',', start);
            const std::string cell =
                line.substr(start, comma == std::string::npos ? std::string::npos
                                                              : comma - start);
            double value = 0.0;
            const auto res =
                std::from_chars(cell.data(), cell.data() + cell.size(), value);
            if (res.ec != std::errc() || res.ptr != cell.data() + cell.size())
                throw ConfigError("dataset line " + std::to_string(line_no) +
                                  ": cannot parse '" + cell + "'");
            fields.push_back(value);
            if (comma == std::string::npos) break;
            start = comma + 1;
        }
        if (static_cast<int>(fields.size()) != input_dim + output_dim)
            throw ConfigError("dataset line " + std::to_string(line_no) + ": expected " +
                              std::to_string(input_dim + output_dim) + " fields, found " +
                              std::to_string(fields.size()));
        Eigen::VectorXd x(input_dim);
        for (int d = 0; d < input_dim; ++d) x(d) = fields[static_cast<std::size_t>(d)];
        Eigen::VectorXd y(output_dim);
        for (int k = 0; k < output_dim; ++k)
            y(k) = fields[static_cast<std::size_t>(input_dim + k)];
        data.x.push_back(std::move(x));
        targets.push_back(std::move(y));
    }
    if (data.x.empty()) throw ConfigError("dataset has no data rows");

    data.y.resize(output_dim, static_cast<Eigen::Index>(targets.size()));
    for (std::size_t j = 0; j < targets.size(); ++j)
        data.y.col(static_cast<Eigen::Index>(j)) = targets[j];
    return data;
}

PipelineOutcome run_pipeline(const RunConfig& config) {
    if (config.problem == ProblemKind::sample) return run_sample(config);

    const Dataset data = load_dataset_csv(config.dataset_path, config.network.input_dim,
                                          config.network.output_dim);
    switch (config.problem) {
        case ProblemKind::mni: return run_mni(config, data);
        case ProblemKind::reg: return run_reg(config, data);
        case ProblemKind::train: return run_train(config, data);
        case ProblemKind::path: return run_path(config, data);
        case ProblemKind::sample: break;
    }
    return {};
}

PipelineOutcome verify_artifacts(const RunConfig& config) {
    const Dataset data = load_dataset_csv(config.dataset_path, config.network.input_dim,
                                          config.network.output_dim);
    const LoadedModel model = load_model_json(config.output_dir / "model.json");
    const json report = parse_json_file(config.output_dir / "report.json");
    if (!report.contains("prediction_residual_inf"))
        throw ConfigError("report has no prediction_residual_inf field");
    const double recorded = report["prediction_residual_inf"].get<double>();
    const double recomputed = prediction_residual_inf(model, data);

    PipelineOutcome outcome;
    if (std::abs(recomputed - recorded) > kRoundTripTol) {
        outcome.exit_code = 1;
        outcome.failure = "model_round_trip (recomputed " + format_double(recomputed) +
                          " vs recorded " + format_double(recorded) + ")";
    }
    return outcome;
}

} // namespace rkbsnet
