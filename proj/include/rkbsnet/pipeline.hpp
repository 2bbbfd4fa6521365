#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>

#include "rkbsnet/candidates.hpp"
#include "rkbsnet/kernel.hpp"
#include "rkbsnet/measure.hpp"
#include "rkbsnet/network.hpp"
#include "rkbsnet/regularized.hpp"
#include "rkbsnet/trainer.hpp"

namespace rkbsnet {

/// Thrown for unusable configs, datasets or output locations; the CLI maps
/// it to exit code 2.
struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct CandidateConfig {
    int count = 200;
    std::uint64_t seed = 0;
    std::optional<double> box_bound; // default 3 / sqrt(alpha)
    bool grid = false;
    int grid_points_per_dim = 3;
    int refine_rounds = 2;
    std::optional<double> refine_radius; // default box_bound / 10
    int refine_count = 10;
};

struct ToleranceConfig {
    double argmax_tol = 1e-6;
    double coeff_tol = 1e-8;
    double lp_tol = 1e-9;
};

struct RegConfig {
    double lambda = 0.1;
    Loss loss = Loss::square;
    std::vector<double> lambdas; // for the lambda-path problem
};

struct TrainRunConfig {
    int atom_count = 0; // 0: use t*m
    double learning_rate = 0.5;
    long max_iters = 500;
    std::uint64_t seed = 0;
    double init_box_bound = 1.0;
    bool run_grad_check = false;
    bool emit_measure = false; // write the model as measure atoms (coeff = beta / rho)
};

enum class ProblemKind { sample, mni, reg, train, path };

ProblemKind problem_from_string(const std::string& name);
std::string to_string(ProblemKind p);

struct RunConfig {
    NetworkSpec network;
    WeightFn weight;
    CandidateConfig candidates;
    ToleranceConfig tolerances;
    ProblemKind problem = ProblemKind::mni;
    RegConfig reg;
    TrainRunConfig train;
    std::filesystem::path dataset_path;
    std::filesystem::path output_dir;
};

/// Reads and validates a config file. --out and --seed from the command line
/// override the config's output directory and seeds (candidate sampling and
/// training).
RunConfig load_run_config(const std::filesystem::path& config_path,
                          const std::optional<std::string>& out_override = {},
                          const std::optional<std::uint64_t>& seed_override = {});

/// CSV with header x0..x{s-1},y0..y{t-1}, one data point per row.
Dataset load_dataset_csv(const std::filesystem::path& path, int input_dim,
                         int output_dim);

struct PipelineOutcome {
    int exit_code = 0;    // 0 pass, 1 verification failure, 2 config error
    std::string failure;  // name of the first failing check
};

/// Executes the configured problem and writes model.json, report.json and
/// the problem's auxiliary table into the output directory. Every emitted
/// byte is a function of the config and dataset.
PipelineOutcome run_pipeline(const RunConfig& config);

/// Model-file round trip: loads model.json and report.json from the
/// config's output directory, re-predicts the training inputs and compares
/// the residual with the recorded one (tolerance 1e-12).
PipelineOutcome verify_artifacts(const RunConfig& config);

/// Shortest round-trip decimal form; used for every float written to CSV.
std::string format_double(double value);

} // namespace rkbsnet
