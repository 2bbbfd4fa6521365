#include <cstdint>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "rkbsnet/pipeline.hpp"

namespace {

struct CommonArgs {
    std::string config;
    std::string out;
    std::optional<std::uint64_t> seed;
};

void add_common(CLI::App* cmd, CommonArgs& args) {
    cmd->add_option("--config", args.config, "path to the run config (JSON)")
        ->required();
    cmd->add_option("--out", args.out, "output directory (overrides the config)");
    cmd->add_option("--seed", args.seed,
                    "seed override for candidate sampling and training");
}

int dispatch(const CommonArgs& args, rkbsnet::ProblemKind problem, bool verify_only) {
    try {
        rkbsnet::RunConfig config = rkbsnet::load_run_config(
            args.config, args.out.empty() ? std::nullopt : std::optional(args.out),
            args.seed);
        config.problem = problem;
        const rkbsnet::PipelineOutcome outcome =
            verify_only ? rkbsnet::verify_artifacts(config)
                        : rkbsnet::run_pipeline(config);
        if (outcome.exit_code != 0)
            std::cerr << "verification failed: " << outcome.failure << "\n";
        return outcome.exit_code;
    } catch (const rkbsnet::ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"weighted network kernels: minimum-norm interpolation and "
                 "TV-regularized learning over discrete measures"};
    app.require_subcommand(1);

    CommonArgs sample_args, mni_args, reg_args, train_args, verify_args, path_args;
    CLI::App* sample = app.add_subcommand("sample", "emit a candidate set");
    add_common(sample, sample_args);
    CLI::App* mni = app.add_subcommand(
        "mni", "solve minimum-norm interpolation with dual-certificate verification");
    add_common(mni, mni_args);
    CLI::App* reg = app.add_subcommand("reg", "solve the TV-regularized problem");
    add_common(reg, reg_args);
    CLI::App* train = app.add_subcommand("train", "gradient-descent expansion training");
    add_common(train, train_args);
    CLI::App* verify =
        app.add_subcommand("verify", "re-check an emitted model against its report");
    add_common(verify, verify_args);
    CLI::App* path = app.add_subcommand("path", "lambda path of the regularized problem");
    add_common(path, path_args);

    CLI11_PARSE(app, argc, argv);

    using rkbsnet::ProblemKind;
    if (sample->parsed()) return dispatch(sample_args, ProblemKind::sample, false);
    if (mni->parsed()) return dispatch(mni_args, ProblemKind::mni, false);
    if (reg->parsed()) return dispatch(reg_args, ProblemKind::reg, false);
    if (train->parsed()) return dispatch(train_args, ProblemKind::train, false);
    if (verify->parsed()) return dispatch(verify_args, ProblemKind::mni, true);
    if (path->parsed()) return dispatch(path_args, ProblemKind::path, false);
    return 2;
}
