#include <doctest.h>

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "rkbsnet/pipeline.hpp"
#include "rkbsnet/rng.hpp"

using namespace rkbsnet;
namespace fs = std::filesystem;

namespace {

std::string slurp(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    REQUIRE(in);
    std::ostringstream buffer;
    buffer << in.rdbuf();
    return buffer.str();
}

void spit(const fs::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    REQUIRE(out);
    out << text;
}

struct TempTree {
    fs::path root;
    explicit TempTree(const std::string& name) {
        root = fs::temp_directory_path() / ("rkbsnet_test_" + name);
        fs::remove_all(root);
        fs::create_directories(root);
    }
    ~TempTree() { fs::remove_all(root); }
};

std::string default_config(const std::string& problem, const std::string& extra = "") {
    return std::string(R"({
  "network": {"input_dim": 1, "output_dim": 1, "hidden_widths": [2], "activation": "relu"},
  "weight": {"alpha": 1.0},
  "candidates": {"count": 80, "seed": 11, "refine_rounds": 1, "refine_count": 5},
  "problem": ")") +
           problem + R"(",
  "dataset": "data.csv")" + extra + R"(,
  "output_dir": "out"
})";
}

void write_dataset(const fs::path& dir, const std::string& body) {
    spit(dir / "data.csv", body);
}

} // namespace

TEST_CASE("mni pipeline: artifacts, exit code, determinism") {
    TempTree tmp("mni");
    spit(tmp.root / "config.json", default_config("mni"));
    write_dataset(tmp.root, "x0,y0\n-0.4,0.3\n0.5,-0.7\n");

    const RunConfig cfg =
        load_run_config(tmp.root / "config.json", (tmp.root / "out").string(), {});
    const PipelineOutcome outcome = run_pipeline(cfg);
    CHECK(outcome.exit_code == 0);

    REQUIRE(fs::exists(tmp.root / "out" / "model.json"));
    REQUIRE(fs::exists(tmp.root / "out" / "report.json"));
    REQUIRE(fs::exists(tmp.root / "out" / "plot_data.csv"));

    const std::string model_bytes = slurp(tmp.root / "out" / "model.json");
    const std::string report_bytes = slurp(tmp.root / "out" / "report.json");
    const std::string plot_bytes = slurp(tmp.root / "out" / "plot_data.csv");

    // Re-run into a second directory: every byte identical.
    const RunConfig cfg2 =
        load_run_config(tmp.root / "config.json", (tmp.root / "out2").string(), {});
    CHECK(run_pipeline(cfg2).exit_code == 0);
    CHECK(slurp(tmp.root / "out2" / "model.json") == model_bytes);
    CHECK(slurp(tmp.root / "out2" / "report.json") == report_bytes);
    CHECK(slurp(tmp.root / "out2" / "plot_data.csv") == plot_bytes);

    const auto report = nlohmann::json::parse(report_bytes);
    CHECK(report["problem"] == "mni");
    CHECK(report.contains("cstar"));
    CHECK(report.contains("tv"));
    CHECK(report.contains("duality_gap"));
    CHECK(report.contains("atom_count"));
    CHECK(report.contains("support_in_argmax"));
    CHECK(report.contains("sign_aligned"));
    CHECK(report["cstar_trace"].size() == 2); // one refinement round + final

    // Refinement cannot raise C*.
    const auto trace = report["cstar_trace"].get<std::vector<double>>();
    CHECK(trace[1] <= trace[0] + 1e-10);

    // Plot table has one row per candidate plus a header.
    const auto count_lines = [](const std::string& s) {
        return std::count(s.begin(), s.end(), '\n');
    };
    CHECK(count_lines(plot_bytes) == report["candidate_count"].get<int>() + 1);

    // Round trip through verify.
    CHECK(verify_artifacts(cfg).exit_code == 0);
}

TEST_CASE("minimal config: single data point gives a one-atom model") {
    TempTree tmp("minimal");
    spit(tmp.root / "config.json", R"({
  "network": {"input_dim": 1, "output_dim": 1, "hidden_widths": [2], "activation": "relu"},
  "candidates": {"count": 50, "seed": 3, "refine_rounds": 0},
  "problem": "mni",
  "dataset": "data.csv",
  "output_dir": "out"
})");
    write_dataset(tmp.root, "x0,y0\n0.25,0.8\n");
    const RunConfig cfg =
        load_run_config(tmp.root / "config.json", (tmp.root / "out").string(), {});
    CHECK(run_pipeline(cfg).exit_code == 0);
    const auto model = nlohmann::json::parse(slurp(tmp.root / "out" / "model.json"));
    CHECK(model["atoms"].size() == 1);
    const auto report = nlohmann::json::parse(slurp(tmp.root / "out" / "report.json"));
    CHECK(report["duality_gap"].get<double>() <=
          1e-8 * std::max(1.0, report["cstar"].get<double>()));
    CHECK(report["cstar_trace"].size() == 1); // no refinement rounds
}

TEST_CASE("mni pipeline on a zero dataset exits 0 with the trivial flag") {
    TempTree tmp("zero");
    spit(tmp.root / "config.json", default_config("mni"));
    write_dataset(tmp.root, "x0,y0\n-0.4,0\n0.5,0\n");
    const RunConfig cfg =
        load_run_config(tmp.root / "config.json", (tmp.root / "out").string(), {});
    CHECK(run_pipeline(cfg).exit_code == 0);
    const auto report = nlohmann::json::parse(slurp(tmp.root / "out" / "report.json"));
    CHECK(report["trivial"] == true);
    const auto model = nlohmann::json::parse(slurp(tmp.root / "out" / "model.json"));
    CHECK(model["atoms"].empty());
}

TEST_CASE("reg pipeline emits its report and passes its gates") {
    TempTree tmp("reg");
    spit(tmp.root / "config.json",
         default_config("reg", R"(,
  "reg": {"lambda": 0.1, "loss": "square"})"));
    write_dataset(tmp.root, "x0,y0\n-0.4,0.3\n0.5,-0.7\n0.9,0.2\n");
    const RunConfig cfg =
        load_run_config(tmp.root / "config.json", (tmp.root / "out").string(), {});
    CHECK(run_pipeline(cfg).exit_code == 0);
    const auto report = nlohmann::json::parse(slurp(tmp.root / "out" / "report.json"));
    CHECK(report["problem"] == "reg");
    CHECK(report["converged"] == true);
    CHECK(report.contains("kkt_max_violation"));
    CHECK(verify_artifacts(cfg).exit_code == 0);
}

TEST_CASE("train pipeline records a monotone trace") {
    TempTree tmp("train");
    spit(tmp.root / "config.json",
         default_config("train", R"(,
  "train": {"atom_count": 2, "learning_rate": 0.3, "max_iters": 150, "seed": 5})"));
    write_dataset(tmp.root, "x0,y0\n-0.4,0.3\n0.5,-0.7\n");
    const RunConfig cfg =
        load_run_config(tmp.root / "config.json", (tmp.root / "out").string(), {});
    CHECK(run_pipeline(cfg).exit_code == 0);
    const auto report = nlohmann::json::parse(slurp(tmp.root / "out" / "report.json"));
    CHECK(report["problem"] == "train");
    CHECK(report["loss_monotone"] == true);
    const auto model = nlohmann::json::parse(slurp(tmp.root / "out" / "model.json"));
    CHECK(model["kind"] == "expansion");
    CHECK(verify_artifacts(cfg).exit_code == 0);
}

TEST_CASE("path pipeline writes one row per lambda, descending") {
    TempTree tmp("path");
    spit(tmp.root / "config.json",
         default_config("path", R"(,
  "reg": {"loss": "square", "lambdas": [1.0, 0.1, 0.01]})"));
    write_dataset(tmp.root, "x0,y0\n-0.4,0.3\n0.5,-0.7\n");
    const RunConfig cfg =
        load_run_config(tmp.root / "config.json", (tmp.root / "out").string(), {});
    CHECK(run_pipeline(cfg).exit_code == 0);
    const auto report = nlohmann::json::parse(slurp(tmp.root / "out" / "report.json"));
    REQUIRE(report["rows"].size() == 3);
    CHECK(report["rows"][0]["lambda"] == 1.0);
    CHECK(report["rows"][2]["lambda"] == 0.01);
    const std::string csv = slurp(tmp.root / "out" / "path.csv");
    CHECK(std::count(csv.begin(), csv.end(), '\n') == 4); // header + 3 rows
}

TEST_CASE("sample pipeline emits the candidate file") {
    TempTree tmp("sample");
    spit(tmp.root / "config.json", default_config("sample"));
    const RunConfig cfg =
        load_run_config(tmp.root / "config.json", (tmp.root / "out").string(), {});
    CHECK(run_pipeline(cfg).exit_code == 0);
    const auto cands = nlohmann::json::parse(slurp(tmp.root / "out" / "candidates.json"));
    CHECK(cands["points"].size() == 80);
    CHECK(cands["provenance"] == "random");
}

TEST_CASE("verify detects a tampered model") {
    TempTree tmp("tamper");
    spit(tmp.root / "config.json", default_config("mni"));
    write_dataset(tmp.root, "x0,y0\n-0.4,0.3\n0.5,-0.7\n");
    const RunConfig cfg =
        load_run_config(tmp.root / "config.json", (tmp.root / "out").string(), {});
    REQUIRE(run_pipeline(cfg).exit_code == 0);

    auto model = nlohmann::json::parse(slurp(tmp.root / "out" / "model.json"));
    REQUIRE(!model["atoms"].empty());
    model["atoms"][0]["coeff"] = model["atoms"][0]["coeff"].get<double>() * 1.5;
    spit(tmp.root / "out" / "model.json", model.dump(2) + "\n");
    CHECK(verify_artifacts(cfg).exit_code == 1);
}

TEST_CASE("config and dataset errors are ConfigError") {
    TempTree tmp("bad");
    CHECK_THROWS_AS(load_run_config(tmp.root / "missing.json", {}, {}), ConfigError);

    spit(tmp.root / "config.json", default_config("mni"));
    CHECK_THROWS_AS(load_run_config(tmp.root / "config.json", (tmp.root / "out").string(), {}),
                    ConfigError); // dataset missing

    write_dataset(tmp.root, "wrong,header\n1,2\n");
    const RunConfig cfg =
        load_run_config(tmp.root / "config.json", (tmp.root / "out").string(), {});
    CHECK_THROWS_AS(run_pipeline(cfg), ConfigError);

    write_dataset(tmp.root, "x0,y0\n1,2\n3\n");
    CHECK_THROWS_AS(run_pipeline(cfg), ConfigError);

    write_dataset(tmp.root, "x0,y0\n1,abc\n");
    CHECK_THROWS_AS(run_pipeline(cfg), ConfigError);

    spit(tmp.root / "config.json", "{ not json");
    CHECK_THROWS_AS(load_run_config(tmp.root / "config.json", {}, {}), ConfigError);
}

TEST_CASE("seed override changes the sampled candidates") {
    TempTree tmp("seed");
    spit(tmp.root / "config.json", default_config("sample"));
    const RunConfig a =
        load_run_config(tmp.root / "config.json", (tmp.root / "outA").string(), {});
    const RunConfig b = load_run_config(tmp.root / "config.json",
                                        (tmp.root / "outB").string(), 777);
    REQUIRE(run_pipeline(a).exit_code == 0);
    REQUIRE(run_pipeline(b).exit_code == 0);
    CHECK(slurp(tmp.root / "outA" / "candidates.json") !=
          slurp(tmp.root / "outB" / "candidates.json"));
}

TEST_CASE("dataset CSV accepts CRLF and blank trailing lines") {
    TempTree tmp("crlf");
    spit(tmp.root / "config.json", default_config("mni"));
    write_dataset(tmp.root, "x0,y0\r\n-0.4,0.3\r\n0.5,-0.7\r\n\r\n");
    const RunConfig cfg =
        load_run_config(tmp.root / "config.json", (tmp.root / "out").string(), {});
    CHECK(run_pipeline(cfg).exit_code == 0);
}

TEST_CASE("format_double round-trips exactly") {
    Rng rng(71);
    for (int i = 0; i < 200; ++i) {
        const double v = rng.uniform(-1e6, 1e6) * std::pow(10.0, rng.uniform(-12, 12));
        CHECK(std::stod(format_double(v)) == v);
    }
}
