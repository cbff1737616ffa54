// End-to-end checks of the installed command-line surface: subcommands,
// exit codes, stdout formats. The binary path comes from the build.
#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <string>

#include <json.hpp>

namespace {

namespace fs = std::filesystem;
using Json = nlohmann::json;

struct Workspace {
    fs::path dir;
    Workspace() {
        dir = fs::temp_directory_path() / ("adarnn_cli_" + std::to_string(::getpid()));
        fs::create_directories(dir);
    }
    ~Workspace() { fs::remove_all(dir); }
    std::string path(const std::string& name) const { return (dir / name).string(); }
};

struct Run {
    int exit_code;
    std::string stdout_text;
};

Run run_cli(const Workspace& ws, const std::string& args) {
    const std::string out_path = ws.path("stdout.txt");
    const std::string command =
        std::string(ADARNN_CLI_PATH) + " " + args + " > " + out_path + " 2> " + ws.path("stderr.txt");
    const int raw = std::system(command.c_str());
    Run run;
    run.exit_code = WIFEXITED(raw) ? WEXITSTATUS(raw) : -1;
    std::ifstream in(out_path);
    run.stdout_text.assign(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
    return run;
}

std::string slurp(const std::string& path) {
    std::ifstream in(path);
    REQUIRE(in.good());
    return std::string(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
}

void write_config(const Workspace& ws, const Json& cfg, const std::string& name) {
    std::ofstream out(ws.path(name));
    out << cfg.dump();
}

Json base_config(const Workspace& ws) {
    Json cfg;
    cfg["data"] = {{"path", ws.path("data.csv")}, {"time_col", "time"}, {"target_col", "y"},
                   {"window", 8},   {"horizon", 1},       {"stride", 1},
                   {"ratios", {0.6, 0.2, 0.2}}};
    cfg["tdc"] = {{"distance", "mmd"}, {"k", 2}, {"units", 10}};
    cfg["train"] = {{"task", "regression"}, {"hidden", 6},          {"layers", 2},
                    {"lambda", 0.5},        {"lr", 0.005},          {"batch", 8},
                    {"epochs", 2},          {"pretrain_epochs", 1}, {"seed", 0}};
    cfg["out"] = {{"model", ws.path("model.adarnn.json")},
                  {"history", ws.path("history.jsonl")},
                  {"split", ws.path("split.json")}};
    return cfg;
}

} // namespace

TEST_CASE("synth is deterministic and validates its arguments") {
    Workspace ws;
    Run a = run_cli(ws, "synth --regimes 3 --steps 50 --features 2 --delta 4 --seed 7 --out " +
                            ws.path("a.csv") + " --truth " + ws.path("a.json"));
    REQUIRE(a.exit_code == 0);
    Run b = run_cli(ws, "synth --regimes 3 --steps 50 --features 2 --delta 4 --seed 7 --out " +
                            ws.path("b.csv") + " --truth " + ws.path("b.json"));
    REQUIRE(b.exit_code == 0);
    CHECK(slurp(ws.path("a.csv")) == slurp(ws.path("b.csv")));
    CHECK(slurp(ws.path("a.json")) == slurp(ws.path("b.json")));

    // Row count: header + regimes * steps.
    std::size_t newlines = 0;
    for (char c : slurp(ws.path("a.csv"))) newlines += c == '\n' ? 1 : 0;
    CHECK(newlines == 151);

    CHECK(run_cli(ws, "synth --regimes 1 --out " + ws.path("x.csv")).exit_code == 2);
}

TEST_CASE("split, train, predict and evaluate chain together") {
    Workspace ws;
    REQUIRE(run_cli(ws, "synth --regimes 2 --steps 200 --features 2 --delta 4 --seed 3 --out " +
                            ws.path("data.csv") + " --truth " + ws.path("truth.json"))
                .exit_code == 0);
    write_config(ws, base_config(ws), "cfg.json");

    Run split = run_cli(ws, "split --config " + ws.path("cfg.json"));
    REQUIRE(split.exit_code == 0);
    Json split_doc = Json::parse(split.stdout_text);
    CHECK(split_doc["k"] == 2);
    CHECK(split_doc == Json::parse(slurp(ws.path("split.json"))));

    Run train = run_cli(ws, "train --config " + ws.path("cfg.json") + " --split " +
                                ws.path("split.json"));
    REQUIRE(train.exit_code == 0);
    CHECK(Json::parse(train.stdout_text)["epochs"] == 2);

    Run predict = run_cli(ws, "predict --config " + ws.path("cfg.json") + " --model " +
                                  ws.path("model.adarnn.json") + " --out " + ws.path("pred.csv") +
                                  " --truth-out " + ws.path("tr.csv"));
    REQUIRE(predict.exit_code == 0);

    // Without --out the CSV goes to stdout.
    Run to_stdout = run_cli(ws, "predict --config " + ws.path("cfg.json") + " --model " +
                                    ws.path("model.adarnn.json"));
    REQUIRE(to_stdout.exit_code == 0);
    CHECK(to_stdout.stdout_text == slurp(ws.path("pred.csv")));

    Run eval = run_cli(ws, "evaluate --pred " + ws.path("pred.csv") + " --truth " +
                               ws.path("tr.csv") + " --task regression");
    REQUIRE(eval.exit_code == 0);
    Json metrics = Json::parse(eval.stdout_text);
    CHECK(metrics.contains("rmse"));

    // Flag overrides beat the config: infeasible k makes split exit 2.
    CHECK(run_cli(ws, "split --config " + ws.path("cfg.json") + " --k 99").exit_code == 2);
}

TEST_CASE("exit codes for config and data errors") {
    Workspace ws;
    CHECK(run_cli(ws, "nonsense").exit_code == 2);
    CHECK(run_cli(ws, "split").exit_code == 2); // missing --config
    CHECK(run_cli(ws, "split --config " + ws.path("missing.json")).exit_code == 2);
    CHECK(run_cli(ws, "--help").exit_code == 0);

    REQUIRE(run_cli(ws, "synth --regimes 2 --steps 20 --features 2 --seed 1 --out " +
                            ws.path("data.csv") + " --truth " + ws.path("t.json"))
                .exit_code == 0);
    Json cfg = base_config(ws);
    cfg["data"]["window"] = 4;
    write_config(ws, cfg, "cfg.json");

    // One-row units make coral degenerate: a data error.
    CHECK(run_cli(ws, "split --config " + ws.path("cfg.json") + " --distance coral --units 28")
              .exit_code == 3);

    // Unknown distance is a config error.
    CHECK(run_cli(ws, "split --config " + ws.path("cfg.json") + " --distance dtw").exit_code == 2);

    // Evaluate on missing files is a data error.
    CHECK(run_cli(ws, "evaluate --pred " + ws.path("nope.csv") + " --truth " + ws.path("nope2.csv"))
              .exit_code == 3);
}

TEST_CASE("evaluate matches the worked example") {
    Workspace ws;
    {
        std::ofstream pred(ws.path("pred.csv"));
        pred << "origin,p0\n0,1\n1,5\n2,7\n";
        std::ofstream truth(ws.path("truth.csv"));
        truth << "origin,y0\n0,1\n1,2\n2,3\n";
    }
    Run eval = run_cli(ws, "evaluate --pred " + ws.path("pred.csv") + " --truth " +
                               ws.path("truth.csv") + " --task regression");
    REQUIRE(eval.exit_code == 0);
    Json metrics = Json::parse(eval.stdout_text);
    CHECK(metrics["rmse"].get<double>() == doctest::Approx(2.8868).epsilon(1e-4));
    CHECK(metrics["mae"].get<double>() == doctest::Approx(7.0 / 3.0).epsilon(1e-9));

    // Misaligned origins are a config error.
    {
        std::ofstream truth(ws.path("truth2.csv"));
        truth << "origin,y0\n0,1\n9,2\n2,3\n";
    }
    CHECK(run_cli(ws, "evaluate --pred " + ws.path("pred.csv") + " --truth " +
                          ws.path("truth2.csv") + " --task regression")
              .exit_code == 2);

    // Grouped truth switches on the information coefficients.
    {
        std::ofstream pred(ws.path("gpred.csv"));
        pred << "origin,p0\n0,1\n1,2\n2,3\n3,1\n4,3\n5,2\n";
        std::ofstream truth(ws.path("gtruth.csv"));
        truth << "group,origin,y0\nd1,0,2\nd1,1,4\nd1,2,6\nd2,3,5\nd2,4,9\nd2,5,7\n";
    }
    Run grouped = run_cli(ws, "evaluate --pred " + ws.path("gpred.csv") + " --truth " +
                                  ws.path("gtruth.csv") + " --task regression");
    REQUIRE(grouped.exit_code == 0);
    Json gm = Json::parse(grouped.stdout_text);
    CHECK(gm.contains("ic"));
    CHECK(gm.contains("icir"));
    CHECK(gm["ic"].get<double>() == doctest::Approx(1.0));
}
