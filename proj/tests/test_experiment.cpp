#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <string>

#include "aptkit/errors.hpp"
#include "aptkit/experiment.hpp"
#include "aptkit/io.hpp"
#include "helpers.hpp"

using namespace aptkit;
using namespace aptkit::testing;
using nlohmann::json;

namespace {

const std::string kSourceDir = APTKIT_SOURCE_DIR;
const std::string kCliPath = APTKIT_CLI_PATH;

int run_cli(const std::string& args) {
    std::string cmd = kCliPath + " " + args + " > /dev/null 2>&1";
    int status = std::system(cmd.c_str());
    return WEXITSTATUS(status);
}

std::filesystem::path temp_dir(const std::string& tag) {
    auto dir = std::filesystem::temp_directory_path() / ("aptkit_test_" + tag);
    std::filesystem::remove_all(dir);
    std::filesystem::create_directories(dir);
    return dir;
}

}  // namespace

TEST_CASE("model JSON round-trips bit-exactly") {
    MarketModel m = mixture6_model();
    json j = model_to_json(m);
    MarketModel back = model_from_json(j);
    REQUIRE(back.n_max() == m.n_max());
    for (std::size_t i = 0; i < m.n_max(); ++i) {
        CHECK(back.factor(i).support() == m.factor(i).support());
        CHECK(back.factor(i).probs() == m.factor(i).probs());
        CHECK(back.b(i) == m.b(i));
    }
    REQUIRE(back.has_loadings());
    CHECK(back.loadings().m == 2);
    CHECK(back.loadings().beta == m.loadings().beta);
    CHECK(model_to_json(back) == j);
}

TEST_CASE("model JSON accepts numbers as well as decimal strings") {
    json j = {{"factors", json::array({{{"support", {-1.0, 1.0}}, {"probs", {0.5, 0.5}}}})},
              {"drift", {{"head", {0.25}}, {"tail_norm_sq", 0.0}}}};
    MarketModel m = model_from_json(j);
    CHECK(m.b(0) == 0.25);
    CHECK_THROWS_AS(model_from_json(json{{"factors", json::array()}}), InputError);
}

TEST_CASE("shipped model files load and validate") {
    for (const char* name : {"rademacher6.json", "mixture10.json", "asymmetric4.json"}) {
        MarketModel m = load_model_file(kSourceDir + "/models/" + name);
        CHECK(validate_model(m).pass);
    }
    MarketModel bad = load_model_file(kSourceDir + "/models/onesided2.json");
    CHECK_FALSE(validate_model(bad).pass);
}

TEST_CASE("utility and claim specs parse with overrides") {
    json ju = {{"family", "two_sided_power"},
               {"params", {{"a", "0.5"}, {"beta", "2"}}},
               {"x0", "0"},
               {"constants", {{"c1", "0.5"}, {"c2", "0"}}}};
    Utility u = utility_from_json(ju);
    CHECK(u.constants().c1 == 0.5);
    CHECK(u.constants().c2 == 0.0);
    CHECK(u.value(3.0) == doctest::Approx(2.0));

    json jt = {{"family", "user_table"},
               {"params", {{"xs", {-1.0, 0.0, 1.0}}, {"ys", {-2.0, 0.0, 1.0}}}}};
    Utility t = utility_from_json(jt);
    CHECK_FALSE(t.strictly_concave());

    CHECK_THROWS_AS(utility_from_json(json{{"family", "exp"}}), InputError);

    MarketModel m = rademacher_model(2);
    Claim c1 = claim_from_json(m, json{{"kind", "constant"}, {"params", {{"c", "2"}}}});
    CHECK(c1.payoff(std::vector<double>{}) == 2.0);
    Claim c2 = claim_from_json(
        m, json{{"kind", "call_on_factor"}, {"params", {{"index", 2}, {"strike", "0.5"}}}});
    CHECK(c2.depends_on() == 2);
    Claim c3 = claim_from_json(
        m, json{{"kind", "table"},
                {"params", {{"depends_on", 1}, {"values", {"1", "3"}}}}});
    std::vector<double> up{1.0};
    CHECK(c3.payoff(up) == 3.0);
    CHECK_THROWS_AS(claim_from_json(m, json{{"kind", "swap"}}), InputError);
}

TEST_CASE("experiment specs load with tolerance overrides and relative paths") {
    ExperimentSpec spec =
        load_experiment_spec(kSourceDir + "/experiments/mixture10_study.json");
    CHECK(spec.n_grid == std::vector<int>{5, 6, 7, 8, 9, 10});
    CHECK(spec.x == 0.5);
    CHECK(spec.backend.is_exact());
    CHECK(spec.tol.strategy == 1e-4);
    CHECK(std::filesystem::exists(spec.model_file));
}

TEST_CASE("run_experiment: verdicts pass on the rademacher6 experiment") {
    ExperimentSpec spec =
        load_experiment_spec(kSourceDir + "/experiments/rademacher6_call.json");
    ExperimentOutcome out = run_experiment(spec);
    CHECK(out.exit_code == 0);
    CHECK(out.report["verdicts"]["pass"] == true);
    CHECK(out.has_csvs);
    // the claim on the two-point first factor is attainable: every segment
    // prices it at 0.4 + 0.4 * b_1 = 0.48
    for (const auto& row : out.report["prices"]["per_segment"])
        CHECK(real_of(row["p"], "p") == doctest::Approx(0.48).epsilon(1e-6));
}

TEST_CASE("run_experiment: validation failure reports exit code 2") {
    ExperimentSpec spec =
        load_experiment_spec(kSourceDir + "/experiments/onesided_invalid.json");
    ExperimentOutcome out = run_experiment(spec);
    CHECK(out.exit_code == 2);
    CHECK(out.report["validation"]["pass"] == false);
    CHECK_FALSE(out.has_csvs);
}

TEST_CASE("run_experiment: oversized declared tail raises an input error") {
    ExperimentSpec spec = load_experiment_spec(kSourceDir + "/experiments/tail_too_large.json");
    CHECK_THROWS_WITH_AS(run_experiment(spec), doctest::Contains("tail"), InputError);
}

TEST_CASE("CLI: subcommands, exit codes and re-rendered reports") {
    auto out_dir = temp_dir("cli");
    std::string spec = kSourceDir + "/experiments/rademacher6_call.json";

    CHECK(run_cli("validate --spec " + spec) == 0);
    CHECK(run_cli("run --spec " + spec + " --out " + out_dir.string()) == 0);
    CHECK(std::filesystem::exists(out_dir / "report.json"));
    CHECK(std::filesystem::exists(out_dir / "convergence.csv"));
    CHECK(std::filesystem::exists(out_dir / "prices.csv"));

    // report re-render reproduces the CSV bytes from report.json alone
    std::string conv = read_text_file((out_dir / "convergence.csv").string());
    std::string prices = read_text_file((out_dir / "prices.csv").string());
    std::filesystem::remove(out_dir / "convergence.csv");
    std::filesystem::remove(out_dir / "prices.csv");
    CHECK(run_cli("report --out " + out_dir.string()) == 0);
    CHECK(read_text_file((out_dir / "convergence.csv").string()) == conv);
    CHECK(read_text_file((out_dir / "prices.csv").string()) == prices);

    CHECK(run_cli("run --spec " + kSourceDir + "/experiments/onesided_invalid.json --out " +
                  temp_dir("cli_bad").string()) == 2);
    CHECK(run_cli("run --spec " + kSourceDir + "/experiments/tail_too_large.json --out " +
                  temp_dir("cli_tail").string()) == 2);
    CHECK(run_cli("run --spec /nonexistent.json") == 2);
    CHECK(run_cli("bound --spec " + spec) == 0);
}

TEST_CASE("CLI: same seed and threads give byte-identical outputs") {
    auto d1 = temp_dir("det1");
    auto d2 = temp_dir("det2");
    std::string spec = kSourceDir + "/experiments/rademacher6_call.json";
    REQUIRE(run_cli("run --spec " + spec + " --seed 7 --out " + d1.string()) == 0);
    REQUIRE(run_cli("run --spec " + spec + " --seed 7 --out " + d2.string()) == 0);
    for (const char* f : {"report.json", "convergence.csv", "prices.csv"}) {
        CHECK(read_text_file((d1 / f).string()) == read_text_file((d2 / f).string()));
    }
}

TEST_CASE("CLI: solver breakdowns exit with code 3") {
    auto dir = temp_dir("solver_err");
    // a bounded but astronomically large claim overflows the utility's
    // negative branch, which must surface as a solver error
    std::string spec = R"({
      "model_file": ")" + kSourceDir + R"(/models/rademacher6.json",
      "x": "0",
      "utility": { "family": "two_sided_power", "params": { "a": "0.5", "beta": "2" } },
      "claim": { "kind": "constant", "params": { "c": "1e200" } },
      "n_grid": [1, 2],
      "backend": { "mode": "exact" },
      "outputs": "out"
    })";
    write_text_file((dir / "spec.json").string(), spec);
    CHECK(run_cli("run --spec " + (dir / "spec.json").string() + " --out " + dir.string()) == 3);
}

TEST_CASE("CLI: every partial subcommand emits its artifact") {
    auto dir = temp_dir("partials");
    std::string spec = kSourceDir + "/experiments/rademacher6_call.json";
    CHECK(run_cli("na --spec " + spec + " --out " + dir.string()) == 0);
    CHECK(std::filesystem::exists(dir / "na.json"));
    CHECK(run_cli("emm --spec " + spec + " --out " + dir.string()) == 0);
    CHECK(std::filesystem::exists(dir / "emm.json"));
    CHECK(run_cli("optimize --spec " + spec + " --out " + dir.string()) == 0);
    CHECK(std::filesystem::exists(dir / "optimize.json"));
    CHECK(std::filesystem::exists(dir / "convergence.csv"));
    CHECK(run_cli("price --spec " + spec + " --out " + dir.string()) == 0);
    CHECK(std::filesystem::exists(dir / "prices.json"));
    CHECK(std::filesystem::exists(dir / "prices.csv"));

    // stored constants are sane: alpha_bar <= alpha_large / 2
    auto na = nlohmann::json::parse(read_text_file((dir / "na.json").string()));
    double alpha_large = real_of(na["alpha_large"], "alpha_large");
    double alpha_bar = real_of(na["alpha_bar"], "alpha_bar");
    CHECK(alpha_bar <= alpha_large / 2 + 1e-15);
    // every stored certificate keeps strictly positive weights
    auto emm = nlohmann::json::parse(read_text_file((dir / "emm.json").string()));
    for (const auto& cert : emm)
        CHECK(real_of(cert["min_weight"], "min_weight") >= 1e-9);
}

TEST_CASE("backend JSON rejects unknown modes") {
    CHECK_THROWS_AS(backend_from_json(nlohmann::json{{"mode", "quantum"}}), InputError);
    ExpectationBackend mc = backend_from_json(
        nlohmann::json{{"mode", "mc"}, {"samples", 5000}, {"seed", 11}, {"threads", 2}});
    CHECK_FALSE(mc.is_exact());
    CHECK(mc.samples == 5000);
    CHECK(mc.threads == 2);
}
