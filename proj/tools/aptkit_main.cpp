// aptkit: experiment runner for truncated factor markets — validation,
// no-arbitrage certification, expected-utility optimization across growing
// market segments, and reservation-price convergence studies.

#include <filesystem>
#include <iostream>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "aptkit/errors.hpp"
#include "aptkit/experiment.hpp"
#include "aptkit/io.hpp"
#include "aptkit/numeric.hpp"

namespace {

using namespace aptkit;
using nlohmann::json;

struct CommonArgs {
    std::string spec_file;
    std::string out_dir;
    std::uint64_t seed = 0;
    bool seed_set = false;
    int threads = 0;
    std::string backend_mode;
};

void add_common(CLI::App* cmd, CommonArgs& args, bool spec_required = true) {
    auto* spec = cmd->add_option("--spec", args.spec_file, "experiment spec (JSON)");
    if (spec_required) spec->required();
    cmd->add_option("--out", args.out_dir, "output directory");
    cmd->add_option("--seed", args.seed, "override the backend seed")
        ->each([&args](const std::string&) { args.seed_set = true; });
    cmd->add_option("--threads", args.threads, "worker threads for expectations");
    cmd->add_option("--backend", args.backend_mode, "expectation backend")
        ->check(CLI::IsMember({"exact", "mc"}));
}

RunOverrides overrides_of(const CommonArgs& args) {
    RunOverrides ov;
    if (args.seed_set) ov.seed = args.seed;
    if (args.threads > 0) ov.threads = args.threads;
    if (!args.backend_mode.empty()) ov.backend_mode = args.backend_mode;
    if (!args.out_dir.empty()) ov.out_dir = args.out_dir;
    return ov;
}

// Loads spec + model and applies overrides; shared by the partial commands.
struct LoadedExperiment {
    ExperimentSpec spec;
    MarketModel model;
    Utility utility;
    Claim claim;
};

LoadedExperiment load_all(const CommonArgs& args) {
    ExperimentSpec spec = load_experiment_spec(args.spec_file);
    if (args.seed_set) spec.backend.seed = args.seed;
    if (args.threads > 0) spec.backend.threads = args.threads;
    if (!args.backend_mode.empty())
        spec.backend.mode = args.backend_mode == "exact" ? ExpectationBackend::Mode::exact
                                                         : ExpectationBackend::Mode::monte_carlo;
    MarketModel model = load_model_file(spec.model_file);
    Utility utility = utility_from_json(spec.utility);
    Claim claim = claim_from_json(model, spec.claim);
    return {std::move(spec), std::move(model), std::move(utility), std::move(claim)};
}

void emit(const CommonArgs& args, const std::string& name, const json& j) {
    std::cout << j.dump(2) << "\n";
    if (!args.out_dir.empty()) {
        std::filesystem::create_directories(args.out_dir);
        write_text_file((std::filesystem::path(args.out_dir) / name).string(),
                        j.dump(2) + "\n");
    }
}

int cmd_validate(const CommonArgs& args) {
    LoadedExperiment ex = load_all(args);
    ValidationReport rep = validate_model(ex.model);
    emit(args, "validation.json", validation_to_json(rep));
    std::cerr << rep.summary() << "\n";
    return rep.pass ? 0 : 2;
}

// Partial commands refuse models that fail the assumption checks, like
// the full pipeline does.
bool model_ok(const LoadedExperiment& ex) {
    ValidationReport rep = validate_model(ex.model);
    if (!rep.pass) std::cerr << "error: model validation failed: " << rep.summary() << "\n";
    return rep.pass;
}

int cmd_na(const CommonArgs& args) {
    LoadedExperiment ex = load_all(args);
    if (!model_ok(ex)) return 2;
    NAConstants na = compute_na_constants(ex.model, ex.spec.n_grid);
    emit(args, "na.json", na_to_json(na));
    return 0;
}

int cmd_emm(const CommonArgs& args) {
    LoadedExperiment ex = load_all(args);
    if (!model_ok(ex)) return 2;
    json arr = json::array();
    for (int n : ex.spec.n_grid) arr.push_back(emm_to_json(emm_segment(ex.model, n)));
    emit(args, "emm.json", arr);
    return 0;
}

int cmd_bound(const CommonArgs& args) {
    LoadedExperiment ex = load_all(args);
    if (!model_ok(ex)) return 2;
    NAConstants na = compute_na_constants(ex.model, ex.spec.n_grid);
    StrategyBound b =
        strategy_bound(ex.model, ex.utility, na, ex.spec.x, ex.claim, ex.spec.backend);
    emit(args, "bound.json", bound_to_json(b));
    return 0;
}

int cmd_optimize(const CommonArgs& args) {
    LoadedExperiment ex = load_all(args);
    if (!model_ok(ex)) return 2;
    require_nonnegative(ex.model, ex.claim);
    NAConstants na = compute_na_constants(ex.model, ex.spec.n_grid);
    StrategyBound b =
        strategy_bound(ex.model, ex.utility, na, ex.spec.x, ex.claim, ex.spec.backend);
    ConvergenceOptions copt;
    copt.opt.tol = ex.spec.tol.grad;
    copt.strategy_tol = ex.spec.tol.strategy;
    copt.monotone_slack = ex.spec.tol.monotone_slack;
    ConvergenceReport conv = convergence_run(ex.model, ex.utility, ex.spec.backend, ex.spec.x,
                                             ex.claim, ex.spec.n_grid, b, copt);
    emit(args, "optimize.json", convergence_to_json(conv));
    if (!args.out_dir.empty())
        write_text_file((std::filesystem::path(args.out_dir) / "convergence.csv").string(),
                        convergence_csv(conv));
    return conv.monotone_ok && conv.converged_ok ? 0 : 1;
}

int cmd_price(const CommonArgs& args) {
    LoadedExperiment ex = load_all(args);
    if (!model_ok(ex)) return 2;
    require_nonnegative(ex.model, ex.claim);
    NAConstants na = compute_na_constants(ex.model, ex.spec.n_grid);
    StrategyBound b =
        strategy_bound(ex.model, ex.utility, na, ex.spec.x, ex.claim, ex.spec.backend);
    PriceConvergenceOptions popt;
    popt.price.wealth_tol = ex.spec.tol.wealth;
    popt.price.price_tol = ex.spec.tol.price;
    popt.price.opt.tol = ex.spec.tol.grad;
    popt.tail_slack = ex.spec.tol.tail_slack;
    popt.final_gap_tol = ex.spec.tol.price_final_gap;
    PriceConvergence pc = price_convergence(ex.model, ex.utility, ex.spec.backend, ex.spec.x,
                                            ex.claim, ex.spec.n_grid, b, popt);
    emit(args, "prices.json", prices_to_json(pc));
    if (!args.out_dir.empty())
        write_text_file((std::filesystem::path(args.out_dir) / "prices.csv").string(),
                        prices_csv(pc));
    return pc.tail_ok && pc.final_ok ? 0 : 1;
}

int cmd_run(const CommonArgs& args) {
    ExperimentSpec spec = load_experiment_spec(args.spec_file);
    ExperimentOutcome outcome = run_experiment(spec, overrides_of(args));
    std::string out_dir = !args.out_dir.empty() ? args.out_dir : spec.outputs;
    write_outcome(outcome, out_dir);
    if (outcome.exit_code == 2)
        std::cerr << "error: model validation failed: "
                  << outcome.report["validation"]["summary"].get<std::string>() << "\n";
    const json& v = outcome.report["verdicts"];
    for (auto it = v.begin(); it != v.end(); ++it)
        std::cout << it.key() << ": " << (it.value().get<bool>() ? "pass" : "FAIL") << "\n";
    return outcome.exit_code;
}

int cmd_report(const CommonArgs& args) {
    if (args.out_dir.empty()) throw InputError("report: --out <dir> with a stored report.json");
    std::filesystem::path dir(args.out_dir);
    json report = json::parse(read_text_file((dir / "report.json").string()));
    if (report.contains("convergence"))
        write_text_file((dir / "convergence.csv").string(),
                        convergence_csv_from_json(report["convergence"]));
    if (report.contains("prices"))
        write_text_file((dir / "prices.csv").string(), prices_csv_from_json(report["prices"]));
    if (report.contains("verdicts")) {
        const json& v = report["verdicts"];
        for (auto it = v.begin(); it != v.end(); ++it)
            std::cout << it.key() << ": " << (it.value().get<bool>() ? "pass" : "FAIL") << "\n";
        return v.value("pass", false) ? 0 : 1;
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"aptkit — utility maximization and indifference pricing in truncated "
                 "factor markets"};
    app.require_subcommand(1);

    CommonArgs args;
    auto* c_validate = app.add_subcommand("validate", "check model assumptions");
    auto* c_na = app.add_subcommand("na", "certify no-arbitrage constants");
    auto* c_emm = app.add_subcommand("emm", "martingale certificates per segment");
    auto* c_bound = app.add_subcommand("bound", "strategy norm bound");
    auto* c_optimize = app.add_subcommand("optimize", "segment value convergence study");
    auto* c_price = app.add_subcommand("price", "reservation price convergence study");
    auto* c_run = app.add_subcommand("run", "full pipeline");
    auto* c_report = app.add_subcommand("report", "re-render CSVs from a stored report");
    for (auto* c : {c_validate, c_na, c_emm, c_bound, c_optimize, c_price, c_run})
        add_common(c, args);
    add_common(c_report, args, false);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e);
    }

    try {
        if (c_validate->parsed()) return cmd_validate(args);
        if (c_na->parsed()) return cmd_na(args);
        if (c_emm->parsed()) return cmd_emm(args);
        if (c_bound->parsed()) return cmd_bound(args);
        if (c_optimize->parsed()) return cmd_optimize(args);
        if (c_price->parsed()) return cmd_price(args);
        if (c_run->parsed()) return cmd_run(args);
        if (c_report->parsed()) return cmd_report(args);
    } catch (const ArbitrageError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    } catch (const SolverError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    } catch (const InputError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const nlohmann::json::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    }
    return 0;
}
