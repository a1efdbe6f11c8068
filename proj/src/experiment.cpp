#include "aptkit/experiment.hpp"

#include <filesystem>

#include "aptkit/errors.hpp"
#include "aptkit/io.hpp"
#include "aptkit/numeric.hpp"

namespace aptkit {

using nlohmann::json;

ExperimentSpec load_experiment_spec(const std::string& path) {
    json j;
    try {
        j = json::parse(read_text_file(path));
    } catch (const json::parse_error& e) {
        throw InputError("spec file '" + path + "': " + e.what());
    }
    ExperimentSpec spec;
    if (!j.contains("model_file")) throw InputError("spec: missing 'model_file'");
    std::filesystem::path base = std::filesystem::path(path).parent_path();
    std::filesystem::path mf = j["model_file"].get<std::string>();
    spec.model_file = mf.is_absolute() ? mf.string() : (base / mf).string();
    if (!j.contains("utility")) throw InputError("spec: missing 'utility'");
    spec.utility = j["utility"];
    spec.claim = j.contains("claim") ? j["claim"] : json{{"kind", "constant"}, {"params", {{"c", "0"}}}};
    spec.x = j.contains("x") ? real_of(j["x"], "spec.x") : 0.0;
    if (!j.contains("n_grid") || !j["n_grid"].is_array() || j["n_grid"].empty())
        throw InputError("spec: 'n_grid' must be a nonempty array");
    for (const auto& e : j["n_grid"]) spec.n_grid.push_back(e.get<int>());
    if (j.contains("backend")) spec.backend = backend_from_json(j["backend"]);
    if (j.contains("outputs")) spec.outputs = j["outputs"].get<std::string>();
    if (j.contains("tolerances")) {
        const json& t = j["tolerances"];
        auto get = [&](const char* key, double& into) {
            if (t.contains(key)) into = real_of(t[key], std::string("spec.tolerances.") + key);
        };
        get("grad", spec.tol.grad);
        get("strategy", spec.tol.strategy);
        get("monotone_slack", spec.tol.monotone_slack);
        get("wealth", spec.tol.wealth);
        get("price", spec.tol.price);
        get("tail_slack", spec.tol.tail_slack);
        get("price_final_gap", spec.tol.price_final_gap);
    }
    return spec;
}

ExperimentOutcome run_experiment(const ExperimentSpec& spec, const RunOverrides& overrides) {
    ExperimentSpec s = spec;
    if (overrides.seed) s.backend.seed = *overrides.seed;
    if (overrides.threads) s.backend.threads = *overrides.threads;
    if (overrides.backend_mode) {
        if (*overrides.backend_mode == "exact")
            s.backend.mode = ExpectationBackend::Mode::exact;
        else if (*overrides.backend_mode == "mc" || *overrides.backend_mode == "monte_carlo")
            s.backend.mode = ExpectationBackend::Mode::monte_carlo;
        else
            throw InputError("unknown backend override '" + *overrides.backend_mode + "'");
    }

    ExperimentOutcome out;
    out.report["inputs"]["model_file"] = s.model_file;
    out.report["inputs"]["x"] = json_real(s.x);
    out.report["inputs"]["n_grid"] = s.n_grid;
    out.report["backend"]["mode"] = s.backend.is_exact() ? "exact" : "monte_carlo";
    out.report["backend"]["seed"] = s.backend.seed;
    out.report["backend"]["threads"] = s.backend.threads;
    out.report["backend"]["samples"] = s.backend.samples;
    out.report["backend"]["cap"] = s.backend.exact_cap;

    MarketModel model = load_model_file(s.model_file);
    Utility utility = utility_from_json(s.utility);
    Claim claim = claim_from_json(model, s.claim);
    out.report["inputs"]["utility"] = utility.describe();
    out.report["inputs"]["claim"] = claim.description();

    ValidationReport validation = validate_model(model);
    out.report["validation"] = validation_to_json(validation);
    out.report["validation"]["summary"] = validation.summary();
    if (!validation.pass) {
        out.report["verdicts"]["validation"] = false;
        out.report["verdicts"]["pass"] = false;
        out.exit_code = 2;
        return out;
    }
    require_nonnegative(model, claim);

    NAConstants na = compute_na_constants(model, s.n_grid);
    out.report["na"] = na_to_json(na);

    json emm_arr = json::array();
    for (int n : s.n_grid) emm_arr.push_back(emm_to_json(emm_segment(model, n)));
    out.report["emm"] = emm_arr;

    StrategyBound bound = strategy_bound(model, utility, na, s.x, claim, s.backend);
    out.report["bound"] = bound_to_json(bound);

    ConvergenceOptions copt;
    copt.opt.tol = s.tol.grad;
    copt.strategy_tol = s.tol.strategy;
    copt.monotone_slack = s.tol.monotone_slack;
    ConvergenceReport conv =
        convergence_run(model, utility, s.backend, s.x, claim, s.n_grid, bound, copt);
    out.report["convergence"] = convergence_to_json(conv);

    PriceConvergenceOptions popt;
    popt.price.wealth_tol = s.tol.wealth;
    popt.price.price_tol = s.tol.price;
    popt.price.opt.tol = s.tol.grad;
    popt.tail_slack = s.tol.tail_slack;
    popt.final_gap_tol = s.tol.price_final_gap;
    PriceConvergence prices =
        price_convergence(model, utility, s.backend, s.x, claim, s.n_grid, bound, popt);
    out.report["prices"] = prices_to_json(prices);

    out.convergence_csv = convergence_csv(conv);
    out.prices_csv = prices_csv(prices);
    out.has_csvs = true;

    json verdicts;
    verdicts["validation"] = true;
    verdicts["emm"] = true;  // every segment produced a certificate
    verdicts["convergence_monotone"] = conv.monotone_ok;
    verdicts["convergence"] = conv.converged_ok;
    verdicts["prices_tail"] = prices.tail_ok;
    verdicts["prices_final"] = prices.final_ok;
    bool pass = conv.monotone_ok && conv.converged_ok && prices.tail_ok && prices.final_ok;
    verdicts["pass"] = pass;
    out.report["verdicts"] = verdicts;
    out.exit_code = pass ? 0 : 1;
    return out;
}

void write_outcome(const ExperimentOutcome& outcome, const std::string& out_dir) {
    std::filesystem::create_directories(out_dir);
    std::filesystem::path dir(out_dir);
    write_text_file((dir / "report.json").string(), outcome.report.dump(2) + "\n");
    if (outcome.has_csvs) {
        write_text_file((dir / "convergence.csv").string(), outcome.convergence_csv);
        write_text_file((dir / "prices.csv").string(), outcome.prices_csv);
    }
}

}  // namespace aptkit
