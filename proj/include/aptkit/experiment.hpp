#pragma once

#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "aptkit/expectation.hpp"

namespace aptkit {

// Parsed experiment file. The model is loaded lazily (model_file is
// resolved relative to the spec's directory); the claim and utility stay
// as JSON until a model is available.
struct ExperimentSpec {
    std::string model_file;
    nlohmann::json utility;
    nlohmann::json claim;
    double x = 0.0;
    std::vector<int> n_grid;
    ExpectationBackend backend;
    std::string outputs = "out";

    struct Tolerances {
        double grad = 1e-8;
        double strategy = 1e-4;
        double monotone_slack = 1e-9;
        double wealth = 1e-8;
        double price = 1e-7;
        double tail_slack = 1e-6;
        double price_final_gap = 1e-5;
    } tol;
};

ExperimentSpec load_experiment_spec(const std::string& path);

// Command-line overrides applied on top of the spec.
struct RunOverrides {
    std::optional<std::uint64_t> seed;
    std::optional<int> threads;
    std::optional<std::string> backend_mode;  // "exact" | "mc"
    std::optional<std::string> out_dir;
};

struct ExperimentOutcome {
    int exit_code = 0;  // 0 pass, 1 verdict failure, 2 input, 3 solver
    nlohmann::json report;
    std::string convergence_csv;
    std::string prices_csv;
    bool has_csvs = false;
};

// Full pipeline: validate -> no-arbitrage constants -> martingale
// certificates -> strategy bound -> value convergence -> price
// convergence. Throws InputError / SolverError for hard failures; verdict
// failures come back in exit_code.
ExperimentOutcome run_experiment(const ExperimentSpec& spec, const RunOverrides& overrides = {});

// Writes report.json, convergence.csv and prices.csv under out_dir.
void write_outcome(const ExperimentOutcome& outcome, const std::string& out_dir);

}  // namespace aptkit
