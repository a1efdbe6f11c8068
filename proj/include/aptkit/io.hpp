#pragma once

#include <string>

#include <json.hpp>

#include "aptkit/arbitrage.hpp"
#include "aptkit/claim.hpp"
#include "aptkit/diagnostics.hpp"
#include "aptkit/expectation.hpp"
#include "aptkit/market.hpp"
#include "aptkit/optimizer.hpp"
#include "aptkit/pricing.hpp"
#include "aptkit/utility.hpp"

namespace aptkit {

// Reals travel as decimal strings (shortest round-trip form) to keep files
// locale-proof and byte-stable. Readers also accept plain JSON numbers.
nlohmann::json json_real(double v);
double real_of(const nlohmann::json& j, const std::string& context);

MarketModel model_from_json(const nlohmann::json& j);
nlohmann::json model_to_json(const MarketModel& model);
MarketModel load_model_file(const std::string& path);

Utility utility_from_json(const nlohmann::json& j);
Claim claim_from_json(const MarketModel& model, const nlohmann::json& j);
ExpectationBackend backend_from_json(const nlohmann::json& j);

nlohmann::json validation_to_json(const ValidationReport& rep);
nlohmann::json na_to_json(const NAConstants& na);
nlohmann::json emm_to_json(const MartingaleCertificate& cert);
nlohmann::json bound_to_json(const StrategyBound& bound);
nlohmann::json convergence_to_json(const ConvergenceReport& rep);
nlohmann::json prices_to_json(const PriceConvergence& pc);

// CSV emission; schemas are fixed:
//   convergence.csv: n,u_n,grad_norm,h_norm,cesaro_dist
//   prices.csv:      n,p_n,residual,iterations
std::string convergence_csv(const ConvergenceReport& rep);
std::string prices_csv(const PriceConvergence& pc);
std::string convergence_csv_from_json(const nlohmann::json& convergence);
std::string prices_csv_from_json(const nlohmann::json& prices);

void write_text_file(const std::string& path, const std::string& contents);
std::string read_text_file(const std::string& path);

}  // namespace aptkit
