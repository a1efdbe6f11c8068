#include "aptkit/io.hpp"

#include <fstream>
#include <sstream>

#include "aptkit/errors.hpp"
#include "aptkit/numeric.hpp"

namespace aptkit {

using nlohmann::json;

json json_real(double v) { return json(real_to_string(v)); }

double real_of(const json& j, const std::string& context) {
    if (j.is_string()) return real_from_string(j.get<std::string>());
    if (j.is_number()) return j.get<double>();
    throw InputError(context + ": expected a decimal string or number");
}

namespace {

std::vector<double> real_array(const json& j, const std::string& context) {
    if (!j.is_array()) throw InputError(context + ": expected an array");
    std::vector<double> out;
    out.reserve(j.size());
    for (const auto& e : j) out.push_back(real_of(e, context));
    return out;
}

json real_array_to_json(const std::vector<double>& v) {
    json out = json::array();
    for (double x : v) out.push_back(json_real(x));
    return out;
}

const json& require(const json& j, const std::string& key, const std::string& context) {
    auto it = j.find(key);
    if (it == j.end()) throw InputError(context + ": missing field '" + key + "'");
    return *it;
}

}  // namespace

MarketModel model_from_json(const json& j) {
    if (!j.is_object()) throw InputError("model: expected a JSON object");
    const json& jf = require(j, "factors", "model");
    if (!jf.is_array() || jf.empty()) throw InputError("model: 'factors' must be a nonempty array");
    std::vector<FactorDistribution> factors;
    int index = 1;
    for (const auto& f : jf) {
        std::string ctx = "model.factors[" + std::to_string(index) + "]";
        factors.emplace_back(real_array(require(f, "support", ctx), ctx + ".support"),
                             real_array(require(f, "probs", ctx), ctx + ".probs"), index);
        ++index;
    }
    const json& jd = require(j, "drift", "model");
    DriftVector drift(real_array(require(jd, "head", "model.drift"), "model.drift.head"),
                      real_of(require(jd, "tail_norm_sq", "model.drift"),
                              "model.drift.tail_norm_sq"));
    std::optional<Loadings> loadings;
    if (j.contains("loadings") && !j["loadings"].is_null()) {
        const json& jl = j["loadings"];
        int m = require(jl, "m", "model.loadings").get<int>();
        std::vector<double> bar =
            real_array(require(jl, "bar_beta", "model.loadings"), "model.loadings.bar_beta");
        std::vector<std::vector<double>> beta;
        for (const auto& row : require(jl, "beta", "model.loadings"))
            beta.push_back(real_array(row, "model.loadings.beta"));
        loadings = Loadings(m, std::move(bar), std::move(beta));
    }
    return MarketModel(std::move(factors), std::move(drift), std::move(loadings));
}

json model_to_json(const MarketModel& model) {
    json j;
    j["factors"] = json::array();
    for (const auto& f : model.factors()) {
        json jf;
        jf["support"] = real_array_to_json(f.support());
        jf["probs"] = real_array_to_json(f.probs());
        j["factors"].push_back(jf);
    }
    j["drift"]["head"] = real_array_to_json(model.drift().head());
    j["drift"]["tail_norm_sq"] = json_real(model.drift().tail_norm_sq());
    if (model.has_loadings()) {
        const Loadings& L = model.loadings();
        j["loadings"]["m"] = L.m;
        j["loadings"]["bar_beta"] = real_array_to_json(L.bar_beta);
        json rows = json::array();
        for (const auto& row : L.beta) rows.push_back(real_array_to_json(row));
        j["loadings"]["beta"] = rows;
    }
    return j;
}

MarketModel load_model_file(const std::string& path) {
    json j;
    try {
        j = json::parse(read_text_file(path));
    } catch (const json::parse_error& e) {
        throw InputError("model file '" + path + "': " + e.what());
    }
    return model_from_json(j);
}

Utility utility_from_json(const json& j) {
    std::string family = require(j, "family", "utility").get<std::string>();
    double x0 = j.contains("x0") ? real_of(j["x0"], "utility.x0") : 0.0;
    Utility u = [&] {
        if (family == "two_sided_power") {
            const json& p = require(j, "params", "utility");
            return Utility::two_sided_power(real_of(require(p, "a", "utility.params"), "utility.params.a"),
                                            real_of(require(p, "beta", "utility.params"),
                                                    "utility.params.beta"),
                                            x0);
        }
        if (family == "user_table") {
            const json& p = require(j, "params", "utility");
            return Utility::piecewise_linear(
                real_array(require(p, "xs", "utility.params"), "utility.params.xs"),
                real_array(require(p, "ys", "utility.params"), "utility.params.ys"));
        }
        throw InputError("utility: unknown family '" + family + "'");
    }();
    if (j.contains("constants") && !j["constants"].is_null()) {
        const json& c = j["constants"];
        GrowthConstants gc = u.has_constants() ? u.constants() : GrowthConstants{};
        if (c.contains("c1")) gc.c1 = real_of(c["c1"], "utility.constants.c1");
        if (c.contains("c2")) gc.c2 = real_of(c["c2"], "utility.constants.c2");
        if (c.contains("beta")) gc.beta = real_of(c["beta"], "utility.constants.beta");
        if (c.contains("c3")) gc.c3 = real_of(c["c3"], "utility.constants.c3");
        if (c.contains("c4")) gc.c4 = real_of(c["c4"], "utility.constants.c4");
        if (c.contains("gamma")) gc.gamma = real_of(c["gamma"], "utility.constants.gamma");
        u.set_constants(gc);
    }
    return u;
}

Claim claim_from_json(const MarketModel& model, const json& j) {
    std::string kind = require(j, "kind", "claim").get<std::string>();
    const json& p = j.contains("params") ? j["params"] : json::object();
    if (kind == "constant") return Claim::constant(real_of(require(p, "c", "claim.params"), "claim.params.c"));
    if (kind == "call_on_factor")
        return Claim::call_on_factor(
            require(p, "index", "claim.params").get<int>(),
            real_of(require(p, "strike", "claim.params"), "claim.params.strike"));
    if (kind == "table")
        return Claim::table(model, require(p, "depends_on", "claim.params").get<int>(),
                            real_array(require(p, "values", "claim.params"), "claim.params.values"));
    throw InputError("claim: unknown kind '" + kind + "'");
}

ExpectationBackend backend_from_json(const json& j) {
    ExpectationBackend b;
    std::string mode = j.contains("mode") ? j["mode"].get<std::string>() : "exact";
    if (mode == "exact" || mode == "") {
        b.mode = ExpectationBackend::Mode::exact;
    } else if (mode == "monte_carlo" || mode == "mc") {
        b.mode = ExpectationBackend::Mode::monte_carlo;
    } else {
        throw InputError("backend: unknown mode '" + mode + "'");
    }
    if (j.contains("cap")) b.exact_cap = j["cap"].get<std::uint64_t>();
    if (j.contains("samples")) b.samples = j["samples"].get<std::uint64_t>();
    if (j.contains("seed")) b.seed = j["seed"].get<std::uint64_t>();
    if (j.contains("threads")) b.threads = j["threads"].get<int>();
    return b;
}

json validation_to_json(const ValidationReport& rep) {
    json j;
    j["pass"] = rep.pass;
    j["drift_norm"] = json_real(rep.drift_norm);
    j["drift_summable"] = rep.drift_summable;
    j["sup_third_moment"] = json_real(rep.sup_third_moment);
    j["third_moments_ok"] = rep.third_moments_ok;
    json arr = json::array();
    for (std::size_t i = 0; i < rep.factor_moments.size(); ++i) {
        const auto& f = rep.factor_moments[i];
        const auto& s = rep.two_sided_support[i];
        json e;
        e["index"] = f.index;
        e["prob_sum"] = json_real(f.prob_sum);
        e["mean"] = json_real(f.mean);
        e["variance"] = json_real(f.variance);
        e["distinct_ok"] = f.distinct_ok;
        e["moments_pass"] = f.pass;
        e["prob_above_drift"] = json_real(s.prob_above);
        e["prob_below_drift"] = json_real(s.prob_below);
        e["two_sided_pass"] = s.pass;
        arr.push_back(e);
    }
    j["factors"] = arr;
    return j;
}

json na_to_json(const NAConstants& na) {
    json j;
    json per = json::object();
    for (const auto& [n, a] : na.per_segment) per[std::to_string(n)] = json_real(a);
    j["per_segment"] = per;
    json mins = json::object();
    for (const auto& [n, h] : na.minimizers) mins[std::to_string(n)] = real_array_to_json(h.coords());
    j["minimizers"] = mins;
    j["alpha_large"] = json_real(na.alpha_large);
    j["n_alpha"] = na.n_alpha;
    j["alpha_bar"] = json_real(na.alpha_bar);
    return j;
}

json emm_to_json(const MartingaleCertificate& cert) {
    json j;
    j["n"] = cert.n;
    j["min_weight"] = json_real(cert.min_weight);
    j["max_density_ratio"] = json_real(cert.max_density_ratio);
    json w = json::array();
    for (std::size_t s = 0; s < cert.weights.size(); ++s) {
        json pair = json::array();
        pair.push_back(static_cast<std::uint64_t>(s));
        pair.push_back(json_real(cert.weights[s]));
        w.push_back(pair);
    }
    j["weights"] = w;
    return j;
}

json bound_to_json(const StrategyBound& bound) {
    json j;
    j["M"] = json_real(bound.M);
    j["term_growth"] = json_real(bound.term_growth);
    j["term_slope"] = json_real(bound.term_slope);
    j["kinematic"] = json_real(bound.kinematic);
    j["echo"]["alpha_large"] = json_real(bound.echo.alpha_large);
    j["echo"]["n_alpha"] = bound.echo.n_alpha;
    j["echo"]["alpha_bar"] = json_real(bound.echo.alpha_bar);
    j["echo"]["alpha_n_alpha"] = json_real(bound.echo.alpha_n_alpha);
    j["echo"]["eu_x_minus_g"] = json_real(bound.echo.eu_x_minus_g);
    return j;
}

json convergence_to_json(const ConvergenceReport& rep) {
    json j;
    j["n_grid"] = rep.n_grid;
    json u = json::array(), g = json::array(), h = json::array(), c = json::array();
    for (double v : rep.u_seq) u.push_back(json_real(v));
    for (double v : rep.grad_norms) g.push_back(json_real(v));
    for (double v : rep.h_norms) h.push_back(json_real(v));
    for (double v : rep.cesaro_dist) c.push_back(json_real(v));
    j["u_seq"] = u;
    j["grad_norms"] = g;
    j["h_norms"] = h;
    j["cesaro_dist"] = c;
    j["u_ref"] = json_real(rep.u_ref);
    j["h_ref"] = real_array_to_json(rep.h_ref.coords());
    j["monotone_ok"] = rep.monotone_ok;
    j["converged_ok"] = rep.converged_ok;
    return j;
}

namespace {
json price_result_to_json(const PriceResult& r, bool sentinel) {
    json j;
    j["n"] = sentinel ? json("reference") : json(r.n);
    j["segment"] = r.n;
    j["p"] = json_real(r.p);
    j["lo"] = json_real(r.lo);
    j["hi"] = json_real(r.hi);
    j["residual"] = json_real(r.residual);
    j["iterations"] = r.iterations;
    return j;
}
}  // namespace

json prices_to_json(const PriceConvergence& pc) {
    json j;
    json arr = json::array();
    for (const auto& r : pc.per_segment) arr.push_back(price_result_to_json(r, false));
    j["per_segment"] = arr;
    j["reference"] = price_result_to_json(pc.reference, true);
    j["reference_in_grid"] =
        !pc.per_segment.empty() && pc.per_segment.back().is_reference;
    j["tail_ok"] = pc.tail_ok;
    j["final_ok"] = pc.final_ok;
    j["final_gap"] = json_real(pc.final_gap);
    return j;
}

std::string convergence_csv(const ConvergenceReport& rep) {
    std::ostringstream os;
    os << "n,u_n,grad_norm,h_norm,cesaro_dist\n";
    for (std::size_t i = 0; i < rep.n_grid.size(); ++i) {
        os << rep.n_grid[i] << ',' << real_to_string(rep.u_seq[i]) << ','
           << real_to_string(rep.grad_norms[i]) << ',' << real_to_string(rep.h_norms[i]) << ','
           << real_to_string(rep.cesaro_dist[i]) << '\n';
    }
    return os.str();
}

std::string prices_csv(const PriceConvergence& pc) {
    std::ostringstream os;
    os << "n,p_n,residual,iterations\n";
    for (const auto& r : pc.per_segment) {
        os << r.n << ',' << real_to_string(r.p) << ',' << real_to_string(r.residual) << ','
           << r.iterations << '\n';
    }
    if (pc.per_segment.empty() || !pc.per_segment.back().is_reference) {
        const auto& r = pc.reference;
        os << r.n << ',' << real_to_string(r.p) << ',' << real_to_string(r.residual) << ','
           << r.iterations << '\n';
    }
    return os.str();
}

std::string convergence_csv_from_json(const json& convergence) {
    std::ostringstream os;
    os << "n,u_n,grad_norm,h_norm,cesaro_dist\n";
    const auto& grid = convergence.at("n_grid");
    for (std::size_t i = 0; i < grid.size(); ++i) {
        os << grid[i].get<int>() << ','
           << real_to_string(real_of(convergence.at("u_seq")[i], "u_seq")) << ','
           << real_to_string(real_of(convergence.at("grad_norms")[i], "grad_norms")) << ','
           << real_to_string(real_of(convergence.at("h_norms")[i], "h_norms")) << ','
           << real_to_string(real_of(convergence.at("cesaro_dist")[i], "cesaro_dist")) << '\n';
    }
    return os.str();
}

std::string prices_csv_from_json(const json& prices) {
    std::ostringstream os;
    os << "n,p_n,residual,iterations\n";
    auto row = [&](const json& r) {
        os << r.at("segment").get<int>() << ',' << real_to_string(real_of(r.at("p"), "p")) << ','
           << real_to_string(real_of(r.at("residual"), "residual")) << ','
           << r.at("iterations").get<int>() << '\n';
    };
    for (const auto& r : prices.at("per_segment")) row(r);
    if (!prices.value("reference_in_grid", false)) row(prices.at("reference"));
    return os.str();
}

void write_text_file(const std::string& path, const std::string& contents) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw InputError("cannot open '" + path + "' for writing");
    out << contents;
    if (!out) throw InputError("failed writing '" + path + "'");
}

std::string read_text_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw InputError("cannot open '" + path + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

}  // namespace aptkit
