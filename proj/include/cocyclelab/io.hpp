#pragma once

// Output formatting: RFC-quoted CSV with '#' metadata preamble, and JSON with
// stable key order. Doubles are printed shortest-round-trip, so identical runs
// produce identical bytes.

#include <string>
#include <vector>

#include <json.hpp>

#include "cocyclelab/certification.hpp"
#include "cocyclelab/config.hpp"
#include "cocyclelab/counting.hpp"
#include "cocyclelab/lyapunov.hpp"
#include "cocyclelab/potentials.hpp"
#include "cocyclelab/version.hpp"

namespace cocyclelab {

using Json = nlohmann::ordered_json;

inline std::string format_double(double v) { return detail::format_double_exact(v); }

inline std::string csv_quote(const std::string& field) {
    if (field.find_first_of(",\"\n") == std::string::npos) return field;
    std::string out = "\"";
    for (char ch : field) {
        if (ch == '"') out += '"';
        out += ch;
    }
    out += '"';
    return out;
}

inline std::string csv_row(const std::vector<std::string>& fields) {
    std::string out;
    for (std::size_t i = 0; i < fields.size(); ++i) {
        if (i) out += ',';
        out += csv_quote(fields[i]);
    }
    out += '\n';
    return out;
}

// metadata block embedded at the top of CSV outputs; stripping the "# " prefix
// recovers a parseable config document
inline std::string csv_preamble(const RunConfig& cfg) {
    std::string out = "# cocyclelab " + std::string(kVersion) + "\n";
    for (const auto& [k, v] : config_pairs(cfg)) out += "# " + k + " = " + v + "\n";
    return out;
}

inline Json config_json(const RunConfig& cfg) {
    Json j = Json::object();
    for (const auto& [k, v] : config_pairs(cfg)) j[k] = v;
    return j;
}

inline Json make_document(const RunConfig& cfg) {
    Json j = Json::object();
    j["version"] = kVersion;
    j["config"] = config_json(cfg);
    return j;
}

// ---------------------------------------------------------------------------
// report serializers
// ---------------------------------------------------------------------------

inline Json estimate_json(const LyapunovEstimate& e, Regime regime) {
    Json j = Json::object();
    j["energy"] = e.energy;
    j["estimate"] = e.estimate;
    j["std_error"] = e.std_error;
    j["regime"] = regime_name(regime);
    j["n_steps"] = e.n_steps;
    j["n_samples"] = e.n_samples;
    j["seed"] = e.seed;
    j["clamped"] = e.clamped;
    return j;
}

inline const std::vector<std::string>& sweep_csv_columns() {
    static const std::vector<std::string> cols = {
        "energy",    "estimate", "std_error", "regime", "threshold_quarter_log_lambda",
        "n_steps",   "n_samples", "seed"};
    return cols;
}

inline std::string sweep_row_csv(const EnergyScanRow& r) {
    return csv_row({format_double(r.energy), format_double(r.estimate), format_double(r.std_error),
                    regime_name(r.regime), format_double(r.threshold_quarter_log_lambda),
                    std::to_string(r.n_steps), std::to_string(r.n_samples),
                    std::to_string(r.seed)});
}

inline Json sweep_row_json(const EnergyScanRow& r) {
    Json j = Json::object();
    j["energy"] = r.energy;
    j["estimate"] = r.estimate;
    j["std_error"] = r.std_error;
    j["regime"] = regime_name(r.regime);
    j["threshold_quarter_log_lambda"] = r.threshold_quarter_log_lambda;
    j["n_steps"] = r.n_steps;
    j["n_samples"] = r.n_samples;
    j["seed"] = r.seed;
    return j;
}

inline Json certification_json(const CertificationReport& r) {
    Json j = Json::object();
    j["depth"] = r.depth;
    j["strategy"] = r.strategy.kind == Strategy::Kind::exhaustive
                        ? "exhaustive"
                        : "sampled:" + std::to_string(r.strategy.children_per_node);
    j["nodes_per_level"] = r.strategy.nodes_per_level;
    j["grid"] = r.grid;
    j["seed"] = r.seed;
    j["budget_q"] = r.budget_q;
    if (r.apriori_bound) {
        j["apriori_bound"] = *r.apriori_bound;
    } else {
        j["apriori_bound"] = nullptr;
    }
    j["apriori_satisfied"] = r.apriori_satisfied;
    j["v1_params_missing"] = r.v1_params_missing;
    j["budget_respected"] = r.budget_respected;
    j["basepoints_exact"] = r.basepoints_exact;
    j["energy_in_certified_range"] = r.energy_in_certified_range;
    j["regime_handoff_gap"] = r.regime_handoff_gap;
    Json levels = Json::array();
    for (const auto& s : r.per_level) {
        Json l = Json::object();
        l["level"] = s.level;
        l["nodes_examined"] = s.nodes_examined;
        l["children_examined"] = s.children_examined;
        l["max_bad_children"] = s.max_bad_children;
        l["bad_fraction_estimate"] = s.bad_fraction_estimate;
        l["marginal_cells"] = s.marginal_cells;
        levels.push_back(l);
    }
    j["per_level"] = levels;
    return j;
}

inline Json sublevel_json(const SublevelReport& r) {
    Json j = Json::object();
    j["a"] = r.a;
    j["eps"] = r.eps;
    j["interval_count"] = r.interval_count;
    j["max_interval_length"] = r.max_interval_length;
    j["total_length"] = r.total_length;
    j["resolution_warning"] = r.resolution_warning;
    return j;
}

inline Json v1_check_json(const V1CheckResult& r) {
    Json j = Json::object();
    j["pass"] = r.pass;
    j["violations"] = r.violations;
    j["worst_score"] = r.worst_score;
    j["worst"] = sublevel_json(r.worst);
    j["any_resolution_warning"] = r.any_resolution_warning;
    return j;
}

inline Json product_check_json(const ProductCheckReport& r) {
    Json j = Json::object();
    j["N"] = r.N;
    j["k"] = r.k;
    j["product_log"] = r.product_log;
    j["bound_log"] = r.bound_log;
    j["branch"] = r.last_slope_small ? "last_slope_small" : "last_slope_large";
    j["pass"] = r.pass;
    j["small_count"] = r.small_count;
    j["min_adjacent_pair"] =
        r.small_count == 0 ? Json(nullptr) : Json(r.min_adjacent_pair);
    return j;
}

}  // namespace cocyclelab
