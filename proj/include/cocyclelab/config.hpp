#pragma once

// Flat key=value run configuration. Every run resolves to one of these; the
// full resolved config is embedded in every output file, and a run is
// reproducible from that block alone. Unknown keys are errors, not warnings.

#include <charconv>
#include <cstdint>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace cocyclelab {

struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct RunConfig {
    std::string command;  // estimate | sweep | certify | check-v1 | verify-lemmas | combinatorics

    double lambda = 1.0;
    double energy = 0.0;
    std::int64_t b = 2;
    std::string potential = "cos3";

    std::uint64_t steps = 100000;
    std::uint64_t samples = 10;

    double emin = -1.0;
    double emax = 1.0;
    std::uint64_t egrid = 33;

    std::uint64_t depth = 1;
    std::string strategy = "exhaustive";  // exhaustive | sampled:<children>
    std::uint64_t nodes = 64;             // sampled: nodes examined per level
    std::uint64_t grid = 8192;

    std::optional<std::uint64_t> seed;  // mandatory for stochastic commands, no clock default

    std::string which = "all";  // verify-lemmas: 2.2 | 2.3 | 2.4 | 2.5 | 3.1 | 4.2 | all
    std::uint64_t trials = 10000;

    std::int64_t n = 12;  // combinatorics law
    std::int64_t q = 1;
    std::int64_t m = -1;  // -1: print the whole m-table

    std::uint64_t a_count = 50;  // check-v1 level grid
    double a_min = -1.0 / 3.0;
    double a_max = 1.0 / 3.0;
    std::string eps = "0.1,0.05,0.01";
    std::uint64_t resolution = 20000;

    bool assert_budget = false;     // certify: exit 1 if a node exceeds floor(b/12) bad children
    bool assert_threshold = false;  // sweep: exit 1 if a row fails estimate > log(lambda)/4
    bool assert_v1 = false;         // check-v1: exit 1 on membership failure

    std::string out;
    std::string format;  // csv | json; resolved per command when empty

    bool operator==(const RunConfig&) const = default;
};

namespace detail {

inline std::string format_double_exact(double v) {
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
}

inline std::string trim(const std::string& s) {
    const auto a = s.find_first_not_of(" \t\r");
    if (a == std::string::npos) return "";
    const auto b = s.find_last_not_of(" \t\r");
    return s.substr(a, b - a + 1);
}

template <typename T>
inline T parse_number(const std::string& key, const std::string& value) {
    T out{};
    const char* first = value.data();
    const char* last = value.data() + value.size();
    const auto res = std::from_chars(first, last, out);
    if (res.ec != std::errc() || res.ptr != last) {
        throw ConfigError("config key '" + key + "': cannot parse value '" + value + "'");
    }
    return out;
}

inline bool parse_bool(const std::string& key, const std::string& value) {
    if (value == "true" || value == "1") return true;
    if (value == "false" || value == "0") return false;
    throw ConfigError("config key '" + key + "': expected true/false, got '" + value + "'");
}

}  // namespace detail

// resolved config as ordered key/value pairs; the exact serialization format
inline std::vector<std::pair<std::string, std::string>> config_pairs(const RunConfig& c) {
    using detail::format_double_exact;
    std::vector<std::pair<std::string, std::string>> kv;
    kv.emplace_back("command", c.command);
    kv.emplace_back("lambda", format_double_exact(c.lambda));
    kv.emplace_back("energy", format_double_exact(c.energy));
    kv.emplace_back("b", std::to_string(c.b));
    kv.emplace_back("potential", c.potential);
    kv.emplace_back("steps", std::to_string(c.steps));
    kv.emplace_back("samples", std::to_string(c.samples));
    kv.emplace_back("emin", format_double_exact(c.emin));
    kv.emplace_back("emax", format_double_exact(c.emax));
    kv.emplace_back("egrid", std::to_string(c.egrid));
    kv.emplace_back("depth", std::to_string(c.depth));
    kv.emplace_back("strategy", c.strategy);
    kv.emplace_back("nodes", std::to_string(c.nodes));
    kv.emplace_back("grid", std::to_string(c.grid));
    if (c.seed) kv.emplace_back("seed", std::to_string(*c.seed));
    kv.emplace_back("which", c.which);
    kv.emplace_back("trials", std::to_string(c.trials));
    kv.emplace_back("n", std::to_string(c.n));
    kv.emplace_back("q", std::to_string(c.q));
    kv.emplace_back("m", std::to_string(c.m));
    kv.emplace_back("a_count", std::to_string(c.a_count));
    kv.emplace_back("a_min", format_double_exact(c.a_min));
    kv.emplace_back("a_max", format_double_exact(c.a_max));
    kv.emplace_back("eps", c.eps);
    kv.emplace_back("resolution", std::to_string(c.resolution));
    kv.emplace_back("assert_budget", c.assert_budget ? "true" : "false");
    kv.emplace_back("assert_threshold", c.assert_threshold ? "true" : "false");
    kv.emplace_back("assert_v1", c.assert_v1 ? "true" : "false");
    kv.emplace_back("out", c.out);
    kv.emplace_back("format", c.format);
    return kv;
}

inline std::string serialize_config(const RunConfig& c) {
    std::ostringstream out;
    for (const auto& [k, v] : config_pairs(c)) out << k << " = " << v << "\n";
    return out.str();
}

// apply one key=value assignment; unknown keys are rejected by name
inline void apply_config_key(RunConfig& c, const std::string& key, const std::string& value) {
    using detail::parse_bool;
    using detail::parse_number;
    if (key == "command") c.command = value;
    else if (key == "lambda") c.lambda = parse_number<double>(key, value);
    else if (key == "energy") c.energy = parse_number<double>(key, value);
    else if (key == "b") c.b = parse_number<std::int64_t>(key, value);
    else if (key == "potential") c.potential = value;
    else if (key == "steps") c.steps = parse_number<std::uint64_t>(key, value);
    else if (key == "samples") c.samples = parse_number<std::uint64_t>(key, value);
    else if (key == "emin") c.emin = parse_number<double>(key, value);
    else if (key == "emax") c.emax = parse_number<double>(key, value);
    else if (key == "egrid") c.egrid = parse_number<std::uint64_t>(key, value);
    else if (key == "depth") c.depth = parse_number<std::uint64_t>(key, value);
    else if (key == "strategy") c.strategy = value;
    else if (key == "nodes") c.nodes = parse_number<std::uint64_t>(key, value);
    else if (key == "grid") c.grid = parse_number<std::uint64_t>(key, value);
    else if (key == "seed") c.seed = parse_number<std::uint64_t>(key, value);
    else if (key == "which") c.which = value;
    else if (key == "trials") c.trials = parse_number<std::uint64_t>(key, value);
    else if (key == "n") c.n = parse_number<std::int64_t>(key, value);
    else if (key == "q") c.q = parse_number<std::int64_t>(key, value);
    else if (key == "m") c.m = parse_number<std::int64_t>(key, value);
    else if (key == "a_count") c.a_count = parse_number<std::uint64_t>(key, value);
    else if (key == "a_min") c.a_min = parse_number<double>(key, value);
    else if (key == "a_max") c.a_max = parse_number<double>(key, value);
    else if (key == "eps") c.eps = value;
    else if (key == "resolution") c.resolution = parse_number<std::uint64_t>(key, value);
    else if (key == "assert_budget") c.assert_budget = parse_bool(key, value);
    else if (key == "assert_threshold") c.assert_threshold = parse_bool(key, value);
    else if (key == "assert_v1") c.assert_v1 = parse_bool(key, value);
    else if (key == "out") c.out = value;
    else if (key == "format") c.format = value;
    else throw ConfigError("unknown config key '" + key + "'");
}

// parse a flat key=value document on top of a base config ('#' starts a comment line)
inline RunConfig parse_config_text(const std::string& text, RunConfig base = {}) {
    std::istringstream in(text);
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const std::string t = detail::trim(line);
        if (t.empty() || t[0] == '#') continue;
        const auto eq = t.find('=');
        if (eq == std::string::npos) {
            throw ConfigError("config line " + std::to_string(lineno) + ": expected key = value");
        }
        apply_config_key(base, detail::trim(t.substr(0, eq)), detail::trim(t.substr(eq + 1)));
    }
    return base;
}

inline std::vector<double> parse_eps_list(const std::string& eps) {
    std::vector<double> out;
    std::istringstream in(eps);
    std::string tok;
    while (std::getline(in, tok, ',')) {
        out.push_back(detail::parse_number<double>("eps", detail::trim(tok)));
    }
    if (out.empty()) throw ConfigError("config key 'eps': empty list");
    return out;
}

// resolve defaults that depend on the command and check cross-field rules
inline void resolve_config(RunConfig& c) {
    static const std::vector<std::string> known = {"estimate",      "sweep",        "certify",
                                                   "check-v1",      "verify-lemmas", "combinatorics"};
    bool ok = false;
    for (const auto& k : known) ok |= k == c.command;
    if (!ok) throw ConfigError(c.command.empty() ? "missing required command"
                                                 : "unknown command '" + c.command + "'");
    if (c.format.empty()) {
        c.format = (c.command == "sweep" || c.command == "combinatorics") ? "csv" : "json";
    }
    if (c.format != "csv" && c.format != "json") {
        throw ConfigError("config key 'format': expected csv or json");
    }
    const bool stochastic = c.command == "estimate" || c.command == "sweep" ||
                            c.command == "verify-lemmas" ||
                            (c.command == "certify" && c.strategy != "exhaustive");
    if (stochastic && !c.seed) {
        throw ConfigError("command '" + c.command + "' is stochastic: an explicit seed is required");
    }
    if (!c.seed) c.seed = 0;  // deterministic commands get a fixed placeholder
    if (c.command == "check-v1") parse_eps_list(c.eps);
    if (c.strategy != "exhaustive" && c.strategy.rfind("sampled:", 0) != 0) {
        throw ConfigError("config key 'strategy': expected exhaustive or sampled:<children>");
    }
}

}  // namespace cocyclelab
