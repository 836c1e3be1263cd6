#pragma once

// Certification machinery: cylinder words, iterated graphs of the constant
// section y = arctan(lambda) over the partition tree, good/bad classification
// of cylinders against the sqrt(lambda) floor, and the geometric derivative
// budget that turns grid minima into certified interval minima.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <set>
#include <stdexcept>
#include <vector>

#include <boost/multiprecision/cpp_int.hpp>

#include "cocyclelab/dynamics.hpp"
#include "cocyclelab/potentials.hpp"
#include "cocyclelab/rng.hpp"

namespace cocyclelab {

// address (j_1, ..., j_n) of a cylinder of the base-b partition tree, each
// digit in 1..b; depth 0 is the root cylinder [0,1)
struct Word {
    std::vector<std::int64_t> digits;

    Word() = default;
    explicit Word(std::vector<std::int64_t> d) : digits(std::move(d)) {}

    std::size_t depth() const { return digits.size(); }

    Word child(std::int64_t j) const {
        Word w = *this;
        w.digits.push_back(j);
        return w;
    }
};

namespace detail {

using BigInt = boost::multiprecision::cpp_int;

inline void validate_word(const Word& w, std::int64_t b) {
    for (std::int64_t d : w.digits) {
        if (d < 1 || d > b) throw std::invalid_argument("word digit out of range 1..b");
    }
}

// Per-level fiber coordinates of a word's cylinder: level k of a depth-n word
// lives at (m_k + x) / b^(n-k) with the integer suffix m_k = sum_{t>k}
// (j_t - 1) b^(n-t). Each level is recomputed from its exact integer suffix
// rather than by iterating T in floating point, which would multiply the
// rounding error by b per step.
struct WordFibers {
    std::vector<double> offset;     // m_k / b^(n-k)
    std::vector<double> inv_scale;  // 1 / b^(n-k)
    bool exact = true;              // b^depth <= 2^53: each cylinder resolvable in doubles

    WordFibers(const Word& w, std::int64_t b) {
        validate_word(w, b);
        const std::size_t n = w.depth();
        offset.resize(n);
        inv_scale.resize(n);
        BigInt m = 0;
        BigInt D = 1;
        for (std::size_t k = n; k-- > 0;) {
            // suffix over t in (k, n]: extend m on the left as k decreases
            m += (BigInt(w.digits[k]) - 1) * D;
            D *= b;
            offset[k] = m.convert_to<double>() / D.convert_to<double>();
            inv_scale[k] = 1.0 / D.convert_to<double>();
        }
        exact = n == 0 || D <= (BigInt(1) << 53);
    }

    double fiber(std::size_t k, double x) const { return offset[k] + x * inv_scale[k]; }
};

}  // namespace detail

struct Basepoint {
    TorusPoint point;
    bool exact;  // false once b^depth > 2^53 and cylinder spacing drops below 1 ulp
};

// the point of the word's cylinder whose n-th image under T is x; equals
// (m + x) / b^n with m the word's digit value
inline Basepoint word_basepoint(const Word& w, double x, std::int64_t b) {
    if (b < 2) throw std::invalid_argument("word_basepoint: base must be >= 2");
    if (x < 0.0 || x >= 1.0) throw std::invalid_argument("word_basepoint: x must lie in [0,1)");
    if (w.depth() == 0) return {TorusPoint(x), true};
    const detail::WordFibers f(w, b);
    return {TorusPoint(f.fiber(0, x)), f.exact};
}

namespace detail {

inline ProjectiveAngle graph_eval_fibers(const WordFibers& f, double x, const SystemParams& p,
                                         const PotentialSpec& v) {
    ProjectiveAngle y = ProjectiveAngle::from_slope(p.lambda);
    for (std::size_t k = 0; k < f.offset.size(); ++k) {
        const double c = p.lambda * v(f.fiber(k, x)) - p.energy;
        y = projective_step_entry(c, y);
    }
    return y;
}

}  // namespace detail

// angle of the depth-n iterated graph over the word's cylinder in the cell
// coordinate x in [0,1]; depth 0 is the constant section arctan(lambda)
inline ProjectiveAngle graph_eval(const Word& w, double x, const SystemParams& p,
                                  const PotentialSpec& v) {
    const detail::WordFibers f(w, p.base);
    return detail::graph_eval_fibers(f, x, p, v);
}

// ---------------------------------------------------------------------------
// derivative budget
// ---------------------------------------------------------------------------

struct DerivativeBudget {
    int m = 0;
    double value = 0.0;  // (lambda ||v'|| / b) * sum_{i=0..m} (2 lambda^2 / b)^i
};

inline DerivativeBudget derivative_budget(int m, const SystemParams& p, const PotentialSpec& v) {
    if (m < 0) throw std::invalid_argument("derivative_budget: m must be >= 0");
    const double ratio = 2.0 * p.lambda * p.lambda / static_cast<double>(p.base);
    double sum = 0.0;
    double term = 1.0;
    for (int i = 0; i <= m; ++i) {
        sum += term;
        term *= ratio;
    }
    DerivativeBudget b;
    b.m = m;
    b.value = p.lambda * v.deriv_sup_norm() / static_cast<double>(p.base) * sum;
    return b;
}

// closed-form cap on the full geometric series, valid when b >= lambda^3 and
// lambda > 4: every iterated-graph slope stays below 2 ||v'|| / lambda^2
inline double derivative_cap(const SystemParams& p, const PotentialSpec& v) {
    return 2.0 * v.deriv_sup_norm() / (p.lambda * p.lambda);
}

// ---------------------------------------------------------------------------
// good/bad classification
// ---------------------------------------------------------------------------

struct ChildClass {
    bool bad = false;       // grid min of |tan(graph)| below sqrt(lambda) + margin
    bool marginal = false;  // grid min within +-margin of sqrt(lambda): grid cannot decide
    double grid_min_abs_slope = 0.0;
};

namespace detail {

inline double badness_margin(std::size_t child_depth, const SystemParams& p,
                             const PotentialSpec& v, std::size_t grid) {
    // angle-derivative budget of the child graph, inflated by the worst
    // d tan / dy = 1/cos^2 <= 1 + lambda on the decision region |tan y| <= sqrt(lambda)
    const double slack =
        derivative_budget(static_cast<int>(child_depth), p, v).value * (1.0 + p.lambda);
    return slack / static_cast<double>(grid);
}

inline ChildClass classify_child(const Word& child, const SystemParams& p, const PotentialSpec& v,
                                 std::size_t grid, double margin) {
    const WordFibers f(child, p.base);
    double min_abs = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < grid; ++i) {
        const double x = static_cast<double>(i) / static_cast<double>(grid - 1);
        const double t = std::abs(graph_eval_fibers(f, x, p, v).slope());
        min_abs = std::min(min_abs, t);
    }
    const double sqrt_l = p.sqrt_lambda();
    ChildClass c;
    c.grid_min_abs_slope = min_abs;
    c.bad = min_abs < sqrt_l + margin;
    c.marginal = std::abs(min_abs - sqrt_l) < margin;
    return c;
}

}  // namespace detail

// classify all b children of a word: a child flagged good is certified good up
// to the margin, a child flagged bad carries a grid witness below the margin
inline std::vector<ChildClass> child_badness(const Word& w, const SystemParams& p,
                                             const PotentialSpec& v, std::size_t grid) {
    if (grid < 64) throw std::invalid_argument("child_badness: grid must be >= 64");
    const double margin = detail::badness_margin(w.depth() + 1, p, v, grid);
    std::vector<ChildClass> out;
    out.reserve(static_cast<std::size_t>(p.base));
    for (std::int64_t j = 1; j <= p.base; ++j) {
        out.push_back(detail::classify_child(w.child(j), p, v, grid, margin));
    }
    return out;
}

// ---------------------------------------------------------------------------
// tree certification
// ---------------------------------------------------------------------------

struct Strategy {
    enum class Kind { exhaustive, sampled };
    Kind kind = Kind::exhaustive;
    std::size_t children_per_node = 0;  // sampled: children drawn per examined node
    std::size_t nodes_per_level = 64;   // sampled: nodes examined per level

    static Strategy exhaustive() { return {}; }
    static Strategy sampled(std::size_t children, std::size_t nodes = 64) {
        Strategy s;
        s.kind = Kind::sampled;
        s.children_per_node = children;
        s.nodes_per_level = nodes;
        return s;
    }
};

struct LevelStats {
    std::size_t level = 0;             // children of depth level-1 parents
    std::size_t nodes_examined = 0;    // parents whose children were classified
    std::size_t children_examined = 0;
    std::size_t max_bad_children = 0;  // worst bad-child count over examined parents
    double bad_fraction_estimate = 0.0;
    std::size_t marginal_cells = 0;
};

struct CertificationReport {
    std::size_t depth = 0;
    Strategy strategy;
    std::size_t grid = 0;
    std::uint64_t seed = 0;
    std::vector<LevelStats> per_level;
    std::int64_t budget_q = 0;                   // floor(b/12)
    std::optional<std::int64_t> apriori_bound;   // (s+1)(2 + floor(2^beta lambda^(-beta/2) b))
    bool apriori_satisfied = false;              // apriori_bound < budget_q
    bool v1_params_missing = false;
    bool budget_respected = false;   // every examined node had bad children <= budget_q
    bool basepoints_exact = true;    // b^depth <= 2^53
    bool energy_in_certified_range = false;  // |E| < lambda/2
    bool regime_handoff_gap = false;         // lambda/3 + 2 sqrt(lambda) >= lambda/2 (lambda <= 144)
};

namespace detail {

inline Word word_from_index(std::uint64_t idx, std::size_t level, std::int64_t b) {
    std::vector<std::int64_t> digits(level);
    for (std::size_t t = level; t-- > 0;) {
        digits[t] = static_cast<std::int64_t>(idx % static_cast<std::uint64_t>(b)) + 1;
        idx /= static_cast<std::uint64_t>(b);
    }
    return Word(std::move(digits));
}

// k distinct digits from 1..b (Floyd's sampling), returned sorted
inline std::vector<std::int64_t> sample_children(std::int64_t b, std::size_t k, Rng& rng) {
    std::set<std::int64_t> sel;
    for (std::int64_t t = b - static_cast<std::int64_t>(k) + 1; t <= b; ++t) {
        const std::int64_t j = rng.uniform_int(1, t);
        if (!sel.insert(j).second) sel.insert(t);
    }
    return {sel.begin(), sel.end()};
}

}  // namespace detail

inline CertificationReport certify_tree(const SystemParams& p, const PotentialSpec& v,
                                        std::size_t depth, Strategy strategy, std::size_t grid,
                                        std::uint64_t seed) {
    if (depth < 1) throw std::invalid_argument("certify_tree: depth must be >= 1");
    if (grid < 64) throw std::invalid_argument("certify_tree: grid must be >= 64");
    const std::int64_t b = p.base;

    // b^depth, saturating well above every cap we compare against
    double nodes_at_depth = 1.0;
    for (std::size_t i = 0; i < depth; ++i) nodes_at_depth *= static_cast<double>(b);
    if (strategy.kind == Strategy::Kind::exhaustive && nodes_at_depth > 1e7) {
        throw std::invalid_argument("certify_tree: exhaustive strategy needs b^depth <= 1e7");
    }
    if (strategy.kind == Strategy::Kind::sampled &&
        (strategy.children_per_node < 1 || strategy.nodes_per_level < 1)) {
        throw std::invalid_argument("certify_tree: sampled strategy needs positive sample sizes");
    }

    CertificationReport rep;
    rep.depth = depth;
    rep.strategy = strategy;
    rep.grid = grid;
    rep.seed = seed;
    rep.budget_q = b / 12;
    if (v.v1_params()) {
        const V1Params vp = *v.v1_params();
        const double inner =
            std::pow(2.0, vp.beta) * std::pow(p.lambda, -vp.beta / 2.0) * static_cast<double>(b);
        rep.apriori_bound =
            static_cast<std::int64_t>(vp.s + 1) * (2 + static_cast<std::int64_t>(std::floor(inner)));
        rep.apriori_satisfied = *rep.apriori_bound < rep.budget_q;
    } else {
        rep.v1_params_missing = true;
    }
    rep.basepoints_exact = nodes_at_depth <= 9007199254740992.0;  // 2^53
    rep.energy_in_certified_range = std::abs(p.energy) < p.lambda / 2.0;
    rep.regime_handoff_gap = p.lambda / 3.0 + 2.0 * std::sqrt(p.lambda) >= p.lambda / 2.0;

    bool budget_ok = true;
    for (std::size_t level = 1; level <= depth; ++level) {
        const double margin = detail::badness_margin(level, p, v, grid);
        LevelStats stats;
        stats.level = level;

        // parents at depth level-1, in deterministic (sorted) order
        std::vector<Word> parents;
        double parent_count = 1.0;
        for (std::size_t i = 0; i + 1 < level; ++i) parent_count *= static_cast<double>(b);
        const bool enumerate_parents =
            strategy.kind == Strategy::Kind::exhaustive ||
            parent_count <= static_cast<double>(strategy.nodes_per_level);
        if (enumerate_parents) {
            const auto n_parents = static_cast<std::uint64_t>(parent_count);
            parents.reserve(n_parents);
            for (std::uint64_t i = 0; i < n_parents; ++i) {
                parents.push_back(detail::word_from_index(i, level - 1, b));
            }
        } else {
            Rng level_rng(derive_stream(seed, level));
            std::set<std::vector<std::int64_t>> seen;
            while (seen.size() < strategy.nodes_per_level) {
                std::vector<std::int64_t> digits(level - 1);
                for (auto& d : digits) d = level_rng.uniform_int(1, b);
                seen.insert(std::move(digits));
            }
            parents.reserve(seen.size());
            for (const auto& d : seen) parents.emplace_back(d);
        }

        Rng child_rng(derive_stream(seed, 0x10000u + level));
        std::size_t bad_total = 0;
        for (const Word& parent : parents) {
            std::vector<std::int64_t> child_digits;
            if (strategy.kind == Strategy::Kind::sampled &&
                strategy.children_per_node < static_cast<std::size_t>(b)) {
                child_digits = detail::sample_children(b, strategy.children_per_node, child_rng);
            } else {
                child_digits.resize(static_cast<std::size_t>(b));
                for (std::int64_t j = 1; j <= b; ++j) child_digits[static_cast<std::size_t>(j - 1)] = j;
            }
            std::size_t bad_here = 0;
            for (std::int64_t j : child_digits) {
                const ChildClass c = detail::classify_child(parent.child(j), p, v, grid, margin);
                bad_here += c.bad ? 1 : 0;
                stats.marginal_cells += c.marginal ? 1 : 0;
            }
            stats.children_examined += child_digits.size();
            stats.max_bad_children = std::max(stats.max_bad_children, bad_here);
            bad_total += bad_here;
            if (static_cast<std::int64_t>(bad_here) > rep.budget_q) budget_ok = false;
        }
        stats.nodes_examined = parents.size();
        stats.bad_fraction_estimate =
            stats.children_examined == 0
                ? 0.0
                : static_cast<double>(bad_total) / static_cast<double>(stats.children_examined);
        rep.per_level.push_back(stats);
    }
    rep.budget_respected = budget_ok;
    return rep;
}

// ---------------------------------------------------------------------------
// derivative check
// ---------------------------------------------------------------------------

struct SlopeCheck {
    double max_abs_slope = 0.0;
    double budget = 0.0;
    bool pass = false;
};

// finite-difference slope of the iterated graph against the geometric budget;
// requires the standing hypotheses b >= lambda^3 and |E| < lambda/2
inline SlopeCheck graph_derivative_check(const Word& w, const SystemParams& p,
                                         const PotentialSpec& v, std::size_t grid) {
    if (static_cast<double>(p.base) < p.lambda * p.lambda * p.lambda) {
        throw std::domain_error("graph_derivative_check: requires b >= lambda^3");
    }
    if (!(std::abs(p.energy) < p.lambda / 2.0)) {
        throw std::domain_error("graph_derivative_check: requires |E| < lambda/2");
    }
    if (grid < 2) throw std::invalid_argument("graph_derivative_check: grid must be >= 2");
    const detail::WordFibers f(w, p.base);
    const double h = 1e-6;
    SlopeCheck res;
    res.budget = derivative_budget(static_cast<int>(w.depth()), p, v).value;
    for (std::size_t i = 0; i < grid; ++i) {
        const double x =
            h + (1.0 - 2.0 * h) * static_cast<double>(i) / static_cast<double>(grid - 1);
        const double yp = detail::graph_eval_fibers(f, x + h, p, v).radians();
        const double ym = detail::graph_eval_fibers(f, x - h, p, v).radians();
        double dy = yp - ym;  // circle difference mod pi
        if (dy > kHalfPi) dy -= std::numbers::pi;
        if (dy < -kHalfPi) dy += std::numbers::pi;
        res.max_abs_slope = std::max(res.max_abs_slope, std::abs(dy) / (2.0 * h));
    }
    res.pass = res.max_abs_slope <= res.budget * (1.0 + 1e-3);
    return res;
}

}  // namespace cocyclelab
