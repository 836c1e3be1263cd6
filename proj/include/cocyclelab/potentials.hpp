#pragma once

// Potential functions v : T -> R for the cocycle matrix entry lambda*v(x) - E,
// together with the norms the estimates need (a bound on |v| and on |v'|) and,
// where known, the sublevel-structure parameters (eps0, beta, s): for every
// level a and every eps <= eps0 the set {x : |v(x)-a| < eps} has at most s
// components on the circle, each of length at most eps^beta.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <numbers>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace cocyclelab {

struct V1Params {
    double eps0;
    double beta;
    int s;
};

class PotentialSpec {
  public:
    PotentialSpec(std::string name,
                  std::function<double(double)> eval,
                  std::function<double(double)> deriv,
                  double sup_norm,
                  double deriv_sup_norm,
                  std::optional<V1Params> v1 = std::nullopt)
        : name_(std::move(name)),
          eval_(std::move(eval)),
          deriv_(std::move(deriv)),
          sup_norm_(sup_norm),
          deriv_sup_norm_(deriv_sup_norm),
          v1_(v1) {}

    double operator()(double x) const { return eval_(x); }
    double deriv(double x) const { return deriv_(x); }

    const std::string& name() const { return name_; }
    double sup_norm() const { return sup_norm_; }
    double deriv_sup_norm() const { return deriv_sup_norm_; }
    const std::optional<V1Params>& v1_params() const { return v1_; }

    PotentialSpec with_v1_params(V1Params v1) const {
        PotentialSpec copy = *this;
        copy.v1_ = v1;
        return copy;
    }

  private:
    std::string name_;
    std::function<double(double)> eval_;
    std::function<double(double)> deriv_;
    double sup_norm_;
    double deriv_sup_norm_;
    std::optional<V1Params> v1_;
};

namespace detail {

inline double frac1(double v) {
    double r = v - std::floor(v);
    if (r >= 1.0) r -= 1.0;
    if (r < 0.0) r += 1.0;
    return r;
}

// composite Simpson mean of f over [0,1]
inline double periodic_mean(const std::function<double(double)>& f, int cells = 1 << 13) {
    double acc = f(0.0) + f(1.0);
    for (int i = 1; i < cells; ++i) acc += (i % 2 ? 4.0 : 2.0) * f(static_cast<double>(i) / cells);
    return acc / (3.0 * cells);
}

}  // namespace detail

// v(x) = exp(phi(b x mod 1)) + exp(-phi(x)). phi must have zero mean over the
// circle; that is the hypothesis under which the exponent vanishes at E = 0.
inline PotentialSpec make_counterexample(std::string name,
                                         std::function<double(double)> phi,
                                         std::function<double(double)> dphi,
                                         double phi_sup,
                                         double dphi_sup,
                                         std::int64_t b) {
    if (b < 2) throw std::invalid_argument("counterexample potential: base must be >= 2");
    const double mean = detail::periodic_mean(phi);
    if (std::abs(mean) > 1e-8) {
        throw std::invalid_argument("counterexample potential: phi must have zero mean, got " +
                                    std::to_string(mean));
    }
    const double bd = static_cast<double>(b);
    auto eval = [phi, bd](double x) {
        return std::exp(phi(detail::frac1(bd * x))) + std::exp(-phi(x));
    };
    auto deriv = [phi, dphi, bd](double x) {
        const double tx = detail::frac1(bd * x);
        return std::exp(phi(tx)) * dphi(tx) * bd - std::exp(-phi(x)) * dphi(x);
    };
    const double sup = 2.0 * std::exp(phi_sup);
    const double dsup = std::exp(phi_sup) * dphi_sup * (bd + 1.0);
    return PotentialSpec(std::move(name), eval, deriv, sup, dsup);
}

// Builtins, by designator:
//   cos3                     v(x) = cos(2 pi x)/3
//   trigpoly:k1,c1[,k2,c2..] v(x) = sum_i c_i cos(2 pi k_i x)
//   counterexample:phi=cos   v(x) = exp(cos(2 pi (b x mod 1))) + exp(-cos(2 pi x))
//   constant:c               v == c   (not a sublevel-regular potential; engine tests only)
inline PotentialSpec make_builtin(const std::string& designator, std::int64_t b = 2) {
    const auto colon = designator.find(':');
    const std::string head = designator.substr(0, colon);
    const std::string args = colon == std::string::npos ? "" : designator.substr(colon + 1);
    const double two_pi = 2.0 * std::numbers::pi;

    if (head == "cos3") {
        if (!args.empty()) throw std::invalid_argument("potential cos3 takes no arguments");
        auto eval = [two_pi](double x) { return std::cos(two_pi * x) / 3.0; };
        auto deriv = [two_pi](double x) { return -two_pi * std::sin(two_pi * x) / 3.0; };
        // beta = 0.4: component lengths near the critical levels grow like
        // sqrt(eps), so any beta < 1/2 with a matching eps0 works; 0.4 leaves
        // uniform margin on (0, 0.1].
        return PotentialSpec("cos3", eval, deriv, 1.0 / 3.0, two_pi / 3.0, V1Params{0.1, 0.4, 2});
    }
    if (head == "constant") {
        double c = 0.0;
        if (!args.empty()) {
            try {
                c = std::stod(args);
            } catch (const std::exception&) {
                throw std::invalid_argument("potential constant: bad value '" + args + "'");
            }
        }
        auto eval = [c](double) { return c; };
        auto deriv = [](double) { return 0.0; };
        return PotentialSpec(designator, eval, deriv, std::abs(c), 0.0);
    }
    if (head == "trigpoly") {
        std::vector<std::pair<double, double>> terms;  // (harmonic k, coefficient c)
        std::istringstream in(args);
        std::string tok;
        std::vector<double> nums;
        while (std::getline(in, tok, ',')) {
            try {
                nums.push_back(std::stod(tok));
            } catch (const std::exception&) {
                throw std::invalid_argument("potential trigpoly: bad number '" + tok + "'");
            }
        }
        if (nums.empty() || nums.size() % 2 != 0) {
            throw std::invalid_argument("potential trigpoly: need k1,c1[,k2,c2,...] pairs");
        }
        double sup = 0.0, dsup = 0.0;
        for (std::size_t i = 0; i < nums.size(); i += 2) {
            const double k = nums[i], c = nums[i + 1];
            if (k < 1 || k != std::floor(k)) {
                throw std::invalid_argument("potential trigpoly: harmonics must be positive integers");
            }
            terms.emplace_back(k, c);
            sup += std::abs(c);
            dsup += two_pi * k * std::abs(c);
        }
        auto eval = [terms, two_pi](double x) {
            double acc = 0.0;
            for (const auto& [k, c] : terms) acc += c * std::cos(two_pi * k * x);
            return acc;
        };
        auto deriv = [terms, two_pi](double x) {
            double acc = 0.0;
            for (const auto& [k, c] : terms) acc -= c * two_pi * k * std::sin(two_pi * k * x);
            return acc;
        };
        return PotentialSpec(designator, eval, deriv, sup, dsup);
    }
    if (head == "counterexample") {
        if (!args.empty() && args != "phi=cos") {
            throw std::invalid_argument("potential counterexample: only phi=cos is built in");
        }
        auto phi = [two_pi](double x) { return std::cos(two_pi * x); };
        auto dphi = [two_pi](double x) { return -two_pi * std::sin(two_pi * x); };
        return make_counterexample(designator.empty() ? "counterexample:phi=cos" : designator,
                                   phi, dphi, 1.0, two_pi, b);
    }
    throw std::invalid_argument("unknown potential '" + designator + "'");
}

// ---------------------------------------------------------------------------
// sublevel structure
// ---------------------------------------------------------------------------

struct SublevelReport {
    double a = 0.0;
    double eps = 0.0;
    std::size_t interval_count = 0;
    double max_interval_length = 0.0;
    double total_length = 0.0;
    // set when some component or gap spans fewer than two grid cells, i.e.
    // features closer than 2/resolution may have merged or been missed
    bool resolution_warning = false;
};

// Connected components of {x on the circle : |v(x)-a| < eps}, located by sign
// changes of |v-a|-eps on a uniform grid and refined by bisection to width
// 1e-10. Grid values within 1e-12 of the level are treated as outside the set
// so that tangencies break deterministically.
inline SublevelReport sublevel_structure(const PotentialSpec& v, double a, double eps,
                                         std::size_t resolution) {
    if (eps <= 0.0) throw std::invalid_argument("sublevel_structure: eps must be > 0");
    if (resolution < 10000) throw std::invalid_argument("sublevel_structure: resolution must be >= 1e4");

    const auto g = [&](double x) { return std::abs(v(x) - a) - eps; };
    const std::size_t R = resolution;
    std::vector<bool> inside(R);
    for (std::size_t i = 0; i < R; ++i) {
        inside[i] = g(static_cast<double>(i) / static_cast<double>(R)) <= -1e-12;
    }

    SublevelReport rep;
    rep.a = a;
    rep.eps = eps;

    const std::size_t n_in = static_cast<std::size_t>(std::count(inside.begin(), inside.end(), true));
    if (n_in == 0) return rep;
    if (n_in == R) {
        rep.interval_count = 1;
        rep.max_interval_length = 1.0;
        rep.total_length = 1.0;
        return rep;
    }

    const auto refine = [&](double lo, double hi) {
        // the grid classifications at lo and hi differ; shrink to width 1e-10
        bool lo_in = g(lo) <= -1e-12;
        while (hi - lo > 1e-10) {
            const double mid = 0.5 * (lo + hi);
            if ((g(mid) <= -1e-12) == lo_in) {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        return 0.5 * (lo + hi);
    };

    // Walk one full revolution in unwrapped indices, starting at the beginning
    // of an outside run so components never straddle the walk boundary. v is
    // 1-periodic, so coordinates outside [0,1) are fine to evaluate.
    const double h = 1.0 / static_cast<double>(R);
    const auto inside_at = [&](std::size_t p) { return inside[p % R]; };
    std::size_t s0 = 0;
    for (std::size_t j = 0; j < R; ++j) {
        if (!inside[j] && inside[(j + R - 1) % R]) {
            s0 = j;
            break;
        }
    }
    std::size_t run_min = R, gap_min = R;
    std::size_t p = s0;
    const std::size_t end = s0 + R;
    while (p < end) {
        std::size_t gap = 0;
        while (p < end && !inside_at(p)) {
            ++p;
            ++gap;
        }
        gap_min = std::min(gap_min, gap);
        if (p >= end) break;
        const std::size_t run_start = p;
        std::size_t run = 0;
        while (inside_at(p)) {  // terminates: inside_at(end) == inside_at(s0) == false
            ++p;
            ++run;
        }
        run_min = std::min(run_min, run);
        const double left = refine((static_cast<double>(run_start) - 1.0) * h,
                                   static_cast<double>(run_start) * h);
        const double right = refine((static_cast<double>(p) - 1.0) * h,
                                    static_cast<double>(p) * h);
        const double len = std::min(std::max(right - left, 0.0), 1.0);
        rep.interval_count += 1;
        rep.max_interval_length = std::max(rep.max_interval_length, len);
        rep.total_length += len;
    }
    rep.resolution_warning = run_min < 2 || gap_min < 2;
    return rep;
}

// ---------------------------------------------------------------------------
// sublevel-class membership check
// ---------------------------------------------------------------------------

struct V1CheckResult {
    bool pass = true;
    SublevelReport worst;    // the violating report with the largest excess, or the tightest one
    double worst_score = -1e300;  // max(count - s, length/eps^beta - 1); <= 0 iff pass
    std::size_t violations = 0;
    bool any_resolution_warning = false;
    std::vector<SublevelReport> reports;  // one per (a, eps) pair, in grid order
};

// Empirical membership check on a finite (a, eps) grid: every pair must give at
// most s components, each of length at most eps^beta. Evidence, not proof.
inline V1CheckResult check_v1_class(const PotentialSpec& v,
                                    const std::vector<double>& a_grid,
                                    const std::vector<double>& eps_grid,
                                    std::size_t resolution = 20000) {
    if (!v.v1_params()) {
        throw std::invalid_argument("check_v1_class: potential '" + v.name() + "' has no sublevel parameters");
    }
    const V1Params p = *v.v1_params();
    for (double eps : eps_grid) {
        if (!(eps > 0.0) || eps > p.eps0) {
            throw std::invalid_argument("check_v1_class: eps values must lie in (0, eps0]");
        }
    }
    V1CheckResult res;
    res.reports.reserve(a_grid.size() * eps_grid.size());
    for (double a : a_grid) {
        for (double eps : eps_grid) {
            const SublevelReport rep = sublevel_structure(v, a, eps, resolution);
            res.reports.push_back(rep);
            res.any_resolution_warning |= rep.resolution_warning;
            const double count_excess =
                static_cast<double>(rep.interval_count) - static_cast<double>(p.s);
            const double len_excess = rep.max_interval_length / std::pow(eps, p.beta) - 1.0;
            const double score = std::max(count_excess, len_excess);
            if (score > 0.0) {
                res.pass = false;
                ++res.violations;
            }
            if (score > res.worst_score) {
                res.worst_score = score;
                res.worst = rep;
            }
        }
    }
    return res;
}

// ---------------------------------------------------------------------------
// self-consistency checks on a PotentialSpec (used by the test suite)
// ---------------------------------------------------------------------------

struct PotentialValidation {
    bool sup_norm_ok = true;
    bool deriv_ok = true;
    bool periodic_ok = true;
    double max_abs_value = 0.0;
    double max_deriv_mismatch = 0.0;
    double period_gap = 0.0;
};

inline PotentialValidation validate_potential(const PotentialSpec& v) {
    PotentialValidation r;
    for (int i = 0; i < 100000; ++i) {
        const double x = static_cast<double>(i) / 100000.0;
        r.max_abs_value = std::max(r.max_abs_value, std::abs(v(x)));
    }
    r.sup_norm_ok = r.max_abs_value <= v.sup_norm() + 1e-12;
    const double h = 1e-6;
    for (int i = 0; i < 1000; ++i) {
        const double x = h + (1.0 - 2.0 * h) * static_cast<double>(i) / 1000.0;
        const double fd = (v(x + h) - v(x - h)) / (2.0 * h);
        r.max_deriv_mismatch = std::max(r.max_deriv_mismatch, std::abs(fd - v.deriv(x)));
    }
    r.deriv_ok = r.max_deriv_mismatch <= 1e-4;
    r.period_gap = std::abs(v(0.0) - v(1.0));
    r.periodic_ok = r.period_gap < 1e-9;
    return r;
}

}  // namespace cocyclelab
