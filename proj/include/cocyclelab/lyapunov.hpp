#pragma once

// Monte Carlo estimation of the Lyapunov exponent L(E), energy sweeps, the
// large-energy regime classifier, and the slope-product lower-bound verifier.

#include <cmath>
#include <cstdint>
#include <limits>
#include <numbers>
#include <stdexcept>
#include <vector>

#include "cocyclelab/dynamics.hpp"
#include "cocyclelab/potentials.hpp"
#include "cocyclelab/rng.hpp"

namespace cocyclelab {

enum class Regime { large_energy, core };

// |E| >= lambda/3 + 2 sqrt(lambda) forces every slope with |r| > sqrt(lambda)
// to keep |r'| > sqrt(lambda), which pins L(E) >= (log lambda)/2 directly
inline double core_regime_threshold(const SystemParams& p) {
    return p.lambda / 3.0 + 2.0 * std::sqrt(p.lambda);
}

inline Regime regime_classify(const SystemParams& p) {
    return std::abs(p.energy) >= core_regime_threshold(p) ? Regime::large_energy : Regime::core;
}

inline const char* regime_name(Regime r) {
    return r == Regime::large_energy ? "large_energy" : "core";
}

// ---------------------------------------------------------------------------
// Monte Carlo estimator
// ---------------------------------------------------------------------------

struct LyapunovEstimate {
    double energy = 0.0;
    double estimate = 0.0;   // nats per step, >= 0 (negative noise clamps to 0)
    double std_error = 0.0;
    std::uint64_t n_steps = 0;
    std::uint64_t n_samples = 0;
    std::uint64_t seed = 0;
    bool clamped = false;    // raw mean was negative; magnitude is bounded by log2/(2 n_steps)
};

namespace detail {

// average max-stretch exponent for one starting point: burn the projective
// state toward the fast direction, then accumulate stretches along one shared
// base orbit for the burned direction and its orthogonal complement
inline double single_sample_growth(const SystemParams& p, const PotentialSpec& v,
                                   std::uint64_t n_steps, Rng& rng) {
    const ErgodicWalker walk(p.base, rng);
    double x = rng.uniform01();
    double u1 = std::numbers::sqrt2 / 2.0, u2 = std::numbers::sqrt2 / 2.0;
    const std::uint64_t burn = std::min<std::uint64_t>(100, n_steps / 10);
    for (std::uint64_t k = 0; k < burn; ++k) {
        const double c = p.lambda * v(x) - p.energy;
        advance_unit(c, u1, u2);
        x = walk.step(x);
    }
    double a1 = u1, a2 = u2;
    double b1 = -u2, b2 = u1;
    double acc_a = 0.0, acc_b = 0.0;
    for (std::uint64_t k = 0; k < n_steps; ++k) {
        const double c = p.lambda * v(x) - p.energy;
        acc_a += advance_unit(c, a1, a2);
        acc_b += advance_unit(c, b1, b2);
        x = walk.step(x);
    }
    return std::max(acc_a, acc_b) / static_cast<double>(n_steps);
}

}  // namespace detail

inline LyapunovEstimate estimate_lyapunov(const SystemParams& p, const PotentialSpec& v,
                                          std::uint64_t n_steps, std::uint64_t n_samples,
                                          std::uint64_t seed) {
    if (n_steps < 1000) throw std::invalid_argument("estimate_lyapunov: n_steps must be >= 1e3");
    if (n_samples < 1) throw std::invalid_argument("estimate_lyapunov: n_samples must be >= 1");

    std::vector<double> vals(n_samples);
    for (std::uint64_t i = 0; i < n_samples; ++i) {
        Rng rng(derive_stream(seed, i));
        vals[i] = detail::single_sample_growth(p, v, n_steps, rng);
    }
    double mean = 0.0;
    for (double x : vals) mean += x;
    mean /= static_cast<double>(n_samples);
    double var = 0.0;
    for (double x : vals) var += (x - mean) * (x - mean);

    LyapunovEstimate est;
    est.energy = p.energy;
    est.n_steps = n_steps;
    est.n_samples = n_samples;
    est.seed = seed;
    est.std_error = n_samples > 1
                        ? std::sqrt(var / static_cast<double>(n_samples - 1) /
                                    static_cast<double>(n_samples))
                        : 0.0;
    if (mean < 0.0) {
        // the exponent is nonnegative; the two-direction lower bracket can dip
        // below zero by at most log2/(2n) on rotation-like orbits
        est.estimate = 0.0;
        est.clamped = true;
    } else {
        est.estimate = mean;
    }
    return est;
}

// ---------------------------------------------------------------------------
// energy sweep
// ---------------------------------------------------------------------------

struct EnergyScanRow {
    double energy = 0.0;
    double estimate = 0.0;
    double std_error = 0.0;
    Regime regime = Regime::core;
    double threshold_quarter_log_lambda = 0.0;
    std::uint64_t n_steps = 0;
    std::uint64_t n_samples = 0;
    std::uint64_t seed = 0;
    bool clamped = false;
};

// uniform grid with both endpoints included; row i runs with seed base+i
inline std::vector<EnergyScanRow> sweep_energy(double lambda, std::int64_t b,
                                               const PotentialSpec& v, double e_min, double e_max,
                                               std::size_t n_grid, std::uint64_t n_steps,
                                               std::uint64_t n_samples, std::uint64_t seed) {
    if (!(e_min < e_max)) throw std::invalid_argument("sweep_energy: need e_min < e_max");
    if (n_grid < 2) throw std::invalid_argument("sweep_energy: need n_grid >= 2");
    std::vector<EnergyScanRow> rows;
    rows.reserve(n_grid);
    const double quarter = std::log(lambda) / 4.0;
    for (std::size_t i = 0; i < n_grid; ++i) {
        const double t = static_cast<double>(i) / static_cast<double>(n_grid - 1);
        const double energy = i + 1 == n_grid ? e_max : e_min + (e_max - e_min) * t;
        const SystemParams p(lambda, energy, b);
        const std::uint64_t row_seed = seed + i;
        const LyapunovEstimate est = estimate_lyapunov(p, v, n_steps, n_samples, row_seed);
        EnergyScanRow row;
        row.energy = energy;
        row.estimate = est.estimate;
        row.std_error = est.std_error;
        row.regime = regime_classify(p);
        row.threshold_quarter_log_lambda = quarter;
        row.n_steps = n_steps;
        row.n_samples = n_samples;
        row.seed = row_seed;
        row.clamped = est.clamped;
        rows.push_back(row);
    }
    return rows;
}

// ---------------------------------------------------------------------------
// slope-product lower bound
// ---------------------------------------------------------------------------

struct ProductCheckReport {
    std::size_t N = 0;
    std::size_t k = 0;             // indices j in [1,N] with |r_j| < sqrt(lambda)
    double product_log = 0.0;      // log |r_1 ... r_N|  (or ... r_{N+1} on the small branch)
    double bound_log = 0.0;        // (N - 3k) log sqrt(lambda)  (or N+1-3k)
    bool last_slope_small = false; // |r_N| < 1/lambda selects the longer product
    bool pass = false;
    std::size_t small_count = 0;   // indices j in [1,N] with |r_j| < 1/lambda
    double min_adjacent_pair = std::numeric_limits<double>::infinity();
    // min |r_j r_{j+1}| over those indices; stays > 1/4 whenever
    // 2/sqrt(lambda) <= 1/12, i.e. lambda >= 576, and empirically far below that
};

namespace detail {

inline double log_abs_sin(ProjectiveAngle y) {
    return std::log(std::abs(y.unit_vector()[1]));
}

}  // namespace detail

// Verifies log |r_1 ... r_N| >= (N - 3k) log sqrt(lambda) along a trace (with
// the N+1 variant when |r_N| < 1/lambda). Products are assembled from the
// stretch telescoping log|r_{j+1}| = log s_j + log|sin y_{j+1}| - log|sin y_j|,
// so slopes through 0 and infinity enter as finite sums and 0*inf pairs cancel
// exactly as the dynamics does.
inline ProductCheckReport product_inequality_check(const OrbitTrace& trace,
                                                   const SystemParams& p) {
    if (std::abs(p.energy) > core_regime_threshold(p)) {
        throw std::domain_error("product_inequality_check: requires |E| <= lambda/3 + 2 sqrt(lambda)");
    }
    if (trace.length() < 2) {
        throw std::invalid_argument("product_inequality_check: trace must have at least 2 steps");
    }
    const std::size_t N = trace.length() - 1;
    const double sqrt_l = p.sqrt_lambda();
    const double inv_l = 1.0 / p.lambda;

    ProductCheckReport rep;
    rep.N = N;

    double stretch_prefix = 0.0;  // sum of log stretches over steps [0, j)
    for (std::size_t j = 1; j <= N; ++j) {
        stretch_prefix += trace.steps[j - 1].log_stretch;
        const double abs_slope = std::abs(trace.angle(j).slope());
        if (abs_slope < sqrt_l) ++rep.k;
        if (abs_slope < inv_l) {
            ++rep.small_count;
            const double pair_log = trace.steps[j - 1].log_stretch + trace.steps[j].log_stretch +
                                    detail::log_abs_sin(trace.angle(j + 1)) -
                                    detail::log_abs_sin(trace.angle(j - 1));
            rep.min_adjacent_pair = std::min(rep.min_adjacent_pair, std::exp(pair_log));
        }
    }
    // stretch_prefix now covers steps [0, N)
    const double log_sin_0 = detail::log_abs_sin(trace.angle(0));
    rep.last_slope_small = std::abs(trace.angle(N).slope()) < inv_l;
    const double log_sqrt_l = std::log(sqrt_l);
    if (rep.last_slope_small) {
        rep.product_log = stretch_prefix + trace.steps[N].log_stretch +
                          detail::log_abs_sin(trace.angle(N + 1)) - log_sin_0;
        rep.bound_log =
            (static_cast<double>(N) + 1.0 - 3.0 * static_cast<double>(rep.k)) * log_sqrt_l;
    } else {
        rep.product_log = stretch_prefix + detail::log_abs_sin(trace.angle(N)) - log_sin_0;
        rep.bound_log = (static_cast<double>(N) - 3.0 * static_cast<double>(rep.k)) * log_sqrt_l;
    }
    rep.pass = rep.product_log >= rep.bound_log - 1e-9;
    return rep;
}

// Random trace for the lemma ensembles: uniform starting point and direction,
// base orbit advanced with ErgodicWalker (see dynamics.hpp for why plain
// double orbits cannot be used here).
inline OrbitTrace sample_ergodic_trace(std::size_t n, const SystemParams& p,
                                       const PotentialSpec& v, Rng& rng) {
    if (n < 1) throw std::invalid_argument("sample_ergodic_trace: n must be >= 1");
    const ErgodicWalker walk(p.base, rng);
    double x = rng.uniform01();
    ProjectiveAngle y = ProjectiveAngle::from_radians(rng.uniform01() * std::numbers::pi - kHalfPi);
    OrbitTrace t;
    t.steps.reserve(n);
    for (std::size_t k = 0; k < n; ++k) {
        const double c = p.lambda * v(x) - p.energy;
        t.steps.push_back({TorusPoint(x), y, detail::log_stretch_entry(c, y)});
        y = detail::projective_step_entry(c, y);
        x = walk.step(x);
    }
    t.final_x = TorusPoint(x);
    t.final_y = y;
    return t;
}

}  // namespace cocyclelab
