#pragma once

// Core dynamics: the expanding base map T(x) = b x mod 1, the 2x2 transfer
// matrices A(x) = [[0,1],[-1, lambda v(x) - E]], the induced projective circle
// map on direction angles, and numerically stable log-norm growth along orbits
// (unit-vector renormalization; raw slope products overflow within ~150 steps
// at lambda = 100).

#include <array>
#include <bit>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <stdexcept>
#include <vector>

#include "cocyclelab/potentials.hpp"
#include "cocyclelab/rng.hpp"

namespace cocyclelab {

inline constexpr double kHalfPi = std::numbers::pi / 2.0;

struct SystemParams {
    double lambda;      // coupling, > 0
    double energy;
    std::int64_t base;  // b >= 2

    SystemParams(double lambda_, double energy_, std::int64_t base_)
        : lambda(lambda_), energy(energy_), base(base_) {
        if (!(lambda > 0.0)) throw std::invalid_argument("SystemParams: lambda must be > 0");
        if (base < 2) throw std::invalid_argument("SystemParams: base must be >= 2");
    }

    double sqrt_lambda() const { return std::sqrt(lambda); }
};

// point on the circle R/Z, stored in [0,1)
struct TorusPoint {
    double value = 0.0;

    TorusPoint() = default;
    explicit TorusPoint(double v) : value(reduce(v)) {}

    static double reduce(double v) {
        double r = v - std::floor(v);
        if (r >= 1.0) r -= 1.0;
        if (r < 0.0) r += 1.0;
        return r;
    }
};

inline TorusPoint base_step(TorusPoint x, std::int64_t b) {
    if (b < 2) throw std::invalid_argument("base_step: base must be >= 2");
    return TorusPoint(static_cast<double>(b) * x.value);
}

// Direction angle y in [-pi/2, pi/2) with the endpoints identified; the stored
// value -pi/2 is the vertical direction (slope infinity). Using angles instead
// of slopes removes every division-by-zero case from the projective dynamics.
class ProjectiveAngle {
  public:
    ProjectiveAngle() = default;

    static ProjectiveAngle from_radians(double y) {
        if (y >= kHalfPi || y < -kHalfPi) {
            y = std::remainder(y, std::numbers::pi);  // lands in [-pi/2, pi/2]
            if (y >= kHalfPi) y = -kHalfPi;
        }
        ProjectiveAngle a;
        a.y_ = y;
        return a;
    }

    static ProjectiveAngle from_slope(double r) { return from_radians(std::atan(r)); }
    static ProjectiveAngle vertical() { return from_radians(-kHalfPi); }

    double radians() const { return y_; }
    double slope() const { return std::tan(y_); }
    bool is_vertical() const { return y_ == -kHalfPi; }

    // cos/sin of the representative; the vertical point maps to (0, 1)
    std::array<double, 2> unit_vector() const {
        if (is_vertical()) return {0.0, 1.0};
        return {std::cos(y_), std::sin(y_)};
    }

  private:
    double y_ = 0.0;
};

// row-major 2x2 matrix
struct Mat2 {
    double a = 1.0, b = 0.0, c = 0.0, d = 1.0;

    Mat2 operator*(const Mat2& o) const {
        return {a * o.a + b * o.c, a * o.b + b * o.d, c * o.a + d * o.c, c * o.b + d * o.d};
    }
    std::array<double, 2> apply(const std::array<double, 2>& u) const {
        return {a * u[0] + b * u[1], c * u[0] + d * u[1]};
    }
    double det() const { return a * d - b * c; }
    // spectral norm (largest singular value); the growth-rate limit does not
    // depend on the choice of matrix norm, this one is used throughout
    double operator_norm() const {
        const double f = a * a + b * b + c * c + d * d;
        const double dd = det();
        const double disc = std::sqrt(std::max(f * f - 4.0 * dd * dd, 0.0));
        return std::sqrt(0.5 * (f + disc));
    }
};

inline Mat2 transfer_matrix(TorusPoint x, const SystemParams& p, const PotentialSpec& v) {
    return {0.0, 1.0, -1.0, p.lambda * v(x.value) - p.energy};
}

namespace detail {

// single projective step given the precomputed entry c = lambda v(x) - E
inline ProjectiveAngle projective_step_entry(double c, ProjectiveAngle y) {
    if (y.is_vertical()) return ProjectiveAngle::from_radians(std::atan(c));
    const double s = std::sin(y.radians());
    if (std::abs(s) < 1e-15) return ProjectiveAngle::vertical();
    const double co = std::cos(y.radians());
    return ProjectiveAngle::from_radians(std::atan(c - co / s));
}

// log ||A(x) u|| for the unit vector u of angle y
inline double log_stretch_entry(double c, ProjectiveAngle y) {
    const auto u = y.unit_vector();
    const double w1 = u[1];
    const double w2 = c * u[1] - u[0];
    return 0.5 * std::log(w1 * w1 + w2 * w2);
}

// advance a unit vector by A(x) with entry c, renormalize, return log stretch
inline double advance_unit(double c, double& u1, double& u2) {
    const double w1 = u2;
    const double w2 = c * u2 - u1;
    const double n = std::sqrt(w1 * w1 + w2 * w2);  // never 0: det A = 1
    u1 = w1 / n;
    u2 = w2 / n;
    return std::log(n);
}

}  // namespace detail

// angle image of (x, y) under one application of the cocycle: the slope map is
// r -> lambda v(x) - E - 1/r, with slope 0 sent to the vertical point and the
// vertical point sent to slope lambda v(x) - E
inline ProjectiveAngle projective_step(TorusPoint x, ProjectiveAngle y, const SystemParams& p,
                                       const PotentialSpec& v) {
    return detail::projective_step_entry(p.lambda * v(x.value) - p.energy, y);
}

inline double step_log_stretch(TorusPoint x, ProjectiveAngle y, const SystemParams& p,
                               const PotentialSpec& v) {
    return detail::log_stretch_entry(p.lambda * v(x.value) - p.energy, y);
}

// ---------------------------------------------------------------------------
// orbits
// ---------------------------------------------------------------------------

struct OrbitSample {
    TorusPoint x;
    ProjectiveAngle y;
    double log_stretch;  // log ||A(x) u_y|| for this step
};

// n steps of the skew product from (x0, y0). steps[k] holds the state before
// step k and that step's stretch; the state after the last step is final_x,
// final_y. The cumulative stretch sum telescopes to log ||A^n(x0) u_{y0}||.
struct OrbitTrace {
    std::vector<OrbitSample> steps;
    TorusPoint final_x;
    ProjectiveAngle final_y;

    std::size_t length() const { return steps.size(); }

    ProjectiveAngle angle(std::size_t k) const {
        if (k < steps.size()) return steps[k].y;
        if (k == steps.size()) return final_y;
        throw std::out_of_range("OrbitTrace::angle index out of range");
    }

    double cumulative_log_stretch() const {
        double acc = 0.0;
        for (const auto& s : steps) acc += s.log_stretch;
        return acc;
    }
};

inline OrbitTrace orbit_trace(TorusPoint x0, ProjectiveAngle y0, std::size_t n,
                              const SystemParams& p, const PotentialSpec& v) {
    if (n < 1) throw std::invalid_argument("orbit_trace: n must be >= 1");
    OrbitTrace t;
    t.steps.reserve(n);
    TorusPoint x = x0;
    ProjectiveAngle y = y0;
    for (std::size_t k = 0; k < n; ++k) {
        const double c = p.lambda * v(x.value) - p.energy;
        t.steps.push_back({x, y, detail::log_stretch_entry(c, y)});
        y = detail::projective_step_entry(c, y);
        x = base_step(x, p.base);
    }
    t.final_x = x;
    t.final_y = y;
    return t;
}

// ---------------------------------------------------------------------------
// log-norm growth
// ---------------------------------------------------------------------------

// (1/n) log ||A^n(x0)|| lies in [lower, upper]: lower is the larger average
// stretch over two orthogonal starting directions, and the operator norm
// exceeds that by at most a factor sqrt(2), i.e. log 2 / n per step.
struct GrowthBracket {
    double lower = 0.0;
    double upper = 0.0;
};

inline GrowthBracket lognorm_growth(TorusPoint x0, std::size_t n, const SystemParams& p,
                                    const PotentialSpec& v) {
    if (n < 1) throw std::invalid_argument("lognorm_growth: n must be >= 1");
    TorusPoint x = x0;
    double a1 = 1.0, a2 = 0.0;   // angle 0
    double b1 = 0.0, b2 = 1.0;   // vertical
    double acc_a = 0.0, acc_b = 0.0;
    for (std::size_t k = 0; k < n; ++k) {
        const double c = p.lambda * v(x.value) - p.energy;
        acc_a += detail::advance_unit(c, a1, a2);
        acc_b += detail::advance_unit(c, b1, b2);
        x = base_step(x, p.base);
    }
    GrowthBracket g;
    g.lower = std::max(acc_a, acc_b) / static_cast<double>(n);
    g.upper = g.lower + std::numbers::ln2 / static_cast<double>(n);
    return g;
}

// ---------------------------------------------------------------------------
// ergodic sampling of the base map
// ---------------------------------------------------------------------------

// frac(b*x) in doubles discards ~log2(b) leading bits per step, and once the
// value sits on the coarser grid left by the first rounding, every later
// product is exact, so the 2-adic valuation of the mantissa grows by v2(b)
// each step: for any even base the orbit reaches the absorbing fixed point 0
// within ~53/v2(b) steps. Long ergodic runs therefore refill the vacated low
// bits with fresh seeded uniform bits, which reproduces the digit shift on a
// random real to the full width of the mantissa.
struct ErgodicWalker {
    double base;
    double dither_scale;
    Rng* rng;

    ErgodicWalker(std::int64_t b, Rng& r)
        : base(static_cast<double>(b)),
          dither_scale(std::ldexp(1.0, std::bit_width(static_cast<std::uint64_t>(b - 1)) - 53)),
          rng(&r) {}

    double step(double x) const {
        return TorusPoint::reduce(TorusPoint::reduce(base * x) + rng->uniform01() * dither_scale);
    }
};

inline TorusPoint ergodic_step(TorusPoint x, std::int64_t b, Rng& rng) {
    return TorusPoint(ErgodicWalker(b, rng).step(x.value));
}

}  // namespace cocyclelab
