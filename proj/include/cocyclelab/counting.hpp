#pragma once

// Exact measure computations for the partition-tree counting laws, plus a
// brute-force enumeration oracle. Everything here is big-integer rational
// arithmetic; no floating point enters until a value is rendered.

#include <cstdint>
#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

#include <boost/multiprecision/cpp_int.hpp>

#include "cocyclelab/certification.hpp"

namespace cocyclelab {

using BigInt = boost::multiprecision::cpp_int;
using BigRat = boost::multiprecision::cpp_rational;

// depth-n tree in base b with exactly q bad children under every node
struct BadCountLaw {
    std::int64_t n;
    std::int64_t q;
    std::int64_t b;

    BadCountLaw(std::int64_t n_, std::int64_t q_, std::int64_t b_) : n(n_), q(q_), b(b_) {
        if (n < 1) throw std::invalid_argument("BadCountLaw: n must be >= 1");
        if (b < 2) throw std::invalid_argument("BadCountLaw: b must be >= 2");
        if (q < 0 || q > b) throw std::invalid_argument("BadCountLaw: need 0 <= q <= b");
    }
};

inline BigInt binomial(std::int64_t n, std::int64_t m) {
    if (m < 0 || m > n) return 0;
    BigInt r = 1;
    for (std::int64_t i = 0; i < m; ++i) {
        r *= n - i;
        r /= i + 1;
    }
    return r;
}

// measure of the points whose depth-n prefix chain has exactly m bad members:
// C(n,m) q^m (b-q)^(n-m) / b^n
inline BigRat level_bad_measure(const BadCountLaw& law, std::int64_t m) {
    if (m < 0 || m > law.n) throw std::out_of_range("level_bad_measure: m out of [0, n]");
    BigInt num = binomial(law.n, m);
    num *= boost::multiprecision::pow(BigInt(law.q), static_cast<unsigned>(m));
    num *= boost::multiprecision::pow(BigInt(law.b - law.q), static_cast<unsigned>(law.n - m));
    return BigRat(num, boost::multiprecision::pow(BigInt(law.b), static_cast<unsigned>(law.n)));
}

struct MnMeasure {
    BigRat value;
    std::int64_t threshold;       // floor(2 (q/b) n)
    bool threshold_exceeds_n;     // the bound covers every m; value is 1 by convention
};

// measure of the set with at most floor(2(q/b)n) bad prefix members; tends to
// 1 as n grows (mean bad count is (q/b) n, the threshold sits at twice that)
inline MnMeasure mn_measure(const BadCountLaw& law) {
    MnMeasure out;
    out.threshold = 2 * law.q * law.n / law.b;
    out.threshold_exceeds_n = out.threshold > law.n;
    const std::int64_t top = out.threshold_exceeds_n ? law.n : out.threshold;
    BigInt num = 0;
    BigInt coeff = 1;  // C(n, m), updated incrementally
    BigInt qk = 1;     // q^m
    for (std::int64_t m = 0; m <= top; ++m) {
        num += coeff * qk *
               boost::multiprecision::pow(BigInt(law.b - law.q), static_cast<unsigned>(law.n - m));
        coeff *= law.n - m;
        coeff /= m + 1;
        qk *= law.q;
    }
    out.value = BigRat(num, boost::multiprecision::pow(BigInt(law.b), static_cast<unsigned>(law.n)));
    return out;
}

// enumerate every word of length n and count those whose prefix chain has
// exactly m bad members under the predicate; the counting laws above are the
// special case of a fixed number of bad children per node
inline BigRat brute_force_word_measure(std::int64_t b, std::int64_t n,
                                       const std::function<bool(const Word&)>& bad_predicate,
                                       std::int64_t m) {
    if (b < 2 || b > 6) throw std::invalid_argument("brute_force_word_measure: need 2 <= b <= 6");
    if (n < 1 || n > 8) throw std::invalid_argument("brute_force_word_measure: need 1 <= n <= 8");
    double total = 1.0;
    for (std::int64_t i = 0; i < n; ++i) total *= static_cast<double>(b);
    if (total > 2e6) throw std::invalid_argument("brute_force_word_measure: b^n exceeds 2e6");
    if (m < 0 || m > n) throw std::out_of_range("brute_force_word_measure: m out of [0, n]");

    const auto count = static_cast<std::uint64_t>(total);
    BigInt hits = 0;
    for (std::uint64_t idx = 0; idx < count; ++idx) {
        Word w;
        w.digits.resize(static_cast<std::size_t>(n));
        std::uint64_t rest = idx;
        for (std::size_t t = static_cast<std::size_t>(n); t-- > 0;) {
            w.digits[t] = static_cast<std::int64_t>(rest % static_cast<std::uint64_t>(b)) + 1;
            rest /= static_cast<std::uint64_t>(b);
        }
        std::int64_t bad = 0;
        Word prefix;
        for (std::int64_t d : w.digits) {
            prefix.digits.push_back(d);
            if (bad_predicate(prefix)) ++bad;
        }
        if (bad == m) ++hits;
    }
    return BigRat(hits, BigInt(count));
}

inline double to_double(const BigRat& r) { return r.convert_to<double>(); }

inline std::string rational_string(const BigRat& r) {
    return boost::multiprecision::numerator(r).str() + "/" +
           boost::multiprecision::denominator(r).str();
}

}  // namespace cocyclelab
