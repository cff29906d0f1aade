#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <stdexcept>
#include <string>

namespace spval {

// Lower tail of the binomial distribution,
//   B(N, eta, m) = sum_{i=0}^{m} C(N,i) eta^i (1-eta)^(N-i),
// evaluated in log space. This module is the numerically exact anchor for
// every closed-form sample-size planner in the library.

struct TailQuery {
    std::int64_t trials;    // N >= 1
    double success_prob;    // eta in (0,1)
    std::int64_t cutoff;    // 0 <= m <= N
};

struct TailValue {
    double value;      // in [0,1]
    double log_value;  // natural log; -inf allowed. value == exp(log_value)
};

namespace detail {

inline void check_prob(const char* name, double p) {
    if (!(p > 0.0) || !(p < 1.0)) {
        throw std::domain_error(std::string(name) + " must lie strictly in (0,1), got " +
                                std::to_string(p));
    }
}

inline void check_query(const TailQuery& q) {
    if (q.trials < 1) throw std::domain_error("trials must be >= 1");
    check_prob("success_prob", q.success_prob);
    if (q.cutoff < 0 || q.cutoff > q.trials)
        throw std::domain_error("cutoff must satisfy 0 <= m <= N");
}

} // namespace detail

// Exact lower-tail evaluation. Term logs follow the recurrence
//   t_0 = N log(1-eta),  t_{i+1} = t_i + log((N-i)/(i+1)) + log(eta/(1-eta)),
// and the sum is accumulated by log-sum-exp anchored at the running maximum
// (the term sequence is unimodal, so the final anchor is the largest term).
// The recurrence keeps the relative error at ~1e-11 up to N = 1e7; computing
// log C(N,i) as a difference of lgamma values loses ~1e-7 there because the
// absolute lgamma error scales with ulp(lgamma(N)).
inline TailValue binom_tail(const TailQuery& q) {
    detail::check_query(q);
    const std::int64_t n = q.trials;
    const std::int64_t m = q.cutoff;
    if (m == n) return {1.0, 0.0};  // normalization identity, no summation

    const double log_ratio = std::log(q.success_prob) - std::log1p(-q.success_prob);
    double t = static_cast<double>(n) * std::log1p(-q.success_prob);  // i = 0 term
    double anchor = t;
    double acc = 1.0;
    for (std::int64_t i = 1; i <= m; ++i) {
        t += std::log(static_cast<double>(n - i + 1) / static_cast<double>(i)) + log_ratio;
        if (t <= anchor) {
            acc += std::exp(t - anchor);
        } else {
            acc = acc * std::exp(anchor - t) + 1.0;
            anchor = t;
        }
    }
    double log_value = anchor + std::log(acc);
    if (log_value > 0.0) log_value = 0.0;  // rounding guard at the full-sum end
    return {std::exp(log_value), log_value};
}

// Analytic upper bound a^m (eta/a + 1 - eta)^N, a >= 1, computed in log
// space. The raw expression can exceed 1 for large a^m; since every
// probability is trivially bounded by 1 the result is capped there, which
// keeps the dominance property intact and the value a valid probability.
inline TailValue lemma1_bound(const TailQuery& q, double a) {
    detail::check_query(q);
    if (!(a >= 1.0)) throw std::domain_error("lemma1_bound requires a >= 1");
    const double m = static_cast<double>(q.cutoff);
    const double n = static_cast<double>(q.trials);
    // eta/a + 1 - eta = 1 - eta (a-1)/a
    double log_base = std::log1p(-q.success_prob * (a - 1.0) / a);
    double log_value = m * std::log(a) + n * log_base;
    if (log_value > 0.0) log_value = 0.0;
    return {std::exp(log_value), log_value};
}

// Smallest N > m with B(N, eta, m) <= delta. Exponential bracketing followed
// by bisection; valid because the tail is strictly decreasing in N for
// m < N. The boundary is verified before returning. Comparisons use the
// computed tail directly (no epsilon slack), so results at exact-equality
// boundaries can be platform-sensitive at the +-1 sample level.
inline std::int64_t min_samples_exact(double eta, double delta, std::int64_t m) {
    detail::check_prob("eta", eta);
    detail::check_prob("delta", delta);
    if (m < 0) throw std::domain_error("m must be non-negative");

    auto tail_ok = [&](std::int64_t n) {
        return binom_tail({n, eta, m}).value <= delta;
    };

    std::int64_t lo = m;  // B(n,eta,m) = 1 > delta for n <= m
    std::int64_t hi = m + 1;
    while (!tail_ok(hi)) {
        lo = hi;
        if (hi > (std::int64_t{1} << 50))
            throw std::runtime_error("min_samples_exact: failed to bracket");
        hi *= 2;
    }
    while (lo + 1 < hi) {
        std::int64_t mid = lo + (hi - lo) / 2;
        if (tail_ok(mid)) hi = mid; else lo = mid;
    }
    if (hi - 1 > m && tail_ok(hi - 1))
        throw std::logic_error("min_samples_exact: boundary postcondition failed");
    return hi;
}

} // namespace spval
