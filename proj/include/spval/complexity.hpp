#pragma once

#include <cmath>
#include <cstdint>
#include <map>
#include <mutex>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <thread>
#include <vector>

#include "spval/binomial.hpp"

namespace spval {

// Closed-form sample-size planners. Each planner returns the smallest integer
// N >= bound for its formula together with an exact-tail certificate
// B(N, eta, m), so callers never have to trust the closed form alone.

struct RiskSpec {
    double eta;    // accuracy, in (0,1)
    double delta;  // confidence, in (0,1)
};

enum class Bound {
    lemma2_fixed_a,
    euler,
    suboptimal_a,
    optimal_a,
    sqrt_bound,
    exact_oracle,
};

inline const char* to_string(Bound b) {
    switch (b) {
        case Bound::lemma2_fixed_a: return "lemma2";
        case Bound::euler: return "euler";
        case Bound::suboptimal_a: return "suboptimal";
        case Bound::optimal_a: return "optimal";
        case Bound::sqrt_bound: return "sqrt";
        case Bound::exact_oracle: return "exact";
    }
    return "?";
}

inline Bound bound_from_string(std::string_view s) {
    if (s == "lemma2") return Bound::lemma2_fixed_a;
    if (s == "euler") return Bound::euler;
    if (s == "suboptimal") return Bound::suboptimal_a;
    if (s == "optimal") return Bound::optimal_a;
    if (s == "sqrt") return Bound::sqrt_bound;
    if (s == "exact") return Bound::exact_oracle;
    throw std::invalid_argument("unknown bound name: " + std::string(s));
}

struct PlanResult {
    std::int64_t samples;          // N
    Bound bound_name;
    std::optional<double> a_used;  // present when the bound has an `a`
    double certificate;            // B(samples, eta, m), exact tail
    double raw_bound;              // pre-ceiling real value; samples = ceil(raw_bound)
};

namespace detail {

inline void check_risk(const RiskSpec& spec) {
    check_prob("eta", spec.eta);
    check_prob("delta", spec.delta);
}

inline std::int64_t ceil_to_count(double v) {
    double c = std::ceil(v);
    if (!(c >= 1.0) || c > 9.0e15) throw std::runtime_error("sample bound out of range");
    return static_cast<std::int64_t>(c);
}

inline PlanResult finish_plan(const RiskSpec& spec, std::int64_t m, double raw, Bound name,
                              std::optional<double> a) {
    std::int64_t n = ceil_to_count(raw);
    if (n <= m) n = m + 1;  // cannot happen for valid bounds; belt for m=0, raw<1
    double cert = binom_tail({n, spec.eta, m}).value;
    return {n, name, a, cert, raw};
}

// (a/(a-1)) (ln(1/delta) + m ln a); the eta-free part of the Lemma-2 bound.
inline double lemma2_factor(double log_inv_delta, std::int64_t m, double a) {
    return (a / (a - 1.0)) * (log_inv_delta + static_cast<double>(m) * std::log(a));
}

inline double suboptimal_a_value(double log_inv_delta, std::int64_t m) {
    double r = log_inv_delta / static_cast<double>(m);
    return 1.0 + r + std::sqrt(2.0 * r);
}

} // namespace detail

// N = ceil( (1/eta) (a/(a-1)) (ln(1/delta) + m ln a) ), a > 1.
inline PlanResult plan_lemma2(const RiskSpec& spec, std::int64_t m, double a) {
    detail::check_risk(spec);
    if (m < 0) throw std::domain_error("m must be non-negative");
    if (!(a > 1.0)) throw std::domain_error("plan_lemma2 requires a > 1");
    double raw = detail::lemma2_factor(std::log(1.0 / spec.delta), m, a) / spec.eta;
    return detail::finish_plan(spec, m, raw, Bound::lemma2_fixed_a, a);
}

// Lemma-2 bound with a fixed to the Euler constant.
inline PlanResult plan_euler(const RiskSpec& spec, std::int64_t m) {
    PlanResult r = plan_lemma2(spec, m, std::exp(1.0));
    r.bound_name = Bound::euler;
    return r;
}

// a = 1 + ln(1/delta)/m + sqrt(2 ln(1/delta)/m); close to the optimum for
// most parameter ranges. The formula divides by m, so m = 0 falls back to
// a = e (the Euler bound is the stated default in that regime).
inline PlanResult plan_suboptimal_a(const RiskSpec& spec, std::int64_t m) {
    detail::check_risk(spec);
    if (m < 0) throw std::domain_error("m must be non-negative");
    double a = (m > 0) ? detail::suboptimal_a_value(std::log(1.0 / spec.delta), m)
                       : std::exp(1.0);
    PlanResult r = plan_lemma2(spec, m, a);
    r.bound_name = Bound::suboptimal_a;
    return r;
}

// Minimizes f(a) = (a/(a-1))(ln(1/delta) + m ln a) over a > 1 by
// golden-section search (f is eta-free, so the minimizer a* is too).
// For m = 0, f is strictly decreasing and the infimum is the a -> inf
// limit ln(1/delta), giving N = ceil(ln(1/delta)/eta).
inline PlanResult plan_optimal_a(const RiskSpec& spec, std::int64_t m) {
    detail::check_risk(spec);
    if (m < 0) throw std::domain_error("m must be non-negative");
    const double lid = std::log(1.0 / spec.delta);
    if (m == 0) {
        return detail::finish_plan(spec, 0, lid / spec.eta, Bound::optimal_a, std::nullopt);
    }
    auto f = [&](double a) { return detail::lemma2_factor(lid, m, a); };
    double lo = 1.0 + 1e-9;
    double hi = std::max(10.0, 10.0 * detail::suboptimal_a_value(lid, m));
    const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
    double x1 = hi - inv_phi * (hi - lo);
    double x2 = lo + inv_phi * (hi - lo);
    double f1 = f(x1), f2 = f(x2);
    while (hi - lo > 1e-6) {
        if (f1 < f2) {
            hi = x2; x2 = x1; f2 = f1;
            x1 = hi - inv_phi * (hi - lo); f1 = f(x1);
        } else {
            lo = x1; x1 = x2; f1 = f2;
            x2 = lo + inv_phi * (hi - lo); f2 = f(x2);
        }
    }
    double a_star = 0.5 * (lo + hi);
    PlanResult r = detail::finish_plan(spec, m, f(a_star) / spec.eta, Bound::optimal_a, a_star);
    return r;
}

// N = ceil( (1/eta) (m + ln(1/delta) + sqrt(2 m ln(1/delta))) ).
inline PlanResult plan_sqrt(const RiskSpec& spec, std::int64_t m) {
    detail::check_risk(spec);
    if (m < 0) throw std::domain_error("m must be non-negative");
    const double lid = std::log(1.0 / spec.delta);
    double raw = (static_cast<double>(m) + lid +
                  std::sqrt(2.0 * static_cast<double>(m) * lid)) / spec.eta;
    return detail::finish_plan(spec, m, raw, Bound::sqrt_bound, std::nullopt);
}

// Worst-case performance analysis: N = ceil( ln(1/delta) / ln(1/(1-eta)) ).
// This is the exact m = 0 inversion of (1-eta)^N <= delta.
inline PlanResult plan_worstcase(const RiskSpec& spec) {
    detail::check_risk(spec);
    double raw = std::log(1.0 / spec.delta) / (-std::log1p(-spec.eta));
    return detail::finish_plan(spec, 0, raw, Bound::exact_oracle, std::nullopt);
}

namespace detail {

inline PlanResult dispatch_bound(const RiskSpec& spec, std::int64_t m, Bound bound,
                                 std::optional<double> a) {
    switch (bound) {
        case Bound::lemma2_fixed_a:
            if (!a) throw std::invalid_argument("lemma2 bound requires an explicit a");
            return plan_lemma2(spec, m, *a);
        case Bound::euler: return plan_euler(spec, m);
        case Bound::suboptimal_a: return plan_suboptimal_a(spec, m);
        case Bound::optimal_a: return plan_optimal_a(spec, m);
        case Bound::sqrt_bound: return plan_sqrt(spec, m);
        case Bound::exact_oracle: {
            std::int64_t n = min_samples_exact(spec.eta, spec.delta, m);
            double cert = binom_tail({n, spec.eta, m}).value;
            return {n, Bound::exact_oracle, std::nullopt, cert, static_cast<double>(n)};
        }
    }
    throw std::invalid_argument("unknown bound");
}

} // namespace detail

// Finite design family of cardinality n_C: the union bound replaces delta by
// delta/n_C in the selected closed form.
inline PlanResult plan_finite(const RiskSpec& spec, std::int64_t m, std::int64_t n_c,
                              Bound bound, std::optional<double> a = std::nullopt) {
    detail::check_risk(spec);
    if (n_c < 1) throw std::domain_error("n_c must be >= 1");
    RiskSpec tight{spec.eta, spec.delta / static_cast<double>(n_c)};
    return detail::dispatch_bound(tight, m, bound, a);
}

// Scenario (robust convex) design with n_theta decision variables: the
// guarantee needs B(N, eta, n_theta - 1) <= delta.
inline PlanResult plan_scenario(const RiskSpec& spec, std::int64_t n_theta,
                                Bound bound, std::optional<double> a = std::nullopt) {
    detail::check_risk(spec);
    if (n_theta < 1) throw std::domain_error("n_theta must be >= 1");
    return detail::dispatch_bound(spec, n_theta - 1, bound, a);
}

// Closed-form majorant of partial sums: sum_{k=1}^{L} k^-s <= phi(s, ceil(log2 L)).
//   phi(s,t) = (1 - 2^{(1-s)(t+1)}) / (1 - 2^{1-s})   for s != 1,   t+1 otherwise.
// Written with expm1 so the two branches agree in the s -> 1 limit.
inline double phi(double s, std::int64_t t) {
    if (!(s > 0.0)) throw std::domain_error("phi requires s > 0");
    if (t < 0) throw std::domain_error("phi requires t >= 0");
    if (s == 1.0) return static_cast<double>(t + 1);
    const double c = (1.0 - s) * std::log(2.0);
    return std::expm1(c * static_cast<double>(t + 1)) / std::expm1(c);
}

namespace detail {

// Width of the integral bracket  [S_K + (K+1)^{1-a}/(a-1), S_K + K^{1-a}/(a-1)].
inline double zeta_bracket_width(double alpha, double k) {
    return (std::pow(k, 1.0 - alpha) - std::pow(k + 1.0, 1.0 - alpha)) / (alpha - 1.0);
}

inline double zeta_direct(double alpha) {
    double guess = std::ceil(std::pow(10.0, 9.0 / alpha));
    std::int64_t terms = std::max<std::int64_t>(4, static_cast<std::int64_t>(guess));
    while (detail::zeta_bracket_width(alpha, static_cast<double>(terms)) > 1e-9) terms *= 2;

    // Kahan-summed fixed-size blocks, combined in index order, so the result
    // is identical no matter how many worker threads run.
    const std::int64_t block = std::int64_t{1} << 22;
    const std::int64_t nblocks = (terms + block - 1) / block;
    std::vector<double> block_sums(static_cast<std::size_t>(nblocks), 0.0);
    auto sum_block = [&](std::int64_t bi) {
        const std::int64_t k0 = bi * block + 1;
        const std::int64_t k1 = std::min(terms, k0 + block - 1);
        double s = 0.0, comp = 0.0;
        for (std::int64_t k = k0; k <= k1; ++k) {
            double term = std::pow(static_cast<double>(k), -alpha);
            double y = term - comp;
            double t = s + y;
            comp = (t - s) - y;
            s = t;
        }
        block_sums[static_cast<std::size_t>(bi)] = s;
    };
    if (nblocks == 1) {
        sum_block(0);
    } else {
        unsigned hw = std::max(1u, std::thread::hardware_concurrency());
        unsigned nt = static_cast<unsigned>(std::min<std::int64_t>(hw, nblocks));
        std::vector<std::thread> workers;
        workers.reserve(nt);
        for (unsigned w = 0; w < nt; ++w) {
            workers.emplace_back([&, w] {
                for (std::int64_t bi = w; bi < nblocks; bi += nt) sum_block(bi);
            });
        }
        for (auto& th : workers) th.join();
    }
    double s = 0.0, comp = 0.0;
    for (double bs : block_sums) {
        double y = bs - comp;
        double t = s + y;
        comp = (t - s) - y;
        s = t;
    }
    double lower = s + std::pow(static_cast<double>(terms) + 1.0, 1.0 - alpha) / (alpha - 1.0);
    double upper = s + std::pow(static_cast<double>(terms), 1.0 - alpha) / (alpha - 1.0);
    return 0.5 * (lower + upper);
}

} // namespace detail

// Riemann zeta for alpha > 1 by direct summation plus an integral tail
// bracket of width <= 1e-9; returns the bracket midpoint. Values are cached
// per alpha (the sum is long for alpha near 1).
inline double riemann_zeta(double alpha) {
    if (!(alpha > 1.0)) throw std::domain_error("riemann_zeta requires alpha > 1");
    static std::mutex mu;
    static std::map<double, double> cache;
    {
        std::lock_guard<std::mutex> lock(mu);
        auto it = cache.find(alpha);
        if (it != cache.end()) return it->second;
    }
    double v = detail::zeta_direct(alpha);
    std::lock_guard<std::mutex> lock(mu);
    cache.emplace(alpha, v);
    return v;
}

namespace detail {

inline std::int64_t ceil_log2(std::int64_t v) {
    std::int64_t t = 0;
    while ((std::int64_t{1} << t) < v) ++t;
    return t;
}

} // namespace detail

// Lower bound on the probability that a strict validation scheme (a = 0)
// finds no probabilistic solution within the first L iterations, when every
// candidate has violation probability at least mu:
//   1 - (delta/zeta(alpha))^{mu/eta} * phi(alpha mu/eta, ceil(log2 L)).
inline double strict_failure_bound(const RiskSpec& spec, double mu, double alpha,
                                   std::int64_t L) {
    detail::check_risk(spec);
    if (!(mu > 0.0)) throw std::domain_error("mu must be positive");
    if (!(alpha > 1.0)) throw std::domain_error("alpha must exceed 1");
    if (L < 1) throw std::domain_error("L must be >= 1");
    const double z = riemann_zeta(alpha);
    const double expo = mu / spec.eta;
    return 1.0 - std::pow(spec.delta / z, expo) * phi(alpha * expo, detail::ceil_log2(L));
}

} // namespace spval
