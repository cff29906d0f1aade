#pragma once

#include <cmath>
#include <concepts>
#include <cstdint>
#include <limits>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "spval/complexity.hpp"
#include "spval/rng.hpp"

namespace spval {

// Sequential probabilistic validation: generate a candidate, validate it on
// a fresh i.i.d. batch whose size grows with the iteration index, accept when
// the violation count stays within the level function. The level/failure/
// cardinality triple below guarantees that, with probability > 1-delta,
// every accepted candidate has violation probability <= eta.

struct SpvSchedule {
    double level_slope;      // a >= 0, level function m_k = floor(a k)
    double failure_exponent; // alpha > 1, failure function 1/(zeta(alpha) k^alpha)
    double zeta_alpha;       // cached zeta(alpha)

    static SpvSchedule make(double a, double alpha) {
        if (!(a >= 0.0)) throw std::domain_error("level slope must be >= 0");
        if (!(alpha > 1.0)) throw std::domain_error("failure exponent must exceed 1");
        return {a, alpha, riemann_zeta(alpha)};
    }
};

inline std::int64_t level_linear(double a, std::int64_t k) {
    if (!(a >= 0.0)) throw std::domain_error("level slope must be >= 0");
    if (k < 1) throw std::domain_error("iteration index must be >= 1");
    return static_cast<std::int64_t>(std::floor(a * static_cast<double>(k)));
}

// Per-iteration confidence budget mu(k) = 1/(zeta(alpha) k^alpha); sums to 1.
inline double failure_zeta(const SpvSchedule& schedule, std::int64_t k) {
    if (k < 1) throw std::domain_error("iteration index must be >= 1");
    return 1.0 / (schedule.zeta_alpha * std::pow(static_cast<double>(k),
                                                 schedule.failure_exponent));
}

// Validation-set size
//   M_k = ceil( (1/eta)(m_k + ln(zeta(alpha) k^alpha / delta)
//                + sqrt(2 m_k ln(zeta(alpha) k^alpha / delta))) ),
// which makes the per-iteration misclassification budget delta*mu(k).
inline std::int64_t cardinality(const SpvSchedule& schedule, const RiskSpec& risk,
                                std::int64_t k) {
    detail::check_risk(risk);
    if (k < 1) throw std::domain_error("iteration index must be >= 1");
    const std::int64_t mk = level_linear(schedule.level_slope, k);
    const double log_term =
        std::log(schedule.zeta_alpha) +
        schedule.failure_exponent * std::log(static_cast<double>(k)) -
        std::log(risk.delta);
    const double raw = (static_cast<double>(mk) + log_term +
                        std::sqrt(2.0 * static_cast<double>(mk) * log_term)) / risk.eta;
    std::int64_t big = detail::ceil_to_count(raw);
    if (big <= mk) throw std::logic_error("cardinality must exceed the level");
    return big;
}

struct ScheduleRow {
    std::int64_t k;
    std::int64_t allowed;      // m_k
    std::int64_t cardinality;  // M_k
    double ratio;              // M_k / m_k; +inf while m_k = 0
};

// Ratio sequence M_k/m_k, which tends to 1/eta as k grows. Strict schedules
// (a = 0) have no finite ratio and are rejected.
inline std::vector<ScheduleRow> schedule_diagnostics(const SpvSchedule& schedule,
                                                     const RiskSpec& risk,
                                                     std::int64_t k_max,
                                                     std::int64_t stride = 1) {
    if (!(schedule.level_slope > 0.0))
        throw std::domain_error("ratio diagnostics need a > 0 (strict scheme has none)");
    if (k_max < 1) throw std::domain_error("k_max must be >= 1");
    if (stride < 1) throw std::domain_error("stride must be >= 1");
    std::vector<ScheduleRow> rows;
    rows.reserve(static_cast<std::size_t>(k_max / stride + 1));
    for (std::int64_t k = 1; k <= k_max; k += stride) {
        std::int64_t mk = level_linear(schedule.level_slope, k);
        std::int64_t Mk = cardinality(schedule, risk, k);
        double ratio = mk > 0 ? static_cast<double>(Mk) / static_cast<double>(mk)
                              : std::numeric_limits<double>::infinity();
        rows.push_back({k, mk, Mk, ratio});
    }
    return rows;
}

struct SpvConfig {
    RiskSpec risk;
    SpvSchedule schedule;
    std::int64_t max_iterations = 1;
    std::int64_t stop_after_accepted = 1;
    std::uint64_t seed = 0;
    // samples drawn into the generator pool before iteration 1
    std::int64_t initial_pool = 0;
    // recycle each validation batch into the generator pool for the NEXT
    // iteration (validation batches themselves are always fresh)
    bool pool_validation_samples = true;

    void validate() const {
        detail::check_risk(risk);
        if (max_iterations < 1) throw std::domain_error("max_iterations must be >= 1");
        if (stop_after_accepted < 1)
            throw std::domain_error("stop_after_accepted must be >= 1");
        if (initial_pool < 0) throw std::domain_error("initial_pool must be >= 0");
        if (!(schedule.level_slope >= 0.0) || !(schedule.failure_exponent > 1.0))
            throw std::domain_error("invalid schedule");
    }
};

struct SpvIteration {
    std::int64_t k;
    std::int64_t allowed;       // m_k
    std::int64_t cardinality;   // M_k
    std::int64_t violations;    // counting stops once the verdict is decided
    bool accepted;
    std::string candidate_id;
};

template <class Candidate>
struct SpvTrace {
    std::vector<SpvIteration> iterations;
    std::vector<std::pair<std::int64_t, Candidate>> accepted;  // (k, candidate)
    std::int64_t samples_consumed = 0;  // validation draws + generator pool draws
    std::int64_t generator_samples = 0;
    std::int64_t accepted_count = 0;
    std::int64_t iterations_run = 0;
    bool aborted = false;
    std::int64_t aborted_at = 0;
    std::string abort_reason;
};

// A validation problem supplies i.i.d. uncertainty draws, a binary constraint
// check (true = violated), and a candidate generator that may use the
// accumulated sample pool plus its own randomness stream.
template <class P>
concept ValidationProblem = requires(P& p, RngStream& rng, std::int64_t k,
                                     const std::vector<typename P::sample_type>& pool,
                                     const typename P::candidate_type& c,
                                     const typename P::sample_type& w) {
    typename P::candidate_type;
    typename P::sample_type;
    { p.sample(rng) } -> std::same_as<typename P::sample_type>;
    { p.violates(c, w) } -> std::same_as<bool>;
    { p.generate(k, pool, rng) } -> std::same_as<typename P::candidate_type>;
};

// Runs the SPV loop. Two sub-streams are derived from the seed with fixed
// tags (generator = 1, validation = 2), so traces replay bit-for-bit for a
// given config regardless of what the problem does with its stream.
template <ValidationProblem Problem>
SpvTrace<typename Problem::candidate_type> run_spv(Problem& problem,
                                                   const SpvConfig& config) {
    using Candidate = typename Problem::candidate_type;
    using Sample = typename Problem::sample_type;
    config.validate();

    RngStream generator_rng = RngStream::derive(config.seed, 1);
    RngStream validation_rng = RngStream::derive(config.seed, 2);

    SpvTrace<Candidate> trace;
    std::vector<Sample> pool;
    pool.reserve(static_cast<std::size_t>(config.initial_pool));
    for (std::int64_t i = 0; i < config.initial_pool; ++i)
        pool.push_back(problem.sample(generator_rng));
    trace.generator_samples = config.initial_pool;
    trace.samples_consumed = config.initial_pool;

    for (std::int64_t k = 1; k <= config.max_iterations; ++k) {
        std::optional<Candidate> candidate;
        try {
            candidate.emplace(problem.generate(k, pool, generator_rng));
        } catch (const std::exception& e) {
            trace.aborted = true;
            trace.aborted_at = k;
            trace.abort_reason = e.what();
            break;
        }

        const std::int64_t mk = level_linear(config.schedule.level_slope, k);
        const std::int64_t Mk = cardinality(config.schedule, config.risk, k);

        // the whole batch is drawn up front: the stream position (and the
        // pool, when recycling) must not depend on where counting stops
        std::vector<Sample> batch;
        batch.reserve(static_cast<std::size_t>(Mk));
        for (std::int64_t i = 0; i < Mk; ++i)
            batch.push_back(problem.sample(validation_rng));
        trace.samples_consumed += Mk;

        std::int64_t violations = 0;
        for (const Sample& w : batch) {
            if (problem.violates(*candidate, w)) {
                if (++violations > mk) break;  // verdict decided
            }
        }
        const bool ok = violations <= mk;

        trace.iterations.push_back({k, mk, Mk, violations, ok, "k" + std::to_string(k)});
        trace.iterations_run = k;
        if (ok) {
            trace.accepted.emplace_back(k, *candidate);
            ++trace.accepted_count;
            if (trace.accepted_count >= config.stop_after_accepted) break;
        }
        if (config.pool_validation_samples) {
            pool.insert(pool.end(), batch.begin(), batch.end());
        }
    }
    return trace;
}

} // namespace spval
