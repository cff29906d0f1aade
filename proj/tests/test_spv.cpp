#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <set>
#include <vector>

#include "spval/binomial.hpp"
#include "spval/spv.hpp"

using namespace spval;

namespace {

const RiskSpec kRisk{0.01, 1e-6};

// g == 0: every candidate passes every check.
struct AlwaysFeasible {
    using candidate_type = int;
    using sample_type = double;
    double sample(RngStream& rng) { return rng.next_double(); }
    bool violates(const int&, const double&) const { return false; }
    int generate(std::int64_t k, const std::vector<double>&, RngStream&) {
        return static_cast<int>(k);
    }
};

// g == 1: nothing is ever accepted.
struct NeverFeasible {
    using candidate_type = int;
    using sample_type = double;
    double sample(RngStream& rng) { return rng.next_double(); }
    bool violates(const int&, const double&) const { return true; }
    int generate(std::int64_t k, const std::vector<double>&, RngStream&) {
        return static_cast<int>(k);
    }
};

// every candidate has true violation probability exactly `p`
struct BernoulliViolation {
    using candidate_type = int;
    using sample_type = double;
    double p;
    double sample(RngStream& rng) { return rng.next_double(); }
    bool violates(const int&, const double& w) const { return w < p; }
    int generate(std::int64_t k, const std::vector<double>&, RngStream&) {
        return static_cast<int>(k);
    }
};

// generator that throws at a chosen iteration
struct FailingGenerator {
    using candidate_type = int;
    using sample_type = double;
    std::int64_t fail_at;
    double sample(RngStream& rng) { return rng.next_double(); }
    bool violates(const int&, const double&) const { return true; }
    int generate(std::int64_t k, const std::vector<double>&, RngStream&) {
        if (k == fail_at) throw std::runtime_error("candidate generation broke");
        return static_cast<int>(k);
    }
};

} // namespace

TEST_CASE("level function is floor(a k)") {
    CHECK(level_linear(0.0, 1) == 0);
    CHECK(level_linear(0.0, 1000) == 0);
    CHECK(level_linear(0.75, 1) == 0);
    CHECK(level_linear(0.75, 2) == 1);
    CHECK(level_linear(0.75, 4) == 3);
    CHECK(level_linear(1.5, 3) == 4);
    CHECK_THROWS_AS(level_linear(-0.1, 1), std::domain_error);
    CHECK_THROWS_AS(level_linear(0.5, 0), std::domain_error);
}

TEST_CASE("failure function values and mass") {
    SpvSchedule s2 = SpvSchedule::make(0.75, 2.0);
    CHECK(failure_zeta(s2, 1) == doctest::Approx(0.60792710185402663).epsilon(1e-9));
    CHECK(failure_zeta(s2, 2) == doctest::Approx(0.15198177546350666).epsilon(1e-9));

    // partial sum plus a lower bound on the remaining mass stays <= 1
    for (double alpha : {1.5, 2.0, 3.0, 6.0}) {
        SpvSchedule s = SpvSchedule::make(0.0, alpha);
        double sum = 0.0;
        const std::int64_t K = 20000;
        for (std::int64_t k = 1; k <= K; ++k) sum += failure_zeta(s, k);
        double tail_lower = std::pow(static_cast<double>(K) + 1.0, 1.0 - alpha) /
                            (alpha - 1.0) / s.zeta_alpha;
        CHECK(sum + tail_lower <= 1.0 + 1e-9);
        CHECK(sum > 0.9);  // most of the unit mass is in the partial sum
        CHECK(failure_zeta(s, 1) > 0.0);
        CHECK(failure_zeta(s, 1) < 1.0);
    }
}

TEST_CASE("cardinality reproduces the schedule") {
    SpvSchedule sched = SpvSchedule::make(0.75, 2.0);
    CHECK(cardinality(sched, kRisk, 1) == 1432);
    CHECK(cardinality(sched, kRisk, 2) == 2231);

    SpvSchedule strict = SpvSchedule::make(0.0, 2.0);
    CHECK(cardinality(strict, kRisk, 1) == 1432);
    // strict scheme reduces to ceil((1/eta) ln(zeta(alpha) k^alpha / delta))
    for (std::int64_t k : {1, 2, 5, 17, 100, 4000}) {
        double expect = std::ceil(
            std::log(strict.zeta_alpha * std::pow(double(k), 2.0) / kRisk.delta) / kRisk.eta);
        CHECK(cardinality(strict, kRisk, k) == static_cast<std::int64_t>(expect));
    }
}

TEST_CASE("per-iteration certificate B(M_k, eta, m_k) <= delta mu(k)") {
    SpvSchedule sched = SpvSchedule::make(0.75, 2.0);
    std::vector<std::int64_t> ks;
    for (std::int64_t k = 1; k <= 64; ++k) ks.push_back(k);
    for (std::int64_t k = 128; k <= 10000; k *= 2) ks.push_back(k);
    ks.push_back(10000);
    for (std::int64_t k : ks) {
        std::int64_t mk = level_linear(sched.level_slope, k);
        std::int64_t Mk = cardinality(sched, kRisk, k);
        CAPTURE(k);
        CHECK(mk < Mk);
        CHECK(binom_tail({Mk, kRisk.eta, mk}).value <= kRisk.delta * failure_zeta(sched, k));
    }
}

TEST_CASE("always-feasible problem accepts at k=1") {
    AlwaysFeasible p;
    SpvConfig cfg{kRisk, SpvSchedule::make(0.75, 2.0), 10, 1, 42, 500, true};
    auto trace = run_spv(p, cfg);
    REQUIRE(trace.iterations.size() == 1);
    CHECK(trace.iterations[0].accepted);
    CHECK(trace.iterations[0].violations == 0);
    CHECK(trace.accepted_count == 1);
    CHECK(trace.samples_consumed == 500 + 1432);
    CHECK(trace.generator_samples == 500);
    CHECK_FALSE(trace.aborted);
}

TEST_CASE("never-feasible problem runs out the iteration budget") {
    NeverFeasible p;
    SpvConfig cfg{kRisk, SpvSchedule::make(0.75, 2.0), 4, 1, 42, 0, true};
    auto trace = run_spv(p, cfg);
    CHECK(trace.iterations_run == 4);
    CHECK(trace.accepted_count == 0);
    std::int64_t expected = 0;
    for (std::int64_t k = 1; k <= 4; ++k)
        expected += cardinality(cfg.schedule, kRisk, k);
    CHECK(trace.samples_consumed == expected);
    // short-circuit counting stops right after the verdict is decided
    for (const auto& it : trace.iterations) CHECK(it.violations == it.allowed + 1);
}

TEST_CASE("generator failure marks the trace aborted") {
    FailingGenerator p{2};
    SpvConfig cfg{{0.2, 0.05}, SpvSchedule::make(0.75, 2.0), 10, 1, 7, 0, true};
    auto trace = run_spv(p, cfg);
    CHECK(trace.aborted);
    CHECK(trace.aborted_at == 2);
    CHECK(trace.iterations_run == 1);
    CHECK(trace.abort_reason == "candidate generation broke");
}

TEST_CASE("traces replay bit-for-bit from the seed") {
    // p == eta keeps each iteration near the accept/reject boundary, so the
    // accept pattern is seed-sensitive
    BernoulliViolation p{0.2};
    SpvConfig cfg{{0.2, 0.1}, SpvSchedule::make(1.0, 2.0), 12, 100, 20240617, 50, true};
    auto a = run_spv(p, cfg);
    BernoulliViolation q{0.2};
    auto b = run_spv(q, cfg);
    REQUIRE(a.iterations.size() == b.iterations.size());
    for (std::size_t i = 0; i < a.iterations.size(); ++i) {
        CHECK(a.iterations[i].k == b.iterations[i].k);
        CHECK(a.iterations[i].allowed == b.iterations[i].allowed);
        CHECK(a.iterations[i].cardinality == b.iterations[i].cardinality);
        CHECK(a.iterations[i].violations == b.iterations[i].violations);
        CHECK(a.iterations[i].accepted == b.iterations[i].accepted);
    }
    CHECK(a.samples_consumed == b.samples_consumed);
    CHECK(a.accepted_count == b.accepted_count);

    // different seeds realize different violation sequences; p sits below
    // the m_k/M_k acceptance ratio so individual verdicts are stochastic
    BernoulliViolation near{0.02};
    std::set<std::vector<std::int64_t>> distinct;
    for (std::uint64_t seed : {1u, 2u, 3u, 4u, 5u}) {
        SpvConfig c{{0.2, 0.1}, SpvSchedule::make(1.0, 2.0), 12, 100, seed, 0, false};
        auto tr = run_spv(near, c);
        std::vector<std::int64_t> sig;
        for (const auto& it : tr.iterations) sig.push_back(it.violations);
        distinct.insert(sig);
    }
    CHECK(distinct.size() >= 2);
}

TEST_CASE("pooling recycles validation batches for the generator only") {
    struct PoolWatcher {
        using candidate_type = int;
        using sample_type = double;
        std::vector<std::size_t> pool_sizes;
        double sample(RngStream& rng) { return rng.next_double(); }
        bool violates(const int&, const double&) const { return true; }
        int generate(std::int64_t k, const std::vector<double>& pool, RngStream&) {
            pool_sizes.push_back(pool.size());
            return static_cast<int>(k);
        }
    };
    RiskSpec risk{0.2, 0.1};
    SpvSchedule sched = SpvSchedule::make(0.0, 2.0);
    {
        PoolWatcher p;
        SpvConfig cfg{risk, sched, 3, 1, 3, 10, true};
        run_spv(p, cfg);
        REQUIRE(p.pool_sizes.size() == 3);
        CHECK(p.pool_sizes[0] == 10);
        CHECK(p.pool_sizes[1] == 10 + static_cast<std::size_t>(cardinality(sched, risk, 1)));
        CHECK(p.pool_sizes[2] == p.pool_sizes[1] +
              static_cast<std::size_t>(cardinality(sched, risk, 2)));
    }
    {
        PoolWatcher p;
        SpvConfig cfg{risk, sched, 3, 1, 3, 10, false};
        run_spv(p, cfg);
        REQUIRE(p.pool_sizes.size() == 3);
        CHECK(p.pool_sizes[1] == 10);
        CHECK(p.pool_sizes[2] == 10);
    }
}

TEST_CASE("misclassification rate stays within the confidence budget") {
    // every candidate violates with probability 2*eta; accepting any of them
    // is a misclassification, which has probability < delta per run
    const RiskSpec risk{0.1, 0.05};
    const SpvSchedule sched = SpvSchedule::make(0.75, 2.0);
    const int runs = 1000;
    int false_accepts = 0;
    for (int r = 0; r < runs; ++r) {
        BernoulliViolation p{2.0 * risk.eta};
        SpvConfig cfg{risk, sched, 25, 1, static_cast<std::uint64_t>(1000 + r), 0, false};
        auto trace = run_spv(p, cfg);
        if (trace.accepted_count > 0) ++false_accepts;
    }
    double rate = static_cast<double>(false_accepts) / runs;
    CHECK(rate <= 0.05 + 3.0 * std::sqrt(0.05 * 0.95 / runs));
}

TEST_CASE("schedule diagnostics approach 1/eta") {
    SpvSchedule sched = SpvSchedule::make(0.75, 2.0);
    auto rows4 = schedule_diagnostics(sched, kRisk, 10000, 10000 - 1);
    CHECK(rows4.back().k == 10000);
    CHECK(rows4.back().ratio == doctest::Approx(109.7794666666667).epsilon(1e-10));

    auto one = schedule_diagnostics(sched, kRisk, 1);
    CHECK(one.size() == 1);
    CHECK(std::isinf(one[0].ratio));  // m_1 = 0 for a = 0.75

    // ratio at k = 1e6 sits within 1.1% of 1/eta and the tail is decreasing
    std::int64_t k6 = 1000000;
    std::int64_t mk = level_linear(0.75, k6);
    std::int64_t Mk = cardinality(sched, kRisk, k6);
    double ratio6 = static_cast<double>(Mk) / static_cast<double>(mk);
    CHECK(ratio6 == doctest::Approx(101.06319066666667).epsilon(1e-10));
    CHECK(ratio6 < 1.02 / kRisk.eta);

    auto tail = schedule_diagnostics(sched, kRisk, k6, 100000 - 1);
    for (std::size_t i = 2; i + 1 < tail.size(); ++i)
        CHECK(tail[i + 1].ratio < tail[i].ratio);

    CHECK_THROWS_AS(schedule_diagnostics(SpvSchedule::make(0.0, 2.0), kRisk, 10),
                    std::domain_error);
}

TEST_CASE("schedule construction rejects bad parameters") {
    CHECK_THROWS_AS(SpvSchedule::make(-1.0, 2.0), std::domain_error);
    CHECK_THROWS_AS(SpvSchedule::make(0.5, 1.0), std::domain_error);
    SpvSchedule s = SpvSchedule::make(0.5, 2.0);
    CHECK(std::fabs(s.zeta_alpha - riemann_zeta(2.0)) <= 1e-9);
}
