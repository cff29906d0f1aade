#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

#include "spval/complexity.hpp"
#include "spval/lp.hpp"
#include "spval/rng.hpp"
#include "spval/spv.hpp"

namespace spval {

// Case study: probabilistic upper/lower envelopes for an uncertain time
// function y(w). The uncertainty w = (t, A, B) is uniform on
// [0,1] x [1,3] x [1,3]; an envelope of order d is a pair (gamma, lambda)
// with center gamma'phi_d(t) and width lambda'|phi_d(t)|, fitted so that
// |y - gamma'phi| <= lambda'|phi| holds with probabilistic guarantees.

struct UncertaintySample {
    double t;
    double A;
    double B;
};

inline double truth_y(const UncertaintySample& w) {
    return (w.A * (1.0 + 0.5 * w.t * w.t) * std::sin(7.0 * w.t + 0.5) + w.B) *
           std::exp(-1.5 * w.t);
}

// (1, t, t^2, ..., t^d)
inline std::vector<double> regressor(int degree, const UncertaintySample& w) {
    if (degree < 0) throw std::domain_error("degree must be >= 0");
    std::vector<double> phi(static_cast<std::size_t>(degree) + 1);
    double p = 1.0;
    for (int i = 0; i <= degree; ++i) {
        phi[static_cast<std::size_t>(i)] = p;
        p *= w.t;
    }
    return phi;
}

// Draw order per sample: t, A, B.
inline UncertaintySample sample_uncertainty_one(RngStream& stream) {
    UncertaintySample w;
    w.t = stream.uniform(0.0, 1.0);
    w.A = stream.uniform(1.0, 3.0);
    w.B = stream.uniform(1.0, 3.0);
    return w;
}

inline std::vector<UncertaintySample> sample_uncertainty(RngStream& stream, std::int64_t n) {
    if (n < 1) throw std::domain_error("sample count must be >= 1");
    std::vector<UncertaintySample> out;
    out.reserve(static_cast<std::size_t>(n));
    for (std::int64_t i = 0; i < n; ++i) out.push_back(sample_uncertainty_one(stream));
    return out;
}

struct EnvelopeModel {
    int degree = 0;
    std::vector<double> gamma;   // center coefficients, size degree+1
    std::vector<double> lambda;  // width coefficients, size degree+1
};

// 0 iff |y(w) - gamma'phi(w)| <= lambda'|phi(w)| (boundary counts as
// satisfied). The absolute value on phi is applied entry-wise even though
// t >= 0 makes it a no-op for this box.
inline int violation_indicator(const EnvelopeModel& model, const UncertaintySample& w) {
    double center = 0.0, width = 0.0;
    double p = 1.0;
    for (int i = 0; i <= model.degree; ++i) {
        center += model.gamma[static_cast<std::size_t>(i)] * p;
        width += model.lambda[static_cast<std::size_t>(i)] * std::fabs(p);
        p *= w.t;
    }
    return std::fabs(truth_y(w) - center) > width ? 1 : 0;
}

namespace detail {

// Shared LP builder for all fitting problems:
//   minimize  weights'lambda
//   s.t.      gamma'phi(w) - lambda'|phi(w)| <= y(w)
//            -gamma'phi(w) - lambda'|phi(w)| <= -y(w)    for every sample.
// Variables are [gamma, lambda], all free; the shape is exactly the
// dual-path sweet spot of the solver once the sample count is large.
inline EnvelopeModel fit_envelope_weighted(const std::vector<UncertaintySample>& samples,
                                           int degree, const std::vector<double>& weights,
                                           double* lp_objective = nullptr) {
    if (samples.empty()) throw std::invalid_argument("fit needs at least one sample");
    if (degree < 0) throw std::domain_error("degree must be >= 0");
    const std::size_t dim = static_cast<std::size_t>(degree) + 1;
    if (weights.size() != dim) throw std::invalid_argument("weight size mismatch");

    LinearProgram lp(2 * dim);
    for (std::size_t i = 0; i < dim; ++i) lp.objective[dim + i] = weights[i];
    for (const UncertaintySample& w : samples) {
        std::vector<double> phi = regressor(degree, w);
        const double yv = truth_y(w);
        std::vector<double> up(2 * dim), dn(2 * dim);
        for (std::size_t i = 0; i < dim; ++i) {
            up[i] = phi[i];
            dn[i] = -phi[i];
            up[dim + i] = -std::fabs(phi[i]);
            dn[dim + i] = -std::fabs(phi[i]);
        }
        lp.add_row(std::move(up), RowSense::le, yv);
        lp.add_row(std::move(dn), RowSense::le, -yv);
    }

    LpSolution sol = solve_lp(lp);
    if (sol.status != LpStatus::optimal) {
        throw std::runtime_error("envelope fit LP did not solve (status " +
                                 std::to_string(static_cast<int>(sol.status)) + ")");
    }
    if (lp_objective) *lp_objective = sol.objective;

    EnvelopeModel model;
    model.degree = degree;
    model.gamma.assign(sol.x.begin(), sol.x.begin() + static_cast<std::ptrdiff_t>(dim));
    model.lambda.assign(sol.x.begin() + static_cast<std::ptrdiff_t>(dim), sol.x.end());

    // The LP guarantees feasibility only to the solver tolerance; active
    // constraints can sit an ulp on the wrong side of the exact indicator.
    // A hair of extra width on the constant term makes the model feasible
    // on its own design samples under exact comparison.
    for (int pass = 0; pass < 8; ++pass) {
        double worst = 0.0;
        for (const UncertaintySample& w : samples) {
            double center = 0.0, width = 0.0, p = 1.0;
            for (std::size_t i = 0; i < dim; ++i) {
                center += model.gamma[i] * p;
                width += model.lambda[i] * std::fabs(p);
                p *= w.t;
            }
            worst = std::max(worst, std::fabs(truth_y(w) - center) - width);
        }
        if (worst <= 0.0) return model;
        if (worst > 1e-5)
            throw std::runtime_error("envelope fit violates its own samples by " +
                                     std::to_string(worst));
        model.lambda[0] += worst + 1e-12 * (1.0 + std::fabs(model.lambda[0]));
    }
    throw std::runtime_error("envelope fit feasibility restoration did not converge");
}

inline std::vector<double> abs_regressor_means(const std::vector<UncertaintySample>& samples,
                                               int degree) {
    const std::size_t dim = static_cast<std::size_t>(degree) + 1;
    std::vector<double> mean(dim, 0.0);
    for (const UncertaintySample& w : samples) {
        double p = 1.0;
        for (std::size_t i = 0; i < dim; ++i) {
            mean[i] += std::fabs(p);
            p *= w.t;
        }
    }
    for (double& v : mean) v /= static_cast<double>(samples.size());
    return mean;
}

} // namespace detail

// Least empirical mean width: minimize (1/M) sum_w lambda'|phi(w)| subject to
// the envelope constraints on every sample.
inline EnvelopeModel fit_envelope(const std::vector<UncertaintySample>& samples, int degree,
                                  double* lp_objective = nullptr) {
    return detail::fit_envelope_weighted(
        samples, degree, detail::abs_regressor_means(samples, degree), lp_objective);
}

// Exact moments E{|phi_d(t)|}_i = 1/(i+1) for t uniform on [0,1].
inline std::vector<double> exact_abs_moments(int degree) {
    if (degree < 0) throw std::domain_error("degree must be >= 0");
    std::vector<double> m(static_cast<std::size_t>(degree) + 1);
    for (std::size_t i = 0; i < m.size(); ++i) m[i] = 1.0 / static_cast<double>(i + 1);
    return m;
}

// Fraction of n_v fresh samples violating the envelope. Samples are drawn in
// fixed 65536-sample chunks from sub-streams derived off one master value, so
// the count does not depend on how chunks might be distributed over workers.
inline double empirical_violation(const EnvelopeModel& model, std::int64_t n_v,
                                  RngStream& stream) {
    if (n_v < 1) throw std::domain_error("n_v must be >= 1");
    const std::int64_t chunk = 65536;
    const std::uint64_t master = stream.next_u64();
    std::int64_t violations = 0;
    std::int64_t done = 0;
    for (std::uint64_t ci = 0; done < n_v; ++ci) {
        const std::int64_t take = std::min(chunk, n_v - done);
        RngStream sub = RngStream::derive(master, ci);
        for (std::int64_t i = 0; i < take; ++i)
            violations += violation_indicator(model, sample_uncertainty_one(sub));
        done += take;
    }
    return static_cast<double>(violations) / static_cast<double>(n_v);
}

enum class Approach { finite, scenario, spv };

inline const char* to_string(Approach a) {
    switch (a) {
        case Approach::finite: return "finite";
        case Approach::scenario: return "scenario";
        case Approach::spv: return "spv";
    }
    return "?";
}

struct DemoReport {
    Approach approach = Approach::finite;
    double eta = 0.0;
    double delta = 0.0;
    std::int64_t planned_samples = 0;  // per-stage plan; realized total for SPV
    std::int64_t total_samples = 0;    // design-phase consumption
    EnvelopeModel model;
    int selected_degree = -1;       // finite family only
    int selected_scale_index = -1;  // finite family only
    double performance_index = std::numeric_limits<double>::quiet_NaN();
    double fit_objective = std::numeric_limits<double>::quiet_NaN();
    double empirical_violation_rate = std::numeric_limits<double>::quiet_NaN();
    std::int64_t evaluation_samples = 0;
    std::uint64_t seed = 0;
    bool feasible = true;
};

struct FiniteFamilyOptions {
    int d_max = 20;
    int j_max = 20;
    Bound bound = Bound::sqrt_bound;
};

// Two-stage finite family: stage 1 draws N samples and fits one envelope per
// degree; stage 2 draws N fresh samples and picks, among the 400 rescaled
// candidates theta_{d,j} = (gamma_d, exp(-0.5 + j/20) lambda_d) that are
// feasible on every stage-2 sample, the one with the least empirical mean
// width. Ties go to the smallest d, then the smallest j.
inline DemoReport run_finite_family(const RiskSpec& risk, RngStream& stream,
                                    const FiniteFamilyOptions& opt = {}) {
    if (opt.d_max < 1 || opt.j_max < 1) throw std::domain_error("family must be non-empty");
    const std::int64_t n_c = static_cast<std::int64_t>(opt.d_max) * opt.j_max;
    PlanResult plan = plan_finite(risk, 0, n_c, opt.bound);
    const std::int64_t N = plan.samples;

    DemoReport report;
    report.approach = Approach::finite;
    report.eta = risk.eta;
    report.delta = risk.delta;
    report.planned_samples = N;
    report.total_samples = 2 * N;

    std::vector<UncertaintySample> train = sample_uncertainty(stream, N);
    std::vector<EnvelopeModel> base;
    base.reserve(static_cast<std::size_t>(opt.d_max));
    for (int d = 1; d <= opt.d_max; ++d) base.push_back(fit_envelope(train, d));

    std::vector<UncertaintySample> valid = sample_uncertainty(stream, N);

    double best_index = std::numeric_limits<double>::infinity();
    bool found = false;
    EnvelopeModel selected;
    for (int d = 1; d <= opt.d_max; ++d) {
        const EnvelopeModel& fit = base[static_cast<std::size_t>(d - 1)];
        for (int j = 1; j <= opt.j_max; ++j) {
            const double scale = std::exp(-0.5 + static_cast<double>(j) / 20.0);
            EnvelopeModel cand = fit;
            for (double& l : cand.lambda) l *= scale;

            bool feasible = true;
            double width_sum = 0.0;
            for (const UncertaintySample& w : valid) {
                if (violation_indicator(cand, w) != 0) { feasible = false; break; }
                double p = 1.0, width = 0.0;
                for (std::size_t i = 0; i < cand.lambda.size(); ++i) {
                    width += cand.lambda[i] * std::fabs(p);
                    p *= w.t;
                }
                width_sum += width;
            }
            if (!feasible) continue;
            double index = width_sum / static_cast<double>(N);
            if (index < best_index) {
                best_index = index;
                selected = cand;
                report.selected_degree = d;
                report.selected_scale_index = j;
                found = true;
            }
        }
    }

    if (!found) {
        report.feasible = false;  // prevented in practice by a large enough j_max
        return report;
    }
    report.model = selected;
    report.performance_index = best_index;
    report.evaluation_samples = 10 * N;
    report.empirical_violation_rate =
        empirical_violation(selected, report.evaluation_samples, stream);
    return report;
}

// Convex scenario approach at fixed degree: one LP over N sampled constraint
// pairs, objective = exact mean width lambda' E{|phi|}.
inline DemoReport run_scenario(const RiskSpec& risk, int degree, RngStream& stream,
                               Bound bound = Bound::euler) {
    if (degree < 0) throw std::domain_error("degree must be >= 0");
    const std::int64_t n_theta = 2 * (static_cast<std::int64_t>(degree) + 1);
    PlanResult plan = plan_scenario(risk, n_theta, bound);
    const std::int64_t N = plan.samples;

    DemoReport report;
    report.approach = Approach::scenario;
    report.eta = risk.eta;
    report.delta = risk.delta;
    report.planned_samples = N;
    report.total_samples = N;

    std::vector<UncertaintySample> samples = sample_uncertainty(stream, N);
    std::vector<double> moments = exact_abs_moments(degree);
    double lp_obj = 0.0;
    EnvelopeModel model = detail::fit_envelope_weighted(samples, degree, moments, &lp_obj);

    double perf = 0.0;
    for (std::size_t i = 0; i < moments.size(); ++i) perf += moments[i] * model.lambda[i];

    report.model = model;
    report.fit_objective = lp_obj;
    report.performance_index = perf;
    report.evaluation_samples = 10 * N;
    report.empirical_violation_rate =
        empirical_violation(model, report.evaluation_samples, stream);
    return report;
}

// SPV candidate generator for the envelope problem: refit on the accumulated
// pool each iteration (the pool absorbs past validation batches).
struct EnvelopeProblem {
    using candidate_type = EnvelopeModel;
    using sample_type = UncertaintySample;
    int degree;
    UncertaintySample sample(RngStream& rng) { return sample_uncertainty_one(rng); }
    bool violates(const EnvelopeModel& m, const UncertaintySample& w) const {
        return violation_indicator(m, w) != 0;
    }
    EnvelopeModel generate(std::int64_t, const std::vector<UncertaintySample>& pool,
                           RngStream&) {
        return fit_envelope(pool, degree);
    }
};

struct SpvDemoOptions {
    std::int64_t max_iterations = 64;
    std::int64_t stop_after_accepted = 1;
    bool pool_validation = true;
};

struct SpvDemoResult {
    DemoReport report;
    SpvTrace<EnvelopeModel> trace;
};

// SPV run wrapped around the sampled-LP generator. When several candidates
// are accepted the one with the best (lowest) exact mean width is reported.
// The engine seed is drawn from the stream, so the whole run replays from
// the caller's stream state.
inline SpvDemoResult run_spv_demo(const RiskSpec& risk, int degree,
                                  const SpvSchedule& schedule, std::int64_t initial_pool,
                                  RngStream& stream, const SpvDemoOptions& opt = {}) {
    if (degree < 0) throw std::domain_error("degree must be >= 0");
    EnvelopeProblem problem{degree};
    SpvConfig cfg{risk, schedule, opt.max_iterations, opt.stop_after_accepted,
                  stream.next_u64(), initial_pool, opt.pool_validation};
    SpvDemoResult result;
    result.trace = run_spv(problem, cfg);

    DemoReport& report = result.report;
    report.approach = Approach::spv;
    report.eta = risk.eta;
    report.delta = risk.delta;
    report.total_samples = result.trace.samples_consumed;
    report.planned_samples = result.trace.samples_consumed;

    if (result.trace.aborted) {
        throw std::runtime_error("SPV run aborted at iteration " +
                                 std::to_string(result.trace.aborted_at) + ": " +
                                 result.trace.abort_reason);
    }
    if (result.trace.accepted.empty()) {
        report.feasible = false;
        return result;
    }

    std::vector<double> moments = exact_abs_moments(degree);
    double best = std::numeric_limits<double>::infinity();
    for (const auto& [k, cand] : result.trace.accepted) {
        double perf = 0.0;
        for (std::size_t i = 0; i < moments.size(); ++i) perf += moments[i] * cand.lambda[i];
        if (perf < best) {
            best = perf;
            report.model = cand;
        }
    }
    report.performance_index = best;
    report.evaluation_samples = 10 * report.total_samples;
    report.empirical_violation_rate =
        empirical_violation(report.model, report.evaluation_samples, stream);
    return result;
}

} // namespace spval
