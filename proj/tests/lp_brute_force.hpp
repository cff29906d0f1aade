#pragma once

// Test-only brute-force LP oracle: enumerates candidate vertices as
// intersections of n constraint hyperplanes (rows plus finite bounds) and
// picks the feasible one with the best objective. Valid for bounded feasible
// regions, which the random instance generator guarantees with box bounds.
// Kept independent of the simplex implementation on purpose.

#include <cmath>
#include <functional>
#include <limits>
#include <optional>
#include <vector>

#include "spval/lp.hpp"

namespace lp_oracle {

struct Plane {
    std::vector<double> a;
    double b;
};

inline std::optional<std::vector<double>> solve_square(std::vector<std::vector<double>> m,
                                                       std::vector<double> rhs) {
    const std::size_t n = rhs.size();
    for (std::size_t k = 0; k < n; ++k) {
        std::size_t best = k;
        for (std::size_t i = k + 1; i < n; ++i)
            if (std::fabs(m[i][k]) > std::fabs(m[best][k])) best = i;
        if (std::fabs(m[best][k]) < 1e-9) return std::nullopt;
        std::swap(m[k], m[best]);
        std::swap(rhs[k], rhs[best]);
        for (std::size_t i = k + 1; i < n; ++i) {
            double f = m[i][k] / m[k][k];
            for (std::size_t j = k; j < n; ++j) m[i][j] -= f * m[k][j];
            rhs[i] -= f * rhs[k];
        }
    }
    std::vector<double> x(n);
    for (std::size_t ii = n; ii-- > 0;) {
        double v = rhs[ii];
        for (std::size_t j = ii + 1; j < n; ++j) v -= m[ii][j] * x[j];
        x[ii] = v / m[ii][ii];
    }
    return x;
}

struct OracleResult {
    bool feasible = false;
    double objective = std::numeric_limits<double>::infinity();
    std::vector<double> x;
};

inline OracleResult solve_by_vertex_enumeration(const spval::LinearProgram& lp) {
    const std::size_t n = lp.num_vars();
    const double inf = std::numeric_limits<double>::infinity();

    std::vector<Plane> planes;
    for (std::size_t i = 0; i < lp.num_rows(); ++i)
        planes.push_back({lp.rows[i], lp.rhs[i]});
    for (std::size_t j = 0; j < n; ++j) {
        if (lp.lower[j] > -inf) {
            std::vector<double> a(n, 0.0);
            a[j] = 1.0;
            planes.push_back({a, lp.lower[j]});
        }
        if (lp.upper[j] < inf) {
            std::vector<double> a(n, 0.0);
            a[j] = 1.0;
            planes.push_back({a, lp.upper[j]});
        }
    }

    auto feasible_point = [&](const std::vector<double>& x) {
        const double tol = 1e-7;
        for (std::size_t i = 0; i < lp.num_rows(); ++i) {
            double ax = 0.0;
            for (std::size_t j = 0; j < n; ++j) ax += lp.rows[i][j] * x[j];
            switch (lp.senses[i]) {
                case spval::RowSense::le: if (ax > lp.rhs[i] + tol) return false; break;
                case spval::RowSense::ge: if (ax < lp.rhs[i] - tol) return false; break;
                case spval::RowSense::eq: if (std::fabs(ax - lp.rhs[i]) > tol) return false; break;
            }
        }
        for (std::size_t j = 0; j < n; ++j) {
            if (x[j] < lp.lower[j] - 1e-7 || x[j] > lp.upper[j] + 1e-7) return false;
        }
        return true;
    };

    OracleResult out;
    const std::size_t p = planes.size();
    auto consider = [&](const std::vector<std::size_t>& sel) {
        std::vector<std::vector<double>> m;
        std::vector<double> rhs;
        for (std::size_t idx : sel) {
            m.push_back(planes[idx].a);
            rhs.push_back(planes[idx].b);
        }
        auto x = solve_square(std::move(m), std::move(rhs));
        if (!x || !feasible_point(*x)) return;
        double obj = 0.0;
        for (std::size_t j = 0; j < n; ++j) obj += lp.objective[j] * (*x)[j];
        if (!out.feasible || obj < out.objective) {
            out.feasible = true;
            out.objective = obj;
            out.x = *x;
        }
    };

    // all n-subsets of planes
    std::vector<std::size_t> stack;
    std::function<void(std::size_t, std::size_t)> rec = [&](std::size_t start, std::size_t depth) {
        if (depth == n) { consider(stack); return; }
        for (std::size_t i = start; i + (n - depth - 1) < p; ++i) {
            stack.push_back(i);
            rec(i + 1, depth + 1);
            stack.pop_back();
        }
    };
    if (n <= p) rec(0, 0);
    return out;
}

} // namespace lp_oracle
