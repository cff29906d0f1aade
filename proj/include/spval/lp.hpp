#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <limits>
#include <numeric>
#include <stdexcept>
#include <string>
#include <vector>

namespace spval {

// Self-contained dense linear programming:
//   minimize c'x  subject to  row-wise  a_i'x {<=,>=,==} b_i,  lo <= x <= up.
// Two-phase primal simplex on an explicit tableau. Entering column: most
// negative reduced cost (lowest index on ties); the rule switches to Bland's
// (lowest eligible index) after a stall, which makes cycling impossible.
// Leaving row: minimum ratio, ties broken by lowest basic variable index.
// When a problem has many more rows than columns, is all-inequality and
// all-free (the shape of sampled fitting problems), the dual is solved
// instead so the basis stays small; the primal solution is recovered from
// the dual multipliers.

enum class RowSense { le, ge, eq };
enum class LpStatus { optimal, infeasible, unbounded, solver_failure };
enum class LpPath { automatic, primal, dual };

inline constexpr double kLpFeasTol = 1e-7;    // feasibility, absolute + relative
inline constexpr double kLpPivotTol = 1e-11;  // smallest acceptable pivot magnitude
inline constexpr double kLpCostTol = 1e-9;    // reduced-cost optimality threshold

struct LinearProgram {
    std::vector<double> objective;
    std::vector<std::vector<double>> rows;
    std::vector<RowSense> senses;
    std::vector<double> rhs;
    std::vector<double> lower;
    std::vector<double> upper;

    explicit LinearProgram(std::size_t n_vars)
        : objective(n_vars, 0.0),
          lower(n_vars, -std::numeric_limits<double>::infinity()),
          upper(n_vars, std::numeric_limits<double>::infinity()) {}

    std::size_t num_vars() const { return objective.size(); }
    std::size_t num_rows() const { return rows.size(); }

    void add_row(std::vector<double> coeffs, RowSense sense, double b) {
        if (coeffs.size() != num_vars())
            throw std::invalid_argument("add_row: coefficient count != variable count");
        rows.push_back(std::move(coeffs));
        senses.push_back(sense);
        rhs.push_back(b);
    }

    void validate() const {
        const std::size_t n = num_vars();
        if (rows.size() != senses.size() || rows.size() != rhs.size())
            throw std::invalid_argument("row/sense/rhs sizes disagree");
        if (lower.size() != n || upper.size() != n)
            throw std::invalid_argument("bound vectors must match variable count");
        for (double c : objective)
            if (!std::isfinite(c)) throw std::invalid_argument("objective must be finite");
        for (const auto& row : rows) {
            if (row.size() != n) throw std::invalid_argument("row width != variable count");
            for (double a : row)
                if (!std::isfinite(a)) throw std::invalid_argument("NaN/inf in constraint row");
        }
        for (double b : rhs)
            if (!std::isfinite(b)) throw std::invalid_argument("NaN/inf in rhs");
        for (std::size_t j = 0; j < n; ++j) {
            if (std::isnan(lower[j]) || std::isnan(upper[j]))
                throw std::invalid_argument("NaN bound");
        }
    }
};

struct LpSolution {
    LpStatus status = LpStatus::solver_failure;
    std::vector<double> x;
    double objective = std::numeric_limits<double>::quiet_NaN();
    // Multipliers per constraint row: c'x* = b'y* + bound-multiplier terms;
    // y <= 0 on <=-rows and y >= 0 on >=-rows for minimization.
    std::vector<double> row_duals;
    double dual_objective = std::numeric_limits<double>::quiet_NaN();
    std::int64_t iterations = 0;
};

namespace detail {

// min c.z  s.t.  A z = b (b >= 0), z >= 0.  Slack columns are part of A;
// artificial columns are implicit (+e_row, appended by the solver).
struct StandardLp {
    std::size_t rows = 0, cols = 0;
    std::vector<double> a;  // row-major rows x cols
    std::vector<double> b;
    std::vector<double> c;
    std::vector<signed char> needs_artificial;  // per row
    std::vector<std::int32_t> logical_col;      // slack column of the row, or -1
    double at(std::size_t i, std::size_t j) const { return a[i * cols + j]; }
    double& at(std::size_t i, std::size_t j) { return a[i * cols + j]; }
};

struct StandardResult {
    LpStatus status = LpStatus::solver_failure;
    std::vector<double> z;     // primal values, length cols
    std::vector<double> y;     // row multipliers, length rows
    double objective = std::numeric_limits<double>::quiet_NaN();
    std::int64_t iterations = 0;
};

// Dense LU with partial pivoting; solves square systems for basis
// refactorization. Row order is deterministic.
class DenseLu {
public:
    explicit DenseLu(std::vector<double> m, std::size_t n) : lu_(std::move(m)), n_(n), perm_(n) {
        for (std::size_t i = 0; i < n_; ++i) perm_[i] = static_cast<int>(i);
        for (std::size_t k = 0; k < n_; ++k) {
            std::size_t best = k;
            double bv = std::fabs(lu_[perm_[k] * n_ + k]);
            for (std::size_t i = k + 1; i < n_; ++i) {
                double v = std::fabs(lu_[perm_[i] * n_ + k]);
                if (v > bv) { bv = v; best = i; }
            }
            if (bv < 1e-300) { singular_ = true; return; }
            std::swap(perm_[k], perm_[best]);
            const double pivot = lu_[perm_[k] * n_ + k];
            for (std::size_t i = k + 1; i < n_; ++i) {
                double f = lu_[perm_[i] * n_ + k] / pivot;
                lu_[perm_[i] * n_ + k] = f;
                for (std::size_t j = k + 1; j < n_; ++j)
                    lu_[perm_[i] * n_ + j] -= f * lu_[perm_[k] * n_ + j];
            }
        }
    }

    bool singular() const { return singular_; }

    std::vector<double> solve(const std::vector<double>& rhs) const {
        std::vector<double> x(n_);
        for (std::size_t i = 0; i < n_; ++i) x[i] = rhs[perm_[i]];
        for (std::size_t i = 1; i < n_; ++i)
            for (std::size_t j = 0; j < i; ++j) x[i] -= lu_[perm_[i] * n_ + j] * x[j];
        for (std::size_t ii = n_; ii-- > 0;) {
            for (std::size_t j = ii + 1; j < n_; ++j) x[ii] -= lu_[perm_[ii] * n_ + j] * x[j];
            x[ii] /= lu_[perm_[ii] * n_ + ii];
        }
        return x;
    }

private:
    std::vector<double> lu_;
    std::size_t n_;
    std::vector<int> perm_;
    bool singular_ = false;
};

inline constexpr std::size_t kRefactorLimit = 600;
inline constexpr std::int64_t kMaxPivots = 200000;

class SimplexSolver {
public:
    explicit SimplexSolver(const StandardLp& lp) : lp_(lp), rows_(lp.rows), cols_(lp.cols) {
        nart_ = 0;
        for (auto f : lp.needs_artificial) nart_ += (f != 0);
        width_ = cols_ + nart_ + 1;
        tab_.assign((rows_ + 2) * width_, 0.0);
        basis_.resize(rows_);
        active_.assign(rows_, true);
        art_col_of_row_.assign(rows_, -1);

        std::size_t next_art = cols_;
        for (std::size_t i = 0; i < rows_; ++i) {
            for (std::size_t j = 0; j < cols_; ++j) t(i, j) = lp.at(i, j);
            t(i, width_ - 1) = lp.b[i];
            if (lp.needs_artificial[i]) {
                t(i, next_art) = 1.0;
                art_col_of_row_[i] = static_cast<std::int32_t>(next_art);
                basis_[i] = next_art;
                ++next_art;
            } else {
                basis_[i] = static_cast<std::size_t>(lp.logical_col[i]);
            }
        }
        // phase-2 reduced costs (basis is all zero-cost at start)
        for (std::size_t j = 0; j < cols_; ++j) t(rows_, j) = lp.c[j];
        // phase-1 reduced costs: minimize the sum of artificials
        for (std::size_t i = 0; i < rows_; ++i) {
            if (!lp.needs_artificial[i]) continue;
            for (std::size_t j = 0; j < width_; ++j) t(rows_ + 1, j) -= t(i, j);
        }
        for (std::size_t i = 0; i < rows_; ++i)
            if (lp.needs_artificial[i]) t(rows_ + 1, static_cast<std::size_t>(art_col_of_row_[i])) = 0.0;
    }

    StandardResult solve() {
        StandardResult res;
        double bnorm = 0.0;
        for (double b : lp_.b) bnorm = std::max(bnorm, std::fabs(b));

        if (nart_ > 0) {
            if (!run_phase(rows_ + 1)) {
                res.status = LpStatus::solver_failure;
                res.iterations = iterations_;
                return res;
            }
            double infeas = -t(rows_ + 1, width_ - 1);
            if (infeas > kLpFeasTol * (1.0 + bnorm)) {
                res.status = LpStatus::infeasible;
                res.iterations = iterations_;
                return res;
            }
            expel_artificials();
        }

        if (!run_phase(rows_)) {
            res.status = unbounded_ ? LpStatus::unbounded : LpStatus::solver_failure;
            res.iterations = iterations_;
            return res;
        }

        extract(res);
        res.iterations = iterations_;
        return res;
    }

private:
    double& t(std::size_t i, std::size_t j) { return tab_[i * width_ + j]; }
    double t(std::size_t i, std::size_t j) const { return tab_[i * width_ + j]; }

    bool is_artificial(std::size_t j) const { return j >= cols_; }

    // Returns true on phase optimality; false on unbounded/iteration trouble.
    // Artificial columns never re-enter in either phase.
    bool run_phase(std::size_t cost_row) {
        bool bland = false;
        int stall = 0;
        double last_obj = -t(cost_row, width_ - 1);
        unbounded_ = false;
        while (true) {
            std::size_t enter = width_;  // sentinel
            if (bland) {
                for (std::size_t j = 0; j < cols_; ++j) {
                    if (t(cost_row, j) < -kLpCostTol) { enter = j; break; }
                }
            } else {
                double best = -kLpCostTol;
                for (std::size_t j = 0; j < cols_; ++j) {
                    double rc = t(cost_row, j);
                    if (rc < best) { best = rc; enter = j; }
                }
            }
            if (enter == width_) return true;  // optimal for this phase

            // ratio test
            std::size_t leave = rows_;
            double best_ratio = std::numeric_limits<double>::infinity();
            for (std::size_t i = 0; i < rows_; ++i) {
                if (!active_[i]) continue;
                double aij = t(i, enter);
                if (aij <= kLpPivotTol) continue;
                double rhs = std::max(t(i, width_ - 1), 0.0);
                double ratio = rhs / aij;
                if (leave == rows_ || ratio < best_ratio - 1e-12 * (1.0 + best_ratio)) {
                    best_ratio = ratio;
                    leave = i;
                } else if (ratio <= best_ratio + 1e-12 * (1.0 + best_ratio) &&
                           basis_[i] < basis_[leave]) {
                    leave = i;
                }
            }
            if (leave == rows_) {
                unbounded_ = true;
                return false;
            }

            pivot(leave, enter);
            ++iterations_;
            if (iterations_ > kMaxPivots) return false;

            double obj = -t(cost_row, width_ - 1);
            if (obj < last_obj - 1e-13 * (1.0 + std::fabs(last_obj))) {
                last_obj = obj;
                stall = 0;
            } else if (!bland && ++stall > 64) {
                bland = true;  // anti-cycling from here on
            }
        }
    }

    void pivot(std::size_t r, std::size_t jc) {
        const double p = t(r, jc);
        double* prow = &tab_[r * width_];
        const double inv = 1.0 / p;
        for (std::size_t j = 0; j < width_; ++j) prow[j] *= inv;
        prow[jc] = 1.0;
        for (std::size_t i = 0; i < rows_ + 2; ++i) {
            if (i == r) continue;
            double f = t(i, jc);
            if (f == 0.0) continue;
            double* row = &tab_[i * width_];
            for (std::size_t j = 0; j < width_; ++j) row[j] -= f * prow[j];
            row[jc] = 0.0;
        }
        basis_[r] = jc;
    }

    // Pivot basic artificials out after phase 1; rows that stay artificial
    // are redundant and get deactivated (their dual is zero).
    void expel_artificials() {
        for (std::size_t i = 0; i < rows_; ++i) {
            if (!active_[i] || !is_artificial(basis_[i])) continue;
            std::size_t jpick = width_;
            for (std::size_t j = 0; j < cols_; ++j) {
                if (std::fabs(t(i, j)) > kLpPivotTol) { jpick = j; break; }
            }
            if (jpick == width_) {
                active_[i] = false;
            } else {
                pivot(i, jpick);
                ++iterations_;
            }
        }
    }

    void extract(StandardResult& res) {
        res.z.assign(cols_, 0.0);
        for (std::size_t i = 0; i < rows_; ++i) {
            if (!is_artificial(basis_[i]))
                res.z[basis_[i]] = std::max(t(i, width_ - 1), 0.0);
        }
        // duals read off the final cost row: the logical column of row i has
        // pristine column +e_i (artificial) or +-e_i (slack), so its reduced
        // cost determines y_i.
        res.y.assign(rows_, 0.0);
        for (std::size_t i = 0; i < rows_; ++i) {
            if (!active_[i]) { res.y[i] = 0.0; continue; }
            if (art_col_of_row_[i] >= 0) {
                res.y[i] = -t(rows_, static_cast<std::size_t>(art_col_of_row_[i]));
            } else {
                std::size_t sc = static_cast<std::size_t>(lp_.logical_col[i]);
                double sign = lp_.at(i, sc);  // +1 slack
                res.y[i] = -sign * t(rows_, sc);
            }
        }

        // refactorize from pristine data when the basis is small enough;
        // one refinement pass cleans the tableau's accumulated error.
        if (rows_ <= kRefactorLimit) refactorize(res);

        double obj = 0.0;
        for (std::size_t j = 0; j < cols_; ++j) obj += lp_.c[j] * res.z[j];
        res.objective = obj;
        res.status = LpStatus::optimal;
    }

    void refactorize(StandardResult& res) {
        const std::size_t n = rows_;
        std::vector<double> bm(n * n, 0.0);
        for (std::size_t i = 0; i < n; ++i) {
            std::size_t col = basis_[i];
            if (is_artificial(col)) {
                // pristine artificial column is e_row for its own row
                for (std::size_t r = 0; r < n; ++r)
                    bm[r * n + i] = (art_col_of_row_[r] >= 0 &&
                                     static_cast<std::size_t>(art_col_of_row_[r]) == col)
                                        ? 1.0 : 0.0;
            } else {
                for (std::size_t r = 0; r < n; ++r) bm[r * n + i] = lp_.at(r, col);
            }
        }
        DenseLu lu(bm, n);
        if (lu.singular()) return;  // keep tableau values

        auto apply_b = [&](const std::vector<double>& xb) {
            std::vector<double> out(n, 0.0);
            for (std::size_t i = 0; i < n; ++i) {
                std::size_t col = basis_[i];
                if (is_artificial(col)) {
                    for (std::size_t r = 0; r < n; ++r)
                        if (art_col_of_row_[r] >= 0 &&
                            static_cast<std::size_t>(art_col_of_row_[r]) == col)
                            out[r] += xb[i];
                } else {
                    for (std::size_t r = 0; r < n; ++r) out[r] += lp_.at(r, col) * xb[i];
                }
            }
            return out;
        };

        std::vector<double> xb = lu.solve(lp_.b);
        std::vector<double> ax = apply_b(xb);
        std::vector<double> resid(n);
        for (std::size_t i = 0; i < n; ++i) resid[i] = lp_.b[i] - ax[i];
        std::vector<double> corr = lu.solve(resid);
        for (std::size_t i = 0; i < n; ++i) xb[i] += corr[i];

        for (std::size_t j = 0; j < cols_; ++j) res.z[j] = 0.0;
        for (std::size_t i = 0; i < n; ++i)
            if (!is_artificial(basis_[i])) res.z[basis_[i]] = xb[i];

        // duals: B^T y = c_B via LU of B^T
        std::vector<double> bt(n * n);
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = 0; j < n; ++j) bt[i * n + j] = bm[j * n + i];
        DenseLu lut(bt, n);
        if (lut.singular()) return;
        std::vector<double> cb(n);
        for (std::size_t i = 0; i < n; ++i)
            cb[i] = is_artificial(basis_[i]) ? 0.0 : lp_.c[basis_[i]];
        res.y = lut.solve(cb);
    }

    const StandardLp& lp_;
    std::size_t rows_, cols_, nart_ = 0, width_ = 0;
    std::vector<double> tab_;
    std::vector<std::size_t> basis_;
    std::vector<bool> active_;
    std::vector<std::int32_t> art_col_of_row_;
    std::int64_t iterations_ = 0;
    bool unbounded_ = false;
};

// --- primal-path conversion -------------------------------------------------

struct VarMap {
    int kind;           // 0: x = scale*z + shift; 1: x = z[zpos] - z[zneg]
    std::size_t zpos = 0, zneg = 0;
    double shift = 0.0, scale = 1.0;
};

struct PrimalForm {
    StandardLp std_lp;
    std::vector<VarMap> vmap;
    std::vector<double> row_flip;  // per user row
    double objective_constant = 0.0;
    std::size_t user_rows = 0;
};

inline PrimalForm build_primal_form(const LinearProgram& lp) {
    const std::size_t n = lp.num_vars();
    const std::size_t r = lp.num_rows();
    const double inf = std::numeric_limits<double>::infinity();

    PrimalForm pf;
    pf.vmap.resize(n);
    std::size_t zcols = 0;
    struct BoundRow { std::size_t z; double ub; };
    std::vector<BoundRow> bound_rows;
    for (std::size_t j = 0; j < n; ++j) {
        double lo = lp.lower[j], up = lp.upper[j];
        if (lo > -inf) {
            pf.vmap[j] = {0, zcols++, 0, lo, 1.0};
            if (up < inf) bound_rows.push_back({pf.vmap[j].zpos, up - lo});
        } else if (up < inf) {
            pf.vmap[j] = {0, zcols++, 0, up, -1.0};  // x = up - z
        } else {
            pf.vmap[j].kind = 1;
            pf.vmap[j].zpos = zcols++;
            pf.vmap[j].zneg = zcols++;
        }
    }

    const std::size_t total_rows = r + bound_rows.size();
    // dense z-space rows with sense and rhs before slack assignment
    std::vector<std::vector<double>> zr(total_rows, std::vector<double>(zcols, 0.0));
    std::vector<RowSense> sense(total_rows);
    std::vector<double> rhs(total_rows, 0.0);
    pf.row_flip.assign(r, 1.0);

    for (std::size_t i = 0; i < r; ++i) {
        double b = lp.rhs[i];
        for (std::size_t j = 0; j < n; ++j) {
            double a = lp.rows[i][j];
            if (a == 0.0) continue;
            const VarMap& vm = pf.vmap[j];
            if (vm.kind == 0) {
                zr[i][vm.zpos] += a * vm.scale;
                b -= a * vm.shift;
            } else {
                zr[i][vm.zpos] += a;
                zr[i][vm.zneg] -= a;
            }
        }
        sense[i] = lp.senses[i];
        rhs[i] = b;
        if (b < 0.0) {
            pf.row_flip[i] = -1.0;
            for (double& v : zr[i]) v = -v;
            rhs[i] = -b;
            if (sense[i] == RowSense::le) sense[i] = RowSense::ge;
            else if (sense[i] == RowSense::ge) sense[i] = RowSense::le;
        }
    }
    for (std::size_t k = 0; k < bound_rows.size(); ++k) {
        std::size_t i = r + k;
        zr[i][bound_rows[k].z] = 1.0;
        sense[i] = RowSense::le;
        rhs[i] = bound_rows[k].ub;  // >= 0 after validation of lo <= up
    }

    std::size_t n_slack = 0;
    for (auto s : sense) n_slack += (s != RowSense::eq);

    StandardLp& s = pf.std_lp;
    s.rows = total_rows;
    s.cols = zcols + n_slack;
    s.a.assign(s.rows * s.cols, 0.0);
    s.b = rhs;
    s.c.assign(s.cols, 0.0);
    s.needs_artificial.assign(s.rows, 0);
    s.logical_col.assign(s.rows, -1);

    std::size_t next_slack = zcols;
    for (std::size_t i = 0; i < total_rows; ++i) {
        for (std::size_t j = 0; j < zcols; ++j) s.at(i, j) = zr[i][j];
        switch (sense[i]) {
            case RowSense::le:
                s.at(i, next_slack) = 1.0;
                s.logical_col[i] = static_cast<std::int32_t>(next_slack++);
                break;
            case RowSense::ge:
                s.at(i, next_slack) = -1.0;
                s.logical_col[i] = static_cast<std::int32_t>(next_slack++);
                s.needs_artificial[i] = 1;
                break;
            case RowSense::eq:
                s.needs_artificial[i] = 1;
                break;
        }
    }

    for (std::size_t j = 0; j < n; ++j) {
        double c = lp.objective[j];
        if (c == 0.0) continue;
        const VarMap& vm = pf.vmap[j];
        if (vm.kind == 0) {
            s.c[vm.zpos] += c * vm.scale;
            pf.objective_constant += c * vm.shift;
        } else {
            s.c[vm.zpos] += c;
            s.c[vm.zneg] -= c;
        }
    }
    pf.user_rows = r;
    return pf;
}

inline bool dual_path_eligible(const LinearProgram& lp) {
    const double inf = std::numeric_limits<double>::infinity();
    if (lp.num_rows() < 64 || lp.num_rows() < 4 * lp.num_vars()) return false;
    for (auto s : lp.senses)
        if (s != RowSense::le) return false;
    for (std::size_t j = 0; j < lp.num_vars(); ++j)
        if (lp.lower[j] > -inf || lp.upper[j] < inf) return false;
    return true;
}

} // namespace detail

inline std::string lp_to_string(const LinearProgram& lp);
inline LpSolution solve_lp(const LinearProgram& lp, LpPath path = LpPath::automatic);

namespace detail {

inline LpSolution solve_lp_primal(const LinearProgram& lp) {
    PrimalForm pf = build_primal_form(lp);
    SimplexSolver solver(pf.std_lp);
    StandardResult sr = solver.solve();

    LpSolution sol;
    sol.status = sr.status;
    sol.iterations = sr.iterations;
    if (sr.status != LpStatus::optimal) return sol;

    const std::size_t n = lp.num_vars();
    sol.x.assign(n, 0.0);
    for (std::size_t j = 0; j < n; ++j) {
        const VarMap& vm = pf.vmap[j];
        sol.x[j] = (vm.kind == 0) ? vm.scale * sr.z[vm.zpos] + vm.shift
                                  : sr.z[vm.zpos] - sr.z[vm.zneg];
    }
    double obj = 0.0;
    for (std::size_t j = 0; j < n; ++j) obj += lp.objective[j] * sol.x[j];
    sol.objective = obj;

    sol.row_duals.assign(lp.num_rows(), 0.0);
    for (std::size_t i = 0; i < lp.num_rows(); ++i)
        sol.row_duals[i] = pf.row_flip[i] * sr.y[i];
    double dual_obj = pf.objective_constant;
    for (std::size_t i = 0; i < pf.std_lp.rows; ++i) dual_obj += pf.std_lp.b[i] * sr.y[i];
    sol.dual_objective = dual_obj;

    // feasibility and duality gates: a violated gate means breakdown, which
    // must surface as a status rather than a wrong answer
    double bnorm = 0.0;
    for (double b : lp.rhs) bnorm = std::max(bnorm, std::fabs(b));
    const double ftol = kLpFeasTol * (1.0 + bnorm);
    for (std::size_t i = 0; i < lp.num_rows(); ++i) {
        double ax = 0.0;
        for (std::size_t j = 0; j < n; ++j) ax += lp.rows[i][j] * sol.x[j];
        double viol = 0.0;
        switch (lp.senses[i]) {
            case RowSense::le: viol = ax - lp.rhs[i]; break;
            case RowSense::ge: viol = lp.rhs[i] - ax; break;
            case RowSense::eq: viol = std::fabs(ax - lp.rhs[i]); break;
        }
        if (viol > ftol) { sol.status = LpStatus::solver_failure; return sol; }
    }
    for (std::size_t j = 0; j < n; ++j) {
        if (sol.x[j] < lp.lower[j] - ftol || sol.x[j] > lp.upper[j] + ftol) {
            sol.status = LpStatus::solver_failure;
            return sol;
        }
    }
    if (std::fabs(sol.objective - sol.dual_objective) >
        1e-7 * (1.0 + std::fabs(sol.objective))) {
        sol.status = LpStatus::solver_failure;
    }
    return sol;
}

// Dual form of  min c'x s.t. Gx <= h, x free:
//   min h'u  s.t.  G'u = -c, u >= 0,   with  primal optimum = -(dual optimum).
// `dual_infeasible` is set when the dual form has no feasible point, which
// leaves the primal either unbounded or infeasible (resolved by the caller).
inline LpSolution solve_lp_dual(const LinearProgram& lp, bool& dual_infeasible) {
    dual_infeasible = false;
    const std::size_t n = lp.num_vars();
    const std::size_t r = lp.num_rows();

    StandardLp s;
    s.rows = n;
    s.cols = r;
    s.a.assign(n * r, 0.0);
    s.b.assign(n, 0.0);
    s.c = lp.rhs;
    s.needs_artificial.assign(n, 1);
    s.logical_col.assign(n, -1);
    std::vector<double> flip(n, 1.0);
    for (std::size_t i = 0; i < n; ++i) {
        double bi = -lp.objective[i];
        if (bi < 0.0) { flip[i] = -1.0; bi = -bi; }
        s.b[i] = bi;
        for (std::size_t j = 0; j < r; ++j) s.at(i, j) = flip[i] * lp.rows[j][i];
    }

    SimplexSolver solver(s);
    StandardResult sr = solver.solve();

    LpSolution sol;
    sol.iterations = sr.iterations;
    if (sr.status == LpStatus::unbounded) {
        sol.status = LpStatus::infeasible;  // unbounded dual => infeasible primal
        return sol;
    }
    if (sr.status == LpStatus::infeasible) {
        dual_infeasible = true;  // primal unbounded or infeasible; caller probes
        sol.status = LpStatus::solver_failure;
        return sol;
    }
    if (sr.status != LpStatus::optimal) { sol.status = sr.status; return sol; }

    sol.x.assign(n, 0.0);
    for (std::size_t i = 0; i < n; ++i) sol.x[i] = flip[i] * sr.y[i];
    double obj = 0.0;
    for (std::size_t j = 0; j < n; ++j) obj += lp.objective[j] * sol.x[j];
    sol.objective = obj;
    sol.row_duals.assign(r, 0.0);
    for (std::size_t j = 0; j < r; ++j) sol.row_duals[j] = -sr.z[j];
    sol.dual_objective = 0.0;  // -h'u, equals the primal optimum at optimality
    for (std::size_t j = 0; j < r; ++j) sol.dual_objective += lp.rhs[j] * sol.row_duals[j];

    double hnorm = 0.0;
    for (double h : lp.rhs) hnorm = std::max(hnorm, std::fabs(h));
    const double ftol = kLpFeasTol * (1.0 + hnorm);
    for (std::size_t j = 0; j < r; ++j) {
        double gx = 0.0;
        for (std::size_t i = 0; i < n; ++i) gx += lp.rows[j][i] * sol.x[i];
        if (gx - lp.rhs[j] > ftol) { sol.status = LpStatus::solver_failure; return sol; }
    }
    if (std::fabs(sol.objective + sr.objective) > 1e-7 * (1.0 + std::fabs(sr.objective))) {
        sol.status = LpStatus::solver_failure;
        return sol;
    }
    sol.status = LpStatus::optimal;
    return sol;
}

// min s  s.t.  Gx - s <= h, -s <= 0: optimum 0 iff {Gx <= h} is feasible.
inline bool primal_feasible_probe(const LinearProgram& lp) {
    const std::size_t n = lp.num_vars();
    LinearProgram probe(n + 1);
    probe.objective[n] = 1.0;
    for (std::size_t i = 0; i < lp.num_rows(); ++i) {
        std::vector<double> row = lp.rows[i];
        row.push_back(-1.0);
        probe.add_row(std::move(row), RowSense::le, lp.rhs[i]);
    }
    std::vector<double> srow(n + 1, 0.0);
    srow[n] = -1.0;
    probe.add_row(std::move(srow), RowSense::le, 0.0);
    LpSolution ps = solve_lp(probe, LpPath::automatic);
    if (ps.status != LpStatus::optimal) return false;
    double hnorm = 0.0;
    for (double h : lp.rhs) hnorm = std::max(hnorm, std::fabs(h));
    return ps.objective <= kLpFeasTol * (1.0 + hnorm);
}

} // namespace detail

inline LpSolution solve_lp(const LinearProgram& lp, LpPath path) {
    lp.validate();
    for (std::size_t j = 0; j < lp.num_vars(); ++j) {
        if (lp.lower[j] > lp.upper[j]) {
            LpSolution sol;
            sol.status = LpStatus::infeasible;
            return sol;
        }
    }
    bool use_dual = false;
    switch (path) {
        case LpPath::automatic: use_dual = detail::dual_path_eligible(lp); break;
        case LpPath::primal: use_dual = false; break;
        case LpPath::dual:
            if (!detail::dual_path_eligible(lp)) {
                // the transformation itself only needs the shape, not the size
                const double inf = std::numeric_limits<double>::infinity();
                bool shape_ok = true;
                for (auto sns : lp.senses) shape_ok = shape_ok && sns == RowSense::le;
                for (std::size_t j = 0; j < lp.num_vars(); ++j)
                    shape_ok = shape_ok && lp.lower[j] == -inf && lp.upper[j] == inf;
                if (!shape_ok)
                    throw std::invalid_argument(
                        "dual path requires all-<= rows and free variables");
            }
            use_dual = true;
            break;
    }
    if (!use_dual) return detail::solve_lp_primal(lp);

    bool dual_infeasible = false;
    LpSolution sol = detail::solve_lp_dual(lp, dual_infeasible);
    if (dual_infeasible) {
        sol.status = detail::primal_feasible_probe(lp) ? LpStatus::unbounded
                                                       : LpStatus::infeasible;
    }
    return sol;
}

// Fixed-format problem listing for debugging (LP-file style).
inline std::string lp_to_string(const LinearProgram& lp) {
    auto num = [](double v) {
        char buf[32];
        std::snprintf(buf, sizeof(buf), "%.17g", v);
        return std::string(buf);
    };
    std::string out = "Minimize\n obj:";
    for (std::size_t j = 0; j < lp.num_vars(); ++j) {
        double c = lp.objective[j];
        if (c == 0.0) continue;
        out += (c >= 0 ? " + " : " - ") + num(std::fabs(c)) + " x" + std::to_string(j + 1);
    }
    out += "\nSubject To\n";
    for (std::size_t i = 0; i < lp.num_rows(); ++i) {
        out += " r" + std::to_string(i + 1) + ":";
        for (std::size_t j = 0; j < lp.num_vars(); ++j) {
            double a = lp.rows[i][j];
            if (a == 0.0) continue;
            out += (a >= 0 ? " + " : " - ") + num(std::fabs(a)) + " x" + std::to_string(j + 1);
        }
        switch (lp.senses[i]) {
            case RowSense::le: out += " <= "; break;
            case RowSense::ge: out += " >= "; break;
            case RowSense::eq: out += " = "; break;
        }
        out += num(lp.rhs[i]) + "\n";
    }
    out += "Bounds\n";
    const double inf = std::numeric_limits<double>::infinity();
    for (std::size_t j = 0; j < lp.num_vars(); ++j) {
        std::string name = "x" + std::to_string(j + 1);
        if (lp.lower[j] == -inf && lp.upper[j] == inf) out += " " + name + " free\n";
        else if (lp.lower[j] == -inf) out += " " + name + " <= " + num(lp.upper[j]) + "\n";
        else if (lp.upper[j] == inf) out += " " + name + " >= " + num(lp.lower[j]) + "\n";
        else out += " " + num(lp.lower[j]) + " <= " + name + " <= " + num(lp.upper[j]) + "\n";
    }
    out += "End\n";
    return out;
}

} // namespace spval
