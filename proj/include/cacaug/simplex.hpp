#pragma once

#include <cassert>
#include <optional>
#include <vector>

#include "rational.hpp"

namespace cacaug {

// ---------------------------------------------------------------------------
// Exact rational LP solving: dense two-phase simplex with Bland's rule.
// Deterministic; always terminates; returns a basic (extreme point) optimum.
// ---------------------------------------------------------------------------

enum class RowSense { LE, GE, EQ };

struct LpRow {
    std::vector<std::pair<int, Rat>> coeffs;  // sparse (var, coefficient)
    RowSense sense = RowSense::GE;
    Rat rhs = 0;
};

/// min c^T x subject to rows; every variable satisfies x >= 0, optionally
/// x <= upper[i] (handled via an internal bound row).
struct LinearProgram {
    std::vector<Rat> objective;
    std::vector<std::optional<Rat>> upper;
    std::vector<LpRow> rows;

    int num_vars() const { return (int)objective.size(); }

    int add_var(Rat c, std::optional<Rat> ub = std::nullopt) {
        objective.push_back(std::move(c));
        upper.push_back(std::move(ub));
        return num_vars() - 1;
    }

    void add_row(std::vector<std::pair<int, Rat>> coeffs, RowSense sense, Rat rhs) {
        rows.push_back({std::move(coeffs), sense, std::move(rhs)});
    }
};

enum class LpStatus { Optimal, Infeasible, Unbounded };

struct LpSolution {
    LpStatus status = LpStatus::Infeasible;
    Rat value = 0;
    std::vector<Rat> x;  // values of the original variables
};

namespace lpdetail {

/// Dense tableau. Column layout: [original vars | slacks | artificials | rhs].
class Tableau {
public:
    std::vector<std::vector<Rat>> a;  // m x (cols+1)
    std::vector<int> basis;           // per row: basic column
    int cols = 0;

    Rat& rhs(int r) { return a[r][cols]; }

    void pivot(int r, int c) {
        Rat p = a[r][c];
        assert(p != 0);
        for (auto& x : a[r]) x /= p;
        for (int i = 0; i < (int)a.size(); ++i) {
            if (i == r || a[i][c] == 0) continue;
            Rat f = a[i][c];
            for (int j = 0; j <= cols; ++j) a[i][j] -= f * a[r][j];
        }
        basis[r] = c;
    }

    /// Bland's rule minimization of objective coefficients `obj` (length cols)
    /// over columns [0, limit). Returns false if unbounded.
    bool run(const std::vector<Rat>& obj, int limit, Rat& out_value) {
        // reduced costs z are kept explicitly
        std::vector<Rat> z = obj;
        Rat value = 0;
        for (int r = 0; r < (int)a.size(); ++r) {
            int b = basis[r];
            if (z[b] == 0) continue;
            Rat f = z[b];
            for (int j = 0; j < limit; ++j) z[j] -= f * a[r][j];
            value -= f * rhs(r);
        }
        while (true) {
            int enter = -1;
            for (int j = 0; j < limit; ++j)
                if (z[j] < 0) {
                    enter = j;
                    break;
                }
            if (enter == -1) break;
            int leave = -1;
            Rat best;
            for (int r = 0; r < (int)a.size(); ++r) {
                if (a[r][enter] <= 0) continue;
                Rat ratio = rhs(r) / a[r][enter];
                if (leave == -1 || ratio < best ||
                    (ratio == best && basis[r] < basis[leave])) {
                    leave = r;
                    best = ratio;
                }
            }
            if (leave == -1) return false;  // unbounded
            pivot(leave, enter);
            Rat f = z[enter];
            for (int j = 0; j < limit; ++j) z[j] -= f * a[leave][j];
            value -= f * rhs(leave);
        }
        out_value = -value;  // we accumulated -(c^T x)
        return true;
    }
};

}  // namespace lpdetail

inline LpSolution simplex_solve(const LinearProgram& lp_in) {
    using lpdetail::Tableau;

    // materialize upper bounds as rows
    LinearProgram lp = lp_in;
    for (int i = 0; i < lp.num_vars(); ++i)
        if (lp.upper[i]) lp.add_row({{i, Rat(1)}}, RowSense::LE, *lp.upper[i]);

    int n = lp.num_vars();
    int m = (int)lp.rows.size();

    // normalize rhs >= 0
    std::vector<LpRow> rows = lp.rows;
    for (auto& r : rows) {
        if (r.rhs < 0) {
            for (auto& [v, c] : r.coeffs) c = -c;
            r.rhs = -r.rhs;
            r.sense = r.sense == RowSense::LE   ? RowSense::GE
                      : r.sense == RowSense::GE ? RowSense::LE
                                                : RowSense::EQ;
        }
    }

    // column layout
    int n_slack = 0;
    for (const auto& r : rows)
        if (r.sense != RowSense::EQ) ++n_slack;
    int slack_base = n;
    int art_base = n + n_slack;
    int cols = n + n_slack + m;  // at most one artificial per row

    Tableau t;
    t.cols = cols;
    t.a.assign(m, std::vector<Rat>(cols + 1, Rat(0)));
    t.basis.assign(m, -1);

    int next_slack = slack_base;
    std::vector<int> artificial_col(m, -1);
    for (int r = 0; r < m; ++r) {
        for (auto& [v, c] : rows[r].coeffs) t.a[r][v] += c;
        t.a[r][cols] = rows[r].rhs;
        if (rows[r].sense == RowSense::LE) {
            int s = next_slack++;
            t.a[r][s] = 1;
            t.basis[r] = s;  // slack basic, rhs >= 0
        } else if (rows[r].sense == RowSense::GE) {
            int s = next_slack++;
            t.a[r][s] = -1;
        }
        if (t.basis[r] == -1) {
            int acol = art_base + r;
            t.a[r][acol] = 1;
            t.basis[r] = acol;
            artificial_col[r] = acol;
        }
    }

    bool need_phase1 = false;
    for (int r = 0; r < m; ++r)
        if (artificial_col[r] != -1) need_phase1 = true;

    if (need_phase1) {
        std::vector<Rat> phase1(cols, Rat(0));
        for (int r = 0; r < m; ++r)
            if (artificial_col[r] != -1) phase1[artificial_col[r]] = 1;
        Rat v1;
        bool ok = t.run(phase1, cols, v1);
        assert(ok);
        (void)ok;
        if (v1 != 0) return {LpStatus::Infeasible, Rat(0), {}};
        // drive remaining artificials out of the basis
        for (int r = 0; r < m; ++r) {
            if (t.basis[r] < art_base) continue;
            int piv = -1;
            for (int j = 0; j < art_base; ++j)
                if (t.a[r][j] != 0) {
                    piv = j;
                    break;
                }
            if (piv != -1) t.pivot(r, piv);
        }
        // drop redundant rows whose artificial stayed basic (value 0)
        for (int r = m - 1; r >= 0; --r) {
            if (t.basis[r] >= art_base) {
                assert(t.rhs(r) == 0);
                t.a.erase(t.a.begin() + r);
                t.basis.erase(t.basis.begin() + r);
            }
        }
    }

    std::vector<Rat> phase2(cols, Rat(0));
    for (int i = 0; i < n; ++i) phase2[i] = lp.objective[i];
    Rat value;
    if (!t.run(phase2, art_base, value)) return {LpStatus::Unbounded, Rat(0), {}};

    LpSolution sol;
    sol.status = LpStatus::Optimal;
    sol.x.assign(n, Rat(0));
    for (int r = 0; r < (int)t.a.size(); ++r)
        if (t.basis[r] < n) sol.x[t.basis[r]] = t.rhs(r);
    sol.value = 0;
    for (int i = 0; i < n; ++i) sol.value += lp.objective[i] * sol.x[i];
    return sol;
}

}  // namespace cacaug
