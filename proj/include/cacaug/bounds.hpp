#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <functional>
#include <limits>
#include <vector>

namespace cacaug {
namespace bounds {

// ---------------------------------------------------------------------------
// Closed forms of the analysis functions
// ---------------------------------------------------------------------------

inline double eval_f(double z) { return z + std::exp(-z) - 1; }

/// g(l0, m0, l1, m1) in the closed form; equals the stacked-integral form
/// int over the four layers of (1 - e^{-load below}).
inline double eval_g(double l0, double m0, double l1, double m1) {
    double s = l0 + m0 + l1 + m1;
    return std::exp(-s) *
           (1 + std::exp(m1 + l1) - std::exp(m1 + l1 + m0) * (1 + l0) -
            std::exp(m1) * (1 + l1) + std::exp(s) * s);
}

/// The same quantity via the四 integrals; used as an independent cross-check.
inline double eval_g_integral_form(double l0, double m0, double l1, double m1) {
    double s = l0 + m0 + l1 + m1;
    double a = l0 * (1 - std::exp(-l0));
    double b = m0 + std::exp(-l0 - m0) - std::exp(-l0);
    double c = l1 * (1 - std::exp(-(l0 + m0 + l1)));
    double d = m1 + std::exp(-s) - std::exp(-(l0 + m0 + l1));
    return a + b + c + d;
}

inline double eval_h1(double l0, double m0, double l1, double m1, double eta) {
    double s = l0 + m0 + l1 + m1;
    if (eta > s / 2) return std::exp(-s + eta);
    return 1 - s + eta;
}

inline double eval_ha(double eta) { return 1 - eta + eta * eta / 2 - std::exp(-eta); }

inline double eval_hb(double l1, double m1, double eta) {
    return -std::exp(-eta) + std::exp(m1 - eta) * (1 + l1) -
           m1 * (1 - eta + m1 / 2) - l1 * (1 + m1 - eta);
}

inline double eval_hc(double l1, double m1, double eta) {
    return -std::exp(-eta) - std::exp(l1 + m1 - eta) + std::exp(m1 - eta) * (1 + l1) + 1 +
           l1 * l1 / 2 - eta + eta * eta / 2;
}

inline double eval_hd(double l0, double m0, double l1, double m1, double eta) {
    return -std::exp(-eta) - std::exp(l1 + m1 - eta) +
           std::exp(m1 + l1 + m0 - eta) * (1 + l0) + std::exp(m1 - eta) * (1 + l1) -
           (m0 + m1) * (1 + m0 / 2 + m1 / 2 - eta) - l1 * (1 + m0 + m1 - eta) -
           l0 * (1 + m1 + l1 + m0 - eta);
}

inline double eval_h2(double l0, double m0, double l1, double m1, double eta) {
    if (eta <= m1) return eval_ha(eta);
    if (eta <= m1 + l1) return eval_hb(l1, m1, eta);
    if (eta <= m1 + l1 + m0) return eval_hc(l1, m1, eta);
    return eval_hd(l0, m0, l1, m1, eta);
}

inline double eval_gain(double l0, double m0, double l1, double m1, double eta) {
    return eval_h1(l0, m0, l1, m1, eta) * eval_h2(l0, m0, l1, m1, eta);
}

// ---------------------------------------------------------------------------
// Grid checks: convexity of g and the pointwise g >= f bound
// ---------------------------------------------------------------------------

/// Minimum second-order central difference of g along each axis over a dense
/// grid. Convexity per coordinate means this stays >= -tolerance.
inline double g_min_second_difference(int n = 24) {
    double h = 1.0 / n;
    double worst = std::numeric_limits<double>::infinity();
    for (int a = 0; a <= n; ++a)
        for (int b = 0; b <= n; ++b)
            for (int c = 0; c <= n; ++c)
                for (int d = 0; d <= n; ++d) {
                    double v[4] = {a * h, b * h, c * h, d * h};
                    if (v[0] + v[1] + v[2] + v[3] > 1) continue;
                    for (int axis = 0; axis < 4; ++axis) {
                        if (v[axis] < h || v[axis] > 1 - h) continue;
                        double lo[4], hi[4];
                        std::copy(v, v + 4, lo);
                        std::copy(v, v + 4, hi);
                        lo[axis] -= h;
                        hi[axis] += h;
                        double dd = eval_g(hi[0], hi[1], hi[2], hi[3]) +
                                    eval_g(lo[0], lo[1], lo[2], lo[3]) -
                                    2 * eval_g(v[0], v[1], v[2], v[3]);
                        worst = std::min(worst, dd);
                    }
                }
    return worst;
}

/// Minimum of g - f(total) over a dense grid of the domain.
inline double g_minus_f_minimum(int n = 24) {
    double h = 1.0 / n;
    double worst = std::numeric_limits<double>::infinity();
    for (int a = 0; a <= n; ++a)
        for (int b = 0; b <= n; ++b)
            for (int c = 0; c <= n; ++c)
                for (int d = 0; d <= n; ++d) {
                    double s = (a + b + c + d) * h;
                    if (s > 1) continue;
                    worst = std::min(worst, eval_g(a * h, b * h, c * h, d * h) - eval_f(s));
                }
    return worst;
}

// ---------------------------------------------------------------------------
// Interval arithmetic for the pessimistic cell estimates
// ---------------------------------------------------------------------------

struct Ival {
    double lo, hi;
    static Ival point(double x) { return {x, x}; }
};

inline Ival widen(Ival a) {
    return {std::nextafter(a.lo, -std::numeric_limits<double>::infinity()),
            std::nextafter(a.hi, std::numeric_limits<double>::infinity())};
}
inline Ival operator+(Ival a, Ival b) { return widen({a.lo + b.lo, a.hi + b.hi}); }
inline Ival operator-(Ival a, Ival b) { return widen({a.lo - b.hi, a.hi - b.lo}); }
inline Ival operator-(Ival a) { return {-a.hi, -a.lo}; }
inline Ival operator*(Ival a, Ival b) {
    double c[4] = {a.lo * b.lo, a.lo * b.hi, a.hi * b.lo, a.hi * b.hi};
    return widen({std::min(std::min(c[0], c[1]), std::min(c[2], c[3])),
                  std::max(std::max(c[0], c[1]), std::max(c[2], c[3]))});
}
inline Ival exp_iv(Ival a) { return widen({std::exp(a.lo), std::exp(a.hi)}); }
inline Ival hull(Ival a, Ival b) { return {std::min(a.lo, b.lo), std::max(a.hi, b.hi)}; }
inline Ival sq_nonneg(Ival a) {  // a subseteq [0, inf)
    return widen({a.lo * a.lo, a.hi * a.hi});
}
inline Ival clamp(Ival a, double lo, double hi) {
    return {std::max(a.lo, lo), std::min(a.hi, hi)};
}

struct GainCell {
    Ival l0, m0, l1, m1, eta;
    Ival s() const { return l0 + m0 + l1 + m1; }
};

inline Ival h1_iv(const GainCell& c) {
    Ival s = c.s();
    bool branch_exp = c.eta.hi > s.lo / 2;   // eta > s/2 possible
    bool branch_lin = c.eta.lo <= s.hi / 2;  // eta <= s/2 possible
    Ival out{std::numeric_limits<double>::infinity(),
             -std::numeric_limits<double>::infinity()};
    if (branch_exp) out = hull(out, exp_iv(c.eta - s));
    if (branch_lin) out = hull(out, Ival::point(1) - s + c.eta);
    return out;
}

inline Ival ha_iv(Ival eta) {
    return Ival::point(1) - eta + sq_nonneg(eta) * Ival::point(0.5) - exp_iv(-eta);
}
inline Ival hb_iv(Ival l1, Ival m1, Ival eta) {
    return -exp_iv(-eta) + exp_iv(m1 - eta) * (Ival::point(1) + l1) -
           m1 * (Ival::point(1) - eta + m1 * Ival::point(0.5)) -
           l1 * (Ival::point(1) + m1 - eta);
}
inline Ival hc_iv(Ival l1, Ival m1, Ival eta) {
    return -exp_iv(-eta) - exp_iv(l1 + m1 - eta) + exp_iv(m1 - eta) * (Ival::point(1) + l1) +
           Ival::point(1) + sq_nonneg(l1) * Ival::point(0.5) - eta +
           sq_nonneg(eta) * Ival::point(0.5);
}
inline Ival hd_iv(Ival l0, Ival m0, Ival l1, Ival m1, Ival eta) {
    return -exp_iv(-eta) - exp_iv(l1 + m1 - eta) +
           exp_iv(m1 + l1 + m0 - eta) * (Ival::point(1) + l0) +
           exp_iv(m1 - eta) * (Ival::point(1) + l1) -
           (m0 + m1) * (Ival::point(1) + m0 * Ival::point(0.5) + m1 * Ival::point(0.5) - eta) -
           l1 * (Ival::point(1) + m0 + m1 - eta) -
           l0 * (Ival::point(1) + m1 + l1 + m0 - eta);
}

inline Ival h2_iv(const GainCell& c) {
    Ival out{std::numeric_limits<double>::infinity(),
             -std::numeric_limits<double>::infinity()};
    double b1 = 0, b2 = 0, b3 = 0;  // piece boundaries as interval endpoints
    Ival m1 = c.m1, ml = c.m1 + c.l1, mlm = c.m1 + c.l1 + c.m0;
    (void)b1;
    (void)b2;
    (void)b3;
    // piece a: eta <= m1
    if (c.eta.lo <= m1.hi) out = hull(out, ha_iv(clamp(c.eta, c.eta.lo, m1.hi)));
    // piece b: m1 < eta <= m1 + l1
    if (c.eta.hi > m1.lo && c.eta.lo <= ml.hi)
        out = hull(out, hb_iv(c.l1, c.m1, clamp(c.eta, m1.lo, ml.hi)));
    // piece c: m1 + l1 < eta <= m1 + l1 + m0
    if (c.eta.hi > ml.lo && c.eta.lo <= mlm.hi)
        out = hull(out, hc_iv(c.l1, c.m1, clamp(c.eta, ml.lo, mlm.hi)));
    // piece d: eta > m1 + l1 + m0
    if (c.eta.hi > mlm.lo)
        out = hull(out, hd_iv(c.l0, c.m0, c.l1, c.m1, clamp(c.eta, mlm.lo, c.eta.hi)));
    return out;
}

/// gain = h1 * h2 with gain >= 0 analytically; the lower end is clamped at 0.
inline Ival gain_iv(const GainCell& c) {
    Ival v = h1_iv(c) * h2_iv(c);
    return {std::max(v.lo, 0.0), std::max(v.hi, 0.0)};
}

// ---------------------------------------------------------------------------
// The b = 0.42 condition
// ---------------------------------------------------------------------------

struct BoundParams {
    double b = 0.42;
    int grid = 64;    // minimum cell resolution per axis before giving up
    int refine = 0;   // extra halvings: effective resolution grid * 2^refine
    double tol = 1e-6;
};

struct ZValues {
    double z1, z2, z3, z4;
    explicit ZValues(double b)
        : z1(-(b - 1.0 / 3)), z2(-2 * (b - 0.4) + 1.0 / 30), z3(0.5 - b), z4(1 - b) {}
};

/// z-part of the b-condition for a concrete (eta, s_vw, xSv).
inline double z_part(const ZValues& z, double eta, double svw, double xsv) {
    return svw * z.z1 + (eta - svw) * z.z2 + std::max(0.0, xsv - eta) * z.z3 +
           std::max(0.0, 1 - xsv - eta + svw) * z.z4;
}

/// Exact minimum of the z-part over 0 <= s_vw <= eta, s_vw <= xSv <= 1 for a
/// fixed eta: the function is piecewise linear, so the minimum sits on a
/// vertex of the subdivision induced by the two max-breakpoints.
inline double z_part_min_at(const ZValues& z, double eta) {
    auto clip01 = [](double v) { return std::clamp(v, 0.0, 1.0); };
    double best = std::numeric_limits<double>::infinity();
    auto consider = [&](double svw, double x) {
        if (svw < 0 || svw > eta || x < svw || x > 1) return;
        best = std::min(best, z_part(z, eta, svw, x));
    };
    for (double svw : {0.0, eta}) {
        consider(svw, svw);
        consider(svw, 1.0);
        consider(svw, clip01(eta));
        consider(svw, clip01(1 - eta + svw));
    }
    consider(clip01(2 * eta - 1), clip01(eta));  // x = eta meets x = 1-eta+s_vw
    return best;
}

/// Minimum over eta in [e0, e1]: the z-part is pointwise non-increasing in
/// eta (its eta-coefficients z2, -z3, -z4 are all <= 0), so eta = e1 is the
/// worst slice.
inline double z_part_min(const ZValues& z, double e0, double e1) {
    (void)e0;
    return z_part_min_at(z, e1);
}

/// Full expression at a concrete point (with the inner minimization over
/// s_vw and x(S_v) taken exactly). At eta = x(S_w) the constraint is vacuous
/// (the conditioned events have probability zero), so the value is +infinity.
inline double b_condition_value(double b, double l0, double m0, double l1, double m1,
                                double eta) {
    ZValues z(b);
    double s = l0 + m0 + l1 + m1;
    if (s - eta < 1e-12) return std::numeric_limits<double>::infinity();
    double gain = eval_gain(l0, m0, l1, m1, eta);
    return b * gain / (s - eta) + z_part_min(z, eta, eta);
}

struct BCondResult {
    bool certified = false;
    bool definite_failure = false;
    bool indeterminate = false;
    double min_lower_bound = 0;    // smallest certified cell lower bound
    double min_point_value = 0;    // smallest exact evaluation seen
    std::array<double, 5> witness_lo{}, witness_hi{};  // cell of the minimum
    std::array<double, 5> witness_point{};
    long cells = 0;
};

/// Certifies that the b-condition expression is >= -tol over the whole
/// domain {eta <= l0+m0+l1+m1 <= 1} by adaptive subdivision with interval
/// bounds, or finds a definitely negative point.
inline BCondResult verify_b_condition(const BoundParams& par) {
    ZValues z(par.b);
    double min_width = 1.0 / (par.grid * (1 << par.refine));
    BCondResult res;
    res.min_lower_bound = std::numeric_limits<double>::infinity();
    res.min_point_value = std::numeric_limits<double>::infinity();

    struct Cell {
        std::array<double, 5> lo, hi;  // l0, m0, l1, m1, eta
    };
    std::vector<Cell> stack{{{0, 0, 0, 0, 0}, {1, 1, 1, 1, 1}}};
    bool all_certified = true;

    auto record_point = [&](const Cell& c) {
        // exact evaluation at the center, clipped strictly inside the domain
        std::array<double, 5> p;
        for (int i = 0; i < 5; ++i) p[i] = (c.lo[i] + c.hi[i]) / 2;
        double s = p[0] + p[1] + p[2] + p[3];
        if (s > 1) {
            double f = 1.0 / s;
            for (int i = 0; i < 4; ++i) p[i] *= f;
            s = 1;
        }
        p[4] = std::min(p[4], s - std::min(1e-9, s / 2));
        if (p[4] < 0) p[4] = 0;
        double v = b_condition_value(par.b, p[0], p[1], p[2], p[3], p[4]);
        if (v < res.min_point_value) {
            res.min_point_value = v;
            res.witness_point = p;
        }
        return v;
    };

    while (!stack.empty()) {
        Cell c = stack.back();
        stack.pop_back();
        ++res.cells;

        double s_lo = c.lo[0] + c.lo[1] + c.lo[2] + c.lo[3];
        double s_hi = c.hi[0] + c.hi[1] + c.hi[2] + c.hi[3];
        // outside the domain, or only eta >= s points (where the constraint
        // is vacuous: the conditioned events have probability zero)
        if (s_lo > 1 || c.lo[4] >= std::min(s_hi, 1.0)) continue;

        // joint lower bound over eta sub-slices: the gain term grows and the
        // z-part shrinks as eta increases, so slicing eta tightens both
        double eta_lo = c.lo[4];
        double eta_hi = std::min(c.hi[4], std::min(s_hi, 1.0));
        const int slices = 8;
        double lb = std::numeric_limits<double>::infinity();
        for (int j = 0; j < slices; ++j) {
            double a = eta_lo + (eta_hi - eta_lo) * j / slices;
            double b2 = eta_lo + (eta_hi - eta_lo) * (j + 1) / slices;
            if (a >= std::min(s_hi, 1.0)) break;  // vacuous: eta >= s only
            GainCell gc{{c.lo[0], c.hi[0]},
                        {c.lo[1], c.hi[1]},
                        {c.lo[2], c.hi[2]},
                        {c.lo[3], c.hi[3]},
                        {a, std::min(b2, std::min(s_hi, 1.0))}};
            Ival gain = gain_iv(gc);
            double denom_hi = std::min(s_hi, 1.0) - a;
            double t1_lo = denom_hi > 0 ? par.b * gain.lo / denom_hi : 0;
            lb = std::min(lb, t1_lo + z_part_min_at(z, b2));
            if (lb < -par.tol) break;
        }
        if (lb < res.min_lower_bound) {
            res.min_lower_bound = lb;
            res.witness_lo = c.lo;
            res.witness_hi = c.hi;
        }
        if (lb >= -par.tol) continue;  // certified on this cell

        double pv = record_point(c);
        if (pv < -par.tol) {
            res.definite_failure = true;
            res.certified = false;
            return res;
        }

        double width = 0;
        int axis = 0;
        for (int i = 0; i < 5; ++i)
            if (c.hi[i] - c.lo[i] > width) {
                width = c.hi[i] - c.lo[i];
                axis = i;
            }
        if (width <= min_width) {
            all_certified = false;
            res.indeterminate = true;
            continue;  // grid too coarse for this cell
        }
        Cell a = c, b2 = c;
        double mid = (c.lo[axis] + c.hi[axis]) / 2;
        a.hi[axis] = mid;
        b2.lo[axis] = mid;
        stack.push_back(a);
        stack.push_back(b2);
    }
    res.certified = all_certified;
    return res;
}

// ---------------------------------------------------------------------------
// The closed optimizations
// ---------------------------------------------------------------------------

struct OptResult {
    double value = 0;
    double alpha = 0;
    std::array<double, 4> arg{};  // l0, m0, l1, m1 (unused entries zero)
};

/// Inner value for fixed stack parameters: the best alpha balances the two
/// rounding guarantees (the first decreases, the second increases in alpha).
inline double final_opt_inner(double b, double l0, double m0, double l1, double m1,
                              double* alpha_out = nullptr) {
    double s = l0 + m0 + l1 + m1;
    if (s <= 0) {
        if (alpha_out) *alpha_out = 0;
        return 1;  // alpha forced to 0: min(2, 1) = 1
    }
    double g = eval_g(l0, m0, l1, m1);
    double alpha_cap = std::min(1.0, s / (1 + m0 + l1 + m1));
    double denom = 2 + (2 * m0 - 2 * b * g) / s;
    double alpha = std::min(denom > 0 ? 1 / denom : 1.0, alpha_cap);
    double A = 2 - alpha - (2 * alpha / s) * m0;
    double B = 1 + alpha - (2 * b * alpha / s) * g;
    if (alpha_out) *alpha_out = alpha;
    return std::min(A, B);
}

/// Grid search plus pattern refinement over the final optimization problem.
inline OptResult solve_final_optimization(double b = 0.42, int grid = 40, int refine_iters = 60) {
    OptResult best;
    double h = 1.0 / grid;
    for (int a = 0; a <= grid; ++a)
        for (int b2 = 0; b2 <= grid; ++b2)
            for (int c = 0; c <= grid; ++c)
                for (int d = 0; d <= grid; ++d) {
                    double l0 = a * h, m0 = b2 * h, l1 = c * h, m1 = d * h;
                    if (l0 + m0 + l1 + 2 * m1 > 1 + 1e-12) continue;
                    double alpha;
                    double v = final_opt_inner(b, l0, m0, l1, m1, &alpha);
                    if (v > best.value) {
                        best.value = v;
                        best.alpha = alpha;
                        best.arg = {l0, m0, l1, m1};
                    }
                }
    // local pattern refinement around the best grid point
    double step = h;
    for (int it = 0; it < refine_iters; ++it) {
        bool improved = false;
        for (int axis = 0; axis < 4; ++axis) {
            for (double dir : {-1.0, 1.0}) {
                auto cand = best.arg;
                cand[axis] = std::clamp(cand[axis] + dir * step, 0.0, 1.0);
                if (cand[0] + cand[1] + cand[2] + 2 * cand[3] > 1) continue;
                double alpha;
                double v = final_opt_inner(b, cand[0], cand[1], cand[2], cand[3], &alpha);
                if (v > best.value) {
                    best.value = v;
                    best.alpha = alpha;
                    best.arg = cand;
                    improved = true;
                }
            }
        }
        if (!improved) step /= 2;
        if (step < 1e-12) break;
    }
    return best;
}

/// max over 0 <= alpha <= y <= 1 of min{2 - alpha, 1 + alpha - (2a/3y) f(y)}.
inline OptResult solve_simple_optimization(int grid = 20000) {
    OptResult best;
    auto value_at = [&](double y, double* alpha_out) {
        if (y <= 0) {
            if (alpha_out) *alpha_out = 0;
            return 1.0;
        }
        double ratio = 2 * eval_f(y) / (3 * y);
        double alpha = std::min(1 / (2 - ratio), y);
        if (alpha_out) *alpha_out = alpha;
        return std::min(2 - alpha, 1 + alpha - alpha * ratio);
    };
    for (int i = 0; i <= grid; ++i) {
        double y = (double)i / grid;
        double alpha;
        double v = value_at(y, &alpha);
        if (v > best.value) {
            best.value = v;
            best.alpha = alpha;
            best.arg = {y, 0, 0, 0};
        }
    }
    // golden-section style polish
    double lo = std::max(0.0, best.arg[0] - 1.0 / grid), hi = std::min(1.0, best.arg[0] + 1.0 / grid);
    for (int it = 0; it < 200; ++it) {
        double m1 = lo + (hi - lo) / 3, m2 = hi - (hi - lo) / 3;
        if (value_at(m1, nullptr) < value_at(m2, nullptr))
            lo = m1;
        else
            hi = m2;
    }
    double alpha;
    double v = value_at((lo + hi) / 2, &alpha);
    if (v > best.value) {
        best.value = v;
        best.alpha = alpha;
        best.arg = {(lo + hi) / 2, 0, 0, 0};
    }
    return best;
}

}  // namespace bounds
}  // namespace cacaug
