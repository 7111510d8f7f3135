#pragma once

#include <algorithm>
#include <set>
#include <vector>

#include "cactus.hpp"

namespace cacaug {

// ---------------------------------------------------------------------------
// Cycle replacement: merge the cactus cycles into one Hamiltonian cycle that
// keeps every requested 2-cut consecutive.
// ---------------------------------------------------------------------------

/// Returns a cyclic vertex order (root first) such that every W in `keep` is
/// a set of consecutive vertices. Built by splicing two cycles sharing a
/// vertex until a single cycle remains.
inline std::vector<int> cactus_to_cycle(const CactusInstance& g,
                                        const std::vector<Bitset>& keep) {
    std::vector<std::vector<int>> cyc = g.cycles;
    if (cyc.empty()) {
        // single-vertex cactus
        return std::vector<int>{g.root};
    }
    while (cyc.size() > 1) {
        // lowest-index pair of cycles sharing a vertex
        int c1 = -1, c2 = -1, z = -1;
        for (size_t i = 0; i < cyc.size() && c1 == -1; ++i) {
            std::set<int> in_i(cyc[i].begin(), cyc[i].end());
            for (size_t j = i + 1; j < cyc.size() && c1 == -1; ++j) {
                for (int v : cyc[j])
                    if (in_i.count(v)) {
                        c1 = (int)i;
                        c2 = (int)j;
                        z = v;
                        break;
                    }
            }
        }
        if (c1 == -1) throw std::logic_error("cactus_to_cycle: cycles do not share vertices");
        auto& q1 = cyc[c1];
        auto& q2 = cyc[c2];
        auto rot = [](std::vector<int>& q, int z) {
            auto it = std::find(q.begin(), q.end(), z);
            std::rotate(q.begin(), it, q.end());
        };
        rot(q1, z);
        rot(q2, z);
        // drop edges (z, q1[1]) and (z, q2[1]); add (q1[1], q2[1]); the merged
        // cycle walks q1 backwards from z, then q2 forwards
        std::vector<int> merged;
        merged.push_back(z);
        for (int i = (int)q1.size() - 1; i >= 1; --i) merged.push_back(q1[i]);
        for (int i = 1; i < (int)q2.size(); ++i) merged.push_back(q2[i]);
        cyc.erase(cyc.begin() + c2);
        cyc[c1] = std::move(merged);
    }
    std::vector<int>& order = cyc[0];
    auto it = std::find(order.begin(), order.end(), g.root);
    std::rotate(order.begin(), it, order.end());

    // every kept cut must be consecutive and avoid position 0
    std::vector<int> pos(g.n, -1);
    for (int i = 0; i < (int)order.size(); ++i) pos[order[i]] = i;
    for (const Bitset& w : keep) {
        auto mem = w.to_vector();
        std::vector<int> ps;
        for (int v : mem) ps.push_back(pos[v]);
        std::sort(ps.begin(), ps.end());
        if (ps.front() == 0) throw std::logic_error("cactus_to_cycle: cut contains the root");
        for (size_t i = 1; i < ps.size(); ++i)
            if (ps[i] != ps[i - 1] + 1)
                throw std::logic_error("cactus_to_cycle: kept cut not consecutive");
    }
    return order;
}

// ---------------------------------------------------------------------------
// Rectangle hitting with a common topmost coordinate
// ---------------------------------------------------------------------------

struct WeightedPoint {
    Rat x, y;
    Rat w;  // in [0,1]
};

struct Rect {
    Rat x_lo, x_hi, y_lo, y_hi;  // closed rectangle
    bool contains(const Rat& x, const Rat& y) const {
        return x_lo <= x && x <= x_hi && y_lo <= y && y <= y_hi;
    }
};

/// Stripe rounding: sorts by first coordinate, carves stripes of weight
/// exactly 1/2 (splitting one point where needed), and picks a topmost point
/// per full stripe. Hits every rectangle and |H| <= 2 * sum of weights.
inline std::vector<int> stripe_hit(const std::vector<WeightedPoint>& points,
                                   const std::vector<Rect>& rects) {
    for (const Rect& r : rects) {
        Rat in_weight = 0;
        for (const auto& p : points)
            if (r.contains(p.x, p.y)) in_weight += p.w;
        if (in_weight < 1)
            throw std::invalid_argument("stripe_hit: rectangle with weight below 1");
    }
    if (rects.empty()) return {};
    Rat top = rects[0].y_hi;
    for (const Rect& r : rects)
        if (r.y_hi != top)
            throw std::invalid_argument("stripe_hit: rectangles lack a common top");

    // indices of usable points, sorted by (x, y, index)
    std::vector<int> ord;
    for (int i = 0; i < (int)points.size(); ++i)
        if (points[i].w > 0 && points[i].y <= top) ord.push_back(i);
    std::sort(ord.begin(), ord.end(), [&](int a, int b) {
        if (points[a].x != points[b].x) return points[a].x < points[b].x;
        if (points[a].y != points[b].y) return points[a].y < points[b].y;
        return a < b;
    });

    Rat total = 0;
    for (int i : ord) total += points[i].w;
    // mass interval (before, after] per point in sorted order
    std::vector<Rat> cum(ord.size() + 1);
    cum[0] = 0;
    for (size_t i = 0; i < ord.size(); ++i) cum[i + 1] = cum[i] + points[ord[i]].w;

    const Rat half(1, 2);
    std::set<int> picked;
    // full stripes: ((i-1)/2, i/2] while the remainder stays > 1/2
    int full = 0;
    while (total - Rat(full) * half > half) ++full;
    for (int s = 1; s <= full; ++s) {
        Rat lo = Rat(s - 1) * half, hi = Rat(s) * half;
        int best = -1;
        for (size_t i = 0; i < ord.size(); ++i) {
            if (cum[i] >= hi || cum[i + 1] <= lo) continue;  // no mass in stripe
            int idx = ord[i];
            if (best == -1 || points[idx].y > points[best].y ||
                (points[idx].y == points[best].y && points[idx].x < points[best].x) ||
                (points[idx].y == points[best].y && points[idx].x == points[best].x &&
                 idx < best))
                best = idx;
        }
        if (best != -1) picked.insert(best);
    }
    return {picked.begin(), picked.end()};
}

// ---------------------------------------------------------------------------
// Covering a cut family via the rectangle reduction
// ---------------------------------------------------------------------------

/// Integral cover of the cuts `which` (ids into `cuts`) of size at most
/// 8 * sum(x), given fractional x with x(delta_L(W)) >= 1 for each of them.
inline std::vector<int> cover_cuts_via_rectangles(const CactusInstance& g,
                                                  const std::vector<TwoCut>& cuts,
                                                  const std::vector<int>& which,
                                                  const std::vector<Rat>& x) {
    if (which.empty()) return {};
    std::vector<Bitset> keep;
    for (int id : which) keep.push_back(cuts[id].members);
    std::vector<int> order = cactus_to_cycle(g, keep);
    std::vector<int> pos(g.n, -1);
    for (int i = 0; i < (int)order.size(); ++i) pos[order[i]] = i;
    int n_top = (int)order.size() - 1;  // positions 0..n_top, root at 0

    // one point per link, doubled weight
    std::vector<WeightedPoint> pts(g.link_count());
    for (int i = 0; i < g.link_count(); ++i) {
        auto [lo, hi] = std::minmax(pos[g.links[i].u], pos[g.links[i].v]);
        pts[i] = {Rat(lo), Rat(hi), 2 * x[i]};
    }

    std::vector<Rect> up_rects, left_rects;
    for (int id : which) {
        auto mem = cuts[id].members.to_vector();
        int a = g.n, b = -1;
        for (int v : mem) {
            a = std::min(a, pos[v]);
            b = std::max(b, pos[v]);
        }
        Rect up{Rat(a), Rat(b), Rat(b + 1), Rat(n_top)};
        Rect left{Rat(0), Rat(a - 1), Rat(a), Rat(b)};
        Rat up_weight = 0;
        for (int i = 0; i < g.link_count(); ++i)
            if (up.contains(pts[i].x, pts[i].y)) up_weight += x[i];
        // weight >= 1/2 goes to the "up" family, ties included
        if (2 * up_weight >= 1)
            up_rects.push_back(up);
        else
            left_rects.push_back(left);
    }

    std::set<int> out;
    for (int i : stripe_hit(pts, up_rects)) out.insert(i);
    // rotate 90 degrees so the left rectangles share topmost coordinate 0
    std::vector<WeightedPoint> rot(pts.size());
    for (size_t i = 0; i < pts.size(); ++i) rot[i] = {pts[i].y, -pts[i].x, pts[i].w};
    std::vector<Rect> rot_rects;
    for (const Rect& r : left_rects) rot_rects.push_back({r.y_lo, r.y_hi, -r.x_hi, -r.x_lo});
    for (int i : stripe_hit(rot, rot_rects)) out.insert(i);

    std::vector<int> cover(out.begin(), out.end());
    // certify the construction
    Rat budget = 0;
    for (const Rat& v : x) budget += v;
    if (Rat((int)cover.size()) > 8 * budget)
        throw std::logic_error("rectangle cover exceeded 8x budget");
    for (int id : which) {
        bool hit = false;
        for (int i : cover)
            if (link_covers(g.links[i], cuts[id].members)) hit = true;
        if (!hit) throw std::logic_error("rectangle cover missed a cut");
    }
    return cover;
}

/// Heavy-cut covering: covers every cut with x-load above 16/eps using at
/// most (eps/2) * x(L) links (Theorem route: scale x by eps/16, apply the
/// 8x rectangle cover).
inline std::vector<int> cover_heavy_cuts(const CactusInstance& g,
                                         const std::vector<TwoCut>& cuts,
                                         const std::vector<Rat>& x, const Rat& eps) {
    Rat threshold = Rat(16) / eps;
    std::vector<int> heavy;
    for (const TwoCut& c : cuts) {
        Rat load = 0;
        for (int i = 0; i < g.link_count(); ++i)
            if (link_covers(g.links[i], c.members)) load += x[i];
        if (load > threshold) heavy.push_back(c.id);
    }
    if (heavy.empty()) return {};
    std::vector<Rat> scaled(x.size());
    for (size_t i = 0; i < x.size(); ++i) scaled[i] = x[i] * eps / 16;
    auto cover = cover_cuts_via_rectangles(g, cuts, heavy, scaled);
    Rat xl = 0;
    for (const Rat& v : x) xl += v;
    if (Rat((int)cover.size()) > eps / 2 * xl)
        throw std::logic_error("heavy cover exceeded (eps/2) x(L)");
    return cover;
}

}  // namespace cacaug
