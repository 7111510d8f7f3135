#pragma once

#include <functional>
#include <optional>
#include <vector>

#include "cactus.hpp"
#include "cut_lp.hpp"
#include "exact.hpp"
#include "heavy_cover.hpp"

namespace cacaug {

/// eps fixes everything else: k = 64(8+3 eps)/eps^2, light threshold 16/eps,
/// big threshold k/2.
struct Params {
    Rat eps;
    Rat k() const { return Rat(64) * (Rat(8) + Rat(3) * eps) / (eps * eps); }
    Rat light_threshold() const { return Rat(16) / eps; }
    Rat big_threshold() const { return k() / 2; }
};

// ---------------------------------------------------------------------------
// Splitting at a 2-cut
// ---------------------------------------------------------------------------

struct SplitResult {
    ContractionResult cut_side;   // I_C: everything outside C contracted to s
    ContractionResult rest_side;  // I_{V\C}: C contracted to s
    int s_cut = -1;               // the contracted vertex in each child
    int s_rest = -1;
};

inline SplitResult split_at_cut(const CactusInstance& g, const TwoCut& cut) {
    SplitResult out;
    {
        std::vector<int> cls(g.n);
        int outside_rep = -1;
        for (int v = 0; v < g.n; ++v)
            if (!cut.members.test(v)) {
                outside_rep = v;
                break;
            }
        for (int v = 0; v < g.n; ++v) cls[v] = cut.members.test(v) ? v : outside_rep;
        out.cut_side = contract_classes(g, cls);
        out.s_cut = out.cut_side.vertex_map[outside_rep];
        // the contracted vertex becomes the root of I_C
        out.cut_side.inst.root = out.s_cut;
    }
    {
        std::vector<int> cls(g.n);
        int inside_rep = cut.members.to_vector().front();
        for (int v = 0; v < g.n; ++v) cls[v] = cut.members.test(v) ? inside_rep : v;
        out.rest_side = contract_classes(g, cls);
        out.s_rest = out.rest_side.vertex_map[inside_rep];
    }
    return out;
}

// ---------------------------------------------------------------------------
// Merging child solutions
// ---------------------------------------------------------------------------

/// Completes F_C (solution of I_C) and F_rest (solution of I_{V\C}), given as
/// parent link ids, to a solution of g. The uncovered cuts form a chain; the
/// returned extra set F obeys |F| <= |delta_L(C) cap F_C| - 1.
inline std::vector<int> merge_solutions(const CactusInstance& g,
                                        const std::vector<TwoCut>& cuts, const TwoCut& cut,
                                        const std::vector<int>& F_C,
                                        const std::vector<int>& F_rest) {
    std::vector<int> base = F_C;
    base.insert(base.end(), F_rest.begin(), F_rest.end());
    std::sort(base.begin(), base.end());
    base.erase(std::unique(base.begin(), base.end()), base.end());

    auto covered_by_set = [&](const Bitset& members, const std::vector<int>& ids) {
        for (int id : ids)
            if (link_covers(g.links[id], members)) return true;
        return false;
    };

    // uncovered cuts, normalized to the side containing both endpoints of e1
    const CactusEdge& e1 = g.edges[cut.boundary[0]];
    const CactusEdge& e2 = g.edges[cut.boundary[1]];
    std::vector<Bitset> chain;
    std::vector<int> chain_ids;
    for (const TwoCut& w : cuts) {
        if (covered_by_set(w.members, base)) continue;
        // any uncovered cut must cross C
        if (!cuts_cross(w.members, cut.members))
            throw std::logic_error("uncovered cut does not cross the split cut");
        Bitset side = w.members;
        if (!(side.test(e1.u) && side.test(e1.v))) side = side.complement();
        if (!(side.test(e1.u) && side.test(e1.v)) || side.test(e2.u) || side.test(e2.v))
            throw std::logic_error("uncovered cut boundary not split by e1/e2");
        chain.push_back(side);
        chain_ids.push_back(w.id);
    }
    // the normalized uncovered cuts must form a chain
    for (size_t i = 0; i < chain.size(); ++i)
        for (size_t j = i + 1; j < chain.size(); ++j)
            if (!chain[i].is_subset_of(chain[j]) && !chain[j].is_subset_of(chain[i]))
                throw std::logic_error("uncovered cuts do not form a chain");

    int crossing_in_FC = 0;
    for (int id : F_C)
        if (link_covers(g.links[id], cut.members)) ++crossing_in_FC;
    if ((int)chain.size() > crossing_in_FC - 1)
        throw std::logic_error("uncovered chain longer than the merge bound allows");

    // greedy completion: cover each still-uncovered cut by the smallest link id
    std::vector<int> extra;
    for (int cid : chain_ids) {
        const TwoCut& w = cuts[cid];
        if (covered_by_set(w.members, base) || covered_by_set(w.members, extra)) continue;
        int pick = -1;
        for (int i = 0; i < g.link_count() && pick == -1; ++i)
            if (link_covers(g.links[i], w.members)) pick = i;
        if (pick == -1) throw std::logic_error("merge on an infeasible instance");
        extra.push_back(pick);
    }
    if ((int)extra.size() > crossing_in_FC - 1)
        throw std::logic_error("merge bound violated");
    return extra;
}

// ---------------------------------------------------------------------------
// Finding splittable cuts / certifying k-wideness
// ---------------------------------------------------------------------------

struct SplittableScan {
    std::optional<int> cut_id;  // inclusion-wise minimal splittable cut
    int center = -1;            // certified k-wide center when no cut exists
    int wideness = -1;
};

/// Precondition: no x-heavy cuts. Returns a minimal splittable cut, or (none)
/// certifies that the instance is k-wide and reports a center.
inline SplittableScan find_splittable_cut(const CactusInstance& g,
                                          const std::vector<TwoCut>& cuts,
                                          const std::vector<Rat>& x, const Params& par) {
    Rat light = par.light_threshold();
    std::vector<char> splittable(cuts.size(), 0);
    std::vector<Rat> load(cuts.size(), Rat(0));
    for (const TwoCut& c : cuts) {
        for (int i = 0; i < g.link_count(); ++i)
            if (link_covers(g.links[i], c.members)) load[c.id] += x[i];
        if (load[c.id] > light)
            throw std::logic_error("find_splittable_cut requires all cuts light");
        if (c.members.count() == g.n - 1) continue;  // C == V \ {r}
        int terms = 0;
        for (int v : c.members.to_vector())
            if (g.is_terminal(v)) ++terms;
        if (Rat(terms) > par.big_threshold()) splittable[c.id] = 1;
    }

    SplittableScan out;
    int best = -1;
    for (const TwoCut& c : cuts) {
        if (!splittable[c.id]) continue;
        bool minimal = true;
        for (const TwoCut& d : cuts)
            if (d.id != c.id && splittable[d.id] && d.members.is_subset_of(c.members) &&
                d.members != c.members)
                minimal = false;
        if (!minimal) continue;
        if (best == -1 || c.members.count() < cuts[best].members.count()) best = c.id;
    }
    if (best != -1) {
        out.cut_id = best;
        return out;
    }

    // unsplittable => k-wide; the center is the root, or its unique neighbor
    // when the root sits on a 2-cycle whose removal leaves one component
    auto wide_at = [&](int center) { return principal_structure(g, center).wideness; };
    int w = wide_at(g.root);
    if (Rat(w) <= par.k()) {
        out.center = g.root;
        out.wideness = w;
        return out;
    }
    if (g.degree(g.root) == 2) {
        int nb = g.adj[g.root][0].first;
        int w2 = wide_at(nb);
        if (Rat(w2) <= par.k()) {
            out.center = nb;
            out.wideness = w2;
            return out;
        }
    }
    throw std::logic_error("unsplittable instance failed the k-wideness certificate");
}

// ---------------------------------------------------------------------------
// The recursive driver
// ---------------------------------------------------------------------------

using Subsolver = std::function<Solution(const CactusInstance&)>;

struct DecomposeTree {
    struct Node {
        int n = 0;
        bool leaf = false;
        std::vector<int> cut_members;  // in this node's vertex numbering
        int child_cut = -1, child_rest = -1;
        int leaf_solution_size = -1;
        int enumerated_s = -1;  // |S| chosen for the bounded-degree objective
    };
    std::vector<Node> nodes;
    int root = -1;
};

struct DecomposeOptions {
    long s_enum_cap = 6;      // practical cap on |S| enumeration (CLI-configurable)
    DecomposeTree* tree = nullptr;
};

namespace decompose_detail {

inline std::vector<int> subsets_cap_next(std::vector<int>& idx, int n, int cap) {
    // iterate subsets of {0..n-1} of size <= cap in lexicographic order;
    // returns empty when exhausted. idx holds the current subset.
    if (idx.empty()) {
        if (n == 0 || cap <= 0) return idx;
        idx = {0};
        return idx;
    }
    if (idx.back() + 1 < n && (int)idx.size() < cap) {
        idx.push_back(idx.back() + 1);
        return idx;
    }
    while (!idx.empty()) {
        if (++idx.back() < n) return idx;
        idx.pop_back();
    }
    return idx;
}

/// Approximately minimize |F| + |delta_F(s)| over solutions of `inst` by
/// enumerating small link sets S incident to s, fixing them, and calling the
/// subsolver on the residual (which stays k-wide). Falls back to a plain
/// subsolver call when no bounded S completes.
inline Solution solve_with_center_objective(const CactusInstance& inst, int s,
                                            const Subsolver& solve, const Params& par,
                                            long s_cap, int* chosen_s_size) {
    std::vector<int> s_links;
    for (int i = 0; i < inst.link_count(); ++i)
        if (inst.links[i].has_endpoint(s)) s_links.push_back(i);

    // theoretical cap (1+eps')/eps' * 16/eps with eps' = eps/4, floored into
    // the configured practical cap
    Rat epsp = par.eps / 4;
    Rat theo = (Rat(1) + epsp) / epsp * Rat(16) / par.eps;
    long cap = s_cap;
    if (theo < Rat(cap))
        cap = (BigInt(numerator(theo)) / BigInt(denominator(theo))).convert_to<long>();
    cap = std::min<long>(cap, (long)s_links.size());

    // the sub-instance with s-links removed; S gets fixed on top of it
    std::vector<int> keep;
    for (int i = 0; i < inst.link_count(); ++i)
        if (!inst.links[i].has_endpoint(s)) keep.push_back(i);

    Solution best;
    long best_objective = -1;
    std::vector<int> subset;
    while (true) {
        subsets_cap_next(subset, (int)s_links.size(), (int)cap);
        if (subset.empty()) break;
        std::vector<int> S;
        for (int j : subset) S.push_back(s_links[j]);

        CactusInstance trimmed = inst;
        trimmed.links.clear();
        trimmed.cost.clear();
        trimmed.shadow_of.clear();
        std::vector<int> trimmed_map;
        for (int i : keep) {
            trimmed.links.push_back(inst.links[i]);
            trimmed.cost.push_back(inst.cost[i]);
            trimmed_map.push_back(i);
        }
        // the fixed links S also need to exist in the trimmed instance for
        // the contraction; append them and remember to drop them from F'
        std::vector<int> fixed_local;
        for (int id : S) {
            trimmed.links.push_back(inst.links[id]);
            trimmed.cost.push_back(inst.cost[id]);
            trimmed_map.push_back(id);
            fixed_local.push_back((int)trimmed.links.size() - 1);
        }
        trimmed.finalize();
        auto resid = residual_instance(trimmed, fixed_local);
        // drop the fixed links themselves from the residual link set
        std::vector<char> is_fixed(trimmed.link_count(), 0);
        for (int id : fixed_local) is_fixed[id] = 1;

        auto rcuts = enumerate_two_cuts(resid.inst);
        bool coverable = true;
        for (const TwoCut& c : rcuts) {
            bool any = false;
            for (int i = 0; i < resid.inst.link_count() && !any; ++i)
                any = !is_fixed[resid.link_map[i]] && link_covers(resid.inst.links[i], c.members);
            if (!any) coverable = false;
        }
        if (!coverable) continue;

        CactusInstance sub = resid.inst;
        std::vector<int> sub_map;
        sub.links.clear();
        sub.cost.clear();
        sub.shadow_of.clear();
        for (int i = 0; i < resid.inst.link_count(); ++i) {
            if (is_fixed[resid.link_map[i]]) continue;
            sub.links.push_back(resid.inst.links[i]);
            sub.cost.push_back(resid.inst.cost[i]);
            sub_map.push_back(trimmed_map[resid.link_map[i]]);
        }
        sub.finalize();
        Solution part = solve(sub);
        if (!part.feasible) continue;
        std::vector<int> full = S;
        for (int i : part.links) full.push_back(sub_map[i]);
        long objective = (long)full.size() + (long)S.size();  // |F| + |delta_F(s)|
        if (best_objective == -1 || objective < best_objective) {
            best_objective = objective;
            best.feasible = true;
            best.links = full;
            std::sort(best.links.begin(), best.links.end());
            best.cost = inst.total_cost(best.links);
            if (chosen_s_size) *chosen_s_size = (int)S.size();
        }
    }
    if (best.feasible) return best;
    // fallback: plain call on the whole instance
    if (chosen_s_size) *chosen_s_size = -1;
    return solve(inst);
}

inline Solution recurse(const CactusInstance& g, const std::vector<Rat>& x, const Params& par,
                        const Subsolver& solve, const DecomposeOptions& opt, DecomposeTree* tree,
                        int* node_out) {
    auto cuts = enumerate_two_cuts(g);
    int node_id = -1;
    if (tree) {
        tree->nodes.push_back({});
        node_id = (int)tree->nodes.size() - 1;
        tree->nodes[node_id].n = g.n;
    }
    if (node_out) *node_out = node_id;

    if (cuts.empty()) {
        if (tree) tree->nodes[node_id].leaf = true;
        Solution s;
        s.feasible = true;
        return s;
    }
    auto scan = find_splittable_cut(g, cuts, x, par);
    if (!scan.cut_id) {
        Solution s = solve(g);
        if (tree) {
            tree->nodes[node_id].leaf = true;
            tree->nodes[node_id].leaf_solution_size = s.feasible ? (int)s.links.size() : -1;
        }
        return s;
    }

    const TwoCut& cut = cuts[*scan.cut_id];
    auto split = split_at_cut(g, cut);
    if (tree) tree->nodes[node_id].cut_members = cut.members.to_vector();

    // I_C with root s gets the bounded-center-degree treatment
    std::vector<Rat> x_cut(split.cut_side.inst.link_count());
    for (int i = 0; i < (int)x_cut.size(); ++i) x_cut[i] = x[split.cut_side.link_map[i]];
    int chosen_s = -1;
    Solution f_cut = solve_with_center_objective(split.cut_side.inst, split.s_cut, solve, par,
                                                 opt.s_enum_cap, &chosen_s);
    if (!f_cut.feasible) return f_cut;
    if (tree) {
        tree->nodes.push_back({});
        int c1 = (int)tree->nodes.size() - 1;
        tree->nodes[c1].n = split.cut_side.inst.n;
        tree->nodes[c1].leaf = true;
        tree->nodes[c1].leaf_solution_size = (int)f_cut.links.size();
        tree->nodes[c1].enumerated_s = chosen_s;
        tree->nodes[node_id].child_cut = c1;
    }

    std::vector<Rat> x_rest(split.rest_side.inst.link_count());
    for (int i = 0; i < (int)x_rest.size(); ++i) x_rest[i] = x[split.rest_side.link_map[i]];
    int rest_node = -1;
    Solution f_rest =
        recurse(split.rest_side.inst, x_rest, par, solve, opt, tree, &rest_node);
    if (!f_rest.feasible) return f_rest;
    if (tree) tree->nodes[node_id].child_rest = rest_node;

    // map child solutions to this instance's ids and merge
    std::vector<int> fc, fr;
    for (int i : f_cut.links) fc.push_back(split.cut_side.link_map[i]);
    for (int i : f_rest.links) fr.push_back(split.rest_side.link_map[i]);
    auto extra = merge_solutions(g, cuts, cut, fc, fr);

    std::set<int> all(fc.begin(), fc.end());
    all.insert(fr.begin(), fr.end());
    all.insert(extra.begin(), extra.end());
    Solution out;
    out.feasible = true;
    out.links.assign(all.begin(), all.end());
    out.cost = g.total_cost(out.links);
    if (!is_feasible_solution(g, cuts, out.links))
        throw std::logic_error("merged decomposition solution is infeasible");
    return out;
}

}  // namespace decompose_detail

/// Full driver: cut-LP point, heavy-cut covering, recursive split/merge with
/// the k-wide subsolver at the leaves. Always rounds (all cut families are
/// explicitly enumerated; no separation step).
inline Solution solve_decomposed(const CactusInstance& g, const Params& par,
                                 const Subsolver& subsolver,
                                 const DecomposeOptions& opt = {}) {
    auto cuts = enumerate_two_cuts(g);
    auto cov = make_coverage(g, cuts);
    auto lp = undirected_cut_lp(g, cuts, cov);
    if (lp.status != LpStatus::Optimal) {
        Solution s;
        s.feasible = false;
        s.uncovered_cut = first_uncovered_cut(cov, [&] {
            std::vector<int> all(g.link_count());
            for (int i = 0; i < g.link_count(); ++i) all[i] = i;
            return all;
        }());
        return s;
    }

    auto heavy = cover_heavy_cuts(g, cuts, lp.x, par.eps);
    auto resid = residual_instance(g, heavy);
    std::vector<Rat> x(resid.inst.link_count());
    for (int i = 0; i < resid.inst.link_count(); ++i) x[i] = lp.x[resid.link_map[i]];

    if (opt.tree) opt.tree->nodes.clear();
    int root_node = -1;
    Solution inner = decompose_detail::recurse(resid.inst, x, par, subsolver, opt, opt.tree,
                                               &root_node);
    if (opt.tree) opt.tree->root = root_node;
    if (!inner.feasible) return inner;

    std::set<int> all(heavy.begin(), heavy.end());
    for (int i : inner.links) all.insert(resid.link_map[i]);
    Solution out;
    out.feasible = true;
    out.links.assign(all.begin(), all.end());
    out.cost = g.total_cost(out.links);
    if (!is_feasible_solution(g, cuts, out.links))
        throw std::logic_error("decomposed solution is infeasible");
    return out;
}

}  // namespace cacaug
