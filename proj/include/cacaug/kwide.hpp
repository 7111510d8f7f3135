#pragma once

#include <algorithm>
#include <functional>
#include <queue>
#include <random>
#include <vector>

#include "cactus.hpp"
#include "exact.hpp"
#include "simplex.hpp"

namespace cacaug {

// ---------------------------------------------------------------------------
// Principal subcacti as standalone instances
// ---------------------------------------------------------------------------

/// G[V_i + center] with the center as root. Cross-links keep their inside
/// endpoint; the outside endpoint is replaced by the center (and the link is
/// marked). Sub link ids map back to original ids.
struct Subcactus {
    CactusInstance inst;
    int comp = -1;
    std::vector<int> vmap;        // original vertex -> sub vertex or -1
    std::vector<int> link_map;    // sub link id -> original link id
    std::vector<char> is_cross;   // per sub link
};

inline Subcactus extract_subcactus(const CactusInstance& g, const PrincipalStructure& ps,
                                   int i) {
    Subcactus sub;
    sub.comp = i;
    sub.vmap.assign(g.n, -1);
    std::vector<int> verts = ps.components[i].to_vector();
    verts.push_back(ps.center);
    std::sort(verts.begin(), verts.end());
    for (int k = 0; k < (int)verts.size(); ++k) sub.vmap[verts[k]] = k;

    sub.inst.n = (int)verts.size();
    sub.inst.root = sub.vmap[ps.center];
    for (const auto& cyc : g.cycles) {
        bool inside = true;
        for (int v : cyc) inside = inside && sub.vmap[v] != -1;
        if (!inside) continue;
        std::vector<int> mapped;
        for (int v : cyc) mapped.push_back(sub.vmap[v]);
        sub.inst.cycles.push_back(std::move(mapped));
    }
    for (int id : ps.links_of[i]) {
        const Link& l = g.links[id];
        int u, v;
        bool cross = ps.kind[id] == LinkKind::Cross;
        if (cross) {
            int inside_end = ps.comp_of[l.u] == i ? l.u : l.v;
            u = sub.vmap[inside_end];
            v = sub.inst.root;
        } else {
            u = sub.vmap[l.u];
            v = sub.vmap[l.v];
        }
        sub.inst.links.push_back({u, v});
        sub.inst.cost.push_back(g.cost[id]);
        sub.link_map.push_back(id);
        sub.is_cross.push_back(cross);
    }
    sub.inst.finalize();
    return sub;
}

// ---------------------------------------------------------------------------
// L_cross-minimal solution pools
// ---------------------------------------------------------------------------

struct MinimalSolutionPool {
    std::vector<std::vector<int>> solutions;  // sub link ids, sorted
    std::vector<Rat> costs;
};

/// Pairwise minimality table over the full shadow-complete instance:
/// minimal_wrt[a][b] == link a is minimal w.r.t. b (shadows and coverage both
/// taken in G, which is what L_cross-minimality quantifies over).
inline std::vector<std::vector<char>> minimal_wrt_table(const CactusInstance& g,
                                                        const CoverageMatrix& cov) {
    int m = g.link_count();
    std::vector<std::vector<char>> t(m, std::vector<char>(m, 1));
    for (int a = 0; a < m; ++a)
        for (int b = 0; b < m; ++b)
            if (a != b) t[a][b] = is_minimal_wrt(g, cov, a, b) ? 1 : 0;
    return t;
}

/// F in original link ids; cross-ness per original id.
inline bool pool_solution_is_cross_minimal(const std::vector<int>& F,
                                           const std::vector<char>& is_cross,
                                           const std::vector<std::vector<char>>& minimal_wrt) {
    for (int lp : F) {
        if (!is_cross[lp]) continue;
        for (int l : F)
            if (l != lp && !minimal_wrt[lp][l]) return false;
    }
    return true;
}

/// Exhaustively enumerates all L_cross-minimal feasible solutions of a
/// principal subcactus: feasibility over the subcactus cuts, minimality via
/// the full-instance table. Throws if the pool exceeds `cap`.
inline MinimalSolutionPool enumerate_pool(const Subcactus& sub,
                                          const std::vector<std::vector<char>>& full_table,
                                          const std::vector<char>& full_is_cross,
                                          size_t cap = 200000) {
    if (sub.inst.link_count() > 24)
        throw std::invalid_argument("pool enumeration limited to 24 links per subcactus");
    auto cuts = enumerate_two_cuts(sub.inst);
    auto cov = make_coverage(sub.inst, cuts);

    MinimalSolutionPool pool;
    int m = sub.inst.link_count();
    for (uint32_t mask = 0; mask < (uint32_t{1} << m); ++mask) {
        Bitset covered(cov.cut_count);
        std::vector<int> F, F_orig;
        for (int i = 0; i < m; ++i)
            if (mask & (uint32_t{1} << i)) {
                covered = covered | cov.rows[i];
                F.push_back(i);
                F_orig.push_back(sub.link_map[i]);
            }
        if (covered.count() != cov.cut_count) continue;
        if (!pool_solution_is_cross_minimal(F_orig, full_is_cross, full_table)) continue;
        pool.solutions.push_back(F);
        pool.costs.push_back(sub.inst.total_cost(F));
        if (pool.solutions.size() > cap)
            throw std::runtime_error("subcactus solution pool exceeded the configured cap");
    }
    return pool;
}

/// Lemma-style optimizer over P^min(G_i, L_i) for a positive objective:
/// enumerate pairwise-minimal cross-link sets X (at most one per terminal
/// ancestry, so |X| is bounded by the terminal count), prune in-links
/// breaking minimality against X, fix X and solve the residual exactly.
/// The completion never contains cross-links outside X, which makes every
/// produced X + F_X L_cross-minimal.
inline Solution optimize_cross_minimal(const Subcactus& sub,
                                        const std::vector<std::vector<char>>& full_table,
                                        const std::vector<char>& full_is_cross,
                                        const std::vector<Rat>& objective) {
    for (const Rat& c : objective)
        if (c <= 0) throw std::invalid_argument("optimize_cross_minimal needs objective > 0");
    auto table_at = [&](int a, int b) {
        return full_table[sub.link_map[a]][sub.link_map[b]];
    };
    int m = sub.inst.link_count();
    std::vector<int> cross_ids;
    for (int i = 0; i < m; ++i)
        if (sub.is_cross[i]) cross_ids.push_back(i);

    int terminal_bound = 0;
    for (int v = 0; v < sub.inst.n; ++v)
        if (v != sub.inst.root && sub.inst.is_terminal(v)) ++terminal_bound;

    Solution best;
    Rat best_obj = 0;
    auto consider = [&](const std::vector<int>& X) -> bool {
        for (int a : X)
            for (int b : X)
                if (a != b && !table_at(a, b)) return false;  // prune supersets too

        std::vector<char> keep(m, 0);
        for (int l = 0; l < m; ++l) {
            if (sub.is_cross[l]) continue;  // cross part is exactly X
            bool ok = true;
            for (int x : X)
                if (!table_at(x, l)) ok = false;
            keep[l] = ok;
        }

        CactusInstance trimmed = sub.inst;
        trimmed.links.clear();
        trimmed.cost.clear();
        trimmed.shadow_of.clear();
        std::vector<int> tmap;
        for (int l = 0; l < m; ++l)
            if (keep[l]) {
                trimmed.links.push_back(sub.inst.links[l]);
                trimmed.cost.push_back(objective[l]);
                tmap.push_back(l);
            }
        std::vector<int> fixed_local;
        for (int x : X) {
            trimmed.links.push_back(sub.inst.links[x]);
            trimmed.cost.push_back(Rat(1));
            tmap.push_back(x);
            fixed_local.push_back((int)trimmed.links.size() - 1);
        }
        trimmed.finalize();
        auto resid = residual_instance(trimmed, fixed_local);

        CactusInstance solver_inst = resid.inst;
        solver_inst.cost.clear();
        std::vector<int> smap;
        for (int i = 0; i < resid.inst.link_count(); ++i) {
            int orig = tmap[resid.link_map[i]];
            solver_inst.cost.push_back(objective[orig]);
            smap.push_back(orig);
        }
        solver_inst.shadow_of.clear();
        solver_inst.finalize();
        auto part = solve_exact(solver_inst);
        if (!part.feasible) return true;
        std::vector<int> F = X;
        for (int i : part.links) F.push_back(smap[i]);
        std::sort(F.begin(), F.end());
        std::vector<int> F_orig;
        for (int l : F) F_orig.push_back(sub.link_map[l]);
        if (!pool_solution_is_cross_minimal(F_orig, full_is_cross, full_table))
            throw std::logic_error("cross-minimal optimizer produced a non-minimal solution");
        Rat obj = 0;
        for (int l : F) obj += objective[l];
        if (!best.feasible || obj < best_obj ||
            (obj == best_obj && exact_detail::lex_less(F, best.links))) {
            best.feasible = true;
            best.links = F;
            best.cost = sub.inst.total_cost(F);
            best_obj = obj;
        }
        return true;
    };

    consider({});
    std::function<void(size_t, std::vector<int>&)> rec = [&](size_t start,
                                                             std::vector<int>& acc) {
        if ((int)acc.size() >= terminal_bound) return;
        for (size_t j = start; j < cross_ids.size(); ++j) {
            acc.push_back(cross_ids[j]);
            if (consider(acc)) rec(j + 1, acc);
            acc.pop_back();
        }
    };
    std::vector<int> acc;
    rec(0, acc);
    return best;
}

// ---------------------------------------------------------------------------
// The bundle LP over explicit pool coefficients
// ---------------------------------------------------------------------------

struct BundlePoint {
    std::vector<Rat> x;  // per original link
    // per subcactus: (coefficient, solution in original link ids)
    std::vector<std::vector<std::pair<Rat, std::vector<int>>>> decomposition;
    Rat value = 0;
    bool feasible = false;
};

/// min c^T x over x|_{L_i} in P^min(G_i, L_i) for all i (plus the redundant
/// but faithful cut rows). The decomposition is read off the coefficient
/// variables directly.
inline BundlePoint bundle_lp(const CactusInstance& g, const PrincipalStructure& ps,
                             const std::vector<Subcactus>& subs,
                             const std::vector<MinimalSolutionPool>& pools,
                             const std::vector<TwoCut>& cuts, const CoverageMatrix& cov) {
    int q = (int)subs.size();
    LinearProgram lp;
    std::vector<int> xvar(g.link_count());
    for (int i = 0; i < g.link_count(); ++i) xvar[i] = lp.add_var(g.cost[i], Rat(1));
    std::vector<std::vector<int>> pvar(q);
    for (int i = 0; i < q; ++i) {
        for (size_t j = 0; j < pools[i].solutions.size(); ++j)
            pvar[i].push_back(lp.add_var(Rat(0), Rat(1)));
        // convex combination
        std::vector<std::pair<int, Rat>> row;
        for (int v : pvar[i]) row.push_back({v, Rat(1)});
        lp.add_row(std::move(row), RowSense::EQ, Rat(1));
        // linking: x_l = sum of coefficients of pool solutions containing l
        for (int sl = 0; sl < subs[i].inst.link_count(); ++sl) {
            int orig = subs[i].link_map[sl];
            std::vector<std::pair<int, Rat>> link_row{{xvar[orig], Rat(1)}};
            for (size_t j = 0; j < pools[i].solutions.size(); ++j) {
                const auto& F = pools[i].solutions[j];
                if (std::binary_search(F.begin(), F.end(), sl))
                    link_row.push_back({pvar[i][j], Rat(-1)});
            }
            lp.add_row(std::move(link_row), RowSense::EQ, Rat(0));
        }
    }
    for (const TwoCut& c : cuts) {
        std::vector<std::pair<int, Rat>> row;
        for (int i = 0; i < g.link_count(); ++i)
            if (cov.covers(i, c.id)) row.push_back({xvar[i], Rat(1)});
        lp.add_row(std::move(row), RowSense::GE, Rat(1));
    }

    auto sol = simplex_solve(lp);
    BundlePoint out;
    if (sol.status != LpStatus::Optimal) return out;
    out.feasible = true;
    out.value = sol.value;
    out.x.resize(g.link_count());
    for (int i = 0; i < g.link_count(); ++i) out.x[i] = sol.x[xvar[i]];
    out.decomposition.resize(q);
    for (int i = 0; i < q; ++i)
        for (size_t j = 0; j < pools[i].solutions.size(); ++j) {
            if (sol.x[pvar[i][j]] == 0) continue;
            std::vector<int> orig_ids;
            for (int sl : pools[i].solutions[j]) orig_ids.push_back(subs[i].link_map[sl]);
            std::sort(orig_ids.begin(), orig_ids.end());
            out.decomposition[i].push_back({sol.x[pvar[i][j]], std::move(orig_ids)});
        }
    return out;
}

// ---------------------------------------------------------------------------
// Minimum edge cover via maximum matching (blossom algorithm)
// ---------------------------------------------------------------------------

/// Maximum matching in a general graph, O(V^3) blossom contraction.
/// Returns match[v] = partner or -1.
inline std::vector<int> max_matching(int n, const std::vector<std::pair<int, int>>& edges) {
    std::vector<std::vector<int>> adj(n);
    for (auto [u, v] : edges) {
        if (u == v) continue;
        adj[u].push_back(v);
        adj[v].push_back(u);
    }
    std::vector<int> match(n, -1), p(n), base(n);
    std::vector<char> used(n), blossom(n);

    auto lca = [&](int a, int b) {
        std::vector<char> seen(n, 0);
        while (true) {
            a = base[a];
            seen[a] = 1;
            if (match[a] == -1) break;
            a = p[match[a]];
        }
        while (true) {
            b = base[b];
            if (seen[b]) return b;
            b = p[match[b]];
        }
    };
    auto mark_path = [&](int v, int b, int child) {
        while (base[v] != b) {
            blossom[base[v]] = 1;
            blossom[base[match[v]]] = 1;
            p[v] = child;
            child = match[v];
            v = p[match[v]];
        }
    };
    auto find_path = [&](int root) -> int {
        std::fill(used.begin(), used.end(), 0);
        std::fill(p.begin(), p.end(), -1);
        for (int i = 0; i < n; ++i) base[i] = i;
        used[root] = 1;
        std::queue<int> q;
        q.push(root);
        while (!q.empty()) {
            int v = q.front();
            q.pop();
            for (int to : adj[v]) {
                if (base[v] == base[to] || match[v] == to) continue;
                if (to == root || (match[to] != -1 && p[match[to]] != -1)) {
                    int curbase = lca(v, to);
                    std::fill(blossom.begin(), blossom.end(), 0);
                    mark_path(v, curbase, to);
                    mark_path(to, curbase, v);
                    for (int i = 0; i < n; ++i)
                        if (blossom[base[i]]) {
                            base[i] = curbase;
                            if (!used[i]) {
                                used[i] = 1;
                                q.push(i);
                            }
                        }
                } else if (p[to] == -1) {
                    p[to] = v;
                    if (match[to] == -1) return to;
                    used[match[to]] = 1;
                    q.push(match[to]);
                }
            }
        }
        return -1;
    };

    for (int v = 0; v < n; ++v) {
        if (match[v] != -1) continue;
        int u = find_path(v);
        while (u != -1) {
            int pv = p[u], ppv = match[pv];
            match[u] = pv;
            match[pv] = u;
            u = ppv;
        }
    }
    return match;
}

/// Minimum cardinality edge cover: a maximum matching plus one incident edge
/// per unmatched vertex. |cover| = n - |matching| (Gallai), asserted.
inline std::vector<std::pair<int, int>> min_edge_cover(
    int n, const std::vector<std::pair<int, int>>& edges) {
    std::vector<std::vector<int>> adj(n);
    for (int e = 0; e < (int)edges.size(); ++e) {
        adj[edges[e].first].push_back(e);
        adj[edges[e].second].push_back(e);
    }
    for (int v = 0; v < n; ++v)
        if (adj[v].empty())
            throw std::invalid_argument("min_edge_cover: isolated vertex");
    auto match = max_matching(n, edges);
    int matched_pairs = 0;
    std::vector<std::pair<int, int>> cover;
    for (int v = 0; v < n; ++v) {
        if (match[v] > v) {
            cover.push_back({v, match[v]});
            ++matched_pairs;
        } else if (match[v] == -1) {
            int e = *std::min_element(adj[v].begin(), adj[v].end());
            auto [a, b] = edges[e];
            cover.push_back({std::min(a, b), std::max(a, b)});
        }
    }
    if ((int)cover.size() != n - matched_pairs)
        throw std::logic_error("edge cover size disagrees with the Gallai identity");
    return cover;
}

// ---------------------------------------------------------------------------
// Algorithm: sample a pool solution per subcactus, replace the sampled
// cross-links by a minimum edge cover.
// ---------------------------------------------------------------------------

inline uint64_t splitmix64(uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d649bb133111ebULL;
    return x ^ (x >> 31);
}

/// Samples one pool solution per subcactus with the decomposition
/// probabilities; counter-based per-subcactus seeding keeps runs reproducible
/// and independent across subcacti.
inline std::vector<std::vector<int>> sample_decomposition(const BundlePoint& bp,
                                                          uint64_t seed) {
    std::vector<std::vector<int>> out(bp.decomposition.size());
    for (size_t i = 0; i < bp.decomposition.size(); ++i) {
        std::mt19937_64 rng(splitmix64(seed ^ splitmix64(i + 1)));
        // draw u uniform in [0,1) as a rational with 64-bit resolution
        Rat u(BigInt(rng()), BigInt("18446744073709551616"));
        Rat acc = 0;
        const auto& dec = bp.decomposition[i];
        size_t pick = dec.size() - 1;
        for (size_t j = 0; j < dec.size(); ++j) {
            acc += dec[j].first;
            if (u < acc) {
                pick = j;
                break;
            }
        }
        out[i] = dec[pick].second;
    }
    return out;
}

struct RoundingResult {
    Solution solution;
    int sampled_cross = 0;   // total cross-links over sampled solutions
    int reoptimized_cross = 0;  // |F_cross| after the edge-cover step
};

/// The edge-cover reoptimization: vertex set A of cross arrowheads plus the
/// auxiliary vertices, one edge per cross-link, solved exactly.
inline RoundingResult reoptimize_cross(const CactusInstance& g, const PrincipalStructure& ps,
                                       const AncestryTable& anc,
                                       const std::vector<std::vector<int>>& sampled) {
    RoundingResult out;
    std::vector<int> in_links;
    std::vector<int> arrowheads;  // endpoints inside the sampling subcactus
    for (size_t i = 0; i < sampled.size(); ++i) {
        for (int id : sampled[i]) {
            if (ps.kind[id] == LinkKind::Cross) {
                ++out.sampled_cross;
                const Link& l = g.links[id];
                arrowheads.push_back(ps.comp_of[l.u] == (int)i ? l.u : l.v);
            } else {
                in_links.push_back(id);
            }
        }
    }
    // keep only ancestry-minimal arrowheads (drop strict ancestors)
    std::sort(arrowheads.begin(), arrowheads.end());
    arrowheads.erase(std::unique(arrowheads.begin(), arrowheads.end()), arrowheads.end());
    std::vector<int> A;
    for (int a : arrowheads) {
        bool has_strict_descendant = false;
        for (int b : arrowheads)
            if (b != a && anc.is_ancestor(a, b)) has_strict_descendant = true;
        if (!has_strict_descendant) A.push_back(a);
    }

    // a_u: the unique A-vertex whose descendant set contains u, else rbar
    int nA = (int)A.size();
    int rbar = nA, vaux = nA + 1;
    std::vector<int> a_of(g.n, rbar);
    for (int k = 0; k < nA; ++k)
        for (int u : anc.descendants(A[k]).to_vector()) a_of[u] = k;

    std::vector<std::pair<int, int>> edges;
    std::vector<int> edge_link;  // representative link per edge
    std::map<std::pair<int, int>, int> edge_idx;
    for (int id = 0; id < g.link_count(); ++id) {
        if (ps.kind[id] != LinkKind::Cross) continue;
        int au = a_of[g.links[id].u], aw = a_of[g.links[id].v];
        if (au == aw) continue;  // both outside all descendant sets
        auto key = std::minmax(au, aw);
        auto it = edge_idx.find(key);
        if (it == edge_idx.end()) {
            edge_idx[key] = (int)edges.size();
            edges.push_back(key);
            edge_link.push_back(id);
        }
    }
    edges.push_back({rbar, vaux});
    edge_link.push_back(-1);

    std::vector<int> f_cross;
    if (nA > 0) {
        auto cover = min_edge_cover(nA + 2, edges);
        for (auto [a, b] : cover) {
            auto it = edge_idx.find({a, b});
            if (it != edge_idx.end()) f_cross.push_back(edge_link[it->second]);
        }
    }
    out.reoptimized_cross = (int)f_cross.size();

    std::set<int> all(in_links.begin(), in_links.end());
    all.insert(f_cross.begin(), f_cross.end());
    out.solution.feasible = true;
    out.solution.links.assign(all.begin(), all.end());
    out.solution.cost = g.total_cost(out.solution.links);
    return out;
}

/// Algorithm entry point: sample, reoptimize cross-links, return the union
/// with the sampled in-links. Always feasible.
inline RoundingResult sample_and_reoptimize(const CactusInstance& g,
                                            const PrincipalStructure& ps,
                                            const AncestryTable& anc,
                                            const std::vector<TwoCut>& cuts,
                                            const BundlePoint& bp, uint64_t seed) {
    auto sampled = sample_decomposition(bp, seed);
    auto out = reoptimize_cross(g, ps, anc, sampled);
    if (!is_feasible_solution(g, cuts, out.solution.links))
        throw std::logic_error("rounding produced an infeasible solution");
    return out;
}

}  // namespace cacaug
