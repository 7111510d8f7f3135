#pragma once

#include <algorithm>
#include <vector>

#include "cactus.hpp"
#include "simplex.hpp"

namespace cacaug {

// ---------------------------------------------------------------------------
// The bidirected cut LP, its dual, and the minimal laminar dual solution.
// ---------------------------------------------------------------------------

struct DirectedLink {
    int from, to;
    int link;  // undirected link id this orientation stems from
};

/// Both orientations of every link, in link-id order.
inline std::vector<DirectedLink> directed_links(const CactusInstance& g) {
    std::vector<DirectedLink> out;
    out.reserve(2 * g.link_count());
    for (int i = 0; i < g.link_count(); ++i) {
        out.push_back({g.links[i].u, g.links[i].v, i});
        out.push_back({g.links[i].v, g.links[i].u, i});
    }
    return out;
}

inline bool enters(const DirectedLink& d, const Bitset& members) {
    return members.test(d.to) && !members.test(d.from);
}

struct DirectedLpResult {
    bool feasible = false;
    Rat value = 0;
    std::vector<Rat> x;              // per directed link
    std::vector<int> chosen_links;   // undirected ids after dropping orientation
};

/// Solves min c^T x over x(delta^-(C)) >= 1 for all 2-cuts. The extreme-point
/// optimum must be integral; a fractional one is a hard failure.
inline DirectedLpResult directed_cut_lp(const CactusInstance& g,
                                        const std::vector<TwoCut>& cuts) {
    auto dlinks = directed_links(g);
    LinearProgram lp;
    for (const auto& d : dlinks) lp.add_var(g.cost[d.link]);
    for (const TwoCut& c : cuts) {
        std::vector<std::pair<int, Rat>> row;
        for (int j = 0; j < (int)dlinks.size(); ++j)
            if (enters(dlinks[j], c.members)) row.push_back({j, Rat(1)});
        lp.add_row(std::move(row), RowSense::GE, Rat(1));
    }
    auto sol = simplex_solve(lp);
    DirectedLpResult res;
    if (sol.status != LpStatus::Optimal) return res;  // infeasible instance
    res.feasible = true;
    res.value = sol.value;
    res.x = sol.x;
    std::set<int> chosen;
    for (int j = 0; j < (int)dlinks.size(); ++j) {
        if (sol.x[j] == 0) continue;
        if (sol.x[j] != 1)
            throw std::logic_error("directed cut LP produced a fractional extreme point");
        chosen.insert(dlinks[j].link);
    }
    res.chosen_links.assign(chosen.begin(), chosen.end());
    return res;
}

/// Plain undirected cut relaxation min c^T x over x in [0,1]^L with
/// x(delta_L(C)) >= 1.
inline LpSolution undirected_cut_lp(const CactusInstance& g, const std::vector<TwoCut>& cuts,
                                    const CoverageMatrix& cov) {
    LinearProgram lp;
    for (int i = 0; i < g.link_count(); ++i) lp.add_var(g.cost[i], Rat(1));
    for (const TwoCut& c : cuts) {
        std::vector<std::pair<int, Rat>> row;
        for (int i = 0; i < g.link_count(); ++i)
            if (cov.covers(i, c.id)) row.push_back({i, Rat(1)});
        lp.add_row(std::move(row), RowSense::GE, Rat(1));
    }
    return simplex_solve(lp);
}

// ---------------------------------------------------------------------------
// Dual machinery
// ---------------------------------------------------------------------------

struct DualSolution {
    bool feasible = false;
    Rat value = 0;            // sum of y over all cuts
    std::vector<Rat> y;       // per cut id
    std::vector<int> support; // cut ids with y > 0
};

/// Dual feasibility: for every directed link, the y-load of entered cuts
/// stays within the link cost.
inline bool dual_feasible(const CactusInstance& g, const std::vector<TwoCut>& cuts,
                          const std::vector<Rat>& y) {
    for (const auto& d : directed_links(g)) {
        Rat load = 0;
        for (const TwoCut& c : cuts)
            if (enters(d, c.members)) load += y[c.id];
        if (load > g.cost[d.link]) return false;
    }
    return true;
}

inline bool cuts_cross(const Bitset& a, const Bitset& b) {
    return (a & b).any() && a.and_not(b).any() && b.and_not(a).any();
}

inline bool is_laminar_support(const std::vector<TwoCut>& cuts, const std::vector<Rat>& y) {
    std::vector<int> supp;
    for (const TwoCut& c : cuts)
        if (y[c.id] > 0) supp.push_back(c.id);
    for (size_t i = 0; i < supp.size(); ++i)
        for (size_t j = i + 1; j < supp.size(); ++j)
            if (cuts_cross(cuts[supp[i]].members, cuts[supp[j]].members)) return false;
    return true;
}

/// Minimality per the dual-improvement definition: for every C1 strictly
/// inside C2 with y_{C2} > 0, any epsilon-shift from C2 to C1 must break some
/// dual constraint. Equivalently some directed link entering C1 but not C2 is
/// tight. Returns the witness per pair, or nullopt when not minimal.
struct MinimalityWitness {
    int c1, c2;
    int tight_dlink;  // index into directed_links(g)
};

inline std::optional<std::vector<MinimalityWitness>> minimality_witnesses(
    const CactusInstance& g, const std::vector<TwoCut>& cuts, const std::vector<Rat>& y) {
    auto dlinks = directed_links(g);
    std::vector<Rat> slack(dlinks.size());
    for (size_t j = 0; j < dlinks.size(); ++j) {
        Rat load = 0;
        for (const TwoCut& c : cuts)
            if (enters(dlinks[j], c.members)) load += y[c.id];
        slack[j] = g.cost[dlinks[j].link] - load;
    }
    std::vector<MinimalityWitness> out;
    for (const TwoCut& c2 : cuts) {
        if (y[c2.id] <= 0) continue;
        for (const TwoCut& c1 : cuts) {
            if (c1.id == c2.id) continue;
            if (!(c1.members.is_subset_of(c2.members) && c1.members != c2.members)) continue;
            int witness = -1;
            for (size_t j = 0; j < dlinks.size() && witness == -1; ++j)
                if (slack[j] == 0 && enters(dlinks[j], c1.members) &&
                    !enters(dlinks[j], c2.members))
                    witness = (int)j;
            if (witness == -1) return std::nullopt;  // shift possible: not minimal
            out.push_back({c1.id, c2.id, witness});
        }
    }
    return out;
}

/// Computes the optimal dual solution that is minimal and has laminar
/// support. Stage 1 maximizes the dual objective; stage 2 minimizes
/// sum w(|C|) y_C over the optimal face for a strictly increasing, strictly
/// concave rational weight w(k) = k - k^2/(2n), which forces both properties.
inline DualSolution minimal_laminar_dual(const CactusInstance& g,
                                         const std::vector<TwoCut>& cuts,
                                         const std::vector<int>* row_perm = nullptr) {
    auto dlinks = directed_links(g);
    auto build_rows = [&](LinearProgram& lp) {
        std::vector<int> order(dlinks.size());
        for (size_t j = 0; j < dlinks.size(); ++j) order[j] = (int)j;
        if (row_perm) order = *row_perm;
        for (int j : order) {
            std::vector<std::pair<int, Rat>> row;
            for (const TwoCut& c : cuts)
                if (enters(dlinks[j], c.members)) row.push_back({c.id, Rat(1)});
            lp.add_row(std::move(row), RowSense::LE, g.cost[dlinks[j].link]);
        }
    };

    // stage 1: max sum y  ==  min -sum y
    LinearProgram lp1;
    for (size_t i = 0; i < cuts.size(); ++i) lp1.add_var(Rat(-1));
    build_rows(lp1);
    auto s1 = simplex_solve(lp1);
    DualSolution out;
    if (s1.status != LpStatus::Optimal) return out;  // only if no cuts/links degenerate
    Rat V = -s1.value;

    // stage 2: min sum w(|C|) y over the optimal face
    LinearProgram lp2;
    Rat two_n = Rat(2 * g.n);
    for (const TwoCut& c : cuts) {
        Rat k = Rat(c.members.count());
        lp2.add_var(k - k * k / two_n);
    }
    build_rows(lp2);
    {
        std::vector<std::pair<int, Rat>> eq;
        for (size_t i = 0; i < cuts.size(); ++i) eq.push_back({(int)i, Rat(1)});
        lp2.add_row(std::move(eq), RowSense::EQ, V);
    }
    auto s2 = simplex_solve(lp2);
    if (s2.status != LpStatus::Optimal)
        throw std::logic_error("dual stage 2 must be feasible on the optimal face");

    out.feasible = true;
    out.y = s2.x;
    out.value = V;
    for (const TwoCut& c : cuts)
        if (out.y[c.id] > 0) out.support.push_back(c.id);
    return out;
}

// ---------------------------------------------------------------------------
// Completing cross-links to a full solution
// ---------------------------------------------------------------------------

struct CompletionResult {
    bool feasible = false;
    std::vector<int> completion;  // original link ids, disjoint from R
    Rat cost = 0;
    Rat dual_budget = 0;  // sum of y* over cuts not crossed by R
};

/// Lemma-style completion: solve the bidirected LP on the residual instance
/// w.r.t. R and map the integral optimum back. The cost is certified against
/// the minimal laminar dual of the full instance.
inline CompletionResult complete_cross_links(const CactusInstance& g,
                                             const std::vector<TwoCut>& cuts,
                                             const DualSolution& ystar,
                                             const std::vector<int>& R) {
    CompletionResult res;
    for (const TwoCut& c : cuts) {
        bool covered = false;
        for (int id : R)
            if (link_covers(g.links[id], c.members)) covered = true;
        if (!covered) res.dual_budget += ystar.y[c.id];
    }

    auto resid = residual_instance(g, R);
    auto rcuts = enumerate_two_cuts(resid.inst);
    auto dres = directed_cut_lp(resid.inst, rcuts);
    if (!dres.feasible) return res;  // R cannot be completed

    res.feasible = true;
    for (int rid : dres.chosen_links) res.completion.push_back(resid.link_map[rid]);
    std::sort(res.completion.begin(), res.completion.end());
    res.cost = g.total_cost(res.completion);

    if (res.cost > res.dual_budget)
        throw std::logic_error("completion exceeded the dual budget certificate");
    std::vector<int> full = res.completion;
    full.insert(full.end(), R.begin(), R.end());
    if (!is_feasible_solution(g, cuts, full))
        throw std::logic_error("completion did not produce a feasible solution");
    return res;
}

}  // namespace cacaug
