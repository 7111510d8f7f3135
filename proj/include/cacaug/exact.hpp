#pragma once

#include <algorithm>
#include <limits>
#include <vector>

#include "cactus.hpp"
#include "simplex.hpp"

namespace cacaug {

struct Solution {
    bool feasible = false;
    std::vector<int> links;  // sorted local link ids
    Rat cost = 0;
    int uncovered_cut = -1;  // witness when infeasible
    bool optimal = true;     // false when a budget cut off the search
};

namespace exact_detail {

inline bool lex_less(const std::vector<int>& a, const std::vector<int>& b) {
    return std::lexicographical_compare(a.begin(), a.end(), b.begin(), b.end());
}

/// Cut LP restricted to the still-uncovered cuts and allowed links.
inline Rat lp_lower_bound(const CactusInstance& g, const CoverageMatrix& cov,
                          const Bitset& covered, const std::vector<char>& banned) {
    LinearProgram lp;
    std::vector<int> var_of(g.link_count(), -1);
    for (int i = 0; i < g.link_count(); ++i)
        if (!banned[i]) var_of[i] = lp.add_var(g.cost[i]);
    for (int c = 0; c < cov.cut_count; ++c) {
        if (covered.test(c)) continue;
        std::vector<std::pair<int, Rat>> row;
        for (int i = 0; i < g.link_count(); ++i)
            if (var_of[i] != -1 && cov.covers(i, c)) row.push_back({var_of[i], Rat(1)});
        lp.add_row(std::move(row), RowSense::GE, Rat(1));
    }
    auto sol = simplex_solve(lp);
    if (sol.status != LpStatus::Optimal) return Rat(-1);  // infeasible branch
    return sol.value;
}

struct BnB {
    const CactusInstance& g;
    const CoverageMatrix& cov;
    long node_budget;
    long nodes = 0;
    bool budget_hit = false;
    Rat best_cost = 0;
    bool have_best = false;
    std::vector<int> best_links;

    BnB(const CactusInstance& g_, const CoverageMatrix& cov_, long budget)
        : g(g_), cov(cov_), node_budget(budget) {}

    void offer(std::vector<int> links, const Rat& cost) {
        std::sort(links.begin(), links.end());
        if (!have_best || cost < best_cost ||
            (cost == best_cost && lex_less(links, best_links))) {
            have_best = true;
            best_cost = cost;
            best_links = std::move(links);
        }
    }

    void search(Bitset covered, std::vector<int>& chosen, Rat cost, std::vector<char>& banned) {
        if (++nodes > node_budget) {
            budget_hit = true;
            return;
        }
        // most-constrained uncovered cut
        int pick = -1, pick_options = std::numeric_limits<int>::max();
        for (int c = 0; c < cov.cut_count; ++c) {
            if (covered.test(c)) continue;
            int options = 0;
            for (int i = 0; i < g.link_count(); ++i)
                if (!banned[i] && cov.covers(i, c)) ++options;
            if (options < pick_options) {
                pick = c;
                pick_options = options;
            }
        }
        if (pick == -1) {
            offer(chosen, cost);
            return;
        }
        if (pick_options == 0) return;  // dead branch

        if (have_best) {
            Rat bound = lp_lower_bound(g, cov, covered, banned);
            if (bound < 0 || cost + bound > best_cost) return;
            if (cost + bound == best_cost && pick_options > 1) {
                // equal-cost solutions may still win the lexicographic tie;
                // keep searching only while ids can improve the tie
            }
        }

        std::vector<int> options;
        for (int i = 0; i < g.link_count(); ++i)
            if (!banned[i] && cov.covers(i, pick)) options.push_back(i);
        // child i includes options[i] and bans options[0..i-1]
        std::vector<int> newly_banned;
        for (int idx = 0; idx < (int)options.size() && !budget_hit; ++idx) {
            int link = options[idx];
            chosen.push_back(link);
            search(covered | cov.rows[link], chosen, cost + g.cost[link], banned);
            chosen.pop_back();
            banned[link] = 1;
            newly_banned.push_back(link);
        }
        for (int link : newly_banned) banned[link] = 0;
    }
};

}  // namespace exact_detail

/// Exhaustive subset minimum; ties broken by lexicographic link-id order.
/// Test oracle; requires |L| <= 20.
inline Solution solve_bruteforce(const CactusInstance& g) {
    if (g.link_count() > 20)
        throw std::invalid_argument("solve_bruteforce: instance too large (|L| > 20)");
    auto cuts = enumerate_two_cuts(g);
    auto cov = make_coverage(g, cuts);

    for (int c = 0; c < cov.cut_count; ++c) {
        bool coverable = false;
        for (int i = 0; i < g.link_count() && !coverable; ++i) coverable = cov.covers(i, c);
        if (!coverable) {
            Solution s;
            s.feasible = false;
            s.uncovered_cut = c;
            return s;
        }
    }

    Solution best;
    for (uint32_t mask = 0; mask < (uint32_t{1} << g.link_count()); ++mask) {
        Bitset covered(cov.cut_count);
        Rat cost = 0;
        std::vector<int> ids;
        for (int i = 0; i < g.link_count(); ++i)
            if (mask & (uint32_t{1} << i)) {
                covered = covered | cov.rows[i];
                cost += g.cost[i];
                ids.push_back(i);
            }
        if (covered.count() != cov.cut_count) continue;
        if (!best.feasible || cost < best.cost ||
            (cost == best.cost && exact_detail::lex_less(ids, best.links))) {
            best.feasible = true;
            best.cost = cost;
            best.links = ids;
        }
    }
    return best;
}

/// Covering branch-and-bound: branches on the links covering a
/// most-constrained uncovered cut, pruned by the exact cut-LP lower bound.
inline Solution solve_exact(const CactusInstance& g, long node_budget = 2'000'000) {
    auto cuts = enumerate_two_cuts(g);
    auto cov = make_coverage(g, cuts);

    for (int c = 0; c < cov.cut_count; ++c) {
        bool coverable = false;
        for (int i = 0; i < g.link_count() && !coverable; ++i) coverable = cov.covers(i, c);
        if (!coverable) {
            Solution s;
            s.feasible = false;
            s.uncovered_cut = c;
            return s;
        }
    }

    exact_detail::BnB bnb(g, cov, node_budget);
    // greedy incumbent: most new coverage, then cheapest, then smallest id
    {
        Bitset covered(cov.cut_count);
        std::vector<int> chosen;
        Rat cost = 0;
        while (covered.count() != cov.cut_count) {
            int best = -1, best_gain = -1;
            for (int i = 0; i < g.link_count(); ++i) {
                int gain = cov.rows[i].and_not(covered).count();
                if (gain > best_gain ||
                    (gain == best_gain && best != -1 && g.cost[i] < g.cost[best])) {
                    best = i;
                    best_gain = gain;
                }
            }
            covered = covered | cov.rows[best];
            chosen.push_back(best);
            cost += g.cost[best];
        }
        bnb.offer(chosen, cost);
    }

    Bitset covered(cov.cut_count);
    std::vector<int> chosen;
    std::vector<char> banned(g.link_count(), 0);
    bnb.search(covered, chosen, Rat(0), banned);

    Solution s;
    s.feasible = true;
    s.links = bnb.best_links;
    s.cost = bnb.best_cost;
    s.optimal = !bnb.budget_hit;
    return s;
}

// ---------------------------------------------------------------------------
// Minimality
// ---------------------------------------------------------------------------

/// Is l1 minimal with respect to l2? For every shadow s of l1 present in the
/// instance, both {s,l2}-coverage and {l2}-coverage must be strict subsets of
/// the {l1,l2}-coverage. (Shadow-complete instances only.)
inline bool is_minimal_wrt(const CactusInstance& g, const CoverageMatrix& cov, int l1, int l2) {
    Bitset pair_cov = cov.rows[l1] | cov.rows[l2];
    for (int s : shadows_of(g, l1)) {
        Bitset with_shadow = cov.rows[s] | cov.rows[l2];
        if (!(with_shadow.is_subset_of(pair_cov) && with_shadow != pair_cov)) return false;
        if (!(cov.rows[l2].is_subset_of(pair_cov) && cov.rows[l2] != pair_cov)) return false;
    }
    return true;
}

/// L'-minimality of a feasible solution F: every l' in F-and-L' is minimal
/// with respect to every other l in F.
inline bool is_Lprime_minimal(const CactusInstance& g, const CoverageMatrix& cov,
                              const std::vector<int>& F, const std::vector<char>& in_Lprime) {
    for (int lp : F) {
        if (!in_Lprime[lp]) continue;
        for (int l : F) {
            if (l == lp) continue;
            if (!is_minimal_wrt(g, cov, lp, l)) return false;
        }
    }
    return true;
}

/// Potential of the replacement loop: total count of vertices forced onto the
/// endpoints' connecting paths, summed over the solution.
inline long shadow_potential(const CactusInstance& g, const std::vector<int>& F) {
    long p = 0;
    for (int id : F)
        p += (long)mandatory_path_vertices(g, g.links[id].u, g.links[id].v).size();
    return p;
}

/// Applies omit-or-replace-by-shadow steps until the solution is
/// shadow-minimal. Each step strictly decreases shadow_potential.
inline std::vector<int> make_shadow_minimal(const CactusInstance& g, const CoverageMatrix& cov,
                                            std::vector<int> F) {
    bool changed = true;
    while (changed) {
        changed = false;
        std::sort(F.begin(), F.end());
        for (size_t i = 0; i < F.size() && !changed; ++i) {
            std::vector<int> rest;
            for (size_t j = 0; j < F.size(); ++j)
                if (j != i) rest.push_back(F[j]);
            if (cov.covered_by(rest).count() == cov.cut_count) {
                F = rest;
                changed = true;
                break;
            }
            Bitset rest_cov = cov.covered_by(rest);
            for (int s : shadows_of(g, F[i])) {
                if (g.cost[s] > g.cost[F[i]]) continue;
                if ((rest_cov | cov.rows[s]).count() == cov.cut_count) {
                    rest.push_back(s);
                    F = rest;
                    changed = true;
                    break;
                }
            }
        }
    }
    std::sort(F.begin(), F.end());
    return F;
}

}  // namespace cacaug
