#pragma once

#include <algorithm>
#include <map>
#include <vector>

#include "cactus.hpp"
#include "kwide.hpp"

namespace cacaug {

// ---------------------------------------------------------------------------
// Stacks: every cross-link is assigned to the terminals below its endpoints;
// each stack carries the ancestry preorder and the four-layer partition.
// ---------------------------------------------------------------------------

enum class StackLayer { Lambda0, Mu0, Lambda1, Mu1 };

struct StackEntry {
    int link = -1;
    int anchor = -1;  // the endpoint assigned to this terminal
    StackLayer layer = StackLayer::Lambda0;
};

struct StackProfile {
    int terminal = -1;
    int color = -1;                  // component index of the terminal
    std::vector<StackEntry> entries;  // bottom to top; ties by link id
    Rat lambda0, mu0, lambda1, mu1;
    std::map<int, Rat> eta;  // per color of the other endpoint
    Rat total() const { return lambda0 + mu0 + lambda1 + mu1; }
};

struct StackSystem {
    std::vector<int> terminals;
    std::vector<int> term_index;  // vertex -> index into terminals, or -1
    std::vector<int> t_of;        // vertex -> assigned terminal (lowest-index descendant)
    std::vector<StackProfile> stacks;  // per terminal
    // per link and side: stack membership; side 0 = links[].u, side 1 = links[].v
    struct SideInfo {
        int terminal = -1;  // terminal whose stack this side is on (-1 for in-links)
        int pos = -1;       // index into that stack's entries
    };
    std::vector<std::array<SideInfo, 2>> sides;

    int stack_of(int vertex) const { return term_index[vertex]; }
};

/// Builds stacks relative to the principal structure: deterministic terminal
/// assignment (lowest-index terminal descendant), ancestry preorder with
/// link-id tie-breaks, and the Lambda/M classification per anchor vertex.
inline StackSystem classify_stacks(const CactusInstance& g, const PrincipalStructure& ps,
                                   const AncestryTable& anc, const std::vector<Rat>& x) {
    StackSystem ss;
    ss.term_index.assign(g.n, -1);
    for (int v = 0; v < g.n; ++v)
        if (g.is_terminal(v)) {
            ss.term_index[v] = (int)ss.terminals.size();
            ss.terminals.push_back(v);
        }
    ss.t_of.assign(g.n, -1);
    for (int v = 0; v < g.n; ++v) {
        for (int t : anc.descendants(v).to_vector())
            if (g.is_terminal(t)) {
                ss.t_of[v] = t;
                break;  // to_vector is sorted: lowest index wins
            }
    }

    std::vector<char> on_big_cycle(g.n, 0);
    for (const auto& cyc : g.cycles)
        if (cyc.size() >= 3)
            for (int v : cyc) on_big_cycle[v] = 1;
    auto unique_terminal_below = [&](int v) {
        int count = 0;
        for (int t : anc.descendants(v).to_vector())
            if (g.is_terminal(t)) ++count;
        return count == 1;
    };

    ss.stacks.resize(ss.terminals.size());
    for (size_t k = 0; k < ss.terminals.size(); ++k) {
        ss.stacks[k].terminal = ss.terminals[k];
        ss.stacks[k].color = ps.comp_of[ss.terminals[k]];
    }
    ss.sides.assign(g.link_count(), {});

    for (int id = 0; id < g.link_count(); ++id) {
        if (ps.kind[id] != LinkKind::Cross) continue;
        for (int side = 0; side < 2; ++side) {
            int v = side == 0 ? g.links[id].u : g.links[id].v;
            int t = ss.t_of[v];
            StackEntry e;
            e.link = id;
            e.anchor = v;
            if (v == t)
                e.layer = StackLayer::Lambda0;
            else if (unique_terminal_below(v))
                e.layer = on_big_cycle[v] ? StackLayer::Lambda1 : StackLayer::Mu0;
            else
                e.layer = StackLayer::Mu1;
            ss.stacks[ss.term_index[t]].entries.push_back(e);
        }
    }

    for (size_t k = 0; k < ss.stacks.size(); ++k) {
        auto& st = ss.stacks[k];
        // bottom to top: a below b iff b's anchor is an ancestor of a's
        std::sort(st.entries.begin(), st.entries.end(),
                  [&](const StackEntry& a, const StackEntry& b) {
                      if (a.anchor != b.anchor) return anc.is_ancestor(b.anchor, a.anchor);
                      return a.link < b.link;
                  });
        st.lambda0 = st.mu0 = st.lambda1 = st.mu1 = 0;
        for (int pos = 0; pos < (int)st.entries.size(); ++pos) {
            const StackEntry& e = st.entries[pos];
            int side = g.links[e.link].u == e.anchor ? 0 : 1;
            ss.sides[e.link][side] = {st.terminal, pos};
            switch (e.layer) {
                case StackLayer::Lambda0: st.lambda0 += x[e.link]; break;
                case StackLayer::Mu0: st.mu0 += x[e.link]; break;
                case StackLayer::Lambda1: st.lambda1 += x[e.link]; break;
                case StackLayer::Mu1: st.mu1 += x[e.link]; break;
            }
            int other = g.links[e.link].other(e.anchor);
            st.eta[ps.comp_of[other]] += x[e.link];
        }
    }
    return ss;
}

/// Non-strict stack preorder: does entry a sit at-or-below entry b? (Equal
/// anchors compare both ways; the tie-broken total order is only used when a
/// construction needs a unique "lowest" element.)
inline bool stack_below(const AncestryTable& anc, const StackEntry& a, const StackEntry& b) {
    return anc.is_ancestor(b.anchor, a.anchor);
}

// ---------------------------------------------------------------------------
// Domination graphs and removable sets
// ---------------------------------------------------------------------------

struct DominationGraph {
    int n = 0;  // terminals (abstract vertices)
    struct Arc {
        int from, to;
        int link = -1;  // optional back-reference to a cactus link
    };
    std::vector<Arc> arcs;
    std::vector<std::vector<char>> dom;  // dom[a][b]: arc a dominates arc b

    bool is_dominated(int b) const {
        for (int a = 0; a < (int)arcs.size(); ++a)
            if (dom[a][b]) return true;
        return false;
    }
    int dominated_count() const {
        int c = 0;
        for (int b = 0; b < (int)arcs.size(); ++b)
            if (is_dominated(b)) ++c;
        return c;
    }
};

/// Builds the domination graph of a sampled outcome. Arc (u,t) per cross-link
/// sampled by subcactus comp(t); domination via shared terminals and the
/// stack preorder.
inline DominationGraph domination_graph(const CactusInstance& g, const PrincipalStructure& ps,
                                        const AncestryTable& anc, const StackSystem& ss,
                                        const std::vector<std::vector<int>>& sampled) {
    DominationGraph d;
    d.n = (int)ss.terminals.size();
    for (size_t i = 0; i < sampled.size(); ++i) {
        for (int id : sampled[i]) {
            if (ps.kind[id] != LinkKind::Cross) continue;
            const Link& l = g.links[id];
            int to_v = ps.comp_of[l.u] == (int)i ? l.u : l.v;
            int from_v = l.other(to_v);
            d.arcs.push_back({ss.term_index[ss.t_of[from_v]], ss.term_index[ss.t_of[to_v]],
                              id});
        }
    }
    int m = (int)d.arcs.size();
    d.dom.assign(m, std::vector<char>(m, 0));
    for (int a = 0; a < m; ++a)
        for (int b = 0; b < m; ++b) {
            if (a == b) continue;
            // a = (v,w) dominates b = (u,v): a leaves the vertex b enters
            if (d.arcs[a].from != d.arcs[b].to) continue;
            int v = ss.terminals[d.arcs[a].from];
            const auto& st = ss.stacks[ss.term_index[v]];
            auto pos_of = [&](int link) {
                for (int p = 0; p < (int)st.entries.size(); ++p)
                    if (st.entries[p].link == link) return p;
                return -1;
            };
            int pa = pos_of(d.arcs[a].link), pb = pos_of(d.arcs[b].link);
            if (pa == -1 || pb == -1) continue;
            d.dom[a][b] = stack_below(anc, st.entries[pa], st.entries[pb]) ? 1 : 0;
        }
    return d;
}

/// Exact maximum-cardinality removable set: every member must be dominated by
/// a non-member. Exhaustive over the dominated arcs (branch and bound for
/// larger inputs).
inline std::vector<int> max_removable_set(const DominationGraph& d) {
    int m = (int)d.arcs.size();
    if (m > 24) throw std::invalid_argument("max_removable_set limited to 24 arcs");
    std::vector<int> dominated;
    for (int b = 0; b < m; ++b)
        if (d.is_dominated(b)) dominated.push_back(b);
    int k = (int)dominated.size();

    auto valid = [&](uint32_t mask) {
        // mask over `dominated`: every chosen arc needs a dominator outside
        std::vector<char> in_r(m, 0);
        for (int i = 0; i < k; ++i)
            if (mask & (uint32_t{1} << i)) in_r[dominated[i]] = 1;
        for (int i = 0; i < k; ++i) {
            if (!(mask & (uint32_t{1} << i))) continue;
            int b = dominated[i];
            bool ok = false;
            for (int a = 0; a < m && !ok; ++a) ok = d.dom[a][b] && !in_r[a];
            if (!ok) return false;
        }
        return true;
    };

    std::vector<int> best;
    if (k <= 20) {
        for (uint32_t mask = 0; mask < (uint32_t{1} << k); ++mask) {
            if ((int)__builtin_popcount(mask) <= (int)best.size()) continue;
            if (!valid(mask)) continue;
            best.clear();
            for (int i = 0; i < k; ++i)
                if (mask & (uint32_t{1} << i)) best.push_back(dominated[i]);
        }
        return best;
    }
    // branch and bound on include/exclude with a size prune
    std::function<void(int, uint32_t, int)> rec = [&](int idx, uint32_t mask, int size) {
        if (size + (k - idx) <= (int)best.size()) return;
        if (idx == k) {
            if (valid(mask)) {
                best.clear();
                for (int i = 0; i < k; ++i)
                    if (mask & (uint32_t{1} << i)) best.push_back(dominated[i]);
            }
            return;
        }
        rec(idx + 1, mask | (uint32_t{1} << idx), size + 1);
        rec(idx + 1, mask, size);
    };
    rec(0, 0, 0);
    return best;
}

// ---------------------------------------------------------------------------
// Derandomization by the method of conditional expectations
// ---------------------------------------------------------------------------

/// The analysis constants: b and the four z-values, all exact rationals.
struct StackConstants {
    Rat b = Rat(21, 50);
    Rat z1() const { return -(b - Rat(1, 3)); }
    Rat z2() const { return -2 * (b - Rat(2, 5)) + Rat(1, 30); }
    Rat z3() const { return Rat(1, 2) - b; }
    Rat z4() const { return Rat(1) - b; }
    int max_path_len() const {
        // floor(1/(1-2b)), the even-path length bound
        Rat lim = Rat(1) / (Rat(1) - 2 * b);
        return (BigInt(numerator(lim)) / BigInt(denominator(lim))).convert_to<int>();
    }
};

struct DerandomizeResult {
    Solution solution;
    bool derandomized = true;
    Rat expected_phi = 0;  // E[sum |F_i| - sum_t X_t] before any fixing
    Rat realized_phi = 0;
    std::vector<int> chosen;  // decomposition index per subcactus
};

namespace stackdetail {

/// Exact conditional machinery over a BundlePoint decomposition. A color is
/// "fixed" once its pool choice is made; probabilities become indicators.
class ConditionalModel {
public:
    ConditionalModel(const CactusInstance& g, const PrincipalStructure& ps,
                     const AncestryTable& anc, const StackSystem& ss, const BundlePoint& bp,
                     long path_budget)
        : g_(g), ps_(ps), anc_(anc), ss_(ss), bp_(bp), budget_(path_budget) {
        q_ = (int)bp.decomposition.size();
        chosen_.assign(q_, -1);
        // per color, per pool entry: sorted original link ids for membership
        member_.resize(q_);
        for (int c = 0; c < q_; ++c)
            for (const auto& [p, F] : bp_.decomposition[c]) member_[c].push_back(F);
    }

    void fix(int color, int j) { chosen_[color] = j; }
    void unfix(int color) { chosen_[color] = -1; }
    bool over_budget() const { return over_budget_; }

    /// P over F_color of the event "contains all of req and none of forbid".
    Rat color_prob(int color, const std::vector<int>& req,
                   const std::vector<int>& forbid) const {
        auto eval = [&](const std::vector<int>& F) {
            for (int r : req)
                if (!std::binary_search(F.begin(), F.end(), r)) return false;
            for (int f : forbid)
                if (std::binary_search(F.begin(), F.end(), f)) return false;
            return true;
        };
        if (chosen_[color] != -1)
            return eval(member_[color][chosen_[color]]) ? Rat(1) : Rat(0);
        Rat p = 0;
        for (size_t j = 0; j < member_[color].size(); ++j)
            if (eval(member_[color][j])) p += bp_.decomposition[color][j].first;
        return p;
    }

    /// E[sum_i |F_i|] under the current fixing.
    Rat expected_sizes() const {
        Rat s = 0;
        for (int c = 0; c < q_; ++c) {
            if (chosen_[c] != -1) {
                s += Rat((int)member_[c][chosen_[c]].size());
            } else {
                for (size_t j = 0; j < member_[c].size(); ++j)
                    s += bp_.decomposition[c][j].first * Rat((int)member_[c][j].size());
            }
        }
        return s;
    }

    /// P[terminal t has an entering dominated link].
    Rat incoming_dominated_prob(int t_idx) const {
        const StackProfile& st = ss_.stacks[t_idx];
        if (st.color < 0) return 0;  // center terminal: empty stack
        Rat total = 0;
        for (int pos = 0; pos < (int)st.entries.size(); ++pos) {
            const StackEntry& in = st.entries[pos];
            Rat p_in = color_prob(st.color, {in.link}, {});
            if (p_in == 0) continue;
            // outgoing links at-or-below `in`, grouped by the sampler's color
            std::map<int, std::vector<int>> below_by_color;
            for (const StackEntry& e : st.entries) {
                if (!stack_below(anc_, e, in)) continue;
                int other = g_.links[e.link].other(e.anchor);
                below_by_color[ps_.comp_of[other]].push_back(e.link);
            }
            Rat none = 1;
            for (auto& [c, links] : below_by_color) {
                std::sort(links.begin(), links.end());
                none *= Rat(1) - color_any_prob(c, links);
            }
            total += p_in * (Rat(1) - none);
        }
        return total;
    }

    /// P over F_color of containing at least one of `links` (sorted).
    Rat color_any_prob(int color, const std::vector<int>& links) const {
        auto hit = [&](const std::vector<int>& F) {
            for (int l : links)
                if (std::binary_search(F.begin(), F.end(), l)) return true;
            return false;
        };
        if (chosen_[color] != -1)
            return hit(member_[color][chosen_[color]]) ? Rat(1) : Rat(0);
        Rat p = 0;
        for (size_t j = 0; j < member_[color].size(); ++j)
            if (hit(member_[color][j])) p += bp_.decomposition[color][j].first;
        return p;
    }

    /// E[Z_v]: enumerate candidate realizations of the path P_v (even length,
    /// 2..max_len) and weight the four case values by exact probabilities.
    Rat expected_z(int v_idx, const StackConstants& k) {
        const StackProfile& sv = ss_.stacks[v_idx];
        if (sv.color < 0) return 0;
        int max_len = k.max_path_len();
        Rat out = 0;
        // per-color constraint sets along the path
        std::map<int, std::vector<int>> req, forbid;
        PathCtx ctx{v_idx, sv.color, max_len, k, req, forbid, out, 0};
        extend_path(ctx, v_idx, -1, 0);
        return out;
    }

private:
    struct PathCtx {
        int v_idx;
        int cv;  // color of v
        int max_len;
        const StackConstants& k;
        std::map<int, std::vector<int>>& req;
        std::map<int, std::vector<int>>& forbid;
        Rat& out;
        long nodes;
    };

    /// Candidates for the next arc out of `u_idx`: entries of S_u sampled by
    /// a terminal of color != cv; when `prev_pos` >= 0 the next arc must
    /// dominate the incoming entry. Ordered by the stack total order.
    std::vector<int> out_candidates(int u_idx, int cv, int prev_pos) const {
        const StackProfile& su = ss_.stacks[u_idx];
        std::vector<int> cand;
        for (int pos = 0; pos < (int)su.entries.size(); ++pos) {
            const StackEntry& e = su.entries[pos];
            int other = g_.links[e.link].other(e.anchor);
            int sampler_color = ps_.comp_of[other];
            if (sampler_color == cv) continue;
            if (prev_pos >= 0 && !stack_below(anc_, e, su.entries[prev_pos])) continue;
            cand.push_back(pos);
        }
        return cand;
    }

    void extend_path(PathCtx& ctx, int u_idx, int prev_pos, int len) {
        if (++ctx.nodes > budget_) {
            over_budget_ = true;
            return;
        }
        const StackProfile& su = ss_.stacks[u_idx];
        auto cand = out_candidates(u_idx, ctx.cv, prev_pos);

        // Option A (only at even positive length): the path ends at u. All
        // dominating outgoing links of colors != cv must be absent.
        if (len >= 2 && len % 2 == 0) {
            std::vector<std::pair<int, int>> added;  // (color, link) to roll back
            for (int pos : cand) {
                int other = g_.links[su.entries[pos].link].other(su.entries[pos].anchor);
                int c = ps_.comp_of[other];
                ctx.forbid[c].push_back(su.entries[pos].link);
                added.push_back({c, su.entries[pos].link});
            }
            accumulate_event(ctx, u_idx, prev_pos);
            for (auto& [c, l] : added) ctx.forbid[c].pop_back();
        }
        if (len >= ctx.max_len || over_budget_) return;

        // Option B: continue along a candidate chosen as the lowest present.
        for (size_t ci = 0; ci < cand.size(); ++ci) {
            int pos = cand[ci];
            const StackEntry& e = su.entries[pos];
            int other = g_.links[e.link].other(e.anchor);
            int c_next = ps_.comp_of[other];
            int next_idx = ss_.term_index[ss_.t_of[other]];
            // require the chosen link, forbid all strictly lower candidates
            ctx.req[c_next].push_back(e.link);
            std::vector<std::pair<int, int>> added;
            for (size_t cj = 0; cj < ci; ++cj) {
                const StackEntry& low = su.entries[cand[cj]];
                int lc = ps_.comp_of[g_.links[low.link].other(low.anchor)];
                ctx.forbid[lc].push_back(low.link);
                added.push_back({lc, low.link});
            }
            // the arc enters `other`'s terminal via its stack position
            int in_pos = -1;
            const StackProfile& snext = ss_.stacks[next_idx];
            for (int p = 0; p < (int)snext.entries.size(); ++p)
                if (snext.entries[p].link == e.link) in_pos = p;
            extend_path(ctx, next_idx, in_pos, len + 1);
            ctx.req[c_next].pop_back();
            for (auto& [c, l] : added) ctx.forbid[c].pop_back();
            if (over_budget_) return;
        }
    }

    /// The path P_v ends at w (= u_idx) with incoming entry prev_pos. The
    /// path probability factorizes over colors != cv; the case value is
    /// determined by F_{cv} alone.
    void accumulate_event(PathCtx& ctx, int w_idx, int prev_pos) {
        Rat p_path = 1;
        for (auto& [c, links] : ctx.req) {
            if (links.empty()) continue;
            std::vector<int> r = links, f;
            auto itf = ctx.forbid.find(c);
            if (itf != ctx.forbid.end()) f = itf->second;
            std::sort(r.begin(), r.end());
            std::sort(f.begin(), f.end());
            p_path *= color_prob(c, r, f);
            if (p_path == 0) return;
        }
        for (auto& [c, links] : ctx.forbid) {
            if (links.empty() || ctx.req.count(c)) continue;
            std::vector<int> f = links;
            std::sort(f.begin(), f.end());
            p_path *= color_prob(c, {}, f);
            if (p_path == 0) return;
        }

        // case split over F_{cv}
        const StackProfile& sw = ss_.stacks[w_idx];
        const StackProfile& sv = ss_.stacks[ctx.v_idx];
        int v_vertex = sv.terminal;
        Rat ez = 0;
        auto add_case = [&](const Rat& p, const Rat& z) { ez += p * z; };
        auto eval_case = [&](const std::vector<int>& F) -> Rat {
            // dominating links leaving w sampled by color-cv terminals
            bool dom_to_v = false, dom_to_other = false;
            for (const StackEntry& e : sw.entries) {
                int other = g_.links[e.link].other(e.anchor);
                if (ps_.comp_of[other] != ctx.cv) continue;
                if (!std::binary_search(F.begin(), F.end(), e.link)) continue;
                if (prev_pos >= 0 && !stack_below(anc_, e, sw.entries[prev_pos])) continue;
                if (ss_.t_of[other] == v_vertex)
                    dom_to_v = true;
                else
                    dom_to_other = true;
            }
            if (dom_to_v) return ctx.k.z1();
            if (dom_to_other) return ctx.k.z2();
            // no dominating link leaves w; does anything enter v?
            for (const StackEntry& e : sv.entries)
                if (std::binary_search(F.begin(), F.end(), e.link)) return ctx.k.z3();
            return ctx.k.z4();
        };
        if (chosen_[ctx.cv] != -1) {
            add_case(Rat(1), eval_case(member_[ctx.cv][chosen_[ctx.cv]]));
        } else {
            for (size_t j = 0; j < member_[ctx.cv].size(); ++j)
                add_case(bp_.decomposition[ctx.cv][j].first, eval_case(member_[ctx.cv][j]));
        }
        ctx.out += p_path * ez;
    }

    const CactusInstance& g_;
    const PrincipalStructure& ps_;
    const AncestryTable& anc_;
    const StackSystem& ss_;
    const BundlePoint& bp_;
    long budget_;
    bool over_budget_ = false;
    int q_ = 0;
    std::vector<int> chosen_;
    std::vector<std::vector<std::vector<int>>> member_;
};

/// Realized Z_v for a concrete outcome: run the deterministic path
/// construction on the sampled arcs.
inline Rat realized_z(const CactusInstance& g, const PrincipalStructure& ps,
                      const AncestryTable& anc, const StackSystem& ss,
                      const std::vector<std::vector<int>>& sampled, int v_idx,
                      const StackConstants& k) {
    const StackProfile& sv = ss.stacks[v_idx];
    if (sv.color < 0) return 0;
    auto in_F = [&](int link, int color) {
        const auto& F = sampled[color];
        return std::find(F.begin(), F.end(), link) != F.end();
    };
    int u_idx = v_idx, prev_pos = -1, len = 0;
    while (true) {
        const StackProfile& su = ss.stacks[u_idx];
        int next_pos = -1;
        for (int pos = 0; pos < (int)su.entries.size(); ++pos) {
            const StackEntry& e = su.entries[pos];
            int other = g.links[e.link].other(e.anchor);
            int c = ps.comp_of[other];
            if (c == sv.color) continue;
            if (prev_pos >= 0 && !stack_below(anc, e, su.entries[prev_pos])) continue;
            if (!in_F(e.link, c)) continue;
            next_pos = pos;
            break;  // entries sorted: lowest first
        }
        if (next_pos == -1) break;
        if (len + 1 > k.max_path_len()) return 0;  // path too long: no event
        const StackEntry& e = su.entries[next_pos];
        int other = g.links[e.link].other(e.anchor);
        int nxt = ss.term_index[ss.t_of[other]];
        const StackProfile& sn = ss.stacks[nxt];
        int in_pos = -1;
        for (int p = 0; p < (int)sn.entries.size(); ++p)
            if (sn.entries[p].link == e.link) in_pos = p;
        u_idx = nxt;
        prev_pos = in_pos;
        ++len;
    }
    if (len == 0 || len % 2 != 0 || len > k.max_path_len()) return 0;

    // case split at w = u_idx
    const StackProfile& sw = ss.stacks[u_idx];
    bool dom_to_v = false, dom_to_other = false;
    for (const StackEntry& e : sw.entries) {
        int other = g.links[e.link].other(e.anchor);
        int c = ps.comp_of[other];
        if (c != sv.color) continue;
        if (!in_F(e.link, c)) continue;
        if (prev_pos >= 0 && !stack_below(anc, e, sw.entries[prev_pos])) continue;
        if (ss.t_of[other] == sv.terminal)
            dom_to_v = true;
        else
            dom_to_other = true;
    }
    if (dom_to_v) return k.z1();
    if (dom_to_other) return k.z2();
    for (const StackEntry& e : sv.entries)
        if (in_F(e.link, sv.color)) return k.z3();
    return k.z4();
}

inline Rat realized_phi(const CactusInstance& g, const PrincipalStructure& ps,
                        const AncestryTable& anc, const StackSystem& ss,
                        const std::vector<std::vector<int>>& sampled,
                        const StackConstants& k) {
    Rat phi = 0;
    for (const auto& F : sampled) phi += Rat((int)F.size());
    auto d = domination_graph(g, ps, anc, ss, sampled);
    for (size_t t = 0; t < ss.stacks.size(); ++t) {
        bool dominated_in = false;
        for (int b = 0; b < (int)d.arcs.size(); ++b)
            if (d.arcs[b].to == (int)t && d.is_dominated(b)) dominated_in = true;
        Rat x_t = (dominated_in ? k.b : Rat(0)) +
                  realized_z(g, ps, anc, ss, sampled, (int)t, k);
        phi -= x_t;
    }
    return phi;
}

}  // namespace stackdetail

/// Method of conditional expectations over Phi = sum |F_i| - sum_t X_t.
/// Fixes the subcactus choices one by one, never letting the conditional
/// expectation grow; the realized Phi is certified <= E[Phi] exactly.
inline DerandomizeResult derandomize_rounding(const CactusInstance& g,
                                              const PrincipalStructure& ps,
                                              const AncestryTable& anc,
                                              const std::vector<TwoCut>& cuts,
                                              const StackSystem& ss, const BundlePoint& bp,
                                              long path_budget = 200000) {
    StackConstants k;
    stackdetail::ConditionalModel model(g, ps, anc, ss, bp, path_budget);
    int q = (int)bp.decomposition.size();

    auto phi = [&]() {
        Rat e = model.expected_sizes();
        for (size_t t = 0; t < ss.stacks.size(); ++t) {
            e -= k.b * model.incoming_dominated_prob((int)t);
            e -= model.expected_z((int)t, k);
        }
        return e;
    };

    DerandomizeResult out;
    out.expected_phi = phi();
    out.chosen.assign(q, -1);

    if (model.over_budget()) {
        // fall back to best-of-N sampling, flagged non-derandomized
        out.derandomized = false;
        Solution best;
        for (uint64_t seed = 0; seed < 64; ++seed) {
            auto sampled = sample_decomposition(bp, seed);
            auto rr = reoptimize_cross(g, ps, anc, sampled);
            if (!best.feasible || rr.solution.cost < best.cost) best = rr.solution;
        }
        out.solution = best;
        return out;
    }

    for (int i = 0; i < q; ++i) {
        int best_j = -1;
        Rat best_val = 0;
        for (size_t j = 0; j < bp.decomposition[i].size(); ++j) {
            model.fix(i, (int)j);
            Rat val = phi();
            model.unfix(i);
            if (best_j == -1 || val < best_val) {
                best_j = (int)j;
                best_val = val;
            }
        }
        model.fix(i, best_j);
        out.chosen[i] = best_j;
    }

    std::vector<std::vector<int>> sampled(q);
    for (int i = 0; i < q; ++i) sampled[i] = bp.decomposition[i][out.chosen[i]].second;
    out.realized_phi = stackdetail::realized_phi(g, ps, anc, ss, sampled, k);
    if (out.realized_phi > out.expected_phi)
        throw std::logic_error("conditional expectations failed to certify the outcome");

    auto rr = reoptimize_cross(g, ps, anc, sampled);
    if (!is_feasible_solution(g, cuts, rr.solution.links))
        throw std::logic_error("derandomized rounding produced an infeasible solution");
    out.solution = rr.solution;
    return out;
}

}  // namespace cacaug
