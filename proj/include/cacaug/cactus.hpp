#pragma once

#include <algorithm>
#include <array>
#include <map>
#include <optional>
#include <queue>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "bitset.hpp"
#include "rational.hpp"

namespace cacaug {

// ---------------------------------------------------------------------------
// Errors
// ---------------------------------------------------------------------------

enum class InstanceErrorKind {
    MalformedLine,
    EdgeInMultipleCycles,
    Disconnected,
    BadRoot,
    BadVertex,
    SelfLoopLink,
    BadCost,
    BadCycle,
    UnknownLink,
};

class InstanceError : public std::runtime_error {
public:
    InstanceError(InstanceErrorKind k, const std::string& msg)
        : std::runtime_error(msg), kind(k) {}
    InstanceErrorKind kind;
};

// ---------------------------------------------------------------------------
// Instance model
// ---------------------------------------------------------------------------

struct Link {
    int u = -1, v = -1;  // unordered endpoints, u != v
    bool has_endpoint(int w) const { return u == w || v == w; }
    int other(int w) const { return u == w ? v : u; }
};

/// An edge of the cactus. Parallel edges are distinct (cycle, position) pairs.
struct CactusEdge {
    int u, v;
    int cycle;  // index of the unique cycle containing this edge
    int pos;    // position within the cycle: edge (cyc[pos], cyc[(pos+1)%m])
};

/// A cactus graph with a root, plus the link set with positive rational costs.
/// Immutable after construction; validation happens in finalize().
struct CactusInstance {
    int n = 0;
    int root = 0;
    std::vector<std::vector<int>> cycles;
    std::vector<Link> links;     // index in this vector == local link id
    std::vector<Rat> cost;       // per link, > 0
    std::vector<int> shadow_of;  // local id of originating link (self if original)

    // derived, filled by finalize()
    std::vector<CactusEdge> edges;
    std::vector<std::vector<std::pair<int, int>>> adj;  // vertex -> (neighbor, edge id)

    int edge_count() const { return (int)edges.size(); }
    int link_count() const { return (int)links.size(); }
    int degree(int v) const { return (int)adj[v].size(); }
    bool is_terminal(int v) const { return degree(v) == 2; }

    std::vector<int> terminals() const {
        std::vector<int> t;
        for (int v = 0; v < n; ++v)
            if (is_terminal(v)) t.push_back(v);
        return t;
    }

    Rat total_cost(const std::vector<int>& link_ids) const {
        Rat s = 0;
        for (int id : link_ids) s += cost[id];
        return s;
    }

    void finalize();
};

inline void CactusInstance::finalize() {
    if (n < 1) throw InstanceError(InstanceErrorKind::BadVertex, "instance needs at least one vertex");
    if (root < 0 || root >= n)
        throw InstanceError(InstanceErrorKind::BadRoot, "root index out of range");

    edges.clear();
    adj.assign(n, {});
    std::map<std::pair<int, int>, int> seen_in_cycle;  // unordered pair -> cycle idx
    for (int c = 0; c < (int)cycles.size(); ++c) {
        const auto& cyc = cycles[c];
        int m = (int)cyc.size();
        if (m < 2) throw InstanceError(InstanceErrorKind::BadCycle, "cycle needs at least 2 vertices");
        std::set<int> distinct(cyc.begin(), cyc.end());
        if ((int)distinct.size() != m)
            throw InstanceError(InstanceErrorKind::BadCycle, "repeated vertex within a cycle");
        for (int i = 0; i < m; ++i) {
            int u = cyc[i], v = cyc[(i + 1) % m];
            if (u < 0 || u >= n || v < 0 || v >= n)
                throw InstanceError(InstanceErrorKind::BadVertex, "cycle vertex out of range");
            if (m == 2 && i == 1) {
                // second edge of a parallel pair; same unordered pair, same cycle
            } else {
                auto key = std::minmax(u, v);
                auto [it, fresh] = seen_in_cycle.emplace(key, c);
                if (!fresh)
                    throw InstanceError(InstanceErrorKind::EdgeInMultipleCycles,
                                        "edge {" + std::to_string(key.first) + "," +
                                            std::to_string(key.second) + "} in multiple cycles");
            }
            int eid = (int)edges.size();
            edges.push_back({u, v, c, i});
            adj[u].push_back({v, eid});
            adj[v].push_back({u, eid});
        }
    }
    // also reject the same parallel pair appearing as two length-2 cycles
    {
        std::map<std::pair<int, int>, int> pair_cycles;
        for (int c = 0; c < (int)cycles.size(); ++c) {
            if (cycles[c].size() != 2) continue;
            auto key = std::minmax(cycles[c][0], cycles[c][1]);
            auto [it, fresh] = pair_cycles.emplace(key, c);
            if (!fresh)
                throw InstanceError(InstanceErrorKind::EdgeInMultipleCycles,
                                    "parallel pair appears in two cycles");
        }
    }

    // connectivity of the cycle union, spanning all vertices
    if (n > 1) {
        std::vector<char> vis(n, 0);
        std::queue<int> q;
        q.push(0);
        vis[0] = 1;
        int cnt = 1;
        while (!q.empty()) {
            int u = q.front();
            q.pop();
            for (auto [w, e] : adj[u])
                if (!vis[w]) {
                    vis[w] = 1;
                    ++cnt;
                    q.push(w);
                }
        }
        if (cnt != n)
            throw InstanceError(InstanceErrorKind::Disconnected, "cactus is not connected/spanning");
    }

    // 2-edge-connectivity: removing any single edge must keep the graph connected
    for (int e = 0; e < (int)edges.size() && n > 1; ++e) {
        std::vector<char> vis(n, 0);
        std::queue<int> q;
        q.push(0);
        vis[0] = 1;
        int cnt = 1;
        while (!q.empty()) {
            int u = q.front();
            q.pop();
            for (auto [w, eid] : adj[u]) {
                if (eid == e || vis[w]) continue;
                vis[w] = 1;
                ++cnt;
                q.push(w);
            }
        }
        if (cnt != n)
            throw InstanceError(InstanceErrorKind::Disconnected,
                                "graph is not 2-edge-connected (bridge found)");
    }

    for (const Link& l : links) {
        if (l.u < 0 || l.u >= n || l.v < 0 || l.v >= n)
            throw InstanceError(InstanceErrorKind::BadVertex, "link endpoint out of range");
        if (l.u == l.v) throw InstanceError(InstanceErrorKind::SelfLoopLink, "self-loop link");
    }
    if (cost.size() != links.size())
        throw InstanceError(InstanceErrorKind::BadCost, "cost/link count mismatch");
    for (const Rat& c : cost)
        if (c <= 0) throw InstanceError(InstanceErrorKind::BadCost, "non-positive link cost");
    if (shadow_of.empty()) {
        shadow_of.resize(links.size());
        for (int i = 0; i < (int)links.size(); ++i) shadow_of[i] = i;
    }
}

inline CactusInstance make_instance(int n, int root, std::vector<std::vector<int>> cycles,
                                    std::vector<Link> links, std::vector<Rat> costs = {}) {
    CactusInstance inst;
    inst.n = n;
    inst.root = root;
    inst.cycles = std::move(cycles);
    inst.links = std::move(links);
    if (costs.empty()) costs.assign(inst.links.size(), Rat(1));
    inst.cost = std::move(costs);
    inst.finalize();
    return inst;
}

// ---------------------------------------------------------------------------
// Instance file format
// ---------------------------------------------------------------------------
//   vertices <n>
//   root <r>
//   cycle <v1> ... <vm>        (m >= 2)
//   link <u> <v> [<num>[/<den>]]   (default cost 1)
// '#' starts a comment, blank lines ignored.

inline CactusInstance parse_instance(const std::string& text) {
    std::istringstream in(text);
    std::string line;
    int n = -1, root = -1;
    std::vector<std::vector<int>> cycles;
    std::vector<Link> links;
    std::vector<Rat> costs;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        std::istringstream ls(line);
        std::string kw;
        if (!(ls >> kw)) continue;
        auto fail = [&](const std::string& why) -> InstanceError {
            return InstanceError(InstanceErrorKind::MalformedLine,
                                 "line " + std::to_string(lineno) + ": " + why);
        };
        if (kw == "vertices") {
            if (!(ls >> n) || n < 1) throw fail("expected 'vertices <n>' with n >= 1");
        } else if (kw == "root") {
            if (!(ls >> root)) throw fail("expected 'root <r>'");
        } else if (kw == "cycle") {
            std::vector<int> cyc;
            int v;
            while (ls >> v) cyc.push_back(v);
            if (!ls.eof()) throw fail("non-integer vertex in cycle");
            if (cyc.size() < 2) throw fail("cycle needs at least 2 vertices");
            cycles.push_back(std::move(cyc));
        } else if (kw == "link") {
            int u, v;
            if (!(ls >> u >> v)) throw fail("expected 'link <u> <v> [cost]'");
            std::string coststr;
            Rat c(1);
            if (ls >> coststr) {
                auto parsed = parse_rat(coststr);
                if (!parsed || *parsed <= 0) throw fail("bad link cost '" + coststr + "'");
                c = *parsed;
            }
            links.push_back({u, v});
            costs.push_back(c);
        } else {
            throw fail("unknown keyword '" + kw + "'");
        }
    }
    if (n < 0) throw InstanceError(InstanceErrorKind::MalformedLine, "missing 'vertices' line");
    if (root < 0 || root >= n)
        throw InstanceError(InstanceErrorKind::BadRoot, "bad or missing root index");
    return make_instance(n, root, std::move(cycles), std::move(links), std::move(costs));
}

inline std::string write_instance(const CactusInstance& inst) {
    std::ostringstream out;
    out << "vertices " << inst.n << "\n";
    out << "root " << inst.root << "\n";
    for (const auto& cyc : inst.cycles) {
        out << "cycle";
        for (int v : cyc) out << " " << v;
        out << "\n";
    }
    for (int i = 0; i < inst.link_count(); ++i) {
        out << "link " << inst.links[i].u << " " << inst.links[i].v;
        if (inst.cost[i] != 1) out << " " << rat_to_string(inst.cost[i]);
        out << "\n";
    }
    return out.str();
}

// ---------------------------------------------------------------------------
// 2-cut enumeration
// ---------------------------------------------------------------------------

struct TwoCut {
    Bitset members;            // C, not containing the root; both sides connected
    std::array<int, 2> boundary{};  // the two edge ids of delta_E(C)
    int id = -1;
};

namespace detail {

/// BFS from `start`, skipping up to two edge ids; returns visited bitset.
inline Bitset reach_avoiding(const CactusInstance& g, int start, int skip1 = -1, int skip2 = -1,
                             int skip_vertex = -1) {
    Bitset vis(g.n);
    if (start == skip_vertex) return vis;
    std::queue<int> q;
    q.push(start);
    vis.set(start);
    while (!q.empty()) {
        int u = q.front();
        q.pop();
        for (auto [w, e] : g.adj[u]) {
            if (e == skip1 || e == skip2 || w == skip_vertex || vis.test(w)) continue;
            vis.set(w);
            q.push(w);
        }
    }
    return vis;
}

}  // namespace detail

/// Enumerates all 2-cuts C in C_G = {C subseteq V \ {r} : |delta_E(C)| = 2},
/// one per unordered pair of distinct edges within one cycle, in deterministic
/// (cycle, position) order. Count = sum over cycles of (m choose 2).
inline std::vector<TwoCut> enumerate_two_cuts(const CactusInstance& g) {
    std::vector<TwoCut> cuts;
    std::vector<std::vector<int>> cycle_edges(g.cycles.size());
    for (int e = 0; e < g.edge_count(); ++e) cycle_edges[g.edges[e].cycle].push_back(e);
    for (int c = 0; c < (int)g.cycles.size(); ++c) {
        const auto& es = cycle_edges[c];
        for (size_t i = 0; i < es.size(); ++i) {
            for (size_t j = i + 1; j < es.size(); ++j) {
                Bitset rootside = detail::reach_avoiding(g, g.root, es[i], es[j]);
                TwoCut cut;
                cut.members = rootside.complement();
                cut.boundary = {es[i], es[j]};
                cut.id = (int)cuts.size();
                // both sides must be connected and nonempty
                auto mem = cut.members.to_vector();
                if (mem.empty())
                    throw std::logic_error("2-cut enumeration: empty side");
                Bitset side = detail::reach_avoiding(g, mem[0], es[i], es[j]);
                if (side != cut.members)
                    throw std::logic_error("2-cut enumeration: non-root side disconnected");
                cuts.push_back(std::move(cut));
            }
        }
    }
    return cuts;
}

/// Does link l cross the vertex set `members` (exactly one endpoint inside)?
inline bool link_covers(const Link& l, const Bitset& members) {
    return members.test(l.u) != members.test(l.v);
}

// ---------------------------------------------------------------------------
// Coverage matrix: per-link bitset over two-cut ids
// ---------------------------------------------------------------------------

struct CoverageMatrix {
    std::vector<Bitset> rows;  // rows[link].test(cut) == link covers cut
    int cut_count = 0;

    bool covers(int link, int cut) const { return rows[link].test(cut); }

    /// Bitset of cuts covered by a set of links.
    Bitset covered_by(const std::vector<int>& link_ids) const {
        Bitset acc(cut_count);
        for (int id : link_ids) acc = acc | rows[id];
        return acc;
    }

    bool all_covered(const std::vector<int>& link_ids) const {
        return covered_by(link_ids).count() == cut_count;
    }
};

inline CoverageMatrix make_coverage(const CactusInstance& g, const std::vector<TwoCut>& cuts) {
    CoverageMatrix cov;
    cov.cut_count = (int)cuts.size();
    cov.rows.reserve(g.link_count());
    for (const Link& l : g.links) {
        Bitset row((int)cuts.size());
        for (const TwoCut& c : cuts)
            if (link_covers(l, c.members)) row.set(c.id);
        cov.rows.push_back(std::move(row));
    }
    return cov;
}

// ---------------------------------------------------------------------------
// Ancestry (relative to a chosen reference vertex)
// ---------------------------------------------------------------------------

/// desc(u) = {v : u lies on every v-r path} with every vertex its own
/// descendant. One deletion-BFS per vertex, memoized.
class AncestryTable {
public:
    AncestryTable() = default;
    AncestryTable(const CactusInstance& g, int r) : r_(r), desc_(g.n, Bitset(g.n)) {
        for (int u = 0; u < g.n; ++u) {
            if (u == r) {
                for (int v = 0; v < g.n; ++v) desc_[u].set(v);
            } else {
                Bitset reach = detail::reach_avoiding(g, r, -1, -1, u);
                desc_[u] = reach.complement();  // includes u itself
            }
        }
    }

    bool is_ancestor(int u, int v) const { return desc_[u].test(v); }
    const Bitset& descendants(int u) const { return desc_[u]; }
    int reference() const { return r_; }

private:
    int r_ = 0;
    std::vector<Bitset> desc_;
};

inline bool is_ancestor(const CactusInstance& g, int u, int v) {
    if (u == v || u == g.root) return true;
    Bitset reach = detail::reach_avoiding(g, g.root, -1, -1, u);
    return !reach.test(v);
}

// ---------------------------------------------------------------------------
// Shadows
// ---------------------------------------------------------------------------

/// Vertices lying on every u-v path (including u and v themselves).
inline std::vector<int> mandatory_path_vertices(const CactusInstance& g, int u, int v) {
    std::vector<int> out{u};
    for (int w = 0; w < g.n; ++w) {
        if (w == u || w == v) continue;
        Bitset reach = detail::reach_avoiding(g, u, -1, -1, w);
        if (!reach.test(v)) out.push_back(w);
    }
    if (v != u) out.push_back(v);
    return out;
}

/// Returns all shadows of link `id` that are present in the instance
/// (ids of links {a,b} != {u,v} with both endpoints on every u-v path).
inline std::vector<int> shadows_of(const CactusInstance& g, int id) {
    auto mand = mandatory_path_vertices(g, g.links[id].u, g.links[id].v);
    Bitset mset(g.n);
    for (int w : mand) mset.set(w);
    auto key = std::minmax(g.links[id].u, g.links[id].v);
    std::vector<int> out;
    for (int j = 0; j < g.link_count(); ++j) {
        if (j == id) continue;
        auto kj = std::minmax(g.links[j].u, g.links[j].v);
        if (kj == key) continue;
        if (mset.test(g.links[j].u) && mset.test(g.links[j].v)) out.push_back(j);
    }
    return out;
}

/// Closes the link set under taking shadows. Original links keep their ids;
/// each added shadow records its originating link in shadow_of and inherits
/// its cost (cheapest originator on ties).
inline CactusInstance shadow_closure(const CactusInstance& g) {
    CactusInstance out = g;
    std::map<std::pair<int, int>, int> present;  // endpoint pair -> representative id
    for (int i = 0; i < out.link_count(); ++i)
        present.emplace(std::minmax(out.links[i].u, out.links[i].v), i);

    bool grew = true;
    while (grew) {
        grew = false;
        int cur = out.link_count();
        for (int i = 0; i < cur; ++i) {
            auto mand = mandatory_path_vertices(out, out.links[i].u, out.links[i].v);
            int origin = out.shadow_of[i];
            for (size_t a = 0; a < mand.size(); ++a) {
                for (size_t b = a + 1; b < mand.size(); ++b) {
                    auto key = std::minmax(mand[a], mand[b]);
                    auto it = present.find(key);
                    if (it != present.end()) {
                        // keep the cheapest origin for an existing shadow
                        int j = it->second;
                        if (out.shadow_of[j] != j && out.cost[origin] < out.cost[out.shadow_of[j]])
                            out.shadow_of[j] = origin;
                        continue;
                    }
                    out.links.push_back({key.first, key.second});
                    out.cost.push_back(out.cost[origin]);
                    out.shadow_of.push_back(origin);
                    present.emplace(key, out.link_count() - 1);
                    grew = true;
                }
            }
        }
    }
    out.finalize();
    return out;
}

/// Maps every shadow in `link_ids` back to its originating link (dedup).
inline std::vector<int> deshadow(const CactusInstance& g, const std::vector<int>& link_ids) {
    std::set<int> out;
    for (int id : link_ids) out.insert(g.shadow_of[id]);
    return {out.begin(), out.end()};
}

// ---------------------------------------------------------------------------
// Contraction machinery (residual instances, splitting)
// ---------------------------------------------------------------------------

namespace detail {

/// Rebuilds the cycle partition of a cactus multigraph given its edge list.
/// Every non-tree edge of a DFS forest closes exactly one cycle through tree
/// edges; each tree edge must be claimed by exactly one such cycle.
inline std::vector<std::vector<int>> cycles_from_multigraph(
    int n, const std::vector<std::pair<int, int>>& edge_list) {
    std::vector<std::vector<std::pair<int, int>>> adj(n);  // (neighbor, edge id)
    for (int e = 0; e < (int)edge_list.size(); ++e) {
        auto [u, v] = edge_list[e];
        if (u == v) throw std::logic_error("self-loop in contracted multigraph");
        adj[u].push_back({v, e});
        adj[v].push_back({u, e});
    }
    // proper DFS so every non-tree edge is a back edge (ancestor-descendant)
    std::vector<int> parent(n, -1), parent_edge(n, -1), depth(n, -1);
    struct Frame {
        int v;
        size_t i;
    };
    for (int s = 0; s < n; ++s) {
        if (depth[s] != -1) continue;
        depth[s] = 0;
        std::vector<Frame> st{{s, 0}};
        while (!st.empty()) {
            Frame& f = st.back();
            if (f.i < adj[f.v].size()) {
                auto [w, e] = adj[f.v][f.i++];
                if (depth[w] != -1) continue;
                depth[w] = depth[f.v] + 1;
                parent[w] = f.v;
                parent_edge[w] = e;
                st.push_back({w, 0});
            } else {
                st.pop_back();
            }
        }
    }
    std::vector<char> is_tree(edge_list.size(), 0);
    for (int v = 0; v < n; ++v)
        if (parent_edge[v] != -1) is_tree[parent_edge[v]] = 1;

    std::vector<char> claimed(edge_list.size(), 0);
    std::vector<std::vector<int>> cycles;
    for (int e = 0; e < (int)edge_list.size(); ++e) {
        if (is_tree[e]) continue;
        auto [a, b] = edge_list[e];
        int u = depth[a] >= depth[b] ? a : b;  // deeper endpoint
        int w = depth[a] >= depth[b] ? b : a;
        std::vector<int> cyc{u};
        while (u != w) {
            int pe = parent_edge[u];
            if (pe == -1 || claimed[pe])
                throw std::logic_error("edge lies on two cycles; not a cactus");
            claimed[pe] = 1;
            u = parent[u];
            cyc.push_back(u);
        }
        if (cyc.size() < 2) throw std::logic_error("degenerate cycle in contraction");
        cycles.push_back(std::move(cyc));
    }
    for (int e = 0; e < (int)edge_list.size(); ++e)
        if (is_tree[e] && !claimed[e])
            throw std::logic_error("bridge in contracted multigraph; not a cactus");
    return cycles;
}

}  // namespace detail

/// Result of contracting vertex classes in an instance. Links with both
/// endpoints merged disappear; link_map holds surviving links' old ids.
struct ContractionResult {
    CactusInstance inst;
    std::vector<int> vertex_map;  // old vertex -> new vertex
    std::vector<int> link_map;    // new link id -> old link id
};

/// Contracts every class of `classes` (a partition id per old vertex) into a
/// single vertex. Class representatives are renumbered by smallest member.
inline ContractionResult contract_classes(const CactusInstance& g,
                                          const std::vector<int>& class_of) {
    int n = g.n;
    std::vector<int> first_of_class(n, -1);
    std::vector<int> vmap(n, -1);
    int next = 0;
    for (int v = 0; v < n; ++v) {
        int c = class_of[v];
        if (first_of_class[c] == -1) first_of_class[c] = next++;
        vmap[v] = first_of_class[c];
    }
    int nn = next;

    std::vector<std::pair<int, int>> new_edges;
    for (const auto& e : g.edges) {
        int u = vmap[e.u], v = vmap[e.v];
        if (u != v) new_edges.push_back({u, v});
    }

    CactusInstance out;
    out.n = nn;
    out.root = vmap[g.root];
    out.cycles = detail::cycles_from_multigraph(nn, new_edges);

    ContractionResult res;
    res.vertex_map = vmap;
    for (int i = 0; i < g.link_count(); ++i) {
        int u = vmap[g.links[i].u], v = vmap[g.links[i].v];
        if (u == v) continue;
        out.links.push_back({u, v});
        out.cost.push_back(g.cost[i]);
        res.link_map.push_back(i);
    }
    out.finalize();
    res.inst = std::move(out);
    return res;
}

/// Residual instance of g with respect to `fixed`: per link, contract all
/// vertices lying on every path between its endpoints (sequentially; the
/// outcome is order-independent).
struct ResidualResult {
    CactusInstance inst;
    std::vector<int> vertex_map;  // original vertex -> residual vertex
    std::vector<int> link_map;    // residual link id -> original link id
};

inline ResidualResult residual_instance(const CactusInstance& g, const std::vector<int>& fixed) {
    for (int id : fixed)
        if (id < 0 || id >= g.link_count())
            throw InstanceError(InstanceErrorKind::UnknownLink,
                                "unknown link id " + std::to_string(id));
    ResidualResult res;
    res.inst = g;
    res.vertex_map.resize(g.n);
    for (int v = 0; v < g.n; ++v) res.vertex_map[v] = v;
    res.link_map.resize(g.link_count());
    for (int i = 0; i < g.link_count(); ++i) res.link_map[i] = i;

    for (int id : fixed) {
        // locate the link in the current instance
        int cur_id = -1;
        for (int i = 0; i < res.inst.link_count(); ++i)
            if (res.link_map[i] == id) {
                cur_id = i;
                break;
            }
        if (cur_id == -1) continue;  // endpoints already merged
        const Link& l = res.inst.links[cur_id];
        auto mand = mandatory_path_vertices(res.inst, l.u, l.v);
        std::vector<int> class_of(res.inst.n);
        for (int v = 0; v < res.inst.n; ++v) class_of[v] = v;
        int tgt = *std::min_element(mand.begin(), mand.end());
        for (int v : mand) class_of[v] = tgt;
        ContractionResult step = contract_classes(res.inst, class_of);
        // compose maps
        for (int v = 0; v < g.n; ++v) res.vertex_map[v] = step.vertex_map[res.vertex_map[v]];
        std::vector<int> new_link_map(step.inst.link_count());
        for (int i = 0; i < step.inst.link_count(); ++i)
            new_link_map[i] = res.link_map[step.link_map[i]];
        res.link_map = std::move(new_link_map);
        res.inst = std::move(step.inst);
    }
    // carry shadow provenance through (restricted to surviving links)
    res.inst.shadow_of.resize(res.inst.link_count());
    for (int i = 0; i < res.inst.link_count(); ++i) res.inst.shadow_of[i] = i;
    return res;
}

/// Bijection of Lemma "residual cuts <-> uncovered cuts": for each residual
/// cut, the original vertices mapping into it form an uncovered original cut.
/// Returns residual cut id -> original cut id; throws if the bijection fails.
inline std::vector<int> residual_cut_correspondence(const CactusInstance& g,
                                                    const std::vector<TwoCut>& orig_cuts,
                                                    const std::vector<int>& fixed,
                                                    const ResidualResult& res,
                                                    const std::vector<TwoCut>& res_cuts) {
    std::vector<char> covered(orig_cuts.size(), 0);
    for (const TwoCut& c : orig_cuts)
        for (int id : fixed)
            if (link_covers(g.links[id], c.members)) covered[c.id] = 1;

    std::map<std::vector<uint64_t>, int> orig_by_members;  // cheap key: member list
    auto key_of = [](const Bitset& b) {
        std::vector<uint64_t> k;
        for (int v : b.to_vector()) k.push_back(v);
        return k;
    };
    for (const TwoCut& c : orig_cuts) orig_by_members[key_of(c.members)] = c.id;

    std::vector<int> map_out(res_cuts.size(), -1);
    std::vector<char> hit(orig_cuts.size(), 0);
    for (const TwoCut& rc : res_cuts) {
        Bitset orig_set(g.n);
        for (int v = 0; v < g.n; ++v)
            if (rc.members.test(res.vertex_map[v])) orig_set.set(v);
        auto it = orig_by_members.find(key_of(orig_set));
        if (it == orig_by_members.end())
            throw std::logic_error("residual cut does not correspond to an original cut");
        int oid = it->second;
        if (covered[oid]) throw std::logic_error("residual cut maps to a covered original cut");
        if (hit[oid]) throw std::logic_error("residual cut correspondence not injective");
        hit[oid] = 1;
        map_out[rc.id] = oid;
    }
    for (const TwoCut& c : orig_cuts)
        if (!covered[c.id] && !hit[c.id])
            throw std::logic_error("uncovered original cut missing from residual");
    return map_out;
}

// ---------------------------------------------------------------------------
// Principal structure (k-wideness, link classification)
// ---------------------------------------------------------------------------

enum class LinkKind { Cross, In };

struct PrincipalStructure {
    int center = -1;
    std::vector<Bitset> components;          // V_1..V_q (excluding the center)
    std::vector<int> comp_of;                // vertex -> component index, center -> -1
    std::vector<LinkKind> kind;              // per link
    std::vector<bool> is_up;                 // per link; up implies in
    std::vector<std::vector<int>> links_of;  // L_i: links with an endpoint in V_i
    std::vector<int> terminals_per_comp;
    int wideness = 0;  // max terminals over components

    bool is_cross(int link) const { return kind[link] == LinkKind::Cross; }
};

inline PrincipalStructure principal_structure(const CactusInstance& g, int center) {
    PrincipalStructure ps;
    ps.center = center;
    ps.comp_of.assign(g.n, -1);
    for (int v = 0; v < g.n; ++v) {
        if (v == center || ps.comp_of[v] != -1) continue;
        Bitset comp = detail::reach_avoiding(g, v, -1, -1, center);
        int ci = (int)ps.components.size();
        for (int w : comp.to_vector()) ps.comp_of[w] = ci;
        ps.components.push_back(std::move(comp));
    }
    ps.terminals_per_comp.assign(ps.components.size(), 0);
    for (int v = 0; v < g.n; ++v)
        if (v != center && g.is_terminal(v)) ps.terminals_per_comp[ps.comp_of[v]]++;
    ps.wideness = 0;
    for (int t : ps.terminals_per_comp) ps.wideness = std::max(ps.wideness, t);

    AncestryTable anc(g, center);
    ps.kind.resize(g.link_count());
    ps.is_up.assign(g.link_count(), false);
    ps.links_of.assign(ps.components.size(), {});
    for (int i = 0; i < g.link_count(); ++i) {
        const Link& l = g.links[i];
        int cu = l.u == center ? -1 : ps.comp_of[l.u];
        int cv = l.v == center ? -1 : ps.comp_of[l.v];
        if (cu != -1 && cv != -1 && cu != cv) {
            ps.kind[i] = LinkKind::Cross;
            ps.links_of[cu].push_back(i);
            ps.links_of[cv].push_back(i);
        } else {
            ps.kind[i] = LinkKind::In;
            int ci = cu != -1 ? cu : cv;  // not both -1: no self-loops
            ps.links_of[ci].push_back(i);
            ps.is_up[i] = anc.is_ancestor(l.u, l.v) || anc.is_ancestor(l.v, l.u);
        }
    }
    return ps;
}

// ---------------------------------------------------------------------------
// Feasibility helpers
// ---------------------------------------------------------------------------

/// First cut not covered by `link_ids` (as a cut id), or -1 if all covered.
inline int first_uncovered_cut(const CoverageMatrix& cov, const std::vector<int>& link_ids) {
    Bitset covered = cov.covered_by(link_ids);
    for (int c = 0; c < cov.cut_count; ++c)
        if (!covered.test(c)) return c;
    return -1;
}

inline bool is_feasible_solution(const CactusInstance& g, const std::vector<TwoCut>& cuts,
                                 const std::vector<int>& link_ids) {
    for (const TwoCut& c : cuts) {
        bool hit = false;
        for (int id : link_ids)
            if (link_covers(g.links[id], c.members)) {
                hit = true;
                break;
            }
        if (!hit) return false;
    }
    return true;
}

}  // namespace cacaug
