#pragma once

#include <cacaug/cactus.hpp>

#include <random>
#include <vector>

// Shared helpers for the test suite: canned instances and brute-force oracles
// kept independent of the library's enumeration / solver code paths.

namespace testutil {

using namespace cacaug;

/// Smallest cactus: two vertices joined by a parallel edge pair.
inline CactusInstance two_cycle(std::vector<Link> links = {{0, 1}}) {
    return make_instance(2, 0, {{0, 1}}, std::move(links));
}

/// Single 4-cycle 0-1-2-3, root 0, with the spec's three unit links.
inline CactusInstance four_cycle() {
    return make_instance(4, 0, {{0, 1, 2, 3}}, {{1, 3}, {0, 2}, {1, 2}});
}

/// Chain of two 2-cycles 0-1-2 (vertices 0,1,2).
inline CactusInstance chain2(std::vector<Link> links) {
    return make_instance(3, 0, {{0, 1}, {1, 2}}, std::move(links));
}

/// Brute-force 2-cut oracle: all C without the root such that both sides are
/// connected and |delta_E(C)| == 2. Independent of enumerate_two_cuts.
inline std::vector<Bitset> brute_force_two_cuts(const CactusInstance& g) {
    std::vector<Bitset> out;
    if (g.n > 20) throw std::runtime_error("brute force cut oracle limited to n <= 20");
    for (int mask = 1; mask < (1 << g.n); ++mask) {
        if (mask & (1 << g.root)) continue;
        Bitset mem(g.n);
        for (int v = 0; v < g.n; ++v)
            if (mask & (1 << v)) mem.set(v);
        int boundary = 0;
        for (const auto& e : g.edges)
            if (mem.test(e.u) != mem.test(e.v)) ++boundary;
        if (boundary != 2) continue;
        // connectivity of both sides
        auto connected = [&](const Bitset& side) {
            auto verts = side.to_vector();
            if (verts.empty()) return false;
            Bitset vis(g.n);
            std::vector<int> stack{verts[0]};
            vis.set(verts[0]);
            while (!stack.empty()) {
                int u = stack.back();
                stack.pop_back();
                for (auto [w, e] : g.adj[u])
                    if (side.test(w) && !vis.test(w)) {
                        vis.set(w);
                        stack.push_back(w);
                    }
            }
            for (int v : verts)
                if (!vis.test(v)) return false;
            return true;
        };
        if (!connected(mem) || !connected(mem.complement())) continue;
        out.push_back(mem);
    }
    return out;
}

/// Random cactus: a tree of cycles grown by attaching random-length cycles at
/// random existing vertices. Deterministic per seed.
inline CactusInstance random_cactus(std::mt19937_64& rng, int target_n, int max_cycle_len = 5) {
    int first_len = std::uniform_int_distribution<int>(2, std::min(max_cycle_len, target_n))(rng);
    first_len = std::max(2, first_len);
    std::vector<std::vector<int>> cycles;
    std::vector<int> cyc;
    for (int i = 0; i < first_len; ++i) cyc.push_back(i);
    cycles.push_back(cyc);
    int n = first_len;
    while (n < target_n) {
        int attach = std::uniform_int_distribution<int>(0, n - 1)(rng);
        int extra = std::uniform_int_distribution<int>(1, std::max(1, max_cycle_len - 1))(rng);
        extra = std::min(extra, target_n - n);
        std::vector<int> nc{attach};
        for (int i = 0; i < extra; ++i) nc.push_back(n + i);
        n += extra;
        cycles.push_back(nc);
    }
    return make_instance(n, 0, cycles, {});
}

/// Adds random links and then covering links until feasible.
inline CactusInstance add_random_feasible_links(const CactusInstance& skel, std::mt19937_64& rng,
                                                double density, bool unit_costs = true,
                                                int max_cost = 4) {
    std::vector<Link> links;
    std::vector<Rat> costs;
    std::uniform_real_distribution<double> coin(0.0, 1.0);
    auto rand_cost = [&]() {
        if (unit_costs) return Rat(1);
        return Rat(std::uniform_int_distribution<int>(1, max_cost)(rng));
    };
    for (int u = 0; u < skel.n; ++u)
        for (int v = u + 1; v < skel.n; ++v)
            if (coin(rng) < density) {
                links.push_back({u, v});
                costs.push_back(rand_cost());
            }
    CactusInstance g = make_instance(skel.n, skel.root, skel.cycles, links, costs);
    auto cuts = enumerate_two_cuts(g);
    for (const TwoCut& c : cuts) {
        bool covered = false;
        for (const Link& l : g.links)
            if (link_covers(l, c.members)) {
                covered = true;
                break;
            }
        if (!covered) {
            auto inside = c.members.to_vector();
            Bitset outside = c.members.complement();
            auto out_list = outside.to_vector();
            int u = inside[std::uniform_int_distribution<size_t>(0, inside.size() - 1)(rng)];
            int v = out_list[std::uniform_int_distribution<size_t>(0, out_list.size() - 1)(rng)];
            g.links.push_back({u, v});
            g.cost.push_back(rand_cost());
        }
    }
    g.shadow_of.clear();
    g.finalize();
    return g;
}

inline CactusInstance random_feasible_instance(uint64_t seed, int target_n, double density = 0.25,
                                               bool unit_costs = true) {
    std::mt19937_64 rng(seed);
    CactusInstance skel = random_cactus(rng, target_n);
    return add_random_feasible_links(skel, rng, density, unit_costs);
}

}  // namespace testutil

namespace testutil {

/// Star of small chains hanging off vertex 0: several principal subcacti,
/// suitable for the k-wide rounding machinery.
inline CactusInstance random_star_skeleton(std::mt19937_64& rng, int comps, int max_chain = 3) {
    std::vector<std::vector<int>> cycles;
    int n = 1;
    for (int c = 0; c < comps; ++c) {
        int len = std::uniform_int_distribution<int>(1, max_chain)(rng);
        int prev = 0;
        for (int i = 0; i < len; ++i) {
            cycles.push_back({prev, n});
            prev = n++;
        }
    }
    return cacaug::make_instance(n, 0, cycles, {});
}

inline CactusInstance random_kwide_instance(uint64_t seed, int comps, double density = 0.3) {
    std::mt19937_64 rng(seed * 7919 + 13);
    CactusInstance skel = random_star_skeleton(rng, comps);
    return add_random_feasible_links(skel, rng, density);
}

}  // namespace testutil
