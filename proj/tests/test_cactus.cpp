#include <catch_amalgamated.hpp>

#include <cacaug/cactus.hpp>

#include <algorithm>
#include <random>
#include <set>

#include "test_util.hpp"

using namespace cacaug;
using testutil::brute_force_two_cuts;
using testutil::random_feasible_instance;

namespace {

std::set<std::vector<int>> cut_sets(const std::vector<TwoCut>& cuts) {
    std::set<std::vector<int>> s;
    for (const auto& c : cuts) s.insert(c.members.to_vector());
    return s;
}

std::set<std::vector<int>> cut_sets(const std::vector<Bitset>& cuts) {
    std::set<std::vector<int>> s;
    for (const auto& c : cuts) s.insert(c.to_vector());
    return s;
}

}  // namespace

TEST_CASE("parse: smallest cactus") {
    auto g = parse_instance("vertices 2\nroot 0\ncycle 0 1\nlink 0 1 1\n");
    REQUIRE(g.n == 2);
    REQUIRE(g.link_count() == 1);
    auto cuts = enumerate_two_cuts(g);
    REQUIRE(cuts.size() == 1);
    REQUIRE(cuts[0].members.to_vector() == std::vector<int>{1});
}

TEST_CASE("parse: 4-cycle with three links") {
    auto g = parse_instance(
        "# comment\n"
        "vertices 4\nroot 0\ncycle 0 1 2 3\n"
        "link 1 3\nlink 0 2\nlink 1 2\n");
    REQUIRE(g.link_count() == 3);
    auto cuts = enumerate_two_cuts(g);
    REQUIRE(cuts.size() == 6);
    REQUIRE(cut_sets(cuts) == cut_sets(brute_force_two_cuts(g)));
}

TEST_CASE("parse: distinct diagnostics") {
    SECTION("edge in multiple cycles") {
        try {
            parse_instance("vertices 3\nroot 0\ncycle 0 1 2\ncycle 0 1\n");
            FAIL("expected error");
        } catch (const InstanceError& e) {
            REQUIRE(e.kind == InstanceErrorKind::EdgeInMultipleCycles);
        }
    }
    SECTION("malformed line") {
        try {
            parse_instance("vertices 2\nroot 0\ncycle 0 1\nlink 0\n");
            FAIL("expected error");
        } catch (const InstanceError& e) {
            REQUIRE(e.kind == InstanceErrorKind::MalformedLine);
        }
    }
    SECTION("disconnected cactus") {
        try {
            parse_instance("vertices 4\nroot 0\ncycle 0 1\ncycle 2 3\n");
            FAIL("expected error");
        } catch (const InstanceError& e) {
            REQUIRE(e.kind == InstanceErrorKind::Disconnected);
        }
    }
    SECTION("bad root") {
        try {
            parse_instance("vertices 2\nroot 5\ncycle 0 1\n");
            FAIL("expected error");
        } catch (const InstanceError& e) {
            REQUIRE(e.kind == InstanceErrorKind::BadRoot);
        }
    }
    SECTION("self-loop link") {
        try {
            parse_instance("vertices 2\nroot 0\ncycle 0 1\nlink 1 1\n");
            FAIL("expected error");
        } catch (const InstanceError& e) {
            REQUIRE(e.kind == InstanceErrorKind::SelfLoopLink);
        }
    }
}

TEST_CASE("round trip through the file format") {
    auto g = random_feasible_instance(99, 9, 0.3, false);
    auto h = parse_instance(write_instance(g));
    REQUIRE(h.n == g.n);
    REQUIRE(h.cycles == g.cycles);
    REQUIRE(h.link_count() == g.link_count());
    for (int i = 0; i < g.link_count(); ++i) REQUIRE(h.cost[i] == g.cost[i]);
}

TEST_CASE("two-cut enumeration matches brute force") {
    SECTION("two 2-cycles sharing vertex 0") {
        auto g = make_instance(3, 0, {{0, 1}, {0, 2}}, {});
        auto cuts = enumerate_two_cuts(g);
        REQUIRE(cuts.size() == 2);
        REQUIRE(cut_sets(cuts) == cut_sets(brute_force_two_cuts(g)));
    }
    SECTION("random cacti") {
        for (uint64_t seed = 0; seed < 25; ++seed) {
            auto g = random_feasible_instance(seed, 3 + (int)(seed % 8));
            auto cuts = enumerate_two_cuts(g);
            size_t expect = 0;
            for (const auto& cyc : g.cycles) expect += cyc.size() * (cyc.size() - 1) / 2;
            REQUIRE(cuts.size() == expect);
            REQUIRE(cut_sets(cuts) == cut_sets(brute_force_two_cuts(g)));
        }
    }
}

TEST_CASE("ancestry") {
    SECTION("root is everyone's ancestor; reflexivity") {
        auto g = testutil::four_cycle();
        for (int v = 0; v < g.n; ++v) {
            REQUIRE(is_ancestor(g, g.root, v));
            REQUIRE(is_ancestor(g, v, v));
        }
    }
    SECTION("chain of 2-cycles") {
        auto g = testutil::chain2({});
        REQUIRE(is_ancestor(g, 1, 2));
        REQUIRE_FALSE(is_ancestor(g, 2, 1));
    }
    SECTION("4-cycle has no proper ancestry between 1 and 3") {
        auto g = testutil::four_cycle();
        REQUIRE_FALSE(is_ancestor(g, 1, 3));
        REQUIRE_FALSE(is_ancestor(g, 3, 1));
    }
    SECTION("table agrees with single queries") {
        auto g = random_feasible_instance(7, 9);
        AncestryTable anc(g, g.root);
        for (int u = 0; u < g.n; ++u)
            for (int v = 0; v < g.n; ++v) REQUIRE(anc.is_ancestor(u, v) == is_ancestor(g, u, v));
    }
}

TEST_CASE("coverage matrix spot checks") {
    // CoverageMatrix vs the independent definition: remove the two boundary
    // edges, check the link has an endpoint in each component.
    std::mt19937_64 rng(2024);
    int checked = 0;
    for (uint64_t seed = 0; checked < 1000; ++seed) {
        auto g = random_feasible_instance(seed, 4 + (int)(seed % 7), 0.35);
        auto cuts = enumerate_two_cuts(g);
        auto cov = make_coverage(g, cuts);
        if (cuts.empty() || g.link_count() == 0) continue;
        for (int trial = 0; trial < 40 && checked < 1000; ++trial, ++checked) {
            int li = std::uniform_int_distribution<int>(0, g.link_count() - 1)(rng);
            int ci = std::uniform_int_distribution<int>(0, (int)cuts.size() - 1)(rng);
            const TwoCut& cut = cuts[ci];
            Bitset side =
                detail::reach_avoiding(g, g.root, cut.boundary[0], cut.boundary[1]);
            bool independent = side.test(g.links[li].u) != side.test(g.links[li].v);
            REQUIRE(cov.covers(li, ci) == independent);
        }
    }
}

TEST_CASE("crossing 2-cuts have four 2-cut corners") {
    int crossing_pairs = 0;
    for (uint64_t seed = 0; seed < 40 && crossing_pairs < 50; ++seed) {
        auto g = random_feasible_instance(seed, 5 + (int)(seed % 6));
        auto cuts = enumerate_two_cuts(g);
        auto all = cut_sets(cuts);
        for (size_t i = 0; i < cuts.size(); ++i) {
            for (size_t j = i + 1; j < cuts.size(); ++j) {
                const Bitset& A = cuts[i].members;
                const Bitset& B = cuts[j].members;
                Bitset inter = A & B;
                Bitset a_only = A.and_not(B);
                Bitset b_only = B.and_not(A);
                Bitset outside = (A | B).complement();
                if (inter.none() || a_only.none() || b_only.none() || outside.none()) continue;
                ++crossing_pairs;
                REQUIRE(all.count(inter.to_vector()) == 1);
                REQUIRE(all.count(a_only.to_vector()) == 1);
                REQUIRE(all.count(b_only.to_vector()) == 1);
                // the fourth corner contains the root; its complement is the cut
                REQUIRE(all.count(outside.complement().to_vector()) == 1);
            }
        }
    }
    REQUIRE(crossing_pairs >= 50);
}

TEST_CASE("descendant sets are 2-cuts and terminals exist below") {
    for (uint64_t seed = 0; seed < 20; ++seed) {
        auto g = random_feasible_instance(seed, 4 + (int)(seed % 8));
        auto all = cut_sets(enumerate_two_cuts(g));
        AncestryTable anc(g, g.root);
        for (int v = 0; v < g.n; ++v) {
            if (v != g.root) REQUIRE(all.count(anc.descendants(v).to_vector()) == 1);
            bool has_terminal_descendant = false;
            for (int t : anc.descendants(v).to_vector())
                if (g.is_terminal(t)) has_terminal_descendant = true;
            REQUIRE(has_terminal_descendant);
        }
    }
}

TEST_CASE("shadows") {
    SECTION("2-cycle link has no proper shadows") {
        auto g = testutil::two_cycle();
        auto closed = shadow_closure(g);
        REQUIRE(closed.link_count() == 1);
    }
    SECTION("chain link generates the two sub-links") {
        auto g = testutil::chain2({{0, 2}});
        auto closed = shadow_closure(g);
        REQUIRE(closed.link_count() == 3);
        std::set<std::pair<int, int>> pairs;
        for (const Link& l : closed.links) pairs.insert(std::minmax(l.u, l.v));
        REQUIRE(pairs == std::set<std::pair<int, int>>{{0, 1}, {0, 2}, {1, 2}});
        REQUIRE(closed.shadow_of[1] == 0);
        REQUIRE(closed.shadow_of[2] == 0);
        REQUIRE(closed.cost[1] == closed.cost[0]);
    }
    SECTION("idempotence") {
        auto g = random_feasible_instance(5, 8, 0.3);
        auto once = shadow_closure(g);
        auto twice = shadow_closure(once);
        REQUIRE(once.link_count() == twice.link_count());
    }
    SECTION("shadow coverage is a subset of the original's") {
        for (uint64_t seed = 0; seed < 10; ++seed) {
            auto g = shadow_closure(random_feasible_instance(seed, 7, 0.25));
            auto cuts = enumerate_two_cuts(g);
            auto cov = make_coverage(g, cuts);
            for (int i = 0; i < g.link_count(); ++i) {
                int orig = g.shadow_of[i];
                if (orig == i) continue;
                REQUIRE(cov.rows[i].is_subset_of(cov.rows[orig]));
            }
        }
    }
}

TEST_CASE("residual instances") {
    SECTION("empty fixed set leaves the instance unchanged") {
        auto g = testutil::four_cycle();
        auto res = residual_instance(g, {});
        REQUIRE(res.inst.n == g.n);
        REQUIRE(res.inst.link_count() == g.link_count());
    }
    SECTION("4-cycle with {0,2} fixed keeps cuts {1} and {3}") {
        auto g = testutil::four_cycle();
        auto cuts = enumerate_two_cuts(g);
        auto res = residual_instance(g, {1});  // link {0,2}
        auto rcuts = enumerate_two_cuts(res.inst);
        auto corr = residual_cut_correspondence(g, cuts, {1}, res, rcuts);
        std::set<std::vector<int>> mapped;
        for (const TwoCut& rc : rcuts) mapped.insert(cuts[corr[rc.id]].members.to_vector());
        REQUIRE(mapped == std::set<std::vector<int>>{{1}, {3}});
    }
    SECTION("covering all cuts contracts to a single vertex") {
        auto g = testutil::two_cycle();
        auto res = residual_instance(g, {0});
        REQUIRE(res.inst.n == 1);
        REQUIRE(enumerate_two_cuts(res.inst).empty());
    }
    SECTION("unknown link id is rejected") {
        auto g = testutil::two_cycle();
        REQUIRE_THROWS_AS(residual_instance(g, {7}), InstanceError);
    }
    SECTION("order independence on random instances") {
        std::mt19937_64 rng(13);
        for (uint64_t seed = 0; seed < 30; ++seed) {
            auto g = random_feasible_instance(seed, 4 + (int)(seed % 7), 0.3);
            if (g.link_count() < 2) continue;
            std::vector<int> fixed;
            for (int i = 0; i < g.link_count(); ++i)
                if (rng() % 3 == 0) fixed.push_back(i);
            auto shuffled = fixed;
            std::shuffle(shuffled.begin(), shuffled.end(), rng);
            auto a = residual_instance(g, fixed);
            auto b = residual_instance(g, shuffled);
            REQUIRE(a.inst.n == b.inst.n);
            REQUIRE(a.vertex_map == b.vertex_map);
            REQUIRE(a.link_map == b.link_map);
        }
    }
    SECTION("cut correspondence is a bijection on random instances") {
        std::mt19937_64 rng(14);
        for (uint64_t seed = 0; seed < 25; ++seed) {
            auto g = random_feasible_instance(seed, 4 + (int)(seed % 7), 0.3);
            auto cuts = enumerate_two_cuts(g);
            std::vector<int> fixed;
            for (int i = 0; i < g.link_count(); ++i)
                if (rng() % 4 == 0) fixed.push_back(i);
            auto res = residual_instance(g, fixed);
            auto rcuts = enumerate_two_cuts(res.inst);
            REQUIRE_NOTHROW(residual_cut_correspondence(g, cuts, fixed, res, rcuts));
        }
    }
    SECTION("k-wideness does not increase under contraction") {
        std::mt19937_64 rng(15);
        for (uint64_t seed = 0; seed < 25; ++seed) {
            auto g = random_feasible_instance(seed, 5 + (int)(seed % 7), 0.3);
            auto ps = principal_structure(g, g.root);
            std::vector<int> fixed;
            for (int i = 0; i < g.link_count(); ++i)
                if (rng() % 4 == 0) fixed.push_back(i);
            auto res = residual_instance(g, fixed);
            if (res.inst.n == 1) continue;
            auto ps2 = principal_structure(res.inst, res.vertex_map[g.root]);
            REQUIRE(ps2.wideness <= ps.wideness);
        }
    }
}

TEST_CASE("principal structure") {
    SECTION("star of 2-cycles: all leaf-to-leaf links are cross-links") {
        // 4 leaves hanging off root 0 by parallel pairs
        auto g = make_instance(5, 0, {{0, 1}, {0, 2}, {0, 3}, {0, 4}},
                               {{1, 2}, {2, 3}, {3, 4}, {1, 4}});
        auto ps = principal_structure(g, 0);
        REQUIRE(ps.components.size() == 4);
        for (int t : ps.terminals_per_comp) REQUIRE(t == 1);
        for (int i = 0; i < g.link_count(); ++i) REQUIRE(ps.kind[i] == LinkKind::Cross);
    }
    SECTION("links incident to the center are in-links (and up-links)") {
        auto g = make_instance(3, 0, {{0, 1}, {0, 2}}, {{0, 1}, {1, 2}});
        auto ps = principal_structure(g, 0);
        REQUIRE(ps.kind[0] == LinkKind::In);
        REQUIRE(ps.is_up[0]);
        REQUIRE(ps.kind[1] == LinkKind::Cross);
    }
    SECTION("single component: no cross-links") {
        auto g = testutil::chain2({{0, 2}, {1, 2}});
        auto ps = principal_structure(g, 0);
        REQUIRE(ps.components.size() == 1);
        for (int i = 0; i < g.link_count(); ++i) REQUIRE(ps.kind[i] == LinkKind::In);
        REQUIRE(ps.is_up[0]);
        REQUIRE(ps.is_up[1]);
    }
    SECTION("cross-links appear in exactly two link lists, in-links in one") {
        auto g = random_feasible_instance(21, 10, 0.3);
        auto ps = principal_structure(g, g.root);
        std::vector<int> appearances(g.link_count(), 0);
        for (const auto& li : ps.links_of)
            for (int id : li) appearances[id]++;
        for (int i = 0; i < g.link_count(); ++i)
            REQUIRE(appearances[i] == (ps.kind[i] == LinkKind::Cross ? 2 : 1));
    }
}
