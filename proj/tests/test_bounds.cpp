#include <catch_amalgamated.hpp>

#include <cacaug/bounds.hpp>

#include <cmath>
#include <random>

using namespace cacaug::bounds;

TEST_CASE("f and g identities") {
    REQUIRE(eval_f(0) == 0.0);
    REQUIRE(eval_g(0, 0, 0, 0) == 0.0);
    REQUIRE(std::abs(eval_f(1) - 0.36787944117144233) < 1e-12);
    // g(0,0,0,z) collapses to f(z)
    for (int i = 1; i <= 10; ++i) {
        double zz = i / 10.0;
        REQUIRE(std::abs(eval_g(0, 0, 0, zz) - eval_f(zz)) < 1e-12);
    }
    // the closed form agrees with the stacked-integral form
    std::mt19937_64 rng(8);
    std::uniform_real_distribution<double> u(0, 1);
    for (int t = 0; t < 2000; ++t) {
        double v[4] = {u(rng), u(rng), u(rng), u(rng)};
        double s = v[0] + v[1] + v[2] + v[3];
        if (s > 1) continue;
        REQUIRE(std::abs(eval_g(v[0], v[1], v[2], v[3]) -
                         eval_g_integral_form(v[0], v[1], v[2], v[3])) < 1e-12);
        REQUIRE(eval_g(v[0], v[1], v[2], v[3]) >= -1e-12);
    }
}

TEST_CASE("gain is non-negative on the domain") {
    std::mt19937_64 rng(9);
    std::uniform_real_distribution<double> u(0, 1);
    for (int t = 0; t < 5000; ++t) {
        double v[4] = {u(rng), u(rng), u(rng), u(rng)};
        double s = v[0] + v[1] + v[2] + v[3];
        if (s > 1) continue;
        double eta = u(rng) * s;
        REQUIRE(eval_gain(v[0], v[1], v[2], v[3], eta) >= -1e-12);
    }
}

TEST_CASE("h2 is continuous at its three breakpoints") {
    std::mt19937_64 rng(10);
    std::uniform_real_distribution<double> u(0, 0.33);
    for (int t = 0; t < 300; ++t) {
        double l0 = u(rng), m0 = u(rng), l1 = u(rng), m1 = u(rng);
        REQUIRE(std::abs(eval_ha(m1) - eval_hb(l1, m1, m1)) < 1e-9);
        REQUIRE(std::abs(eval_hb(l1, m1, m1 + l1) - eval_hc(l1, m1, m1 + l1)) < 1e-9);
        REQUIRE(std::abs(eval_hc(l1, m1, m1 + l1 + m0) -
                         eval_hd(l0, m0, l1, m1, m1 + l1 + m0)) < 1e-9);
    }
}

TEST_CASE("z-values for b = 0.42 and the path-length constant") {
    ZValues z(0.42);
    REQUIRE(std::abs(z.z1 - (-(0.42 - 1.0 / 3))) < 1e-15);
    REQUIRE(std::abs(z.z2 - (-2 * (0.42 - 0.4) + 1.0 / 30)) < 1e-15);
    REQUIRE(std::abs(z.z3 - 0.08) < 1e-15);
    REQUIRE(std::abs(z.z4 - 0.58) < 1e-15);
    REQUIRE(z.z1 <= z.z2);
    REQUIRE(z.z2 <= 0.0);
    REQUIRE(0.0 <= z.z3);
    REQUIRE(z.z3 <= z.z4);
    REQUIRE(std::abs(1.0 / (1 - 2 * 0.42) - 6.25) < 1e-12);
}

TEST_CASE("g convexity and g >= f on a grid (fast variant)") {
    REQUIRE(g_min_second_difference(12) >= -1e-9);
    REQUIRE(g_minus_f_minimum(12) >= -1e-9);
}

TEST_CASE("z_part_min matches sampling") {
    ZValues z(0.42);
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> u(0, 1);
    for (int t = 0; t < 200; ++t) {
        double e0 = u(rng), e1 = u(rng);
        if (e0 > e1) std::swap(e0, e1);
        double exact = z_part_min(z, e0, e1);
        double sampled = 1e18;
        for (int k = 0; k < 4000; ++k) {
            double eta = e0 + (e1 - e0) * u(rng);
            double svw = eta * u(rng);
            double xsv = svw + (1 - svw) * u(rng);
            sampled = std::min(sampled, z_part(z, eta, svw, xsv));
        }
        REQUIRE(exact <= sampled + 1e-9);
        REQUIRE(exact >= sampled - 0.15);  // sampling cannot be much below
    }
}

TEST_CASE("b-condition: eta = 0 slice is trivially non-negative") {
    for (double l0 : {0.0, 0.3, 0.7})
        for (double m0 : {0.0, 0.2}) {
            double v = b_condition_value(0.42, l0, m0, 0.1, 0.0, 0.0);
            REQUIRE(v >= -1e-12);
        }
}

TEST_CASE("b-condition: quick certification at a coarse tolerance") {
    // the acceptance suite runs the full certification; keep a fast smoke
    // check here with a small budget
    BoundParams par;
    par.b = 0.42;
    par.grid = 64;
    par.tol = 1e-6;
    auto res = verify_b_condition(par);
    REQUIRE(res.certified);
    REQUIRE_FALSE(res.definite_failure);
    REQUIRE(res.min_point_value >= -par.tol);
}

TEST_CASE("b-condition: b = 0.49 fails with a witness") {
    BoundParams par;
    par.b = 0.49;
    par.grid = 64;
    auto res = verify_b_condition(par);
    REQUIRE(res.definite_failure);
    auto& p = res.witness_point;
    REQUIRE(b_condition_value(0.49, p[0], p[1], p[2], p[3], p[4]) < -par.tol);
}

TEST_CASE("final optimization stays below 1.40") {
    auto res = solve_final_optimization(0.42, 24, 80);
    REQUIRE(res.value <= 1.40);
    REQUIRE(res.value >= 1.38);
    // forcing m0 = l1 = m1 = 0 collapses the first term to 2 - alpha
    double alpha;
    double v = final_opt_inner(0.42, 0.5, 0, 0, 0, &alpha);
    REQUIRE(std::abs(std::min(2 - alpha, v) - v) < 1e-12);
}

TEST_CASE("simple optimization lands in [1.45, 1.459)") {
    auto res = solve_simple_optimization(4000);
    REQUIRE(res.value >= 1.45);
    REQUIRE(res.value < 1.459);
    // alpha = 0 gives value 1
    double y = 0.5;
    double v = std::min(2.0 - 0, 1 + 0 - 0 * 2 * eval_f(y) / (3 * y));
    REQUIRE(v == 1.0);
}

TEST_CASE("convexity of g lets per-terminal averaging only help") {
    std::mt19937_64 rng(12);
    std::uniform_real_distribution<double> u(0, 0.25);
    for (int t = 0; t < 300; ++t) {
        // random per-terminal vectors; averaging never increases the sum
        int n = 5;
        std::array<double, 4> avg{};
        std::vector<std::array<double, 4>> vecs(n);
        double total = 0;
        for (auto& v : vecs) {
            for (int i = 0; i < 4; ++i) {
                v[i] = u(rng);
                avg[i] += v[i] / n;
            }
            total += eval_g(v[0], v[1], v[2], v[3]);
        }
        double avg_val = n * eval_g(avg[0], avg[1], avg[2], avg[3]);
        REQUIRE(avg_val <= total + 1e-9);
    }
}
