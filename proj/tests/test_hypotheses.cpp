#include <doctest.h>

#include <cmath>
#include <numbers>

#include "impulseflow/hypotheses.hpp"
#include "impulseflow/systems.hpp"

using namespace impulseflow;

namespace {

constexpr double kPi = std::numbers::pi;

}  // namespace

TEST_CASE("prey-predator crossings are strictly inward") {
    const auto sys = build_fixture("prey_predator");
    for (TargetSet w : {TargetSet::D, TargetSet::ImageOfD}) {
        const auto r = transversality_margin(sys, w, 1000);
        CHECK(r.sampled_points == 1000);
        CHECK(r.sign_consistent);
        CHECK(r.sign == -1);
        CHECK(r.min_abs_inner > 1e-3);
        CHECK(r.pass);
    }
}

TEST_CASE("prey-predator inner product oracle at a vertex") {
    // On the plane sum = 1 at (1,0,0): grad = (1,1,1), f = (-(1)(1)/2, 0, 0).
    const auto sys = build_fixture("prey_predator");
    const StateVector p{1.0, 0.0, 0.0};
    const double inner = dot(level_gradient(LevelId::Sum, p), eval_vector_field(sys.field, p));
    CHECK(inner == doctest::Approx(-0.5));
}

TEST_CASE("annulus is transversal, the tangent fixture is not") {
    const auto ann = build_fixture("annulus");
    CHECK(transversality_margin(ann, TargetSet::D, 200).pass);
    CHECK(transversality_margin(ann, TargetSet::ImageOfD, 200).pass);
    const auto tan = build_fixture("tangent_degenerate");
    const auto r = transversality_margin(tan, TargetSet::D, 200);
    CHECK_FALSE(r.pass);
    CHECK(r.min_abs_inner < 1e-12);
}

TEST_CASE("surface samples lie on their surface") {
    const auto sys = build_fixture("prey_predator");
    const auto pts = surface_samples(sys.impulsive_set.surfaces[0], 3, 50);
    REQUIRE(pts.size() == 50);
    for (const auto& p : pts) {
        CHECK(p[0] + p[1] + p[2] == doctest::Approx(1.0));
        CHECK(sys.impulsive_set.contains(p));
    }
}

TEST_CASE("annulus separation of D and I(D)") {
    const auto sys = build_fixture("annulus");
    const auto r = separation_report(sys, 200);
    // Closest points (1,0) and (-1,0); D reaches I(D) after half a turn.
    CHECK(r.dist_D_ID == doctest::Approx(2.0).epsilon(1e-9));
    CHECK(r.xi_margin == doctest::Approx(kPi).epsilon(1e-8));
    CHECK(r.pass);
}

TEST_CASE("tau_star on the annulus") {
    const auto sys = build_fixture("annulus");
    CHECK(*tau_star(sys, StateVector{1.5, 0.0}, 0.5, 10.0) == 0.0);
    CHECK(*tau_star(sys, from_polar(1.5, -0.25), 0.5, 10.0) == doctest::Approx(0.25).epsilon(1e-10));
    // Just past D: the reversed flow reaches D within xi.
    CHECK_FALSE(tau_star(sys, from_polar(1.5, 0.25), 0.5, 10.0).has_value());
    CHECK(in_D_xi(sys, from_polar(1.5, 0.25), 0.5));
    CHECK_FALSE(in_D_xi(sys, from_polar(1.5, 0.75), 0.5));
}

TEST_CASE("continuity probe on the annulus equals the scales") {
    const auto sys = build_fixture("annulus");
    const std::vector<double> scales = {1e-1, 1e-2, 1e-3, 1e-4, 1e-5, 1e-6};
    const auto table = hitting_continuity_probe(sys, StateVector{1.5, 0.0}, 4, scales);
    REQUIRE(table.size() == scales.size());
    for (std::size_t i = 0; i < table.size(); ++i) {
        CHECK(table[i].escaped == 0);
        CHECK(std::abs(table[i].max_tau - scales[i]) <= 1e-8);
    }
    CHECK(continuity_table_ok(table));
}

TEST_CASE("continuity probe on prey-predator decays") {
    const auto sys = build_fixture("prey_predator");
    const StateVector x{1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0};
    const auto table = hitting_continuity_probe(sys, x, 4, {1e-1, 1e-2, 1e-3, 1e-4, 1e-5, 1e-6});
    for (std::size_t i = 0; i < table.size(); ++i) {
        CHECK(table[i].escaped == 0);
        if (i > 0) CHECK(table[i].max_tau < table[i - 1].max_tau);
    }
    CHECK(table.back().max_tau < 1e-5);
    CHECK(continuity_table_ok(table));
}

TEST_CASE("continuity_table_ok rejects growth and escapes") {
    CHECK_FALSE(continuity_table_ok({{0.1, 0.1, 0}, {0.01, 0.2, 0}}));
    CHECK_FALSE(continuity_table_ok({{0.1, 0.1, 1}}));
    CHECK_FALSE(continuity_table_ok({{0.1, 5.0, 0}}));
    CHECK(continuity_table_ok({{0.1, 0.1, 0}, {0.01, 0.01, 0}}));
}

TEST_CASE("full hypothesis check per fixture") {
    HypothesesConfig cfg;
    cfg.n_samples = 200;
    CHECK(check_hypotheses(build_fixture("annulus"), cfg).pass);
    CHECK(check_hypotheses(build_fixture("prey_predator"), cfg).pass);
    CHECK(check_hypotheses(build_fixture("doubling_suspension"), cfg).pass);
    CHECK_FALSE(check_hypotheses(build_fixture("tangent_degenerate"), cfg).pass);
}
