#include <doctest.h>

#include <cmath>
#include <numbers>

#include "impulseflow/state.hpp"

using namespace impulseflow;

TEST_CASE("state vectors carry their dimension") {
    StateVector a{1.0, 2.0};
    CHECK(a.size() == 2);
    CHECK(a[1] == 2.0);
    CHECK_THROWS_AS(StateVector(0), DimensionError);
    CHECK_THROWS_AS(StateVector(4), DimensionError);
    CHECK_THROWS_AS((StateVector{1.0, 2.0, 3.0, 4.0}), DimensionError);
}

TEST_CASE("arithmetic and metric") {
    const StateVector a{1.0, 2.0, 2.0};
    const StateVector b{0.0, 0.0, 0.0};
    CHECK(a.norm() == doctest::Approx(3.0));
    CHECK(distance(a, b) == doctest::Approx(3.0));
    CHECK(dot(a, a) == 9.0);
    CHECK((a - a) == b);
    CHECK((2.0 * a)[2] == 4.0);
    CHECK((a * 0.5)[0] == 0.5);
    CHECK_THROWS_AS(distance(a, StateVector{1.0, 1.0}), DimensionError);
}

TEST_CASE("finiteness") {
    StateVector a{1.0, NAN};
    CHECK_FALSE(a.all_finite());
    CHECK(StateVector{1.0, 2.0}.all_finite());
}

TEST_CASE("polar helpers") {
    const auto x = from_polar(2.0, 3.0 * std::numbers::pi / 2.0);
    CHECK(x[0] == doctest::Approx(0.0).epsilon(1e-15));
    CHECK(x[1] == doctest::Approx(-2.0));
    CHECK(polar_radius(x) == doctest::Approx(2.0));
    CHECK(polar_angle(x) == doctest::Approx(3.0 * std::numbers::pi / 2.0));
    CHECK(polar_angle(StateVector{1.0, -0.0}) >= 0.0);
    CHECK(polar_angle(StateVector{1.0, -1e-300}) < 2.0 * std::numbers::pi);
}

TEST_CASE("to_string round-trips") {
    const StateVector a{0.1, 1.0 / 3.0};
    const std::string s = to_string(a);
    CHECK(s.find("0.10000000000000001") != std::string::npos);
}
