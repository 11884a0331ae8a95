#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>
#include <sstream>

#include "impulseflow/entropy.hpp"
#include "impulseflow/systems.hpp"

using namespace impulseflow;

namespace {

constexpr double kPi = std::numbers::pi;

void check_intervals(const GapSet& g, std::vector<GapInterval> want) {
    REQUIRE(g.intervals.size() == want.size());
    for (std::size_t i = 0; i < want.size(); ++i) {
        CHECK(g.intervals[i].lo == doctest::Approx(want[i].lo).epsilon(1e-15));
        CHECK(g.intervals[i].hi == doctest::Approx(want[i].hi).epsilon(1e-15));
    }
}

StateVector circle_point(double theta) { return StateVector{std::cos(theta), std::sin(theta), 0.0}; }

double chord(double dtheta) { return 2.0 * std::abs(std::sin(dtheta / 2.0)); }

// Doubling suspension at integer T: two base points at height 0 stay
// eps-close over J iff every itinerary angle 2^n * dtheta, n < T, is.
bool doubling_close(double a, double b, int T, double eps) {
    double d = std::fmod(std::abs(a - b), 2.0 * kPi);
    for (int n = 0; n < T; ++n) {
        if (chord(d) >= eps) return false;
        d = std::fmod(2.0 * d, 2.0 * kPi);
    }
    return true;
}

std::size_t doubling_greedy_oracle(const std::vector<StateVector>& cands, int T, double eps) {
    std::vector<double> kept;
    for (const auto& c : cands) {
        const double a = std::atan2(c[1], c[0]);
        bool ok = true;
        for (double b : kept) {
            if (doubling_close(a, b, T, eps)) {
                ok = false;
                break;
            }
        }
        if (ok) kept.push_back(a);
    }
    return kept.size();
}

}  // namespace

TEST_CASE("gap set examples") {
    AdmissibleTimes tm{{2.0, 5.0}, 3.0};
    const auto g = gap_set(tm, 10.0, 0.5);
    check_intervals(g, {{0.0, 1.5}, {2.5, 4.5}, {5.5, 10.0}});
    CHECK(g.length() == doctest::Approx(10.0 - 2.0).epsilon(1e-15));
    CHECK(g.contains(1.5));
    CHECK_FALSE(g.contains(2.0));
    CHECK(g.contains(10.0));

    check_intervals(gap_set(AdmissibleTimes{{3.0}, 1e300}, 3.0, 0.5), {{0.0, 2.5}});
    check_intervals(gap_set(AdmissibleTimes{{4.0, 8.0}, 4.0}, 3.0, 0.5), {{0.0, 3.0}});
    check_intervals(gap_set(AdmissibleTimes{{}, 1e300}, 2.0, 0.5), {{0.0, 2.0}});
}

TEST_CASE("gap set length identity") {
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int trial = 0; trial < 200; ++trial) {
        AdmissibleTimes tm;
        double s = 0.2 + u(rng);
        while (s < 12.0) {
            tm.times.push_back(s);
            s += 1.0 + u(rng);
        }
        tm.eta = min_gap(tm.times);
        const double delta = 0.45 * u(rng) + 0.01;
        const double t = 1.0 + 10.0 * u(rng);
        const auto g = gap_set(tm, t, delta);
        double removed = 0.0;
        for (double tau : tm.times) {
            if (tau > t) break;
            removed += std::min(tau + delta, t) - std::max(tau - delta, 0.0);
        }
        CHECK(g.length() == doctest::Approx(t - removed).epsilon(1e-12));
        for (std::size_t i = 0; i < g.intervals.size(); ++i) {
            CHECK(g.intervals[i].lo <= g.intervals[i].hi);
            CHECK(g.intervals[i].lo >= 0.0);
            CHECK(g.intervals[i].hi <= t);
            if (i > 0) CHECK(g.intervals[i - 1].hi < g.intervals[i].lo);
        }
    }
}

TEST_CASE("gap set rejects wide windows") {
    AdmissibleTimes tm{{1.0, 2.0}, 1.0};
    CHECK_THROWS_AS(gap_set(tm, 5.0, 0.5), PreconditionError);
    CHECK_THROWS_AS(gap_set(tm, 5.0, 0.0), PreconditionError);
    CHECK_NOTHROW(gap_set(tm, 5.0, 0.49));
}

TEST_CASE("admissible times") {
    const auto ann = build_fixture("annulus");
    const auto a = admissible_times(ann, from_polar(1.5, kPi / 2), 12.0);
    REQUIRE(a.times.size() == 3);
    CHECK(a.times[0] == doctest::Approx(1.5 * kPi).epsilon(1e-10));
    CHECK(a.eta == doctest::Approx(kPi).epsilon(1e-10));
    CHECK(min_gap({1.0}) == std::numeric_limits<double>::infinity());
}

TEST_CASE("dynamical balls") {
    const auto ann = build_fixture("annulus");
    const StateVector x = from_polar(1.0, kPi + 0.5);
    for (double T : {0.0, 1.0, 7.0, 20.0}) CHECK(in_dynamical_ball(ann, x, x, T, 1e-6, 0.3, 0.05));

    // Same periodic orbit, angular offset 0.1; chord 2 sin(0.05) < 0.15.
    const StateVector y = from_polar(1.0, kPi + 0.6);
    CHECK(in_dynamical_ball(ann, x, y, 20.0, 0.15, 0.3, 0.05));
    CHECK(in_dynamical_ball(ann, y, x, 20.0, 0.15, 0.3, 0.05));
    CHECK_FALSE(in_dynamical_ball(ann, x, y, 20.0, 0.09, 0.3, 0.05));

    const auto dbl = build_fixture("doubling_suspension");
    const StateVector p = circle_point(0.3), q = circle_point(0.31);
    // chord(2^n * 0.01) first exceeds 0.1 at n = 4.
    CHECK(in_dynamical_ball(dbl, p, q, 3.0, 0.1, 0.1, 0.05));
    CHECK(in_dynamical_ball(dbl, p, q, 4.0, 0.1, 0.1, 0.05));
    CHECK_FALSE(in_dynamical_ball(dbl, p, q, 5.0, 0.1, 0.1, 0.05));
    CHECK_THROWS_AS(in_dynamical_ball(dbl, p, q, 5.0, 0.1, 0.1, 0.06), PreconditionError);
}

TEST_CASE("separated set basics") {
    const auto dbl = build_fixture("doubling_suspension");
    const auto cands = entropy_candidates(dbl, 64, 1);
    SeparationParams p{3.0, 5.0, 0.1, 0.05};
    CHECK(max_separated_set(dbl, cands, p).s_count == 1);
    p.eps = 1e-9;
    const auto all = max_separated_set(dbl, cands, p);
    CHECK(all.s_count == 64);
    CHECK(all.members.size() == 64);
}

TEST_CASE("greedy count matches the itinerary oracle on the suspension") {
    const auto dbl = build_fixture("doubling_suspension");
    const auto cands = entropy_candidates(dbl, 512, 1);
    for (int T : {1, 2, 3, 4, 5, 6}) {
        const SeparationParams p{static_cast<double>(T), 0.1, 0.1, 0.05};
        INFO("T=" << T);
        CHECK(max_separated_set(dbl, cands, p, 2).s_count == doubling_greedy_oracle(cands, T, 0.1));
    }
}

TEST_CASE("greedy is within half of the exhaustive maximum") {
    const auto dbl = build_fixture("doubling_suspension");
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> u(0.0, 2.0 * kPi);
    for (int trial = 0; trial < 20; ++trial) {
        std::vector<StateVector> c;
        for (int i = 0; i < 12; ++i) c.push_back(circle_point(u(rng)));
        const SeparationParams p{2.0, 0.6, 0.1, 0.05};
        const auto g = max_separated_set(dbl, c, p);
        const auto e = exhaustive_max_separated_set(dbl, c, p);
        CHECK(2 * g.s_count >= e.s_count);
        CHECK(g.s_count <= e.s_count);
    }
    std::vector<StateVector> big(25, circle_point(0.0));
    CHECK_THROWS_AS(exhaustive_max_separated_set(dbl, big, SeparationParams{}), PreconditionError);
}

TEST_CASE("counts are monotone in eps and candidate count") {
    const auto dbl = build_fixture("doubling_suspension");
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> u(0.0, 2.0 * kPi);
    std::vector<StateVector> cands;
    for (int i = 0; i < 400; ++i) cands.push_back(circle_point(u(rng)));
    const std::vector<StateVector> half(cands.begin(), cands.begin() + 200);

    EntropyConfig cfg{{1.0, 2.0, 3.0, 4.0}, {0.4, 0.2, 0.1}, {0.1}};
    const auto full = entropy_estimate(dbl, cands, cfg);
    const auto part = entropy_estimate(dbl, half, cfg);
    CHECK(full.monotone_in_eps);
    REQUIRE(full.table.size() == part.table.size());
    for (std::size_t i = 0; i < full.table.size(); ++i) {
        CHECK(full.table[i].s_count >= part.table[i].s_count);
        CHECK(full.table[i].s_count >= 1);
    }
    for (const auto& a : full.table) {
        for (const auto& b : full.table) {
            if (a.T == b.T && a.delta == b.delta && a.eps < b.eps) CHECK(a.s_count >= b.s_count);
        }
    }
}

TEST_CASE("static fixture has zero entropy") {
    const auto sys = build_fixture("static_null");
    EntropyConfig cfg{{1.0, 2.0, 4.0, 8.0}, {0.3}, {0.2}, 300};
    const auto est = entropy_estimate(sys, cfg);
    CHECK(est.h_tau_estimate == doctest::Approx(0.0).epsilon(1e-12));
    for (const auto& r : est.table) CHECK(r.s_count == est.table.front().s_count);
}

TEST_CASE("entropy estimate is independent of the worker count") {
    const auto dbl = build_fixture("doubling_suspension");
    EntropyConfig cfg{{2.0, 3.0, 4.0}, {0.2, 0.1}, {0.1}, 256};
    cfg.workers = 1;
    const auto a = entropy_estimate(dbl, cfg);
    cfg.workers = 5;
    const auto b = entropy_estimate(dbl, cfg);
    std::ostringstream sa, sb;
    write_entropy_table_csv(sa, a);
    write_entropy_rates_csv(sa, a);
    write_entropy_table_csv(sb, b);
    write_entropy_rates_csv(sb, b);
    CHECK(sa.str() == sb.str());
    CHECK(sa.str().rfind("T,eps,delta,s_count,saturated\n", 0) == 0);
}

TEST_CASE("entropy config validation") {
    const auto dbl = build_fixture("doubling_suspension");
    auto bad = [&](EntropyConfig c, const char* field) {
        try {
            entropy_estimate(dbl, c);
            FAIL("accepted config for " << field);
        } catch (const PreconditionError& e) {
            CHECK(std::string(e.what()).rfind(field, 0) == 0);
        }
    };
    bad({{2.0, 1.0}, {0.1}, {0.1}, 64}, "T_list");
    bad({{1.0, 2.0}, {0.1, 0.2}, {0.1}, 64}, "eps_list");
    bad({{1.0, 2.0}, {0.1}, {0.1, 0.2}, 64}, "delta_list");
    bad({{1.0, 2.0}, {0.1}, {0.6}, 64}, "delta_list");
    bad({{1.0, 2.0}, {0.1}, {0.1}, 0}, "candidate_count");
}

TEST_CASE("log slope") {
    CHECK(log_slope({1.0, 2.0, 3.0}, {2, 4, 8}) == doctest::Approx(std::log(2.0)).epsilon(1e-12));
    CHECK(log_slope({1.0, 2.0}, {5, 5}) == 0.0);
}

TEST_CASE("admissibility of the main fixtures") {
    struct Case {
        const char* name;
        double eta;
    };
    for (const auto& c : {Case{"annulus", kPi}, Case{"doubling_suspension", 1.0}, Case{"prey_predator", 0.0}}) {
        const auto sys = build_fixture(c.name);
        const auto samples = sample_admissible(sys, 20, 3);
        const auto rep = admissibility_check(sys, samples, 20.0, 100, 3);
        INFO(c.name);
        CHECK(rep.triples_checked == 100);
        CHECK(rep.shift_violations == 0);
        CHECK(rep.max_shift_error <= kShiftTol);
        CHECK(rep.eta_est > 0.0);
        if (c.eta > 0.0) CHECK(rep.eta_est == doctest::Approx(c.eta).epsilon(1e-6));
    }
}
