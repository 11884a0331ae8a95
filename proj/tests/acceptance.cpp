// Acceptance criteria, one PASS/FAIL line each. argv[1] is the CLI binary.

#include <algorithm>
#include <bit>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <numbers>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "impulseflow/entropy.hpp"
#include "impulseflow/experiment.hpp"
#include "impulseflow/hypotheses.hpp"
#include "impulseflow/measures.hpp"
#include "impulseflow/quotient.hpp"
#include "impulseflow/systems.hpp"

using namespace impulseflow;
namespace fs = std::filesystem;

namespace {

constexpr double kPi = std::numbers::pi;

struct Outcome {
    bool ok = true;
    std::string detail;

    void require(bool cond, const std::string& what) {
        if (!cond) {
            ok = false;
            if (!detail.empty()) detail += "; ";
            detail += "failed: " + what;
        }
    }
    void note(const std::string& s) {
        if (!detail.empty()) detail += "; ";
        detail += s;
    }
};

std::string fmt(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.6g", v);
    return buf;
}

double chord(double dtheta) { return 2.0 * std::abs(std::sin(dtheta / 2.0)); }

// Exact arc-length share of each cell for the lower unit half-circle: cut
// the arc at every grid line crossing and attribute each piece by its
// midpoint.
std::vector<double> half_circle_measure(const GridPartition& g) {
    std::vector<double> cuts = {kPi, 2.0 * kPi};
    auto add = [&](double th) {
        th = std::fmod(th + 4.0 * kPi, 2.0 * kPi);
        if (th == 0.0) th = 2.0 * kPi;
        if (th > kPi && th < 2.0 * kPi) cuts.push_back(th);
    };
    for (std::size_t a = 0; a < 2; ++a) {
        const auto& ax = g.axes()[a];
        for (int k = 0; k <= ax.bins; ++k) {
            const double v = ax.lo + (ax.hi - ax.lo) * k / ax.bins;
            if (std::abs(v) > 1.0) continue;
            const double base = a == 0 ? std::acos(v) : std::asin(v);
            if (a == 0) {
                add(base);
                add(-base);
            } else {
                add(base);
                add(kPi - base);
            }
        }
    }
    std::sort(cuts.begin(), cuts.end());
    std::vector<double> w(g.cell_count(), 0.0);
    for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
        const double len = cuts[i + 1] - cuts[i];
        if (len <= 0.0) continue;
        const double mid = 0.5 * (cuts[i] + cuts[i + 1]);
        if (const auto c = g.cell_of(StateVector{std::cos(mid), std::sin(mid)})) w[*c] += len / kPi;
    }
    return w;
}

Outcome annulus_return_map() {
    Outcome o;
    const auto sys = build_fixture("annulus");
    const auto traj = impulsive_trajectory(sys, from_polar(1.5, kPi / 2), 1.5 * kPi + 19.5 * kPi, 0.5);
    o.require(traj.impulse_times.size() >= 20, "20 impulses");
    double rerr = 0.0, gerr = 0.0;
    for (std::size_t n = 1; n <= std::min<std::size_t>(20, traj.impulse_times.size()); ++n) {
        const double r = polar_radius(traj.post_impulse_states[n - 1]);
        rerr = std::max(rerr, std::abs(r - (1.0 + 0.5 / std::ldexp(1.0, static_cast<int>(n)))));
        if (n >= 2) gerr = std::max(gerr, std::abs(traj.impulse_times[n - 1] - traj.impulse_times[n - 2] - kPi));
    }
    o.require(rerr <= 1e-7, "radius error " + fmt(rerr) + " <= 1e-7");
    o.require(gerr <= 1e-8, "gap error " + fmt(gerr) + " <= 1e-8");
    o.note("max |r_n - oracle| = " + fmt(rerr) + ", max |gap - pi| = " + fmt(gerr));
    return o;
}

Outcome annulus_invariance() {
    Outcome o;
    const auto sys = build_fixture("annulus");
    const auto traj = impulsive_trajectory(sys, from_polar(1.5, kPi / 2), 1000.0, 0.01);
    const auto g = parse_grid("-2:2:40,-2:2:40");
    const auto mu = occupation_measure(traj, g, 100.0);
    const double disc = pushforward_discrepancy(sys, traj, g, 1.0, 100.0);
    const auto ref = half_circle_measure(g);
    double tv = 0.0;
    for (std::size_t c = 0; c < ref.size(); ++c) tv += 0.5 * std::abs(mu.weights[c] - ref[c]);
    o.require(mu.valid(), "escaped mass below 1e-3");
    o.require(disc <= 0.02, "discrepancy " + fmt(disc) + " <= 0.02");
    o.require(tv <= 0.05, "TV " + fmt(tv) + " <= 0.05");
    o.note("discrepancy = " + fmt(disc) + ", TV to arc length = " + fmt(tv));
    return o;
}

Outcome prey_transversality() {
    Outcome o;
    const auto sys = build_fixture("prey_predator");
    for (TargetSet w : {TargetSet::D, TargetSet::ImageOfD}) {
        const auto r = transversality_margin(sys, w, 1000);
        const std::string tag = w == TargetSet::D ? "D" : "I(D)";
        o.require(r.sampled_points == 1000, tag + " sample count");
        o.require(r.sign_consistent && r.sign == -1, tag + " inner products all negative");
        o.require(r.min_abs_inner > 1e-3, tag + " min |inner| " + fmt(r.min_abs_inner) + " > 1e-3");
        o.note(tag + ": sign " + std::to_string(r.sign) + ", min |inner| = " + fmt(r.min_abs_inner));
    }
    return o;
}

Outcome annulus_entropy() {
    Outcome o;
    const auto sys = build_fixture("annulus");
    const auto cfg = default_config(ExperimentKind::Entropy, "annulus");
    EntropyConfig ec{cfg.entropy.T_list, cfg.entropy.eps_list, cfg.entropy.delta_list, cfg.entropy.candidate_count};
    o.require(ec.candidate_count == 4096 && ec.T_list.back() == 60.0 && ec.eps_list.back() == 0.05 &&
                  ec.delta_list == std::vector<double>{0.3},
              "configured as 4096 candidates, T up to 60, eps down to 0.05, delta 0.3");
    const auto est = entropy_estimate(sys, ec);
    o.require(est.h_tau_estimate <= 0.05, "h " + fmt(est.h_tau_estimate) + " <= 0.05");
    o.require(est.monotone_in_eps, "counts monotone in eps");
    std::string counts;
    for (const auto& r : est.table) {
        if (r.eps == ec.eps_list.back()) counts += (counts.empty() ? "" : ",") + std::to_string(r.s_count);
    }
    o.note("h = " + fmt(est.h_tau_estimate) + ", s(T) at eps 0.05: " + counts +
           (est.lower_bound_only ? " (saturated)" : ""));
    return o;
}

// Greedy over the same candidate order, with the suspension's closed-form
// separation: two base points are eps-close over J at integer T iff
// chord(2^n dtheta) < eps for n < T.
std::size_t doubling_itinerary_count(const std::vector<StateVector>& cands, int T, double eps) {
    std::vector<double> kept;
    for (const auto& c : cands) {
        const double a = std::atan2(c[1], c[0]);
        bool admit = true;
        for (double b : kept) {
            double d = std::fmod(std::abs(a - b), 2.0 * kPi);
            bool close = true;
            for (int n = 0; n < T && close; ++n) {
                close = chord(d) < eps;
                d = std::fmod(2.0 * d, 2.0 * kPi);
            }
            if (close) {
                admit = false;
                break;
            }
        }
        if (admit) kept.push_back(a);
    }
    return kept.size();
}

Outcome doubling_entropy() {
    Outcome o;
    const auto sys = build_fixture("doubling_suspension");
    const auto cfg = default_config(ExperimentKind::Entropy, "doubling_suspension");
    EntropyConfig ec{cfg.entropy.T_list, cfg.entropy.eps_list, cfg.entropy.delta_list, cfg.entropy.candidate_count};
    const auto est = entropy_estimate(sys, ec);
    const double lo = std::log(2.0) - 0.15, hi = std::log(2.0) + 0.15;
    o.require(est.h_tau_estimate >= lo && est.h_tau_estimate <= hi,
              "h " + fmt(est.h_tau_estimate) + " in [" + fmt(lo) + ", " + fmt(hi) + "]");
    const auto cands = entropy_candidates(sys, ec.candidate_count, 1);
    std::string counts;
    for (const auto& r : est.table) {
        counts += (counts.empty() ? "" : ",") + std::to_string(r.s_count);
        if (r.T <= 6.0) {
            const auto want = doubling_itinerary_count(cands, static_cast<int>(r.T), r.eps);
            o.require(r.s_count == want, "T=" + fmt(r.T) + " count " + std::to_string(r.s_count) +
                                             " == itinerary oracle " + std::to_string(want));
        }
    }
    o.note("h = " + fmt(est.h_tau_estimate) + ", s(T=2..10): " + counts +
           (est.lower_bound_only ? " (lower bound only)" : ""));
    return o;
}

Outcome admissibility() {
    Outcome o;
    struct Case {
        const char* name;
        double eta;
    };
    for (const auto& c : {Case{"annulus", kPi}, Case{"prey_predator", 0.0}, Case{"doubling_suspension", 1.0}}) {
        const auto sys = build_fixture(c.name);
        const auto rep = admissibility_check(sys, sample_admissible(sys, 100, 2), 20.0, 500, 2);
        const std::string tag = c.name;
        o.require(rep.triples_checked == 500, tag + " 500 triples");
        o.require(rep.shift_violations == 0, tag + " " + std::to_string(rep.shift_violations) + " shift violations");
        o.require(rep.eta_est > 0.0, tag + " eta > 0");
        if (c.eta > 0.0) o.require(std::abs(rep.eta_est - c.eta) <= 1e-6, tag + " eta " + fmt(rep.eta_est));
        o.note(tag + ": eta = " + fmt(rep.eta_est) + ", max shift error = " + fmt(rep.max_shift_error));
    }
    return o;
}

Outcome continuity() {
    Outcome o;
    const std::vector<double> scales = {1e-1, 1e-2, 1e-3, 1e-4, 1e-5, 1e-6};
    const auto ann = hitting_continuity_probe(build_fixture("annulus"), StateVector{1.5, 0.0}, 4, scales);
    double err = 0.0;
    for (std::size_t i = 0; i < scales.size(); ++i) {
        o.require(ann[i].escaped == 0, "annulus probe escaped");
        err = std::max(err, std::abs(ann[i].max_tau - scales[i]));
    }
    o.require(err <= 1e-8, "annulus |tau - scale| " + fmt(err) + " <= 1e-8");
    const auto prey = hitting_continuity_probe(build_fixture("prey_predator"),
                                               StateVector{1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0}, 4, scales);
    bool decreasing = true;
    for (std::size_t i = 0; i < prey.size(); ++i) {
        decreasing = decreasing && prey[i].escaped == 0 && std::isfinite(prey[i].max_tau);
        if (i > 0) decreasing = decreasing && prey[i].max_tau < prey[i - 1].max_tau;
    }
    o.require(decreasing, "prey probe decreasing");
    o.require(prey.back().max_tau < 1e-5, "prey probe tends to 0");
    o.note("annulus max error = " + fmt(err) + ", prey tau at 1e-6 = " + fmt(prey.back().max_tau));
    return o;
}

Outcome quotient_metric() {
    Outcome o;
    const auto sys = build_fixture("annulus");
    const auto rep = metric_axiom_audit(sys, sample_admissible(sys, 200, 1));
    o.require(rep.symmetry_violations == 0, std::to_string(rep.symmetry_violations) + " symmetry violations");
    o.require(rep.triangle_violations == 0, std::to_string(rep.triangle_violations) + " triangle violations");
    const double d = quotient_distance(equivalence_class(sys, StateVector{1.0, 0.0}),
                                       equivalence_class(sys, StateVector{-1.25, 0.0}));
    o.require(std::abs(d - 0.25) <= 1e-9, "worked example " + fmt(d));
    o.note("200 points, violations sym/id/tri = " + std::to_string(rep.symmetry_violations) + "/" +
           std::to_string(rep.identity_violations) + "/" + std::to_string(rep.triangle_violations) +
           ", d([(1,0)],[(-1.25,0)]) = " + fmt(d));
    return o;
}

// Largest subset with pairwise distance >= eps.
std::size_t packing_number(const std::vector<StateVector>& pts, double eps) {
    const std::size_t n = pts.size();
    std::size_t best = 0;
    for (std::uint32_t mask = 1; mask < (1u << n); ++mask) {
        const auto size = static_cast<std::size_t>(std::popcount(mask));
        if (size <= best) continue;
        bool ok = true;
        for (std::size_t i = 0; i < n && ok; ++i) {
            if (!(mask >> i & 1u)) continue;
            for (std::size_t j = i + 1; j < n && ok; ++j) {
                if (mask >> j & 1u) ok = distance(pts[i], pts[j]) >= eps;
            }
        }
        if (ok) best = size;
    }
    return best;
}

Outcome brute_force() {
    Outcome o;
    const auto sys = build_fixture("doubling_suspension");
    std::mt19937_64 rng(2024);
    std::uniform_real_distribution<double> angle(0.0, 2.0 * kPi), eps(0.05, 1.0);
    std::uniform_int_distribution<int> size(2, 15), horizon(0, 4);
    std::size_t worst_ratio_g = 1, worst_ratio_e = 1, packing_checks = 0;
    for (int trial = 0; trial < 100; ++trial) {
        std::vector<StateVector> c;
        const int n = size(rng);
        for (int i = 0; i < n; ++i) {
            const double a = angle(rng);
            c.push_back(StateVector{std::cos(a), std::sin(a), 0.0});
        }
        const SeparationParams p{static_cast<double>(horizon(rng)), eps(rng), 0.1, 0.05};
        const auto g = max_separated_set(sys, c, p);
        const auto e = exhaustive_max_separated_set(sys, c, p);
        if (!(2 * g.s_count >= e.s_count && g.s_count <= e.s_count)) {
            o.require(false, "trial " + std::to_string(trial) + ": greedy " + std::to_string(g.s_count) +
                                 " vs exhaustive " + std::to_string(e.s_count));
        }
        if (g.s_count * worst_ratio_e < e.s_count * worst_ratio_g) {
            worst_ratio_g = g.s_count;
            worst_ratio_e = e.s_count;
        }
        SeparationParams p0 = p;
        p0.T = 0.0;
        const auto e0 = exhaustive_max_separated_set(sys, c, p0);
        const auto want = packing_number(c, p0.eps);
        ++packing_checks;
        if (e0.s_count != want) {
            o.require(false, "trial " + std::to_string(trial) + ": T=0 count " + std::to_string(e0.s_count) +
                                 " vs packing number " + std::to_string(want));
        }
    }
    o.note("100 trials, worst greedy/exhaustive = " + std::to_string(worst_ratio_g) + "/" +
           std::to_string(worst_ratio_e) + ", " + std::to_string(packing_checks) + " T=0 packing checks");
    return o;
}

std::string slurp(const fs::path& p) {
    std::ifstream is(p, std::ios::binary);
    std::stringstream ss;
    ss << is.rdbuf();
    return ss.str();
}

Outcome determinism(const std::string& cli) {
    Outcome o;
    const fs::path work = fs::temp_directory_path() / "impulseflow_acceptance";
    fs::remove_all(work);
    fs::create_directories(work);
    struct Run {
        const char* experiment;
        const char* config;
    };
    const std::vector<Run> runs = {
        {"simulate", R"({"schema_version": 1, "system": "prey_predator", "seed": 9})"},
        {"check-hypotheses", R"({"schema_version": 1, "system": "annulus", "check_hypotheses": {"n_samples": 200}})"},
        {"measure", R"({"schema_version": 1, "system": "doubling_suspension", "measure": {"horizon": 200}})"},
        {"entropy",
         R"({"schema_version": 1, "system": "annulus", "seed": 4, "entropy": {"T_list": [5, 10, 15], "candidate_count": 512}})"},
        {"quotient", R"({"schema_version": 1, "system": "prey_predator", "seed": 6, "quotient": {"sample_count": 60}})"},
    };
    std::size_t compared = 0;
    for (const auto& r : runs) {
        const fs::path cfg = work / (std::string(r.experiment) + ".json");
        std::ofstream(cfg) << r.config;
        std::vector<fs::path> outs;
        for (const char* workers : {"1", "4", "1"}) {
            const fs::path out = work / (std::string(r.experiment) + "_" + workers + "_" + std::to_string(outs.size()));
            const std::string cmd = "\"" + cli + "\" " + r.experiment + " --config \"" + cfg.string() +
                                    "\" --workers " + workers + " --out \"" + out.string() + "\" > /dev/null";
            const int rc = std::system(cmd.c_str());
            o.require(rc == 0, std::string(r.experiment) + " exited " + std::to_string(rc));
            outs.push_back(out);
        }
        for (std::size_t k = 1; k < outs.size(); ++k) {
            std::vector<std::string> names, other;
            for (const auto& e : fs::directory_iterator(outs[0])) names.push_back(e.path().filename().string());
            for (const auto& e : fs::directory_iterator(outs[k])) other.push_back(e.path().filename().string());
            std::sort(names.begin(), names.end());
            std::sort(other.begin(), other.end());
            o.require(!names.empty() && names == other, std::string(r.experiment) + " output sets match");
            for (const auto& n : names) {
                ++compared;
                o.require(slurp(outs[0] / n) == slurp(outs[k] / n), std::string(r.experiment) + "/" + n + " differs");
            }
        }
    }
    fs::remove_all(work);
    o.note(std::to_string(runs.size()) + " experiments, " + std::to_string(compared) +
           " file comparisons at 1 and 4 workers");
    return o;
}

}  // namespace

int main(int argc, char** argv) {
    if (argc < 2) {
        std::fprintf(stderr, "usage: acceptance <impulseflow binary>\n");
        return 2;
    }
    const std::string cli = argv[1];
    struct Criterion {
        int id;
        const char* name;
        double limit_s;  // 0: no runtime limit
        std::function<Outcome()> run;
    };
    const std::vector<Criterion> criteria = {
        {1, "annulus return map", 1.0, annulus_return_map},
        {2, "invariant measure at desk scale", 30.0, annulus_invariance},
        {3, "prey-predator transversality", 5.0, prey_transversality},
        {4, "zero entropy on the annulus", 300.0, annulus_entropy},
        {5, "log 2 entropy on the doubling suspension", 600.0, doubling_entropy},
        {6, "admissibility of impulse times", 0.0, admissibility},
        {7, "continuity of the hitting time", 0.0, continuity},
        {8, "quotient metric", 0.0, quotient_metric},
        {9, "greedy vs exhaustive separated sets", 0.0, brute_force},
        {10, "determinism across worker counts", 0.0, [&] { return determinism(cli); }},
    };
    int failed = 0;
    for (const auto& c : criteria) {
        const auto t0 = std::chrono::steady_clock::now();
        Outcome o;
        try {
            o = c.run();
        } catch (const std::exception& e) {
            o.require(false, std::string("exception: ") + e.what());
        }
        const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        if (c.limit_s > 0.0) o.require(secs < c.limit_s, "runtime " + fmt(secs) + " s < " + fmt(c.limit_s) + " s");
        if (!o.ok) ++failed;
        std::printf("%s  %2d  %-42s %8.2fs  %s\n", o.ok ? "PASS" : "FAIL", c.id, c.name, secs, o.detail.c_str());
        std::fflush(stdout);
    }
    std::printf("%d of %zu criteria passed\n", static_cast<int>(criteria.size()) - failed, criteria.size());
    return failed == 0 ? 0 : 1;
}
