#include "impulseflow/entropy.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <optional>
#include <ostream>
#include <unordered_map>

#include "impulseflow/io.hpp"
#include "impulseflow/kernels.hpp"
#include "impulseflow/parallel.hpp"
#include "impulseflow/random.hpp"
#include "impulseflow/systems.hpp"

namespace impulseflow {

namespace {

// Impulses this close past t still count as inside [0, t].
constexpr double kTimeTol = 1e-9;
constexpr std::size_t kMaxExhaustive = 24;

// One candidate's orbit on the uniform grid k * h, stored by coordinate.
struct Track {
    StateVector x0;
    std::vector<double> times;
    std::array<std::vector<double>, kMaxDim> coord;
    std::size_t last = 0;
    double h = 0.0;

    kernels::SoaView view() const {
        kernels::SoaView v;
        v.dim = x0.size();
        for (std::size_t c = 0; c < v.dim; ++c) v.coord[c] = coord[c].data();
        return v;
    }

    StateVector grid(std::size_t k) const {
        StateVector s(x0.size());
        for (std::size_t c = 0; c < s.size(); ++c) s[c] = coord[c][k];
        return s;
    }

    // psi_e(x0), continued from the last grid point at or before e.
    StateVector at(const SystemSpec& sys, double e) const {
        const auto k = std::min(last, static_cast<std::size_t>(std::max(0.0, std::floor(e / h))));
        const double dt = e - static_cast<double>(k) * h;
        if (dt <= 1e-14) return grid(k);
        return psi(sys, grid(k), dt);
    }
};

Track make_track(const SystemSpec& sys, const StateVector& x, double horizon, double h) {
    const auto traj = impulsive_trajectory(sys, x, horizon, h);
    Track tr;
    tr.x0 = x;
    tr.times = traj.impulse_times;
    tr.h = h;
    for (const auto& s : traj.samples) {
        if (s.kind != SampleKind::Grid) continue;
        for (std::size_t c = 0; c < x.size(); ++c) tr.coord[c].push_back(s.x[c]);
    }
    tr.last = tr.coord[0].size() - 1;
    return tr;
}

std::vector<Track> make_tracks(const SystemSpec& sys, const std::vector<StateVector>& xs, double horizon, double h,
                               unsigned workers) {
    std::vector<Track> out(xs.size());
    parallel_for(xs.size(), workers, [&](std::size_t i) { out[i] = make_track(sys, xs[i], horizon, h); });
    return out;
}

// What a point needs as the centre of a ball: J, the grid ranges inside J
// and its own states at the ends of J.
struct Center {
    std::vector<std::pair<std::size_t, std::size_t>> ranges;  // half-open grid index ranges
    std::vector<double> ends;
    std::vector<StateVector> end_states;
    bool zero_in = false;
};

Center make_center(const SystemSpec& sys, const Track& tr, const SeparationParams& p) {
    const GapSet J = gap_set(AdmissibleTimes{tr.times, min_gap(tr.times)}, p.T, p.delta);
    Center c;
    c.zero_in = !J.intervals.empty() && J.intervals.front().lo == 0.0;
    for (const auto& iv : J.intervals) {
        const auto k0 = static_cast<std::size_t>(std::ceil(iv.lo / tr.h));
        const auto k1 = std::min(tr.last, static_cast<std::size_t>(std::floor(iv.hi / tr.h)));
        if (k0 <= k1) c.ranges.emplace_back(k0, k1 + 1);
        c.ends.push_back(iv.lo);
        if (iv.hi > iv.lo) c.ends.push_back(iv.hi);
    }
    for (double e : c.ends) c.end_states.push_back(tr.at(sys, e));
    return c;
}

double sq_dist(const StateVector& a, const StateVector& b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        const double d = a[i] - b[i];
        s = s + d * d;
    }
    return s;
}

// y in B(x) given x's centre data.
bool ball_contains(const SystemSpec& sys, const Track& x, const Center& cx, const Track& y, double eps) {
    const double eps2 = eps * eps;
    const auto xv = x.view();
    const auto yv = y.view();
    for (const auto& [k0, k1] : cx.ranges) {
        if (kernels::any_at_least(xv, yv, k0, k1, eps2)) return false;
    }
    for (std::size_t i = 0; i < cx.ends.size(); ++i) {
        if (sq_dist(cx.end_states[i], y.at(sys, cx.ends[i])) >= eps2) return false;
    }
    return true;
}

struct CellKey {
    std::array<std::int64_t, kMaxDim> k{};
    bool operator==(const CellKey&) const = default;
};

struct CellKeyHash {
    std::size_t operator()(const CellKey& c) const {
        std::uint64_t h = 1469598103934665603ull;
        for (auto v : c.k) h = (h ^ static_cast<std::uint64_t>(v)) * 1099511628211ull;
        return static_cast<std::size_t>(h);
    }
};

class Greedy {
public:
    Greedy(const SystemSpec& sys, const std::vector<Track>& tracks, const SeparationParams& p)
        : sys_(sys), tracks_(tracks), p_(p), centers_(tracks.size()) {}

    bool conflict(std::size_t a, std::size_t b) {
        return ball_contains(sys_, tracks_[a], center(a), tracks_[b], p_.eps) ||
               ball_contains(sys_, tracks_[b], center(b), tracks_[a], p_.eps);
    }

    SeparatedSet run() {
        SeparatedSet out;
        std::unordered_map<CellKey, std::vector<std::size_t>, CellKeyHash> cells;
        std::vector<std::size_t> exceptional;  // admitted points with 0 outside J
        const std::size_t dim = sys_.dimension();
        const double eps2 = p_.eps * p_.eps;

        for (std::size_t c = 0; c < tracks_.size(); ++c) {
            const Center& cc = center(c);
            const StateVector& xc = tracks_[c].x0;
            bool blocked = false;
            if (!cc.zero_in) {
                for (std::size_t a : out.members) {
                    if (conflict(a, c)) {
                        blocked = true;
                        break;
                    }
                }
            } else {
                for (std::size_t a : exceptional) {
                    if (conflict(a, c)) {
                        blocked = true;
                        break;
                    }
                }
                // Both centres test t = 0, so initially distant pairs are
                // separated already.
                const CellKey base = key(xc);
                const std::size_t n_nb = dim == 1 ? 3 : (dim == 2 ? 9 : 27);
                for (std::size_t nb = 0; nb < n_nb && !blocked; ++nb) {
                    CellKey k = base;
                    std::size_t code = nb;
                    for (std::size_t i = 0; i < dim; ++i) {
                        k.k[i] += static_cast<std::int64_t>(code % 3) - 1;
                        code /= 3;
                    }
                    const auto it = cells.find(k);
                    if (it == cells.end()) continue;
                    for (std::size_t a : it->second) {
                        if (sq_dist(tracks_[a].x0, xc) >= eps2) continue;
                        if (conflict(a, c)) {
                            blocked = true;
                            break;
                        }
                    }
                }
            }
            if (blocked) continue;
            out.members.push_back(c);
            if (cc.zero_in) {
                cells[key(xc)].push_back(c);
            } else {
                exceptional.push_back(c);
            }
        }
        out.s_count = out.members.size();
        return out;
    }

private:
    const Center& center(std::size_t i) {
        if (!centers_[i]) centers_[i] = make_center(sys_, tracks_[i], p_);
        return *centers_[i];
    }

    CellKey key(const StateVector& x) const {
        CellKey k;
        for (std::size_t i = 0; i < x.size(); ++i) k.k[i] = static_cast<std::int64_t>(std::floor(x[i] / p_.eps));
        return k;
    }

    const SystemSpec& sys_;
    const std::vector<Track>& tracks_;
    SeparationParams p_;
    std::vector<std::optional<Center>> centers_;
};

void check_params(const SeparationParams& p) {
    if (!(p.T >= 0.0) || !std::isfinite(p.T)) throw PreconditionError("T must be finite and nonnegative");
    if (!(p.eps > 0.0)) throw PreconditionError("eps must be positive");
    if (!(p.delta > 0.0)) throw PreconditionError("delta must be positive");
    if (!(p.dt_check > 0.0) || p.dt_check > p.delta / 2.0) {
        throw PreconditionError("dt_check must lie in (0, delta/2]");
    }
}

void check_candidates(const SystemSpec& sys, const std::vector<StateVector>& candidates) {
    for (const auto& x : candidates) {
        if (x.size() != sys.dimension()) throw DimensionError("candidate dimension does not match the system");
        if (!sys.admissible(x)) throw PreconditionError("candidate " + to_string(x) + " is not admissible");
    }
}

}  // namespace

double min_gap(const std::vector<double>& times) {
    double eta = std::numeric_limits<double>::infinity();
    for (std::size_t i = 1; i < times.size(); ++i) eta = std::min(eta, times[i] - times[i - 1]);
    return eta;
}

AdmissibleTimes admissible_times(const SystemSpec& sys, const StateVector& x, double horizon) {
    AdmissibleTimes a;
    a.times = impulse_times(sys, x, horizon);
    a.eta = min_gap(a.times);
    return a;
}

double GapSet::length() const {
    double s = 0.0;
    for (const auto& iv : intervals) s += iv.hi - iv.lo;
    return s;
}

bool GapSet::contains(double s) const {
    return std::any_of(intervals.begin(), intervals.end(), [&](const GapInterval& iv) { return iv.lo <= s && s <= iv.hi; });
}

GapSet gap_set(const AdmissibleTimes& times, double t, double delta) {
    if (!(delta > 0.0) || !(delta < times.eta / 2.0)) {
        throw PreconditionError("gap_set: need 0 < delta < eta/2 (delta = " + format_number(delta) +
                                ", eta = " + format_number(times.eta) + ")");
    }
    if (!(t >= 0.0)) throw PreconditionError("gap_set: t must be nonnegative");
    GapSet J;
    J.t = t;
    double cur = 0.0;
    for (double tau : times.times) {
        if (tau > t + kTimeTol) break;
        const double lo = tau - delta;
        if (lo >= cur) J.intervals.push_back({cur, lo});
        cur = std::max(cur, tau + delta);
    }
    if (cur <= t) J.intervals.push_back({cur, t});
    return J;
}

bool in_dynamical_ball(const SystemSpec& sys, const StateVector& x, const StateVector& y, double T, double eps,
                       double delta, double dt_check) {
    const SeparationParams p{T, eps, delta, dt_check};
    check_params(p);
    check_candidates(sys, {x, y});
    const double horizon = T + delta;
    const Track tx = make_track(sys, x, horizon, dt_check);
    const Track ty = make_track(sys, y, horizon, dt_check);
    return ball_contains(sys, tx, make_center(sys, tx, p), ty, eps);
}

SeparatedSet max_separated_set(const SystemSpec& sys, const std::vector<StateVector>& candidates,
                               const SeparationParams& p, unsigned workers) {
    check_params(p);
    check_candidates(sys, candidates);
    const auto tracks = make_tracks(sys, candidates, p.T + p.delta, p.dt_check, workers);
    return Greedy(sys, tracks, p).run();
}

SeparatedSet exhaustive_max_separated_set(const SystemSpec& sys, const std::vector<StateVector>& candidates,
                                          const SeparationParams& p) {
    check_params(p);
    check_candidates(sys, candidates);
    const std::size_t n = candidates.size();
    if (n > kMaxExhaustive) throw PreconditionError("exhaustive search takes at most 24 candidates");
    const auto tracks = make_tracks(sys, candidates, p.T + p.delta, p.dt_check, 0);
    Greedy g(sys, tracks, p);
    std::vector<std::uint32_t> adj(n, 0);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = i + 1; j < n; ++j) {
            if (g.conflict(i, j)) {
                adj[i] |= 1u << j;
                adj[j] |= 1u << i;
            }
        }
    }
    // Branch on the lowest remaining vertex: take it or drop it.
    std::uint32_t best = 0;
    auto search = [&](auto&& self, std::uint32_t chosen, std::uint32_t open) -> void {
        if (std::popcount(chosen) + std::popcount(open) <= std::popcount(best)) return;
        if (open == 0) {
            best = chosen;
            return;
        }
        const int v = std::countr_zero(open);
        const std::uint32_t bit = 1u << v;
        self(self, chosen | bit, open & ~bit & ~adj[static_cast<std::size_t>(v)]);
        self(self, chosen, open & ~bit);
    };
    search(search, 0u, (1u << n) - 1u);
    SeparatedSet out;
    for (std::size_t i = 0; i < n; ++i) {
        if (best & (1u << i)) out.members.push_back(i);
    }
    out.s_count = out.members.size();
    return out;
}

double log_slope(const std::vector<double>& T, const std::vector<std::size_t>& s) {
    const std::size_t n = T.size();
    if (n < 2 || s.size() != n) throw PreconditionError("log_slope needs at least two rows");
    double mt = 0.0, my = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        mt += T[i];
        my += std::log(static_cast<double>(s[i]));
    }
    mt /= static_cast<double>(n);
    my /= static_cast<double>(n);
    double num = 0.0, den = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double dt = T[i] - mt;
        num += dt * (std::log(static_cast<double>(s[i])) - my);
        den += dt * dt;
    }
    return num / den;
}

void validate_entropy_config(const EntropyConfig& cfg) {
    auto strictly = [](const std::vector<double>& v, bool increasing) {
        for (std::size_t i = 1; i < v.size(); ++i) {
            if (increasing ? !(v[i] > v[i - 1]) : !(v[i] < v[i - 1])) return false;
        }
        return true;
    };
    if (cfg.T_list.size() < 2) throw PreconditionError("T_list: need at least two horizons");
    if (!strictly(cfg.T_list, true) || !(cfg.T_list.front() > 0.0)) {
        throw PreconditionError("T_list: must be positive and strictly increasing");
    }
    if (cfg.eps_list.empty() || !strictly(cfg.eps_list, false) || !(cfg.eps_list.back() > 0.0)) {
        throw PreconditionError("eps_list: must be positive and strictly decreasing");
    }
    if (cfg.delta_list.empty() || !strictly(cfg.delta_list, false) || !(cfg.delta_list.back() > 0.0)) {
        throw PreconditionError("delta_list: must be positive and strictly decreasing");
    }
    if (cfg.candidate_count < 1) throw PreconditionError("candidate_count: must be at least 1");
    if (cfg.dt_check < 0.0 || cfg.dt_check > cfg.delta_list.back() / 2.0) {
        throw PreconditionError("dt_check: must lie in (0, min(delta_list)/2], or 0 for the default");
    }
    if (cfg.saturation_divisor < 1) throw PreconditionError("saturation_divisor: must be at least 1");
}

EntropyEstimate entropy_estimate(const SystemSpec& sys, const EntropyConfig& cfg) {
    validate_entropy_config(cfg);
    return entropy_estimate(sys, entropy_candidates(sys, cfg.candidate_count, cfg.seed), cfg);
}

EntropyEstimate entropy_estimate(const SystemSpec& sys, const std::vector<StateVector>& candidates,
                                 const EntropyConfig& cfg) {
    validate_entropy_config(cfg);
    check_candidates(sys, candidates);
    if (candidates.empty()) throw PreconditionError("candidate set is empty");
    const double h = cfg.dt_check > 0.0 ? cfg.dt_check : cfg.delta_list.back() / 2.0;
    const double delta_max = cfg.delta_list.front();
    const auto tracks = make_tracks(sys, candidates, cfg.T_list.back() + delta_max, h, cfg.workers);

    EntropyEstimate est;
    est.candidate_count = candidates.size();
    est.dt_check = h;
    for (const auto& tr : tracks) est.eta = std::min(est.eta, min_gap(tr.times));
    if (!(delta_max < est.eta / 2.0)) {
        throw PreconditionError("delta_list: max delta " + format_number(delta_max) + " is not below eta/2 = " +
                                format_number(est.eta / 2.0));
    }

    const std::size_t nT = cfg.T_list.size(), nE = cfg.eps_list.size(), nD = cfg.delta_list.size();
    est.table.resize(nT * nE * nD);
    parallel_for(est.table.size(), cfg.workers, [&](std::size_t idx) {
        const std::size_t iT = idx % nT;
        const std::size_t iE = (idx / nT) % nE;
        const std::size_t iD = idx / (nT * nE);
        const SeparationParams p{cfg.T_list[iT], cfg.eps_list[iE], cfg.delta_list[iD], h};
        const std::size_t s = Greedy(sys, tracks, p).run().s_count;
        est.table[idx] = {p.T, p.eps, p.delta, s, s * cfg.saturation_divisor > candidates.size()};
    });

    for (std::size_t iD = 0; iD < nD; ++iD) {
        for (std::size_t iE = 0; iE < nE; ++iE) {
            const EntropyRow* rows = &est.table[(iD * nE + iE) * nT];
            std::vector<std::size_t> usable;
            for (std::size_t i = 0; i < nT; ++i) {
                if (!rows[i].saturated) usable.push_back(i);
            }
            const bool fallback = usable.size() < 2;
            if (fallback) {
                usable.clear();
                for (std::size_t i = 0; i < nT; ++i) usable.push_back(i);
            }
            // Upper half of the usable horizons, standing in for the limsup.
            const std::size_t keep = std::max<std::size_t>(2, (usable.size() + 1) / 2);
            std::vector<double> T;
            std::vector<std::size_t> s;
            for (std::size_t j = usable.size() - keep; j < usable.size(); ++j) {
                T.push_back(rows[usable[j]].T);
                s.push_back(rows[usable[j]].s_count);
            }
            est.rates.push_back({cfg.eps_list[iE], cfg.delta_list[iD], log_slope(T, s), keep, fallback});
            if (iE > 0) {
                const EntropyRow* coarser = &est.table[(iD * nE + iE - 1) * nT];
                for (std::size_t i = 0; i < nT; ++i) {
                    if (rows[i].s_count < coarser[i].s_count) est.monotone_in_eps = false;
                }
            }
        }
    }
    const EntropyRate& finest = est.rates.back();
    est.h_tau_estimate = finest.slope;
    est.lower_bound_only = finest.lower_bound_only;
    for (const auto& row : est.table) {
        if (row.T == cfg.T_list.back() && row.s_count == candidates.size()) est.exhausted = true;
    }
    return est;
}

void write_entropy_table_csv(std::ostream& os, const EntropyEstimate& est) {
    os << "T,eps,delta,s_count,saturated\n";
    for (const auto& r : est.table) {
        os << format_number(r.T) << ',' << format_number(r.eps) << ',' << format_number(r.delta) << ','
           << r.s_count << ',' << (r.saturated ? 1 : 0) << '\n';
    }
}

void write_entropy_rates_csv(std::ostream& os, const EntropyEstimate& est) {
    os << "eps,delta,slope,rows_used,lower_bound_only\n";
    for (const auto& r : est.rates) {
        os << format_number(r.eps) << ',' << format_number(r.delta) << ',' << format_number(r.slope) << ','
           << r.rows_used << ',' << (r.lower_bound_only ? 1 : 0) << '\n';
    }
}

AdmissibilityReport admissibility_check(const SystemSpec& sys, const std::vector<StateVector>& samples,
                                        double horizon, std::size_t triples, std::uint64_t seed) {
    if (!(horizon > 0.0)) throw PreconditionError("admissibility_check: horizon must be positive");
    check_candidates(sys, samples);
    AdmissibilityReport rep;
    std::vector<std::vector<double>> times(samples.size());
    std::vector<std::size_t> with_impulses;
    for (std::size_t i = 0; i < samples.size(); ++i) {
        times[i] = impulse_times(sys, samples[i], horizon);
        rep.eta_est = std::min(rep.eta_est, min_gap(times[i]));
        if (!times[i].empty()) with_impulses.push_back(i);
    }
    if (with_impulses.empty()) return rep;

    Rng rng(seed);
    for (std::size_t trial = 0; trial < triples; ++trial) {
        const std::size_t i = with_impulses[rng.below(with_impulses.size())];
        const auto& tau = times[i];
        const std::size_t n = 1 + rng.below(tau.size());
        const double lo = n == 1 ? 0.0 : tau[n - 2];
        const double hi = tau[n - 1];
        // Keep away from both impulses so the sampled t is strictly inside.
        const double pad = 1e-3 * (hi - lo);
        const double t = rng.uniform(lo + pad, hi - pad);
        const auto shifted = impulse_times(sys, psi(sys, samples[i], t), horizon - t);
        ++rep.triples_checked;
        // tau_k(psi_t x) = tau_{n-1+k}(x) - t while both sides are recorded.
        const std::size_t expected = tau.size() - (n - 1);
        const std::size_t common = std::min(expected, shifted.size());
        double err = 0.0;
        for (std::size_t k = 0; k < common; ++k) err = std::max(err, std::abs(shifted[k] - (tau[n - 1 + k] - t)));
        // An impulse near the horizon may be counted on one side only.
        const std::size_t diff = expected > shifted.size() ? expected - shifted.size() : shifted.size() - expected;
        if (diff > 1) err = std::numeric_limits<double>::infinity();
        rep.max_shift_error = std::max(rep.max_shift_error, err);
        if (err > kShiftTol) ++rep.shift_violations;
    }
    return rep;
}

}  // namespace impulseflow
