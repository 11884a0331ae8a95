#include "impulseflow/impulsive_system.hpp"

#include "impulseflow/io.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>
#include <ostream>

namespace impulseflow {

namespace {

constexpr double kHitTimeTol = 1e-12;
// A bisection that ends on a discontinuity of the residual (the angle branch
// cut) rather than on a root leaves a residual of order pi.
constexpr double kRootResidualTol = 1e-6;
constexpr int kProbePoints = 4;
constexpr double kHorizonHitPad = 1e-9;

bool on_start_side(Crossing c, double g0, double g) {
    switch (c) {
        case Crossing::Increasing: return g < 0.0;
        case Crossing::Decreasing: return g > 0.0;
        case Crossing::Any: return g != 0.0 && std::signbit(g) == std::signbit(g0);
    }
    return false;
}

bool has_crossed(Crossing c, double g0, double g) {
    switch (c) {
        case Crossing::Increasing: return g >= 0.0;
        case Crossing::Decreasing: return g <= 0.0;
        case Crossing::Any: return g == 0.0 || std::signbit(g) != std::signbit(g0);
    }
    return false;
}

bool is_jump(const LevelSurface& s, double ga, double gb) {
    return s.level == LevelId::Angle && std::abs(gb - ga) > std::numbers::pi;
}

// Earliest admissible crossing of `surface` inside `step`, if any.
std::optional<Hit> crossing_in_step(const LevelSurface& surface, std::size_t index, const DenseStep& step,
                                    double membership_tol) {
    std::array<double, kProbePoints + 1> ts{};
    std::array<double, kProbePoints + 1> gs{};
    for (int j = 0; j <= kProbePoints; ++j) {
        ts[j] = j == kProbePoints ? step.t1() : step.t0 + step.h * j / kProbePoints;
        gs[j] = surface.residual(j == 0 ? step.y0 : (j == kProbePoints ? step.y1 : step.at(ts[j])));
    }
    int changes = 0;
    for (int j = 1; j <= kProbePoints; ++j) {
        const bool sa = std::signbit(gs[j - 1]) || gs[j - 1] == 0.0;
        const bool sb = std::signbit(gs[j]) || gs[j] == 0.0;
        if (sa != sb && !is_jump(surface, gs[j - 1], gs[j])) ++changes;
    }
    if (changes > 1) {
        throw EventError("ambiguous hit: level crossed more than once in one step near t = " +
                         std::to_string(step.t0) + "; reduce max_step");
    }
    for (int j = 1; j <= kProbePoints; ++j) {
        const double g0 = gs[j - 1];
        if (!on_start_side(surface.crossing, g0, g0) || !has_crossed(surface.crossing, g0, gs[j])) continue;
        if (is_jump(surface, g0, gs[j])) continue;
        double a = ts[j - 1];
        double b = ts[j];
        while (b - a > kHitTimeTol) {
            const double m = 0.5 * (a + b);
            if (m <= a || m >= b) break;
            if (has_crossed(surface.crossing, g0, surface.residual(step.at(m)))) {
                b = m;
            } else {
                a = m;
            }
        }
        StateVector at_b = step.at(b);
        if (std::abs(surface.residual(at_b)) > kRootResidualTol) continue;
        if (!satisfies(surface.region, at_b, membership_tol)) continue;
        return Hit{b, std::move(at_b), index};
    }
    return std::nullopt;
}

std::optional<Hit> earliest_hit(const ImpulsiveSetSpec& set, const DenseStep& step) {
    std::optional<Hit> best;
    for (std::size_t i = 0; i < set.surfaces.size(); ++i) {
        auto h = crossing_in_step(set.surfaces[i], i, step, set.membership_tol);
        if (h && (!best || h->time < best->time)) best = std::move(h);
    }
    return best;
}

struct SegmentEnd {
    std::optional<Hit> hit;
    StateVector state;  // state at the segment end (pre-impulse when hit)
};

// Flows from x until the first hit of `set` or until t_max. `on_step` receives
// each accepted step together with the relative time where the segment stops
// inside it.
template <class OnStep>
SegmentEnd run_segment(const VectorFieldSpec& field, const IntegratorConfig& cfg, const ImpulsiveSetSpec& set,
                       const StateVector& x, double t_max, int direction, OnStep&& on_step) {
    Stepper stepper(field, cfg, x, 0.0, direction);
    while (stepper.time() < t_max) {
        const DenseStep step = stepper.step(t_max);
        if (auto hit = earliest_hit(set, step)) {
            on_step(step, hit->time);
            StateVector s = hit->state;
            return {std::move(hit), std::move(s)};
        }
        on_step(step, step.t1());
    }
    return {std::nullopt, stepper.state()};
}

struct NoStepCallback {
    void operator()(const DenseStep&, double) const {}
};

void require_admissible(const SystemSpec& sys, const StateVector& x, const char* what) {
    if (x.size() != sys.dimension()) {
        throw DimensionError(std::string(what) + ": state dimension " + std::to_string(x.size()) +
                             " does not match system dimension " + std::to_string(sys.dimension()));
    }
    if (!sys.admissible(x)) {
        throw PreconditionError(std::string(what) + ": state outside the admissible region: " + to_string(x));
    }
}

// Walks the impulsive orbit of x over [0, horizon]. `on_step(step, seg_start,
// stop)` sees every flow step; `on_impulse(tau, pre, post)` every jump.
template <class OnStep, class OnImpulse>
StateVector walk(const SystemSpec& sys, const StateVector& x, double horizon, OnStep&& on_step,
                 OnImpulse&& on_impulse) {
    double tau = 0.0;
    StateVector cur = x;
    while (tau < horizon) {
        const double start = tau;
        auto end = run_segment(sys.field, sys.integrator, sys.impulsive_set, cur, horizon - start, 1,
                               [&](const DenseStep& step, double stop) { on_step(step, start, stop); });
        double gap = 0.0;
        if (end.hit) {
            gap = end.hit->time;
        } else {
            // A crossing that lands on the horizon itself still jumps.
            const bool near_d = std::any_of(sys.impulsive_set.surfaces.begin(), sys.impulsive_set.surfaces.end(),
                                            [&](const LevelSurface& s) { return std::abs(s.residual(end.state)) <= 1e-6; });
            if (!near_d) return end.state;
            auto tail = run_segment(sys.field, sys.integrator, sys.impulsive_set, end.state,
                                    kHorizonHitPad * std::max(1.0, horizon), 1, NoStepCallback{});
            if (!tail.hit) return end.state;
            end = std::move(tail);
            gap = horizon - start;
        }
        if (gap < kMinImpulseGap) {
            throw EventError("impulse gap underflow (" + std::to_string(gap) + ") at t = " + std::to_string(start) +
                             "; I(D) and D are numerically intersecting");
        }
        StateVector post = apply_impulse(sys, end.hit->state);
        if (!sys.image_set.contains(post)) {
            throw EventError("post-impulse state " + to_string(post) + " is not in I(D)");
        }
        tau = start + gap;
        on_impulse(tau, end.hit->state, post);
        cur = std::move(post);
    }
    return cur;
}

}  // namespace

bool satisfies(const std::vector<RangeConstraint>& region, const StateVector& x, double tol) {
    for (const auto& c : region) {
        const double q = level_value(c.quantity, x);
        if (q < c.lo - tol || q > c.hi + tol) return false;
    }
    return true;
}

double LevelSurface::residual(const StateVector& x) const {
    const double g = level_value(level, x) - value;
    if (level == LevelId::Angle) return std::remainder(g, 2.0 * std::numbers::pi);
    return g;
}

std::optional<std::size_t> ImpulsiveSetSpec::surface_of(const StateVector& x) const {
    for (std::size_t i = 0; i < surfaces.size(); ++i) {
        const auto& s = surfaces[i];
        if (std::abs(s.residual(x)) <= membership_tol && satisfies(s.region, x, membership_tol)) return i;
    }
    return std::nullopt;
}

bool SystemSpec::admissible(const StateVector& x, double tol) const {
    return field.admissible(x, tol) && satisfies(admissible_region, x, tol);
}

std::optional<Hit> first_hit(const VectorFieldSpec& field, const IntegratorConfig& cfg, const ImpulsiveSetSpec& set,
                             const StateVector& x, double t_max, int direction) {
    if (!(t_max > 0.0)) throw PreconditionError("first_hit: t_max must be positive");
    if (direction >= 0) return run_segment(field, cfg, set, x, t_max, 1, NoStepCallback{}).hit;
    // Along the reversed flow every level function runs the other way.
    ImpulsiveSetSpec reversed = set;
    for (auto& s : reversed.surfaces) {
        if (s.crossing == Crossing::Increasing) {
            s.crossing = Crossing::Decreasing;
        } else if (s.crossing == Crossing::Decreasing) {
            s.crossing = Crossing::Increasing;
        }
    }
    return run_segment(field, cfg, reversed, x, t_max, -1, NoStepCallback{}).hit;
}

std::optional<Hit> first_hitting_time(const SystemSpec& sys, const StateVector& x, double t_max) {
    require_admissible(sys, x, "first_hitting_time");
    return first_hit(sys.field, sys.integrator, sys.impulsive_set, x, t_max, 1);
}

StateVector apply_impulse(const SystemSpec& sys, const StateVector& x) {
    const auto surface = sys.impulsive_set.surface_of(x);
    if (!surface) throw PreconditionError("apply_impulse: state " + to_string(x) + " is not in D");
    switch (sys.impulse.id) {
        case ImpulseMapId::AnnulusFold: {
            const double r = std::hypot(x[0], x[1]);
            return StateVector{-0.5 - 0.5 * r, 0.0};
        }
        case ImpulseMapId::RadialScaling: {
            if (*surface >= sys.impulse.factors.size()) {
                throw PreconditionError("apply_impulse: no scaling factor for surface " + std::to_string(*surface));
            }
            return sys.impulse.factors[*surface] * x;
        }
        case ImpulseMapId::AngleDoubling: {
            const double c = x[0], s = x[1];
            const double n = c * c + s * s;
            return StateVector{(c * c - s * s) / n, 2.0 * c * s / n, 0.0};
        }
    }
    throw PreconditionError("apply_impulse: unknown impulse map");
}

std::vector<StateVector> impulse_preimages(const SystemSpec& sys, const StateVector& y) {
    std::vector<StateVector> out;
    const auto image_surface = sys.image_set.surface_of(y);
    if (!image_surface) return out;
    switch (sys.impulse.id) {
        case ImpulseMapId::AnnulusFold:
            out.push_back(StateVector{2.0 * std::hypot(y[0], y[1]) - 1.0, 0.0});
            break;
        case ImpulseMapId::RadialScaling:
            if (*image_surface < sys.impulse.factors.size()) {
                out.push_back((1.0 / sys.impulse.factors[*image_surface]) * y);
            }
            break;
        case ImpulseMapId::AngleDoubling: {
            const double half = 0.5 * std::atan2(y[1], y[0]);
            out.push_back(StateVector{std::cos(half), std::sin(half), 1.0});
            out.push_back(StateVector{-std::cos(half), -std::sin(half), 1.0});
            break;
        }
    }
    std::erase_if(out, [&](const StateVector& p) { return !sys.impulsive_set.contains(p); });
    return out;
}

ImpulsiveTrajectory impulsive_trajectory(const SystemSpec& sys, const StateVector& x, double horizon,
                                         double dt_sample) {
    require_admissible(sys, x, "impulsive_trajectory");
    if (!(horizon > 0.0)) throw PreconditionError("impulsive_trajectory: horizon must be positive");
    if (!(dt_sample > 0.0)) throw PreconditionError("impulsive_trajectory: dt_sample must be positive");

    ImpulsiveTrajectory traj;
    traj.initial_state = x;
    traj.horizon = horizon;
    traj.dt_sample = dt_sample;

    const auto last_grid = static_cast<std::size_t>(std::floor(horizon / dt_sample + 1e-9));
    std::size_t k = 0;
    std::size_t segment = 0;
    const DenseStep* last_step = nullptr;
    DenseStep last_copy;
    double last_start = 0.0;

    auto on_step = [&](const DenseStep& step, double start, double stop) {
        const double abs_stop = start + stop;
        for (; k <= last_grid; ++k) {
            const double t = static_cast<double>(k) * dt_sample;
            if (!(t < abs_stop)) break;
            traj.samples.push_back({t, step.at(t - start), segment, SampleKind::Grid});
        }
        last_copy = step;
        last_step = &last_copy;
        last_start = start;
    };
    auto on_impulse = [&](double tau, const StateVector& pre, const StateVector& post) {
        traj.impulse_times.push_back(tau);
        traj.pre_impulse_states.push_back(pre);
        traj.post_impulse_states.push_back(post);
        traj.samples.push_back({tau, pre, segment, SampleKind::PreImpulse});
        ++segment;
        traj.samples.push_back({tau, post, segment, SampleKind::PostImpulse});
        last_step = nullptr;
    };

    const StateVector end = walk(sys, x, horizon, on_step, on_impulse);

    // Grid points at (or a rounding hair past) the horizon.
    for (; k <= last_grid; ++k) {
        const double t = static_cast<double>(k) * dt_sample;
        StateVector v = end;
        if (last_step != nullptr && t - last_start <= last_step->t1()) v = last_step->at(t - last_start);
        traj.samples.push_back({t, v, segment, SampleKind::Grid});
    }
    const double last_t = traj.samples.empty() ? -1.0 : traj.samples.back().t;
    if (last_t < horizon - 1e-12) traj.samples.push_back({horizon, end, segment, SampleKind::Final});
    return traj;
}

StateVector psi(const SystemSpec& sys, const StateVector& x, double t) {
    require_admissible(sys, x, "psi");
    if (t < 0.0) throw PreconditionError("psi: t must be nonnegative");
    if (t == 0.0) return x;
    return walk(sys, x, t, [](const DenseStep&, double, double) {},
                [](double, const StateVector&, const StateVector&) {});
}

std::vector<double> impulse_times(const SystemSpec& sys, const StateVector& x, double horizon) {
    require_admissible(sys, x, "impulse_times");
    std::vector<double> out;
    if (horizon <= 0.0) return out;
    walk(sys, x, horizon, [](const DenseStep&, double, double) {},
         [&](double tau, const StateVector&, const StateVector&) { out.push_back(tau); });
    return out;
}

void write_trajectory_csv(std::ostream& os, const ImpulsiveTrajectory& traj) {
    const std::size_t n = traj.initial_state.size();
    std::string line = "t";
    for (std::size_t i = 1; i <= n; ++i) line += ",x" + std::to_string(i);
    line += ",segment_index,is_impulse\n";
    os << line;
    for (const auto& s : traj.samples) {
        line.clear();
        append_number(line, s.t);
        for (std::size_t i = 0; i < n; ++i) {
            line += ',';
            append_number(line, s.x[i]);
        }
        line += ',' + std::to_string(s.segment) + ',' + (s.kind == SampleKind::PostImpulse ? "1" : "0") + '\n';
        os << line;
    }
}

void write_impulses_csv(std::ostream& os, const ImpulsiveTrajectory& traj) {
    const std::size_t n = traj.initial_state.size();
    std::string line = "n,tau_n";
    for (std::size_t i = 1; i <= n; ++i) line += ",post_x" + std::to_string(i);
    line += '\n';
    os << line;
    for (std::size_t j = 0; j < traj.impulse_times.size(); ++j) {
        line = std::to_string(j + 1) + ',';
        append_number(line, traj.impulse_times[j]);
        for (std::size_t i = 0; i < n; ++i) {
            line += ',';
            append_number(line, traj.post_impulse_states[j][i]);
        }
        line += '\n';
        os << line;
    }
}

}  // namespace impulseflow
