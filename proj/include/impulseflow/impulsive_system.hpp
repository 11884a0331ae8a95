#pragma once

#include <cstddef>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "impulseflow/flow_core.hpp"

namespace impulseflow {

enum class Crossing { Any, Increasing, Decreasing };

/// lo <= quantity(x) <= hi.
struct RangeConstraint {
    LevelId quantity;
    double lo;
    double hi;
};

bool satisfies(const std::vector<RangeConstraint>& region, const StateVector& x, double tol);

/// Constrained piece of a level set {level(x) = value}.
struct LevelSurface {
    LevelId level;
    double value = 0.0;
    Crossing crossing = Crossing::Any;
    std::vector<RangeConstraint> region;

    /// level(x) - value; angular levels are wrapped into [-pi, pi].
    double residual(const StateVector& x) const;
};

/// A finite union of level-surface pieces. Describes both D and I(D).
struct ImpulsiveSetSpec {
    std::vector<LevelSurface> surfaces;
    double membership_tol = 1e-9;

    /// Index of the first surface containing x, if any.
    std::optional<std::size_t> surface_of(const StateVector& x) const;
    bool contains(const StateVector& x) const { return surface_of(x).has_value(); }
};

enum class ImpulseMapId {
    AnnulusFold,    // I(r, 0) = (-1/2 - r/2, 0)
    RadialScaling,  // I(x) = factor_i * x on surface i
    AngleDoubling,  // (theta, 1) -> (2 theta mod 2 pi, 0) on the embedded cylinder
};

struct ImpulseMapSpec {
    ImpulseMapId id = ImpulseMapId::AnnulusFold;
    /// One factor per impulsive-set surface, RadialScaling only.
    std::vector<double> factors;
};

struct SystemSpec {
    std::string name;
    VectorFieldSpec field;
    ImpulsiveSetSpec impulsive_set;
    ImpulsiveSetSpec image_set;
    ImpulseMapSpec impulse;
    std::vector<RangeConstraint> admissible_region;
    IntegratorConfig integrator;

    std::size_t dimension() const { return field.dimension(); }
    bool admissible(const StateVector& x, double tol = 1e-8) const;
};

struct Hit {
    double time;
    StateVector state;
    std::size_t surface;
};

/// Event search under the plain flow (no impulses) against an arbitrary set.
/// `direction` = -1 searches along the reversed flow.
std::optional<Hit> first_hit(const VectorFieldSpec& field, const IntegratorConfig& cfg, const ImpulsiveSetSpec& set,
                             const StateVector& x, double t_max, int direction = 1);

/// tau_1(x) = inf{t > 0 : phi_t(x) in D}, searched on (0, t_max].
std::optional<Hit> first_hitting_time(const SystemSpec& sys, const StateVector& x, double t_max);

StateVector apply_impulse(const SystemSpec& sys, const StateVector& x);

/// Analytic I^{-1}(y) restricted to D; empty when y is not in I(D).
std::vector<StateVector> impulse_preimages(const SystemSpec& sys, const StateVector& y);

enum class SampleKind { Grid, PreImpulse, PostImpulse, Final };

struct TrajectorySample {
    double t;
    StateVector x;
    std::size_t segment;
    SampleKind kind;
};

/// Sampled impulsive orbit. Grid samples sit at t = k * dt_sample and are
/// right-continuous; each impulse adds a PreImpulse row (left limit) and a
/// PostImpulse row at the impulse time.
struct ImpulsiveTrajectory {
    StateVector initial_state;
    std::vector<double> impulse_times;
    std::vector<StateVector> pre_impulse_states;
    std::vector<StateVector> post_impulse_states;
    std::vector<TrajectorySample> samples;
    double horizon = 0.0;
    double dt_sample = 0.0;
};

/// Minimum allowed spacing between consecutive impulses.
inline constexpr double kMinImpulseGap = 1e-9;

ImpulsiveTrajectory impulsive_trajectory(const SystemSpec& sys, const StateVector& x, double horizon,
                                         double dt_sample);

/// psi_t(x); at an impulse time returns the post-impulse value.
StateVector psi(const SystemSpec& sys, const StateVector& x, double t);

/// Impulse times of x on (0, horizon].
std::vector<double> impulse_times(const SystemSpec& sys, const StateVector& x, double horizon);

void write_trajectory_csv(std::ostream& os, const ImpulsiveTrajectory& traj);
void write_impulses_csv(std::ostream& os, const ImpulsiveTrajectory& traj);

}  // namespace impulseflow
