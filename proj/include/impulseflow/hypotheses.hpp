#pragma once

#include <cstddef>
#include <optional>
#include <vector>

#include "impulseflow/impulsive_system.hpp"

namespace impulseflow {

enum class TargetSet { D, ImageOfD };

struct TransversalityReport {
    std::size_t sampled_points = 0;
    double min_abs_inner = 0.0;  // min |<grad L(p), f(p)>| over samples
    bool sign_consistent = false;
    int sign = 0;  // common sign of the inner products when consistent
    StateVector worst_point;
    double margin_tol = 0.0;
    bool pass = false;
};

struct SeparationReport {
    double dist_D_ID = 0.0;
    double xi_margin = 0.0;  // capped at the search horizon when I(D) is never reached
    StateVector witness_D;
    StateVector witness_ID;
    bool pass = false;
};

struct ContinuityRow {
    double scale = 0.0;
    double max_tau = 0.0;  // max over approach directions of tau*_xi
    std::size_t escaped = 0;
};

inline constexpr double kDefaultMarginTol = 1e-6;

/// Quasi-uniform points of one surface piece: the ends/corners and centre of
/// its parameter box first, then a Halton sequence.
std::vector<StateVector> surface_samples(const LevelSurface& surface, std::size_t dim, std::size_t n);
/// Samples of a union of surfaces, split evenly.
std::vector<StateVector> set_samples(const ImpulsiveSetSpec& set, std::size_t dim, std::size_t n);

TransversalityReport transversality_margin(const SystemSpec& sys, TargetSet which, std::size_t n_samples,
                                           double margin_tol = kDefaultMarginTol);

SeparationReport separation_report(const SystemSpec& sys, std::size_t n_samples, double xi_cap = 20.0);

/// x in D_xi: the reversed flow from x reaches D within time xi.
bool in_D_xi(const SystemSpec& sys, const StateVector& x, double xi);

/// tau*_xi: 0 on D, tau_1 on X_xi (+inf if no hit before t_max), nullopt
/// when x lies in D_xi.
std::optional<double> tau_star(const SystemSpec& sys, const StateVector& x, double xi, double t_max);

/// Approaches x_in_D from upstream: for each scale s and direction j the
/// probe point is phi_{-s}(x_in_D + s * (j / dirs) * u_j) with u_j tangent to D.
std::vector<ContinuityRow> hitting_continuity_probe(const SystemSpec& sys, const StateVector& x_in_D,
                                                    std::size_t approach_dirs, const std::vector<double>& scales,
                                                    double xi = 0.5);

/// Decay check for a probe table: finite values, no escapes, nonincreasing
/// as the scale shrinks, and value/scale bounded by `max_ratio`.
bool continuity_table_ok(const std::vector<ContinuityRow>& table, double max_ratio = 10.0);

struct HypothesesReport {
    TransversalityReport transversality_D;
    TransversalityReport transversality_ID;
    SeparationReport separation;
    std::vector<ContinuityRow> continuity_table;
    bool continuity_ok = false;
    bool pass = false;
};

struct HypothesesConfig {
    std::size_t n_samples = 1000;
    double margin_tol = kDefaultMarginTol;
    std::size_t approach_dirs = 4;
    std::vector<double> scales = {1e-1, 1e-2, 1e-3, 1e-4, 1e-5, 1e-6};
    double xi = 0.5;
};

HypothesesReport check_hypotheses(const SystemSpec& sys, const HypothesesConfig& cfg = {});

}  // namespace impulseflow
