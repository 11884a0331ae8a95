#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <limits>
#include <vector>

#include "impulseflow/impulsive_system.hpp"

namespace impulseflow {

/// Impulse times of one base point up to some horizon, with the smallest
/// gap tau_{n+1} - tau_n (n >= 1) among them.
struct AdmissibleTimes {
    std::vector<double> times;
    double eta = std::numeric_limits<double>::infinity();
};

AdmissibleTimes admissible_times(const SystemSpec& sys, const StateVector& x, double horizon);
/// Smallest gap in an increasing time list; +inf with fewer than two times.
double min_gap(const std::vector<double>& times);

struct GapInterval {
    double lo;
    double hi;
};

/// [0, t] minus the open windows (tau_j - delta, tau_j + delta).
struct GapSet {
    double t = 0.0;
    std::vector<GapInterval> intervals;

    double length() const;
    bool contains(double s) const;
};

/// Throws PreconditionError unless 0 < delta < eta / 2.
GapSet gap_set(const AdmissibleTimes& times, double t, double delta);

/// y in the tau-dynamical ball of x: |psi_t x - psi_t y| < eps at the ends
/// of every interval of J(x) and on the dt_check grid inside it.
bool in_dynamical_ball(const SystemSpec& sys, const StateVector& x, const StateVector& y, double T, double eps,
                       double delta, double dt_check);

struct SeparatedSet {
    std::vector<std::size_t> members;  // candidate indices, increasing
    std::size_t s_count = 0;
};

struct SeparationParams {
    double T = 1.0;
    double eps = 0.1;
    double delta = 0.1;
    double dt_check = 0.05;
};

/// Greedy scan in candidate order; a candidate is admitted when it is in
/// no admitted point's ball and no admitted point is in its ball.
SeparatedSet max_separated_set(const SystemSpec& sys, const std::vector<StateVector>& candidates,
                               const SeparationParams& p, unsigned workers = 0);

/// Largest separated subset by exhaustive search; at most 24 candidates.
SeparatedSet exhaustive_max_separated_set(const SystemSpec& sys, const std::vector<StateVector>& candidates,
                                          const SeparationParams& p);

struct EntropyConfig {
    std::vector<double> T_list;
    std::vector<double> eps_list;
    std::vector<double> delta_list;
    std::size_t candidate_count = 4096;
    double dt_check = 0.0;  // 0 selects min(delta) / 2
    std::uint64_t seed = 1;
    unsigned workers = 0;
    /// A row counts as saturated once s_count * divisor > candidate_count.
    std::size_t saturation_divisor = 8;
};

struct EntropyRow {
    double T;
    double eps;
    double delta;
    std::size_t s_count;
    bool saturated;
};

struct EntropyRate {
    double eps;
    double delta;
    double slope;
    std::size_t rows_used;
    bool lower_bound_only;  // fewer than two unsaturated rows
};

struct EntropyEstimate {
    std::vector<EntropyRow> table;
    std::vector<EntropyRate> rates;
    double h_tau_estimate = 0.0;
    bool lower_bound_only = false;
    bool exhausted = false;  // s_count == candidate_count at the largest T
    bool monotone_in_eps = true;
    double eta = std::numeric_limits<double>::infinity();
    std::size_t candidate_count = 0;
    double dt_check = 0.0;
};

/// Validates cfg against sys; throws PreconditionError naming the field.
void validate_entropy_config(const EntropyConfig& cfg);

EntropyEstimate entropy_estimate(const SystemSpec& sys, const EntropyConfig& cfg);
/// Same on an explicit candidate cloud (cfg.candidate_count is ignored).
EntropyEstimate entropy_estimate(const SystemSpec& sys, const std::vector<StateVector>& candidates,
                                 const EntropyConfig& cfg);

/// Least-squares slope of log(s) against T.
double log_slope(const std::vector<double>& T, const std::vector<std::size_t>& s);

void write_entropy_table_csv(std::ostream& os, const EntropyEstimate& est);
void write_entropy_rates_csv(std::ostream& os, const EntropyEstimate& est);

struct AdmissibilityReport {
    double eta_est = std::numeric_limits<double>::infinity();
    std::size_t triples_checked = 0;
    std::size_t shift_violations = 0;
    double max_shift_error = 0.0;
};

inline constexpr double kShiftTol = 1e-6;

/// Samples (x, t, n) with tau_{n-1}(x) < t < tau_n(x) and compares the
/// impulse times of psi_t(x) with tau_{n-1+k}(x) - t for every k.
AdmissibilityReport admissibility_check(const SystemSpec& sys, const std::vector<StateVector>& samples,
                                        double horizon, std::size_t triples = 500, std::uint64_t seed = 1);

}  // namespace impulseflow
