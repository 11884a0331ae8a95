#pragma once

#include <cstddef>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "impulseflow/impulsive_system.hpp"

namespace impulseflow {

struct GridAxis {
    double lo = 0.0;
    double hi = 1.0;
    std::size_t bins = 1;
};

/// Uniform box partition; cells are half-open except on the upper face of
/// the box, which belongs to the last cell.
class GridPartition {
public:
    explicit GridPartition(std::vector<GridAxis> axes);

    std::size_t dimension() const { return axes_.size(); }
    const std::vector<GridAxis>& axes() const { return axes_; }
    std::size_t cell_count() const { return cells_; }

    std::optional<std::size_t> cell_of(const StateVector& x) const;
    std::vector<std::size_t> multi_index(std::size_t flat) const;
    StateVector cell_center(std::size_t flat) const;

private:
    std::vector<GridAxis> axes_;
    std::size_t cells_ = 1;
};

/// "lo:hi:bins,lo:hi:bins,..." with one entry per coordinate.
GridPartition parse_grid(std::string_view text);

inline constexpr double kMaxEscapedMass = 1e-3;

struct OccupationMeasure {
    GridPartition grid;
    std::vector<double> weights;  // normalized over the in-box time
    double total_time = 0.0;      // length of the averaging window
    double escaped = 0.0;         // fraction of the window spent outside the box

    bool valid() const { return escaped < kMaxEscapedMass; }
};

/// Default burn-in: 10% of the horizon.
double default_burn_in(const ImpulsiveTrajectory& traj);

/// Time-weighted histogram of the trajectory over [burn_in, horizon].
/// Throws PreconditionError if the window is empty or the grid dimension
/// does not match, and Error if no time at all is spent inside the box.
OccupationMeasure occupation_measure(const ImpulsiveTrajectory& traj, const GridPartition& grid, double burn_in);

/// Histogram over an explicit window [t0, t1].
OccupationMeasure occupation_measure_window(const ImpulsiveTrajectory& traj, const GridPartition& grid, double t0,
                                            double t1);

/// max over cells of |mu_[b, T-t](A) - mu_[b+t, T](A)|. A negative burn_in
/// selects the default.
double pushforward_discrepancy(const SystemSpec& sys, const ImpulsiveTrajectory& traj, const GridPartition& grid,
                               double t_shift, double burn_in = -1.0);

/// Builtin observables: "one", "x1".."x3", "radius", and "cell:<flat index>".
/// A cell indicator needs the grid.
double birkhoff_average(const ImpulsiveTrajectory& traj, std::string_view observable, double burn_in,
                        const GridPartition* grid = nullptr);

void write_measure_csv(std::ostream& os, const OccupationMeasure& mu);

}  // namespace impulseflow
