#include "impulseflow/measures.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <functional>
#include <ostream>

#include "impulseflow/io.hpp"

namespace impulseflow {

namespace {

StateVector lerp(const TrajectorySample& a, const TrajectorySample& b, double t) {
    if (t <= a.t) return a.x;
    if (t >= b.t) return b.x;
    const double u = (t - a.t) / (b.t - a.t);
    return a.x + u * (b.x - a.x);
}

// Trapezoidal quadrature of the window [t0, t1]: fn(x, w) receives each
// (interpolated) interval endpoint with half the interval length. Pairs with
// no elapsed time (the two sides of an impulse) contribute nothing.
template <class Fn>
void for_each_weighted(const ImpulsiveTrajectory& traj, double t0, double t1, Fn&& fn) {
    const auto& s = traj.samples;
    for (std::size_t i = 0; i + 1 < s.size(); ++i) {
        const auto& a = s[i];
        const auto& b = s[i + 1];
        if (!(b.t > a.t)) continue;
        const double lo = std::max(a.t, t0);
        const double hi = std::min(b.t, t1);
        if (!(hi > lo)) continue;
        const double w = 0.5 * (hi - lo);
        fn(lerp(a, b, lo), w);
        fn(lerp(a, b, hi), w);
    }
}

void check_window(const ImpulsiveTrajectory& traj, double t0, double t1) {
    if (!(t0 >= 0.0) || !(t1 > t0) || t1 > traj.horizon) {
        throw PreconditionError("averaging window [" + format_number(t0) + ", " + format_number(t1) +
                                "] must be a nonempty part of [0, " + format_number(traj.horizon) + "]");
    }
}

}  // namespace

GridPartition::GridPartition(std::vector<GridAxis> axes) : axes_(std::move(axes)) {
    if (axes_.empty() || axes_.size() > kMaxDim) throw PreconditionError("grid needs 1 to 3 axes");
    for (const auto& a : axes_) {
        if (!(a.lo < a.hi) || !std::isfinite(a.lo) || !std::isfinite(a.hi)) {
            throw PreconditionError("grid axis needs finite lo < hi");
        }
        if (a.bins < 1) throw PreconditionError("grid axis needs bins >= 1");
        cells_ *= a.bins;
    }
}

std::optional<std::size_t> GridPartition::cell_of(const StateVector& x) const {
    if (x.size() != axes_.size()) throw DimensionError("grid dimension does not match state");
    std::size_t flat = 0;
    for (std::size_t i = 0; i < axes_.size(); ++i) {
        const auto& a = axes_[i];
        if (!(x[i] >= a.lo) || !(x[i] <= a.hi)) return std::nullopt;
        auto k = static_cast<std::size_t>((x[i] - a.lo) / (a.hi - a.lo) * static_cast<double>(a.bins));
        k = std::min(k, a.bins - 1);
        flat = flat * a.bins + k;
    }
    return flat;
}

std::vector<std::size_t> GridPartition::multi_index(std::size_t flat) const {
    std::vector<std::size_t> idx(axes_.size());
    for (std::size_t i = axes_.size(); i-- > 0;) {
        idx[i] = flat % axes_[i].bins;
        flat /= axes_[i].bins;
    }
    return idx;
}

StateVector GridPartition::cell_center(std::size_t flat) const {
    const auto idx = multi_index(flat);
    StateVector c(axes_.size());
    for (std::size_t i = 0; i < axes_.size(); ++i) {
        const auto& a = axes_[i];
        c[i] = a.lo + (a.hi - a.lo) * (static_cast<double>(idx[i]) + 0.5) / static_cast<double>(a.bins);
    }
    return c;
}

GridPartition parse_grid(std::string_view text) {
    std::vector<GridAxis> axes;
    auto bad = [&](std::string_view why) {
        return PreconditionError("grid '" + std::string(text) + "': " + std::string(why) +
                                 " (expected lo:hi:bins,...)");
    };
    std::size_t pos = 0;
    while (pos <= text.size()) {
        const std::size_t comma = std::min(text.find(',', pos), text.size());
        const std::string_view item = text.substr(pos, comma - pos);
        double vals[3];
        std::size_t start = 0;
        for (int j = 0; j < 3; ++j) {
            const std::size_t colon = j < 2 ? item.find(':', start) : item.size();
            if (colon == std::string_view::npos) throw bad("missing ':'");
            const std::string_view tok = item.substr(start, colon - start);
            const auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), vals[j]);
            if (ec != std::errc() || ptr != tok.data() + tok.size() || tok.empty()) throw bad("bad number");
            start = colon + 1;
        }
        if (vals[2] < 1 || vals[2] != std::floor(vals[2])) throw bad("bins must be a positive integer");
        axes.push_back({vals[0], vals[1], static_cast<std::size_t>(vals[2])});
        pos = comma + 1;
    }
    return GridPartition(std::move(axes));
}

double default_burn_in(const ImpulsiveTrajectory& traj) { return 0.1 * traj.horizon; }

OccupationMeasure occupation_measure_window(const ImpulsiveTrajectory& traj, const GridPartition& grid, double t0,
                                            double t1) {
    check_window(traj, t0, t1);
    if (grid.dimension() != traj.initial_state.size()) {
        throw PreconditionError("grid has " + std::to_string(grid.dimension()) + " axes but the state has " +
                                std::to_string(traj.initial_state.size()) + " coordinates");
    }
    OccupationMeasure mu{grid, std::vector<double>(grid.cell_count(), 0.0), t1 - t0, 0.0};
    double inside = 0.0;
    double outside = 0.0;
    for_each_weighted(traj, t0, t1, [&](const StateVector& x, double w) {
        if (const auto c = grid.cell_of(x)) {
            mu.weights[*c] += w;
            inside += w;
        } else {
            outside += w;
        }
    });
    if (!(inside > 0.0)) throw Error("trajectory spends no time inside the grid box");
    for (double& w : mu.weights) w /= inside;
    mu.escaped = outside / (inside + outside);
    return mu;
}

OccupationMeasure occupation_measure(const ImpulsiveTrajectory& traj, const GridPartition& grid, double burn_in) {
    if (!(burn_in < traj.horizon)) throw PreconditionError("burn_in must be smaller than the horizon");
    return occupation_measure_window(traj, grid, burn_in, traj.horizon);
}

double pushforward_discrepancy(const SystemSpec& sys, const ImpulsiveTrajectory& traj, const GridPartition& grid,
                               double t_shift, double burn_in) {
    if (grid.dimension() != sys.dimension()) throw PreconditionError("grid dimension does not match the system");
    if (!(t_shift > 0.0) || !(t_shift < traj.horizon / 10.0)) {
        throw PreconditionError("t_shift must lie in (0, horizon/10)");
    }
    const double b = burn_in < 0.0 ? default_burn_in(traj) : burn_in;
    const double T = traj.horizon;
    const auto early = occupation_measure_window(traj, grid, b, T - t_shift);
    const auto late = occupation_measure_window(traj, grid, b + t_shift, T);
    double worst = 0.0;
    for (std::size_t c = 0; c < grid.cell_count(); ++c) {
        worst = std::max(worst, std::abs(early.weights[c] - late.weights[c]));
    }
    return worst;
}

double birkhoff_average(const ImpulsiveTrajectory& traj, std::string_view observable, double burn_in,
                        const GridPartition* grid) {
    if (observable.starts_with("cell:")) {
        if (grid == nullptr) throw PreconditionError("cell indicator needs a grid");
        const std::string_view num = observable.substr(5);
        std::size_t cell = 0;
        const auto [ptr, ec] = std::from_chars(num.data(), num.data() + num.size(), cell);
        if (ec != std::errc() || ptr != num.data() + num.size() || cell >= grid->cell_count()) {
            throw PreconditionError("bad cell observable '" + std::string(observable) + "'");
        }
        return occupation_measure(traj, *grid, burn_in).weights[cell];
    }
    std::function<double(const StateVector&)> f;
    if (observable == "one") {
        f = [](const StateVector&) { return 1.0; };
    } else if (observable == "radius") {
        f = [](const StateVector& x) { return x.norm(); };
    } else if (observable.size() == 2 && observable[0] == 'x' && observable[1] >= '1' && observable[1] <= '3') {
        const std::size_t i = static_cast<std::size_t>(observable[1] - '1');
        if (i >= traj.initial_state.size()) throw PreconditionError("observable index exceeds the state dimension");
        f = [i](const StateVector& x) { return x[i]; };
    } else {
        throw PreconditionError("unknown observable '" + std::string(observable) + "'");
    }
    if (!(burn_in < traj.horizon)) throw PreconditionError("burn_in must be smaller than the horizon");
    check_window(traj, burn_in, traj.horizon);
    double acc = 0.0;
    double total = 0.0;
    for_each_weighted(traj, burn_in, traj.horizon, [&](const StateVector& x, double w) {
        acc += w * f(x);
        total += w;
    });
    return acc / total;
}

void write_measure_csv(std::ostream& os, const OccupationMeasure& mu) {
    const std::size_t n = mu.grid.dimension();
    std::string line;
    for (std::size_t i = 1; i <= n; ++i) line += "i" + std::to_string(i) + ',';
    for (std::size_t i = 1; i <= n; ++i) line += "c" + std::to_string(i) + ',';
    line += "weight\n";
    os << line;
    for (std::size_t c = 0; c < mu.grid.cell_count(); ++c) {
        line.clear();
        for (std::size_t k : mu.grid.multi_index(c)) line += std::to_string(k) + ',';
        const StateVector center = mu.grid.cell_center(c);
        for (std::size_t i = 0; i < n; ++i) {
            append_number(line, center[i]);
            line += ',';
        }
        append_number(line, mu.weights[c]);
        line += '\n';
        os << line;
    }
}

}  // namespace impulseflow
