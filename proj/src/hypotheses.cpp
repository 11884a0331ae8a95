#include "impulseflow/hypotheses.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "impulseflow/kernels.hpp"

namespace impulseflow {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kPi = std::numbers::pi;

double radical_inverse(std::size_t i, std::size_t base) {
    double inv = 1.0 / static_cast<double>(base);
    double f = inv;
    double out = 0.0;
    while (i > 0) {
        out += f * static_cast<double>(i % base);
        i /= base;
        f *= inv;
    }
    return out;
}

const RangeConstraint* find_constraint(const LevelSurface& s, LevelId q) {
    for (const auto& c : s.region) {
        if (c.quantity == q) return &c;
    }
    return nullptr;
}

std::vector<StateVector> sample_params(std::size_t n, std::size_t param_dim,
                                       const std::vector<std::array<double, 2>>& seeds,
                                       const auto& map_point) {
    std::vector<StateVector> out;
    out.reserve(n);
    for (const auto& s : seeds) {
        if (out.size() == n) return out;
        out.push_back(map_point(s[0], s[1]));
    }
    for (std::size_t i = 1; out.size() < n; ++i) {
        const double u = radical_inverse(i, 2);
        const double v = param_dim > 1 ? radical_inverse(i, 3) : 0.0;
        out.push_back(map_point(u, v));
    }
    return out;
}

// Unit vectors spanning the tangent space of the level set at x.
std::vector<StateVector> tangent_basis(const StateVector& grad) {
    if (grad.size() == 2) {
        StateVector t{-grad[1], grad[0]};
        t *= 1.0 / t.norm();
        return {t};
    }
    const StateVector g = (1.0 / grad.norm()) * grad;
    std::size_t axis = 0;
    for (std::size_t i = 1; i < 3; ++i) {
        if (std::abs(g[i]) < std::abs(g[axis])) axis = i;
    }
    StateVector e(3);
    e[axis] = 1.0;
    StateVector t1 = e - dot(e, g) * g;
    t1 *= 1.0 / t1.norm();
    StateVector t2{g[1] * t1[2] - g[2] * t1[1], g[2] * t1[0] - g[0] * t1[2], g[0] * t1[1] - g[1] * t1[0]};
    return {t1, t2};
}

}  // namespace

std::vector<StateVector> surface_samples(const LevelSurface& surface, std::size_t dim, std::size_t n) {
    switch (surface.level) {
        case LevelId::Angle: {
            const auto* rc = find_constraint(surface, LevelId::Radius);
            if (rc == nullptr || !(rc->lo <= rc->hi)) break;
            const double lo = rc->lo, hi = rc->hi;
            const double c = std::cos(surface.value), s = std::sin(surface.value);
            return sample_params(n, 1, {{0.0, 0.0}, {1.0, 0.0}, {0.5, 0.0}}, [&](double u, double) {
                const double r = lo + (hi - lo) * u;
                return StateVector{r * c, r * s};
            });
        }
        case LevelId::Radius: {
            const double r = surface.value;
            if (!(r > 0.0)) break;
            return sample_params(n, 1, {{0.0, 0.0}, {0.5, 0.0}}, [&](double u, double) {
                return StateVector{r * std::cos(2.0 * kPi * u), r * std::sin(2.0 * kPi * u)};
            });
        }
        case LevelId::Height: {
            if (dim != 3) break;
            const auto* rc = find_constraint(surface, LevelId::Radius);
            const double r = rc != nullptr ? rc->lo : 1.0;
            const double h = surface.value;
            return sample_params(n, 1, {{0.0, 0.0}, {0.5, 0.0}}, [&](double u, double) {
                return StateVector{r * std::cos(2.0 * kPi * u), r * std::sin(2.0 * kPi * u), h};
            });
        }
        case LevelId::Sum: {
            const double total = surface.value;
            if (dim != 3 || !(total > 0.0)) break;
            const double third = 1.0 / 3.0;
            return sample_params(n, 2, {{0.0, 0.0}, {1.0, 0.0}, {0.0, 1.0}, {third, third}}, [&](double u, double v) {
                if (u + v > 1.0) {
                    u = 1.0 - u;
                    v = 1.0 - v;
                }
                return StateVector{total * u, total * v, total * std::max(0.0, 1.0 - u - v)};
            });
        }
        default: break;
    }
    throw PreconditionError("no sampler for level surface '" + std::string(level_name(surface.level)) +
                            "' with the given region constraints");
}

std::vector<StateVector> set_samples(const ImpulsiveSetSpec& set, std::size_t dim, std::size_t n) {
    std::vector<StateVector> out;
    const std::size_t m = set.surfaces.size();
    for (std::size_t i = 0; i < m; ++i) {
        const std::size_t share = n / m + (i < n % m ? 1 : 0);
        for (auto& p : surface_samples(set.surfaces[i], dim, share)) {
            if (set.contains(p)) out.push_back(std::move(p));
        }
    }
    return out;
}

TransversalityReport transversality_margin(const SystemSpec& sys, TargetSet which, std::size_t n_samples,
                                           double margin_tol) {
    const ImpulsiveSetSpec& set = which == TargetSet::D ? sys.impulsive_set : sys.image_set;
    TransversalityReport rep;
    rep.margin_tol = margin_tol;
    bool seen_pos = false, seen_neg = false, seen_zero = false;
    rep.min_abs_inner = kInf;
    const std::size_t m = set.surfaces.size();
    for (std::size_t i = 0; i < m; ++i) {
        const std::size_t share = n_samples / m + (i < n_samples % m ? 1 : 0);
        const auto& surface = set.surfaces[i];
        for (const auto& p : surface_samples(surface, sys.dimension(), share)) {
            if (!set.contains(p)) continue;
            const double inner = dot(level_gradient(surface.level, p), eval_vector_field(sys.field, p));
            ++rep.sampled_points;
            seen_pos |= inner > 0.0;
            seen_neg |= inner < 0.0;
            seen_zero |= inner == 0.0;
            if (std::abs(inner) < rep.min_abs_inner) {
                rep.min_abs_inner = std::abs(inner);
                rep.worst_point = p;
            }
        }
    }
    if (rep.sampled_points == 0) {
        throw PreconditionError("transversality_margin: no samples satisfy the region constraints");
    }
    rep.sign_consistent = !seen_zero && (seen_pos != seen_neg);
    rep.sign = rep.sign_consistent ? (seen_pos ? 1 : -1) : 0;
    rep.pass = rep.sign_consistent && rep.min_abs_inner > margin_tol;
    return rep;
}

SeparationReport separation_report(const SystemSpec& sys, std::size_t n_samples, double xi_cap) {
    const std::size_t dim = sys.dimension();
    const auto d_pts = set_samples(sys.impulsive_set, dim, n_samples);
    const auto id_pts = set_samples(sys.image_set, dim, n_samples);
    if (d_pts.empty() || id_pts.empty()) throw PreconditionError("separation_report: empty sample set");

    std::vector<std::vector<double>> soa(dim, std::vector<double>(id_pts.size()));
    for (std::size_t k = 0; k < id_pts.size(); ++k) {
        for (std::size_t c = 0; c < dim; ++c) soa[c][k] = id_pts[k][c];
    }
    kernels::SoaView view;
    view.dim = dim;
    for (std::size_t c = 0; c < dim; ++c) view.coord[c] = soa[c].data();

    SeparationReport rep;
    double best = kInf;
    for (const auto& p : d_pts) {
        const double d2 = kernels::min_sq_distance(p.begin(), view, 0, id_pts.size());
        if (d2 < best) {
            best = d2;
            rep.witness_D = p;
        }
    }
    double best_q = kInf;
    for (const auto& q : id_pts) {
        const double d = distance(q, rep.witness_D);
        if (d < best_q) {
            best_q = d;
            rep.witness_ID = q;
        }
    }
    rep.dist_D_ID = std::sqrt(best);

    // Supremum of xi with phi_t(D) clear of I(D) for 0 < t < xi: the earliest
    // time a flowed D sample enters I(D).
    rep.xi_margin = xi_cap;
    for (const auto& p : d_pts) {
        if (auto hit = first_hit(sys.field, sys.integrator, sys.image_set, p, xi_cap, 1)) {
            rep.xi_margin = std::min(rep.xi_margin, hit->time);
        }
    }
    rep.pass = rep.dist_D_ID > sys.impulsive_set.membership_tol && rep.xi_margin > 0.0;
    return rep;
}

bool in_D_xi(const SystemSpec& sys, const StateVector& x, double xi) {
    if (!(xi > 0.0)) return false;
    return first_hit(sys.field, sys.integrator, sys.impulsive_set, x, xi, -1).has_value();
}

std::optional<double> tau_star(const SystemSpec& sys, const StateVector& x, double xi, double t_max) {
    if (sys.impulsive_set.contains(x)) return 0.0;
    if (in_D_xi(sys, x, xi)) return std::nullopt;
    const auto hit = first_hitting_time(sys, x, t_max);
    return hit ? hit->time : kInf;
}

std::vector<ContinuityRow> hitting_continuity_probe(const SystemSpec& sys, const StateVector& x_in_D,
                                                    std::size_t approach_dirs, const std::vector<double>& scales,
                                                    double xi) {
    const auto surface = sys.impulsive_set.surface_of(x_in_D);
    if (!surface) throw PreconditionError("hitting_continuity_probe: point is not in D");
    if (approach_dirs == 0) throw PreconditionError("hitting_continuity_probe: need at least one direction");
    for (std::size_t i = 0; i < scales.size(); ++i) {
        if (scales[i] < 0.0 || (i > 0 && !(scales[i] < scales[i - 1]))) {
            throw PreconditionError("hitting_continuity_probe: scales must be nonnegative and decreasing");
        }
    }
    const LevelSurface& s = sys.impulsive_set.surfaces[*surface];
    const auto basis = tangent_basis(level_gradient(s.level, x_in_D));

    std::vector<ContinuityRow> table;
    for (double scale : scales) {
        ContinuityRow row{scale, 0.0, 0};
        if (scale == 0.0) {
            table.push_back(row);
            continue;
        }
        for (std::size_t j = 0; j < approach_dirs; ++j) {
            const double phase = 2.0 * kPi * static_cast<double>(j) / static_cast<double>(approach_dirs);
            StateVector u = basis.size() == 1 ? (j % 2 == 0 ? 1.0 : -1.0) * basis[0]
                                              : std::cos(phase) * basis[0] + std::sin(phase) * basis[1];
            const double offset = scale * static_cast<double>(j) / static_cast<double>(approach_dirs);
            StateVector base = x_in_D + offset * u;
            // Equality constraints (the suspension's unit circle) pin D down
            // further than the level set does.
            for (const auto& c : s.region) {
                if (c.quantity == LevelId::Radius && c.lo == c.hi && c.lo > 0.0) {
                    const double r = std::hypot(base[0], base[1]);
                    if (r > 0.0) {
                        base[0] *= c.lo / r;
                        base[1] *= c.lo / r;
                    }
                }
            }
            if (!sys.impulsive_set.contains(base)) {
                ++row.escaped;
                continue;
            }
            std::optional<double> value;
            try {
                const StateVector probe = flow(sys.field, base, -scale, sys.integrator);
                if (sys.admissible(probe)) value = tau_star(sys, probe, xi, std::max(1.0, 4.0 * scale));
            } catch (const Error&) {
                // Integration or event failure: the probe point is unusable.
            }
            if (!value) {
                ++row.escaped;
                continue;
            }
            row.max_tau = std::max(row.max_tau, *value);
        }
        table.push_back(row);
    }
    return table;
}

bool continuity_table_ok(const std::vector<ContinuityRow>& table, double max_ratio) {
    for (std::size_t i = 0; i < table.size(); ++i) {
        const auto& r = table[i];
        if (r.escaped != 0 || !std::isfinite(r.max_tau)) return false;
        if (r.scale > 0.0 && r.max_tau > max_ratio * r.scale) return false;
        if (i > 0 && r.max_tau > table[i - 1].max_tau) return false;
    }
    return true;
}

HypothesesReport check_hypotheses(const SystemSpec& sys, const HypothesesConfig& cfg) {
    HypothesesReport rep;
    rep.transversality_D = transversality_margin(sys, TargetSet::D, cfg.n_samples, cfg.margin_tol);
    rep.transversality_ID = transversality_margin(sys, TargetSet::ImageOfD, cfg.n_samples, cfg.margin_tol);
    rep.separation = separation_report(sys, cfg.n_samples);

    // Probe at the centre sample of the first D surface.
    const auto probe_points = surface_samples(sys.impulsive_set.surfaces.front(), sys.dimension(), 4);
    StateVector x = probe_points.back();
    rep.continuity_table = hitting_continuity_probe(sys, x, cfg.approach_dirs, cfg.scales, cfg.xi);
    rep.continuity_ok = continuity_table_ok(rep.continuity_table);
    rep.pass = rep.transversality_D.pass && rep.transversality_ID.pass && rep.separation.pass && rep.continuity_ok;
    return rep;
}

}  // namespace impulseflow
