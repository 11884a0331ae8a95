#include "impulseflow/systems.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "impulseflow/random.hpp"

namespace impulseflow {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kPi = std::numbers::pi;

const std::vector<std::string> kPreyPredatorParams = {"alpha1", "alpha2", "beta1", "beta2", "gamma1",
                                                      "gamma2", "nu1",    "nu2",   "mu1",   "mu2"};

void reject_unknown(std::string_view fixture, const Overrides& overrides, const Overrides& defaults) {
    for (const auto& [key, value] : overrides) {
        if (!defaults.contains(key)) {
            throw PreconditionError("fixture '" + std::string(fixture) + "' has no parameter '" + key + "'");
        }
    }
}

Overrides resolve(std::string_view fixture, const Overrides& overrides, const Overrides& defaults) {
    reject_unknown(fixture, overrides, defaults);
    Overrides out = defaults;
    for (const auto& [key, value] : overrides) out[key] = value;
    return out;
}

double scalar(const Overrides& params, const std::string& key) {
    const auto& v = params.at(key);
    if (v.size() != 1) throw PreconditionError("parameter '" + key + "' must be a single number");
    return v.front();
}

std::vector<RangeConstraint> annulus_region() { return {{LevelId::Radius, 1.0, 2.0}}; }

ImpulsiveSetSpec annulus_d() {
    return {{{LevelId::Angle, 0.0, Crossing::Increasing, {{LevelId::Radius, 1.0, 2.0}, {LevelId::CoordX, 0.0, kInf}}}}};
}

ImpulsiveSetSpec annulus_image() {
    return {{{LevelId::Angle, kPi, Crossing::Increasing, {{LevelId::Radius, 1.0, 1.5}, {LevelId::CoordX, -kInf, 0.0}}}}};
}

SystemSpec make_annulus(const IntegratorConfig& cfg) {
    return SystemSpec{"annulus",
                      VectorFieldSpec(FieldId::Rotation),
                      annulus_d(),
                      annulus_image(),
                      {ImpulseMapId::AnnulusFold, {}},
                      annulus_region(),
                      cfg};
}

SystemSpec make_prey_predator(const Overrides& params, const IntegratorConfig& cfg) {
    std::map<std::string, double> field_params;
    for (const auto& name : kPreyPredatorParams) field_params[name] = scalar(params, name);

    const auto& xi = params.at("xi");
    const auto& eta = params.at("eta");
    if (xi.empty() || xi.size() != eta.size() || xi.size() > 3) {
        throw PreconditionError("prey_predator: 'xi' and 'eta' must be lists of equal length between 1 and 3");
    }
    for (std::size_t i = 0; i < xi.size(); ++i) {
        if (!(xi[i] > 0.0) || !(eta[i] > xi[i])) {
            throw PreconditionError("prey_predator: need 0 < xi_i < eta_i for every plane");
        }
        for (double e : eta) {
            if (e == xi[i]) throw PreconditionError("prey_predator: xi and eta planes must be distinct");
        }
    }
    const std::vector<RangeConstraint> octant = {
        {LevelId::CoordX, 0.0, kInf}, {LevelId::CoordY, 0.0, kInf}, {LevelId::Height, 0.0, kInf}};
    ImpulsiveSetSpec d, image;
    ImpulseMapSpec impulse{ImpulseMapId::RadialScaling, {}};
    for (std::size_t i = 0; i < xi.size(); ++i) {
        d.surfaces.push_back({LevelId::Sum, xi[i], Crossing::Decreasing, octant});
        image.surfaces.push_back({LevelId::Sum, eta[i], Crossing::Decreasing, octant});
        impulse.factors.push_back(eta[i] / xi[i]);
    }
    return SystemSpec{"prey_predator",
                      VectorFieldSpec(FieldId::PreyPredator, field_params),
                      std::move(d),
                      std::move(image),
                      std::move(impulse),
                      {},
                      cfg};
}

SystemSpec make_doubling(const IntegratorConfig& cfg) {
    const std::vector<RangeConstraint> circle = {{LevelId::Radius, 1.0, 1.0}};
    std::vector<RangeConstraint> cylinder = circle;
    cylinder.push_back({LevelId::Height, 0.0, 1.0});
    return SystemSpec{"doubling_suspension",
                      VectorFieldSpec(FieldId::Vertical),
                      {{{LevelId::Height, 1.0, Crossing::Increasing, circle}}},
                      {{{LevelId::Height, 0.0, Crossing::Increasing, circle}}},
                      {ImpulseMapId::AngleDoubling, {}},
                      cylinder,
                      cfg};
}

SystemSpec make_static(const IntegratorConfig& cfg) {
    return SystemSpec{"static_null",
                      VectorFieldSpec(FieldId::Null, {}, 2),
                      annulus_d(),
                      annulus_image(),
                      {ImpulseMapId::AnnulusFold, {}},
                      annulus_region(),
                      cfg};
}

SystemSpec make_tangent(const IntegratorConfig& cfg) {
    return SystemSpec{"tangent_degenerate",
                      VectorFieldSpec(FieldId::Rotation),
                      {{{LevelId::Radius, 1.5, Crossing::Any, {}}}},
                      {{{LevelId::Radius, 1.25, Crossing::Any, {}}}},
                      {ImpulseMapId::RadialScaling, {1.25 / 1.5}},
                      annulus_region(),
                      cfg};
}

}  // namespace

const std::vector<FixtureDescriptor>& fixture_catalog() {
    static const std::vector<FixtureDescriptor> catalog = [] {
        Overrides pp;
        for (const auto& name : kPreyPredatorParams) pp[name] = {1.0};
        pp["xi"] = {1.0};
        pp["eta"] = {2.0};
        return std::vector<FixtureDescriptor>{
            {"annulus", {},
             "Annulus 1 <= r <= 2 under r' = 0, theta' = 1. D is the segment from (1,0) to (2,0); "
             "I(r,0) = (-1/2 - r/2, 0) maps it onto the segment from (-1,0) to (-3/2,0)."},
            {"prey_predator", pp,
             "Controlled three-species prey-predator field on the closed octant. D is the union of "
             "planes x1+x2+x3 = xi_i, I(x) = (eta_i/xi_i) x maps plane i onto x1+x2+x3 = eta_i."},
            {"doubling_suspension", {},
             "Cylinder S^1 x [0,1] embedded in R^3 with unit vertical flow. D is the top circle, "
             "I(theta, 1) = (2 theta mod 2 pi, 0). Unit return time; entropy log 2."},
            {"static_null", {},
             "Annulus geometry with f = 0. D is never reached, every orbit is a fixed point."},
            {"tangent_degenerate", {},
             "Rotation field with D the circle r = 1.5, which is tangent to the flow. Fails "
             "the transversality check by construction."},
        };
    }();
    return catalog;
}

SystemSpec build_fixture(std::string_view name, const Overrides& overrides, const IntegratorConfig& cfg) {
    cfg.validate();
    const auto& catalog = fixture_catalog();
    auto it = std::find_if(catalog.begin(), catalog.end(), [&](const auto& f) { return f.name == name; });
    if (it == catalog.end()) throw PreconditionError("unknown fixture '" + std::string(name) + "'");
    const Overrides params = resolve(name, overrides, it->defaults);

    if (name == "annulus") return make_annulus(cfg);
    if (name == "prey_predator") return make_prey_predator(params, cfg);
    if (name == "doubling_suspension") return make_doubling(cfg);
    if (name == "static_null") return make_static(cfg);
    return make_tangent(cfg);
}

StateVector default_initial_state(const SystemSpec& sys) {
    if (sys.name == "prey_predator") {
        const double eta = sys.image_set.surfaces.front().value;
        const double xi = sys.impulsive_set.surfaces.front().value;
        const double s = 0.5 * (xi + eta) / 3.0;
        return StateVector{s, s, s};
    }
    if (sys.name == "doubling_suspension") return StateVector{std::cos(1.0), std::sin(1.0), 0.0};
    if (sys.name == "tangent_degenerate") return from_polar(1.75, kPi / 2);
    return from_polar(1.5, kPi / 2);
}

std::vector<StateVector> sample_admissible(const SystemSpec& sys, std::size_t n, std::uint64_t seed) {
    Rng rng(seed);
    std::vector<StateVector> out;
    out.reserve(n);
    if (sys.name == "prey_predator") {
        double top = 0.0;
        for (const auto& s : sys.image_set.surfaces) top = std::max(top, s.value);
        for (std::size_t i = 0; i < n; ++i) {
            const double a = rng.uniform(0.0, top);
            const double b = rng.uniform(0.0, top);
            const double c = rng.uniform(0.0, top);
            out.push_back(StateVector{a, b, c});
        }
        return out;
    }
    if (sys.name == "doubling_suspension") {
        for (std::size_t i = 0; i < n; ++i) {
            const double theta = rng.uniform(0.0, 2.0 * kPi);
            const double h = rng.uniform();
            out.push_back(StateVector{std::cos(theta), std::sin(theta), h});
        }
        return out;
    }
    for (std::size_t i = 0; i < n; ++i) {
        const double r = std::sqrt(1.0 + 3.0 * rng.uniform());
        const double theta = rng.uniform(0.0, 2.0 * kPi);
        out.push_back(from_polar(r, theta));
    }
    return out;
}

std::vector<StateVector> entropy_candidates(const SystemSpec& sys, std::size_t n, std::uint64_t seed) {
    if (sys.name != "doubling_suspension") return sample_admissible(sys, n, seed);
    std::vector<StateVector> out;
    out.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
        const double theta = 2.0 * kPi * static_cast<double>(i) / static_cast<double>(n);
        out.push_back(StateVector{std::cos(theta), std::sin(theta), 0.0});
    }
    return out;
}

}  // namespace impulseflow
