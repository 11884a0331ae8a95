#include "impulseflow/flow_core.hpp"

#include <algorithm>
#include <cmath>

namespace impulseflow {

namespace {

const std::map<std::string_view, FieldId> kFieldNames = {
    {"rotation", FieldId::Rotation},
    {"prey_predator", FieldId::PreyPredator},
    {"vertical", FieldId::Vertical},
    {"null", FieldId::Null},
};

const std::map<std::string_view, LevelId> kLevelNames = {
    {"angle", LevelId::Angle},   {"radius", LevelId::Radius}, {"sum", LevelId::Sum},
    {"height", LevelId::Height}, {"x", LevelId::CoordX},      {"y", LevelId::CoordY},
};

void check_dim(const StateVector& x, std::size_t want, const char* what) {
    if (x.size() != want) {
        throw DimensionError(std::string(what) + ": expected dimension " + std::to_string(want) + ", got " +
                             std::to_string(x.size()));
    }
}

}  // namespace

std::string_view field_name(FieldId id) {
    for (const auto& [name, value] : kFieldNames) {
        if (value == id) return name;
    }
    return "unknown";
}

FieldId field_from_name(std::string_view name) {
    auto it = kFieldNames.find(name);
    if (it == kFieldNames.end()) throw PreconditionError("unknown vector field '" + std::string(name) + "'");
    return it->second;
}

VectorFieldSpec::VectorFieldSpec(FieldId id, std::map<std::string, double> params, std::size_t null_dim)
    : id_(id), params_(std::move(params)) {
    switch (id_) {
        case FieldId::Rotation: dim_ = 2; break;
        case FieldId::PreyPredator: dim_ = 3; break;
        case FieldId::Vertical: dim_ = 3; break;
        case FieldId::Null:
            if (null_dim == 0 || null_dim > kMaxDim) throw DimensionError("null field dimension out of range");
            dim_ = null_dim;
            break;
    }
    if (id_ != FieldId::PreyPredator) {
        if (!params_.empty()) {
            throw PreconditionError("field '" + std::string(field_name(id_)) + "' takes no parameters");
        }
        return;
    }
    const std::map<std::string_view, double PreyPredatorParams::*> slots = {
        {"alpha1", &PreyPredatorParams::alpha1}, {"alpha2", &PreyPredatorParams::alpha2},
        {"beta1", &PreyPredatorParams::beta1},   {"beta2", &PreyPredatorParams::beta2},
        {"gamma1", &PreyPredatorParams::gamma1}, {"gamma2", &PreyPredatorParams::gamma2},
        {"nu1", &PreyPredatorParams::nu1},       {"nu2", &PreyPredatorParams::nu2},
        {"mu1", &PreyPredatorParams::mu1},       {"mu2", &PreyPredatorParams::mu2},
    };
    for (const auto& [name, value] : params_) {
        auto it = slots.find(name);
        if (it == slots.end()) throw PreconditionError("unknown prey_predator parameter '" + name + "'");
        if (!(value > 0.0) || !std::isfinite(value)) {
            throw PreconditionError("prey_predator parameter '" + name + "' must be positive");
        }
        pp_.*(it->second) = value;
    }
    // Record the resolved set so manifests show every value in use.
    for (const auto& [name, member] : slots) params_[std::string(name)] = pp_.*member;
}

bool VectorFieldSpec::admissible(const StateVector& x, double tol) const {
    if (x.size() != dim_ || !x.all_finite()) return false;
    if (id_ == FieldId::PreyPredator) {
        for (double v : x) {
            if (v < -tol) return false;
        }
    }
    return true;
}

void IntegratorConfig::validate() const {
    if (!(abs_tol > 0.0) || !(rel_tol > 0.0)) throw PreconditionError("integrator tolerances must be positive");
    if (!(min_step > 0.0) || !(min_step <= max_step)) {
        throw PreconditionError("integrator steps must satisfy 0 < min_step <= max_step");
    }
}

StateVector eval_vector_field(const VectorFieldSpec& spec, const StateVector& x) {
    check_dim(x, spec.dimension(), "eval_vector_field");
    StateVector out(spec.dimension());
    switch (spec.id()) {
        case FieldId::Rotation:
            out[0] = -x[1];
            out[1] = x[0];
            break;
        case FieldId::PreyPredator: {
            const auto& p = spec.prey_predator();
            const double den = 1.0 + p.beta1 * x[0] + p.beta2 * x[1];
            out[0] = -(x[0] + p.alpha1 * x[2]) * x[0] / den;
            out[1] = -(p.gamma2 * x[1] + p.nu2 * x[2]) * x[1] / den;
            out[2] = -p.mu1 * x[2] / den;
            break;
        }
        case FieldId::Vertical:
            out[2] = 1.0;
            break;
        case FieldId::Null:
            break;
    }
    if (!out.all_finite()) {
        throw IntegrationError("vector field evaluated to a non-finite value at " + to_string(x));
    }
    return out;
}

StateVector flow(const VectorFieldSpec& spec, const StateVector& x, double t, const IntegratorConfig& cfg) {
    check_dim(x, spec.dimension(), "flow");
    if (t == 0.0) return x;
    const int dir = t > 0.0 ? 1 : -1;
    const double span = std::abs(t);
    Stepper stepper(spec, cfg, x, 0.0, dir);
    while (stepper.time() < span) stepper.step(span);
    return stepper.state();
}

// ---------------------------------------------------------------------------

std::string_view level_name(LevelId id) {
    for (const auto& [name, value] : kLevelNames) {
        if (value == id) return name;
    }
    return "unknown";
}

LevelId level_from_name(std::string_view name) {
    auto it = kLevelNames.find(name);
    if (it == kLevelNames.end()) throw PreconditionError("unknown level function '" + std::string(name) + "'");
    return it->second;
}

double level_value(LevelId id, const StateVector& x) {
    switch (id) {
        case LevelId::Angle: return std::atan2(x[1], x[0]);
        case LevelId::Radius: return std::hypot(x[0], x[1]);
        case LevelId::Sum: check_dim(x, 3, "sum level"); return x[0] + x[1] + x[2];
        case LevelId::Height: check_dim(x, 3, "height level"); return x[2];
        case LevelId::CoordX: return x[0];
        case LevelId::CoordY: return x[1];
    }
    return 0.0;
}

StateVector level_gradient(LevelId id, const StateVector& x) {
    StateVector g(x.size());
    switch (id) {
        case LevelId::Angle: {
            const double r2 = x[0] * x[0] + x[1] * x[1];
            if (r2 == 0.0) throw PreconditionError("angle level has no gradient at the origin");
            g[0] = -x[1] / r2;
            g[1] = x[0] / r2;
            break;
        }
        case LevelId::Radius: {
            const double r = std::hypot(x[0], x[1]);
            if (r == 0.0) throw PreconditionError("radius level has no gradient at the origin");
            g[0] = x[0] / r;
            g[1] = x[1] / r;
            break;
        }
        case LevelId::Sum:
            check_dim(x, 3, "sum level");
            g[0] = g[1] = g[2] = 1.0;
            break;
        case LevelId::Height:
            check_dim(x, 3, "height level");
            g[2] = 1.0;
            break;
        case LevelId::CoordX: g[0] = 1.0; break;
        case LevelId::CoordY: g[1] = 1.0; break;
    }
    return g;
}

StateVector level_gradient(std::string_view name, const StateVector& x) {
    return level_gradient(level_from_name(name), x);
}

// ---------------------------------------------------------------------------
// Dormand-Prince 5(4)

namespace {

constexpr double a21 = 1.0 / 5.0;
constexpr double a31 = 3.0 / 40.0, a32 = 9.0 / 40.0;
constexpr double a41 = 44.0 / 45.0, a42 = -56.0 / 15.0, a43 = 32.0 / 9.0;
constexpr double a51 = 19372.0 / 6561.0, a52 = -25360.0 / 2187.0, a53 = 64448.0 / 6561.0, a54 = -212.0 / 729.0;
constexpr double a61 = 9017.0 / 3168.0, a62 = -355.0 / 33.0, a63 = 46732.0 / 5247.0, a64 = 49.0 / 176.0,
                 a65 = -5103.0 / 18656.0;
constexpr double a71 = 35.0 / 384.0, a73 = 500.0 / 1113.0, a74 = 125.0 / 192.0, a75 = -2187.0 / 6784.0,
                 a76 = 11.0 / 84.0;
constexpr double e1 = 71.0 / 57600.0, e3 = -71.0 / 16695.0, e4 = 71.0 / 1920.0, e5 = -17253.0 / 339200.0,
                 e6 = 22.0 / 525.0, e7 = -1.0 / 40.0;
constexpr double d1 = -12715105075.0 / 11282082432.0, d3 = 87487479700.0 / 32700410799.0,
                 d4 = -10690763975.0 / 1880347072.0, d5 = 701980252875.0 / 199316789632.0,
                 d6 = -1453857185.0 / 822651844.0, d7 = 69997945.0 / 29380423.0;

// PI controller constants.
constexpr double kBeta = 0.04;
constexpr double kExpo1 = 0.2 - kBeta * 0.75;
constexpr double kSafe = 0.9;
// Step ratio h_new / h stays within [kFacMin, kFacMax].
constexpr double kFacMin = 0.2;
constexpr double kFacMax = 10.0;

StateVector combo(const StateVector& y, double h, std::initializer_list<std::pair<double, const StateVector*>> terms) {
    StateVector out = y;
    for (std::size_t i = 0; i < out.size(); ++i) {
        double acc = 0.0;
        for (const auto& [c, k] : terms) acc += c * (*k)[i];
        out[i] += h * acc;
    }
    return out;
}

}  // namespace

StateVector DenseStep::at(double t) const {
    if (h == 0.0) return y0;
    const double s = (t - t0) / h;
    const double s1 = 1.0 - s;
    StateVector out(y0.size());
    for (std::size_t i = 0; i < out.size(); ++i) {
        out[i] = rcont[0][i] + s * (rcont[1][i] + s1 * (rcont[2][i] + s * (rcont[3][i] + s1 * rcont[4][i])));
    }
    return out;
}

Stepper::Stepper(const VectorFieldSpec& spec, const IntegratorConfig& cfg, StateVector y0, double t0, int direction)
    : spec_(&spec), cfg_(cfg), direction_(direction >= 0 ? 1 : -1), t_(t0), y_(std::move(y0)) {
    cfg_.validate();
    check_dim(y_, spec.dimension(), "Stepper");
    if (!spec.admissible(y_)) throw IntegrationError("initial state outside admissible region: " + to_string(y_));
    k1_ = rhs(y_);
}

StateVector Stepper::rhs(const StateVector& y) const {
    StateVector f = eval_vector_field(*spec_, y);
    if (direction_ < 0) f *= -1.0;
    return f;
}

double Stepper::initial_step(double span) const {
    const std::size_t n = y_.size();
    double dnf = 0.0, dny = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double sk = cfg_.abs_tol + cfg_.rel_tol * std::abs(y_[i]);
        dnf += (k1_[i] / sk) * (k1_[i] / sk);
        dny += (y_[i] / sk) * (y_[i] / sk);
    }
    double h = (dnf <= 1e-10 || dny <= 1e-10) ? 1e-6 : std::sqrt(dny / dnf) * 0.01;
    h = std::min({h, cfg_.max_step, span});
    StateVector y1 = y_;
    for (std::size_t i = 0; i < n; ++i) y1[i] += h * k1_[i];
    const StateVector f1 = rhs(y1);
    double der2 = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double sk = cfg_.abs_tol + cfg_.rel_tol * std::abs(y_[i]);
        der2 += ((f1[i] - k1_[i]) / sk) * ((f1[i] - k1_[i]) / sk);
    }
    der2 = std::sqrt(der2) / h;
    const double der12 = std::max(std::abs(der2), std::sqrt(dnf));
    const double h1 = der12 <= 1e-15 ? std::max(1e-6, std::abs(h) * 1e-3) : std::pow(0.01 / der12, 0.2);
    return std::min({100.0 * h, h1, cfg_.max_step});
}

DenseStep Stepper::step(double t_end) {
    const double remaining = t_end - t_;
    if (!(remaining > 0.0)) throw IntegrationError("Stepper::step called at or past t_end");
    if (h_ == 0.0) h_ = initial_step(remaining);

    const std::size_t n = y_.size();
    for (;;) {
        double h = std::min(h_, cfg_.max_step);
        const bool truncated = h >= remaining;
        if (truncated) h = remaining;

        const StateVector& k1 = k1_;
        const StateVector k2 = rhs(combo(y_, h, {{a21, &k1}}));
        const StateVector k3 = rhs(combo(y_, h, {{a31, &k1}, {a32, &k2}}));
        const StateVector k4 = rhs(combo(y_, h, {{a41, &k1}, {a42, &k2}, {a43, &k3}}));
        const StateVector k5 = rhs(combo(y_, h, {{a51, &k1}, {a52, &k2}, {a53, &k3}, {a54, &k4}}));
        const StateVector y6 = combo(y_, h, {{a61, &k1}, {a62, &k2}, {a63, &k3}, {a64, &k4}, {a65, &k5}});
        const StateVector k6 = rhs(y6);
        const StateVector y1 = combo(y_, h, {{a71, &k1}, {a73, &k3}, {a74, &k4}, {a75, &k5}, {a76, &k6}});
        const StateVector k7 = rhs(y1);

        double err = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            const double e = h * (e1 * k1[i] + e3 * k3[i] + e4 * k4[i] + e5 * k5[i] + e6 * k6[i] + e7 * k7[i]);
            const double sk = cfg_.abs_tol + cfg_.rel_tol * std::max(std::abs(y_[i]), std::abs(y1[i]));
            err += (e / sk) * (e / sk);
        }
        err = std::sqrt(err / static_cast<double>(n));

        const double fac11 = std::pow(err, kExpo1);
        if (err <= 1.0) {
            double fac = fac11 / std::pow(err_old_, kBeta);
            fac = std::clamp(fac / kSafe, 1.0 / kFacMax, 1.0 / kFacMin);
            err_old_ = std::max(err, 1e-4);

            DenseStep out;
            out.t0 = t_;
            out.h = h;
            out.y0 = y_;
            out.y1 = y1;
            const StateVector ydiff = y1 - y_;
            StateVector bspl(n);
            for (std::size_t i = 0; i < n; ++i) bspl[i] = h * k1[i] - ydiff[i];
            out.rcont[0] = y_;
            out.rcont[1] = ydiff;
            out.rcont[2] = bspl;
            out.rcont[3] = StateVector(n);
            out.rcont[4] = StateVector(n);
            for (std::size_t i = 0; i < n; ++i) {
                out.rcont[3][i] = ydiff[i] - h * k7[i] - bspl[i];
                out.rcont[4][i] =
                    h * (d1 * k1[i] + d3 * k3[i] + d4 * k4[i] + d5 * k5[i] + d6 * k6[i] + d7 * k7[i]);
            }

            t_ = truncated ? t_end : t_ + h;
            y_ = y1;
            k1_ = k7;
            const double h_new = std::min(h / fac, cfg_.max_step);
            // A step shortened to land on t_end says nothing about the
            // natural step size, so keep the larger proposal.
            h_ = truncated ? std::max(h_, h_new) : h_new;
            if (!spec_->admissible(y_)) {
                throw IntegrationError("state left the admissible region: " + to_string(y_));
            }
            return out;
        }
        h_ = h / std::min(1.0 / kFacMin, fac11 / kSafe);
        if (h_ < cfg_.min_step) {
            throw IntegrationError("step size underflow at t = " + std::to_string(t_));
        }
    }
}

}  // namespace impulseflow
