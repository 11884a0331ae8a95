#pragma once

#include <array>
#include <map>
#include <string>
#include <string_view>

#include "impulseflow/state.hpp"

namespace impulseflow {

enum class FieldId {
    Rotation,      // planar rotation r' = 0, theta' = 1, in Cartesian form
    PreyPredator,  // controlled three-species prey-predator system
    Vertical,      // unit upward flow on the cylinder S^1 x [0,1] embedded in R^3
    Null,          // f = 0
};

std::string_view field_name(FieldId id);
FieldId field_from_name(std::string_view name);

struct PreyPredatorParams {
    double alpha1 = 1, alpha2 = 1, beta1 = 1, beta2 = 1, gamma1 = 1, gamma2 = 1;
    double nu1 = 1, nu2 = 1, mu1 = 1, mu2 = 1;
};

/// Builtin vector field plus its named parameters. Immutable once built.
class VectorFieldSpec {
public:
    /// Throws PreconditionError for unknown parameter names or non-positive
    /// prey-predator parameters.
    VectorFieldSpec(FieldId id, std::map<std::string, double> params = {}, std::size_t null_dim = 2);

    FieldId id() const { return id_; }
    std::size_t dimension() const { return dim_; }
    const std::map<std::string, double>& params() const { return params_; }
    const PreyPredatorParams& prey_predator() const { return pp_; }

    /// Admissibility of a state for this field (e.g. the closed octant for the
    /// prey-predator system, with `tol` slack).
    bool admissible(const StateVector& x, double tol = 1e-8) const;

private:
    FieldId id_;
    std::map<std::string, double> params_;
    PreyPredatorParams pp_;
    std::size_t dim_;
};

struct IntegratorConfig {
    double abs_tol = 1e-10;
    double rel_tol = 1e-10;
    double max_step = 0.1;
    double min_step = 1e-13;

    void validate() const;
};

StateVector eval_vector_field(const VectorFieldSpec& spec, const StateVector& x);

/// phi_t(x). Negative t integrates -f, valid for the builtin invertible fields.
StateVector flow(const VectorFieldSpec& spec, const StateVector& x, double t, const IntegratorConfig& cfg = {});

// ---------------------------------------------------------------------------
// Level functions

enum class LevelId {
    Angle,   // planar polar angle, atan2 branch (-pi, pi]
    Radius,  // planar radius sqrt(x^2 + y^2)
    Sum,     // x1 + x2 + x3
    Height,  // third coordinate
    CoordX,
    CoordY,
};

std::string_view level_name(LevelId id);
/// Throws PreconditionError for unknown names.
LevelId level_from_name(std::string_view name);

double level_value(LevelId id, const StateVector& x);
/// Analytic gradient of the level function.
StateVector level_gradient(LevelId id, const StateVector& x);
StateVector level_gradient(std::string_view level_name, const StateVector& x);

// ---------------------------------------------------------------------------
// Dormand-Prince 5(4) with PI step control and a 4th-order dense output.

/// One accepted step [t0, t0 + h] with continuous extension.
struct DenseStep {
    double t0 = 0.0;
    double h = 0.0;
    StateVector y0;
    StateVector y1;
    std::array<StateVector, 5> rcont;

    double t1() const { return t0 + h; }
    StateVector at(double t) const;
};

class Stepper {
public:
    /// `direction` = -1 integrates the reversed field.
    Stepper(const VectorFieldSpec& spec, const IntegratorConfig& cfg, StateVector y0, double t0 = 0.0,
            int direction = 1);

    double time() const { return t_; }
    const StateVector& state() const { return y_; }

    /// Advances by one accepted step, never past `t_end`.
    DenseStep step(double t_end);

private:
    StateVector rhs(const StateVector& y) const;
    double initial_step(double span) const;

    const VectorFieldSpec* spec_;
    IntegratorConfig cfg_;
    int direction_;
    double t_;
    StateVector y_;
    StateVector k1_;
    double h_ = 0.0;
    double err_old_ = 1e-4;
};

}  // namespace impulseflow
