#pragma once

#include <array>
#include <cmath>
#include <cstddef>
#include <initializer_list>
#include <stdexcept>
#include <string>

namespace impulseflow {

// Base of every error the library throws.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class DimensionError : public Error {
public:
    using Error::Error;
};

class PreconditionError : public Error {
public:
    using Error::Error;
};

class IntegrationError : public Error {
public:
    using Error::Error;
};

class EventError : public Error {
public:
    using Error::Error;
};

inline constexpr std::size_t kMaxDim = 3;

/// Point of the state space. Builtin systems live in R^2 or R^3, so the
/// coordinates are stored inline.
class StateVector {
public:
    StateVector() = default;
    explicit StateVector(std::size_t dim);
    StateVector(std::initializer_list<double> coords);

    std::size_t size() const { return dim_; }
    double& operator[](std::size_t i) { return c_[i]; }
    double operator[](std::size_t i) const { return c_[i]; }

    const double* begin() const { return c_.data(); }
    const double* end() const { return c_.data() + dim_; }
    double* begin() { return c_.data(); }
    double* end() { return c_.data() + dim_; }

    bool all_finite() const;
    double norm() const;

    StateVector& operator+=(const StateVector& o);
    StateVector& operator-=(const StateVector& o);
    StateVector& operator*=(double s);

    friend bool operator==(const StateVector& a, const StateVector& b);

private:
    std::array<double, kMaxDim> c_{};
    std::size_t dim_ = 0;
};

StateVector operator+(StateVector a, const StateVector& b);
StateVector operator-(StateVector a, const StateVector& b);
StateVector operator*(double s, StateVector a);
StateVector operator*(StateVector a, double s);

double dot(const StateVector& a, const StateVector& b);
double distance(const StateVector& a, const StateVector& b);

void require_same_dim(const StateVector& a, const StateVector& b, const char* what);

// Polar helpers for the planar fixtures; angles in radians.
StateVector from_polar(double r, double theta);
double polar_radius(const StateVector& x);
/// Angle in [0, 2*pi).
double polar_angle(const StateVector& x);

std::string to_string(const StateVector& x);

}  // namespace impulseflow
