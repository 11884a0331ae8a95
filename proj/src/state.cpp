#include "impulseflow/state.hpp"

#include <numbers>
#include <sstream>

namespace impulseflow {

StateVector::StateVector(std::size_t dim) : dim_(dim) {
    if (dim == 0 || dim > kMaxDim) {
        throw DimensionError("state dimension must be in [1, " + std::to_string(kMaxDim) + "], got " +
                             std::to_string(dim));
    }
}

StateVector::StateVector(std::initializer_list<double> coords) : StateVector(coords.size()) {
    std::size_t i = 0;
    for (double v : coords) c_[i++] = v;
}

bool StateVector::all_finite() const {
    for (double v : *this) {
        if (!std::isfinite(v)) return false;
    }
    return true;
}

double StateVector::norm() const { return std::sqrt(dot(*this, *this)); }

StateVector& StateVector::operator+=(const StateVector& o) {
    require_same_dim(*this, o, "operator+=");
    for (std::size_t i = 0; i < dim_; ++i) c_[i] += o.c_[i];
    return *this;
}

StateVector& StateVector::operator-=(const StateVector& o) {
    require_same_dim(*this, o, "operator-=");
    for (std::size_t i = 0; i < dim_; ++i) c_[i] -= o.c_[i];
    return *this;
}

StateVector& StateVector::operator*=(double s) {
    for (std::size_t i = 0; i < dim_; ++i) c_[i] *= s;
    return *this;
}

bool operator==(const StateVector& a, const StateVector& b) {
    if (a.dim_ != b.dim_) return false;
    for (std::size_t i = 0; i < a.dim_; ++i) {
        if (a.c_[i] != b.c_[i]) return false;
    }
    return true;
}

StateVector operator+(StateVector a, const StateVector& b) { return a += b; }
StateVector operator-(StateVector a, const StateVector& b) { return a -= b; }
StateVector operator*(double s, StateVector a) { return a *= s; }
StateVector operator*(StateVector a, double s) { return a *= s; }

double dot(const StateVector& a, const StateVector& b) {
    require_same_dim(a, b, "dot");
    double acc = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) acc += a[i] * b[i];
    return acc;
}

double distance(const StateVector& a, const StateVector& b) {
    require_same_dim(a, b, "distance");
    double acc = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        const double d = a[i] - b[i];
        acc += d * d;
    }
    return std::sqrt(acc);
}

void require_same_dim(const StateVector& a, const StateVector& b, const char* what) {
    if (a.size() != b.size()) {
        throw DimensionError(std::string(what) + ": dimension mismatch (" + std::to_string(a.size()) + " vs " +
                             std::to_string(b.size()) + ")");
    }
}

StateVector from_polar(double r, double theta) { return StateVector{r * std::cos(theta), r * std::sin(theta)}; }

double polar_radius(const StateVector& x) { return std::hypot(x[0], x[1]); }

double polar_angle(const StateVector& x) {
    double a = std::atan2(x[1], x[0]);
    if (a < 0.0) a += 2.0 * std::numbers::pi;
    if (a >= 2.0 * std::numbers::pi) a = 0.0;
    return a;
}

std::string to_string(const StateVector& x) {
    std::ostringstream os;
    os.precision(17);
    os << '(';
    for (std::size_t i = 0; i < x.size(); ++i) {
        if (i) os << ", ";
        os << x[i];
    }
    os << ')';
    return os.str();
}

}  // namespace impulseflow
