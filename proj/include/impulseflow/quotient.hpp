#pragma once

#include <cstddef>
#include <iosfwd>
#include <utility>
#include <vector>

#include "impulseflow/impulsive_system.hpp"

namespace impulseflow {

/// Members closer than this are the same point.
inline constexpr double kSameMemberTol = 1e-12;
inline constexpr double kAuditTol = 1e-9;
inline constexpr double kSampledInverseTol = 1e-8;

struct EquivalenceClass {
    std::vector<StateVector> members;  // generating point first

    bool contains(const StateVector& x, double tol = kSameMemberTol) const;
    bool intersects(const EquivalenceClass& other, double tol) const;
    /// Same members up to `tol`, in any order.
    bool same_as(const EquivalenceClass& other, double tol = 1e-9) const;
};

/// {x} u {I(x) if x in D} u I^{-1}(x) u I^{-1}(I(x)), using the analytic inverse.
EquivalenceClass equivalence_class(const SystemSpec& sys, const StateVector& x);

/// Preimages of y found among `d_samples`: points p of D with |I(p) - y| <= tol.
std::vector<StateVector> sampled_preimages(const SystemSpec& sys, const StateVector& y,
                                           const std::vector<StateVector>& d_samples,
                                           double tol = kSampledInverseTol);

/// Class built with sampled_preimages in place of the analytic inverse.
EquivalenceClass equivalence_class_sampled(const SystemSpec& sys, const StateVector& x,
                                           const std::vector<StateVector>& d_samples,
                                           double tol = kSampledInverseTol);

double quotient_distance(const EquivalenceClass& a, const EquivalenceClass& b);

/// First pair (in member order) attaining quotient_distance.
std::pair<StateVector, StateVector> representative_pair(const EquivalenceClass& a, const EquivalenceClass& b);

enum class AxiomKind { Symmetry, Identity, Triangle };

struct AxiomViolation {
    AxiomKind kind;
    std::size_t i, j, k;  // k unused except for Triangle
    double lhs;
    double rhs;
};

struct MetricAuditReport {
    std::size_t points = 0;
    std::size_t symmetry_violations = 0;
    std::size_t identity_violations = 0;
    std::size_t triangle_violations = 0;
    std::vector<AxiomViolation> witnesses;  // first few of each kind, in index order
    std::vector<EquivalenceClass> classes;
    std::vector<std::vector<double>> dmatrix;

    bool pass() const { return symmetry_violations + identity_violations + triangle_violations == 0; }
};

MetricAuditReport metric_axiom_audit(const SystemSpec& sys, const std::vector<StateVector>& points,
                                     unsigned workers = 0, std::size_t max_witnesses = 10);

void write_classes_csv(std::ostream& os, const std::vector<EquivalenceClass>& classes);
void write_dmatrix_csv(std::ostream& os, const std::vector<std::vector<double>>& d);

}  // namespace impulseflow
