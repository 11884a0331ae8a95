#include "impulseflow/quotient.hpp"

#include <algorithm>
#include <limits>
#include <ostream>

#include "impulseflow/io.hpp"
#include "impulseflow/parallel.hpp"

namespace impulseflow {

namespace {

void add_member(EquivalenceClass& c, const StateVector& x) {
    if (!c.contains(x)) c.members.push_back(x);
}

template <class Preimages>
EquivalenceClass build_class(const SystemSpec& sys, const StateVector& x, Preimages&& preimages) {
    if (x.size() != sys.dimension()) throw DimensionError("point dimension does not match the system");
    if (!sys.admissible(x)) throw PreconditionError("point " + to_string(x) + " is not admissible");
    EquivalenceClass c;
    c.members.push_back(x);
    if (sys.impulsive_set.contains(x)) {
        const StateVector ix = apply_impulse(sys, x);
        add_member(c, ix);
        for (const auto& p : preimages(ix)) add_member(c, p);
    }
    for (const auto& p : preimages(x)) add_member(c, p);
    return c;
}

}  // namespace

bool EquivalenceClass::contains(const StateVector& x, double tol) const {
    return std::any_of(members.begin(), members.end(), [&](const StateVector& m) { return distance(m, x) <= tol; });
}

bool EquivalenceClass::intersects(const EquivalenceClass& other, double tol) const {
    return std::any_of(members.begin(), members.end(), [&](const StateVector& m) { return other.contains(m, tol); });
}

bool EquivalenceClass::same_as(const EquivalenceClass& other, double tol) const {
    return members.size() == other.members.size() &&
           std::all_of(members.begin(), members.end(), [&](const StateVector& m) { return other.contains(m, tol); }) &&
           std::all_of(other.members.begin(), other.members.end(),
                       [&](const StateVector& m) { return contains(m, tol); });
}

EquivalenceClass equivalence_class(const SystemSpec& sys, const StateVector& x) {
    return build_class(sys, x, [&](const StateVector& y) { return impulse_preimages(sys, y); });
}

std::vector<StateVector> sampled_preimages(const SystemSpec& sys, const StateVector& y,
                                           const std::vector<StateVector>& d_samples, double tol) {
    std::vector<StateVector> out;
    for (const auto& p : d_samples) {
        if (!sys.impulsive_set.contains(p)) continue;
        if (distance(apply_impulse(sys, p), y) <= tol) out.push_back(p);
    }
    return out;
}

EquivalenceClass equivalence_class_sampled(const SystemSpec& sys, const StateVector& x,
                                           const std::vector<StateVector>& d_samples, double tol) {
    return build_class(sys, x, [&](const StateVector& y) { return sampled_preimages(sys, y, d_samples, tol); });
}

double quotient_distance(const EquivalenceClass& a, const EquivalenceClass& b) {
    const auto [p, q] = representative_pair(a, b);
    return distance(p, q);
}

std::pair<StateVector, StateVector> representative_pair(const EquivalenceClass& a, const EquivalenceClass& b) {
    if (a.members.empty() || b.members.empty()) throw PreconditionError("equivalence classes must be nonempty");
    std::size_t bi = 0, bj = 0;
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < a.members.size(); ++i) {
        for (std::size_t j = 0; j < b.members.size(); ++j) {
            const double d = distance(a.members[i], b.members[j]);
            if (d < best) {
                best = d;
                bi = i;
                bj = j;
            }
        }
    }
    return {a.members[bi], b.members[bj]};
}

MetricAuditReport metric_axiom_audit(const SystemSpec& sys, const std::vector<StateVector>& points,
                                     unsigned workers, std::size_t max_witnesses) {
    MetricAuditReport rep;
    const std::size_t n = points.size();
    rep.points = n;
    rep.classes.resize(n);
    parallel_for(n, workers, [&](std::size_t i) { rep.classes[i] = equivalence_class(sys, points[i]); });
    rep.dmatrix.assign(n, std::vector<double>(n, 0.0));
    parallel_for(n, workers, [&](std::size_t i) {
        for (std::size_t j = 0; j < n; ++j) rep.dmatrix[i][j] = quotient_distance(rep.classes[i], rep.classes[j]);
    });

    // Per-row tallies, merged in row order so the witness list is stable.
    struct Row {
        std::size_t sym = 0, id = 0, tri = 0;
        std::vector<AxiomViolation> w;
    };
    std::vector<Row> rows(n);
    const auto& d = rep.dmatrix;
    parallel_for(n, workers, [&](std::size_t i) {
        Row& r = rows[i];
        auto note = [&](AxiomViolation v) {
            if (r.w.size() < 3 * max_witnesses) r.w.push_back(v);
        };
        for (std::size_t j = 0; j < n; ++j) {
            if (d[i][j] != d[j][i]) {
                ++r.sym;
                note({AxiomKind::Symmetry, i, j, 0, d[i][j], d[j][i]});
            }
            if (j != i) {
                const bool zero = d[i][j] <= kAuditTol;
                const bool meet = rep.classes[i].intersects(rep.classes[j], kAuditTol);
                if (zero != meet) {
                    ++r.id;
                    note({AxiomKind::Identity, i, j, 0, d[i][j], meet ? 0.0 : 1.0});
                }
            }
            for (std::size_t k = 0; k < n; ++k) {
                const double rhs = d[i][j] + d[j][k] + kAuditTol;
                if (d[i][k] > rhs) {
                    ++r.tri;
                    note({AxiomKind::Triangle, i, j, k, d[i][k], rhs});
                }
            }
        }
    });
    std::size_t per_kind[3] = {0, 0, 0};
    for (const auto& r : rows) {
        rep.symmetry_violations += r.sym;
        rep.identity_violations += r.id;
        rep.triangle_violations += r.tri;
        for (const auto& v : r.w) {
            auto& used = per_kind[static_cast<int>(v.kind)];
            if (used < max_witnesses) {
                rep.witnesses.push_back(v);
                ++used;
            }
        }
    }
    return rep;
}

void write_classes_csv(std::ostream& os, const std::vector<EquivalenceClass>& classes) {
    const std::size_t n = classes.empty() ? 0 : classes.front().members.front().size();
    std::string line = "point,member";
    for (std::size_t i = 1; i <= n; ++i) line += ",x" + std::to_string(i);
    os << line << '\n';
    for (std::size_t p = 0; p < classes.size(); ++p) {
        for (std::size_t m = 0; m < classes[p].members.size(); ++m) {
            line = std::to_string(p) + ',' + std::to_string(m);
            for (std::size_t i = 0; i < n; ++i) {
                line += ',';
                append_number(line, classes[p].members[m][i]);
            }
            os << line << '\n';
        }
    }
}

void write_dmatrix_csv(std::ostream& os, const std::vector<std::vector<double>>& d) {
    std::string line = "i";
    for (std::size_t j = 0; j < d.size(); ++j) line += ",d" + std::to_string(j);
    os << line << '\n';
    for (std::size_t i = 0; i < d.size(); ++i) {
        line = std::to_string(i);
        for (double v : d[i]) {
            line += ',';
            append_number(line, v);
        }
        os << line << '\n';
    }
}

}  // namespace impulseflow
