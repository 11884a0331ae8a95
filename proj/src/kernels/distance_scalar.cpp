#include <limits>

#include "impulseflow/kernels.hpp"

namespace impulseflow::kernels::scalar {

namespace {

inline double sq_at(const SoaView& a, const SoaView& b, std::size_t k) {
    const double d0 = a.coord[0][k] - b.coord[0][k];
    double acc = d0 * d0;
    for (std::size_t c = 1; c < a.dim; ++c) {
        const double d = a.coord[c][k] - b.coord[c][k];
        acc += d * d;
    }
    return acc;
}

}  // namespace

bool any_at_least(const SoaView& a, const SoaView& b, std::size_t begin, std::size_t end, double threshold_sq) {
    for (std::size_t k = begin; k < end; ++k) {
        if (sq_at(a, b, k) >= threshold_sq) return true;
    }
    return false;
}

double max_sq_distance(const SoaView& a, const SoaView& b, std::size_t begin, std::size_t end) {
    double best = 0.0;
    for (std::size_t k = begin; k < end; ++k) {
        const double v = sq_at(a, b, k);
        if (v > best) best = v;
    }
    return best;
}

double min_sq_distance(const double* point, const SoaView& set, std::size_t begin, std::size_t end) {
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t k = begin; k < end; ++k) {
        const double d0 = set.coord[0][k] - point[0];
        double acc = d0 * d0;
        for (std::size_t c = 1; c < set.dim; ++c) {
            const double d = set.coord[c][k] - point[c];
            acc += d * d;
        }
        if (acc < best) best = acc;
    }
    return best;
}

}  // namespace impulseflow::kernels::scalar
