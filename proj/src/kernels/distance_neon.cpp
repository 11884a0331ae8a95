#include <arm_neon.h>

#include <algorithm>
#include <limits>

#include "impulseflow/kernels.hpp"

namespace impulseflow::kernels::neon {

namespace {

inline float64x2_t sq_block(const SoaView& a, const SoaView& b, std::size_t k) {
    float64x2_t d = vsubq_f64(vld1q_f64(a.coord[0] + k), vld1q_f64(b.coord[0] + k));
    float64x2_t acc = vmulq_f64(d, d);
    for (std::size_t c = 1; c < a.dim; ++c) {
        d = vsubq_f64(vld1q_f64(a.coord[c] + k), vld1q_f64(b.coord[c] + k));
        acc = vaddq_f64(acc, vmulq_f64(d, d));
    }
    return acc;
}

}  // namespace

bool any_at_least(const SoaView& a, const SoaView& b, std::size_t begin, std::size_t end, double threshold_sq) {
    const float64x2_t thr = vdupq_n_f64(threshold_sq);
    std::size_t k = begin;
    for (; k + 2 <= end; k += 2) {
        const uint64x2_t ge = vcgeq_f64(sq_block(a, b, k), thr);
        if ((vgetq_lane_u64(ge, 0) | vgetq_lane_u64(ge, 1)) != 0) return true;
    }
    return k < end && scalar::any_at_least(a, b, k, end, threshold_sq);
}

double max_sq_distance(const SoaView& a, const SoaView& b, std::size_t begin, std::size_t end) {
    float64x2_t best = vdupq_n_f64(0.0);
    std::size_t k = begin;
    for (; k + 2 <= end; k += 2) best = vmaxq_f64(best, sq_block(a, b, k));
    return std::max(vmaxvq_f64(best), scalar::max_sq_distance(a, b, k, end));
}

double min_sq_distance(const double* point, const SoaView& set, std::size_t begin, std::size_t end) {
    float64x2_t best = vdupq_n_f64(std::numeric_limits<double>::infinity());
    std::size_t k = begin;
    for (; k + 2 <= end; k += 2) {
        float64x2_t d = vsubq_f64(vld1q_f64(set.coord[0] + k), vdupq_n_f64(point[0]));
        float64x2_t acc = vmulq_f64(d, d);
        for (std::size_t c = 1; c < set.dim; ++c) {
            d = vsubq_f64(vld1q_f64(set.coord[c] + k), vdupq_n_f64(point[c]));
            acc = vaddq_f64(acc, vmulq_f64(d, d));
        }
        best = vminq_f64(best, acc);
    }
    return std::min(vminvq_f64(best), scalar::min_sq_distance(point, set, k, end));
}

}  // namespace impulseflow::kernels::neon
