#include <immintrin.h>

#include <algorithm>
#include <limits>

#include "impulseflow/kernels.hpp"

namespace impulseflow::kernels::avx2 {

namespace {

inline __m256d sq_block(const SoaView& a, const SoaView& b, std::size_t k) {
    __m256d d = _mm256_sub_pd(_mm256_loadu_pd(a.coord[0] + k), _mm256_loadu_pd(b.coord[0] + k));
    __m256d acc = _mm256_mul_pd(d, d);
    for (std::size_t c = 1; c < a.dim; ++c) {
        d = _mm256_sub_pd(_mm256_loadu_pd(a.coord[c] + k), _mm256_loadu_pd(b.coord[c] + k));
        acc = _mm256_add_pd(acc, _mm256_mul_pd(d, d));
    }
    return acc;
}

inline double hmax(__m256d v) {
    alignas(32) double lanes[4];
    _mm256_store_pd(lanes, v);
    return std::max(std::max(lanes[0], lanes[1]), std::max(lanes[2], lanes[3]));
}

inline double hmin(__m256d v) {
    alignas(32) double lanes[4];
    _mm256_store_pd(lanes, v);
    return std::min(std::min(lanes[0], lanes[1]), std::min(lanes[2], lanes[3]));
}

}  // namespace

bool any_at_least(const SoaView& a, const SoaView& b, std::size_t begin, std::size_t end, double threshold_sq) {
    const __m256d thr = _mm256_set1_pd(threshold_sq);
    std::size_t k = begin;
    for (; k + 4 <= end; k += 4) {
        const __m256d s = sq_block(a, b, k);
        if (_mm256_movemask_pd(_mm256_cmp_pd(s, thr, _CMP_GE_OQ)) != 0) return true;
    }
    return k < end && scalar::any_at_least(a, b, k, end, threshold_sq);
}

double max_sq_distance(const SoaView& a, const SoaView& b, std::size_t begin, std::size_t end) {
    __m256d best = _mm256_setzero_pd();
    std::size_t k = begin;
    for (; k + 4 <= end; k += 4) best = _mm256_max_pd(best, sq_block(a, b, k));
    return std::max(hmax(best), scalar::max_sq_distance(a, b, k, end));
}

double min_sq_distance(const double* point, const SoaView& set, std::size_t begin, std::size_t end) {
    __m256d best = _mm256_set1_pd(std::numeric_limits<double>::infinity());
    __m256d p[kMaxDim] = {};
    for (std::size_t c = 0; c < set.dim; ++c) p[c] = _mm256_set1_pd(point[c]);
    std::size_t k = begin;
    for (; k + 4 <= end; k += 4) {
        __m256d d = _mm256_sub_pd(_mm256_loadu_pd(set.coord[0] + k), p[0]);
        __m256d acc = _mm256_mul_pd(d, d);
        for (std::size_t c = 1; c < set.dim; ++c) {
            d = _mm256_sub_pd(_mm256_loadu_pd(set.coord[c] + k), p[c]);
            acc = _mm256_add_pd(acc, _mm256_mul_pd(d, d));
        }
        best = _mm256_min_pd(best, acc);
    }
    return std::min(hmin(best), scalar::min_sq_distance(point, set, k, end));
}

}  // namespace impulseflow::kernels::avx2
