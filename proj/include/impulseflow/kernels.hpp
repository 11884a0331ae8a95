#pragma once

// Distance kernels over structure-of-arrays sample buffers. A scalar
// reference is always built; AVX2 (x86-64) or NEON (aarch64) variants are
// selected at runtime when the CPU supports them. All paths accumulate
// ((d0*d0) + d1*d1) + d2*d2 without fused multiply-add, so every path returns
// bit-identical results.

#include <array>
#include <cstddef>
#include <string_view>

#include "impulseflow/state.hpp"

namespace impulseflow::kernels {

enum class Path { Scalar, Avx2, Neon };

/// One coordinate pointer per dimension; entry k of every array belongs to
/// sample k.
struct SoaView {
    std::array<const double*, kMaxDim> coord{};
    std::size_t dim = 0;
};

std::string_view path_name(Path p);
bool path_available(Path p);
/// Best available path, unless IMPULSEFLOW_KERNEL=scalar|avx2|neon says otherwise.
Path active_path();
/// Throws PreconditionError if the path is not available on this CPU.
void set_path(Path p);

/// True iff some k in [begin, end) has |a_k - b_k|^2 >= threshold_sq.
bool any_at_least(const SoaView& a, const SoaView& b, std::size_t begin, std::size_t end, double threshold_sq);

/// max_k |a_k - b_k|^2 over [begin, end); 0 for an empty range.
double max_sq_distance(const SoaView& a, const SoaView& b, std::size_t begin, std::size_t end);

/// min_k |p - s_k|^2 over [begin, end); +inf for an empty range.
double min_sq_distance(const double* point, const SoaView& set, std::size_t begin, std::size_t end);

namespace scalar {
bool any_at_least(const SoaView& a, const SoaView& b, std::size_t begin, std::size_t end, double threshold_sq);
double max_sq_distance(const SoaView& a, const SoaView& b, std::size_t begin, std::size_t end);
double min_sq_distance(const double* point, const SoaView& set, std::size_t begin, std::size_t end);
}  // namespace scalar

namespace avx2 {
bool any_at_least(const SoaView& a, const SoaView& b, std::size_t begin, std::size_t end, double threshold_sq);
double max_sq_distance(const SoaView& a, const SoaView& b, std::size_t begin, std::size_t end);
double min_sq_distance(const double* point, const SoaView& set, std::size_t begin, std::size_t end);
}  // namespace avx2

namespace neon {
bool any_at_least(const SoaView& a, const SoaView& b, std::size_t begin, std::size_t end, double threshold_sq);
double max_sq_distance(const SoaView& a, const SoaView& b, std::size_t begin, std::size_t end);
double min_sq_distance(const double* point, const SoaView& set, std::size_t begin, std::size_t end);
}  // namespace neon

}  // namespace impulseflow::kernels
