#include <atomic>
#include <cstdlib>
#include <string>

#include "impulseflow/kernels.hpp"

namespace impulseflow::kernels {

namespace {

Path detect() {
    if (const char* env = std::getenv("IMPULSEFLOW_KERNEL")) {
        const std::string want(env);
        if (want == "scalar") return Path::Scalar;
        if (want == "avx2" && path_available(Path::Avx2)) return Path::Avx2;
        if (want == "neon" && path_available(Path::Neon)) return Path::Neon;
    }
    if (path_available(Path::Avx2)) return Path::Avx2;
    if (path_available(Path::Neon)) return Path::Neon;
    return Path::Scalar;
}

std::atomic<Path>& current() {
    static std::atomic<Path> p{detect()};
    return p;
}

}  // namespace

std::string_view path_name(Path p) {
    switch (p) {
        case Path::Scalar: return "scalar";
        case Path::Avx2: return "avx2";
        case Path::Neon: return "neon";
    }
    return "unknown";
}

bool path_available(Path p) {
    switch (p) {
        case Path::Scalar: return true;
        case Path::Avx2:
#if defined(IMPULSEFLOW_HAVE_AVX2_TU)
            return __builtin_cpu_supports("avx2");
#else
            return false;
#endif
        case Path::Neon:
#if defined(IMPULSEFLOW_HAVE_NEON_TU)
            return true;
#else
            return false;
#endif
    }
    return false;
}

Path active_path() { return current().load(std::memory_order_relaxed); }

void set_path(Path p) {
    if (!path_available(p)) {
        throw PreconditionError("kernel path '" + std::string(path_name(p)) + "' is not available on this CPU");
    }
    current().store(p, std::memory_order_relaxed);
}

bool any_at_least(const SoaView& a, const SoaView& b, std::size_t begin, std::size_t end, double threshold_sq) {
    switch (active_path()) {
#if defined(IMPULSEFLOW_HAVE_AVX2_TU)
        case Path::Avx2: return avx2::any_at_least(a, b, begin, end, threshold_sq);
#endif
#if defined(IMPULSEFLOW_HAVE_NEON_TU)
        case Path::Neon: return neon::any_at_least(a, b, begin, end, threshold_sq);
#endif
        default: return scalar::any_at_least(a, b, begin, end, threshold_sq);
    }
}

double max_sq_distance(const SoaView& a, const SoaView& b, std::size_t begin, std::size_t end) {
    switch (active_path()) {
#if defined(IMPULSEFLOW_HAVE_AVX2_TU)
        case Path::Avx2: return avx2::max_sq_distance(a, b, begin, end);
#endif
#if defined(IMPULSEFLOW_HAVE_NEON_TU)
        case Path::Neon: return neon::max_sq_distance(a, b, begin, end);
#endif
        default: return scalar::max_sq_distance(a, b, begin, end);
    }
}

double min_sq_distance(const double* point, const SoaView& set, std::size_t begin, std::size_t end) {
    switch (active_path()) {
#if defined(IMPULSEFLOW_HAVE_AVX2_TU)
        case Path::Avx2: return avx2::min_sq_distance(point, set, begin, end);
#endif
#if defined(IMPULSEFLOW_HAVE_NEON_TU)
        case Path::Neon: return neon::min_sq_distance(point, set, begin, end);
#endif
        default: return scalar::min_sq_distance(point, set, begin, end);
    }
}

}  // namespace impulseflow::kernels
