#include "fundsim/simd/kernels.hpp"

#include <cstdlib>
#include <stdexcept>
#include <string>

#include "backends.hpp"

namespace fundsim::simd {

namespace {

bool cpu_has_avx2() {
#if defined(FUNDSIM_HAVE_AVX2_TU) && (defined(__x86_64__) || defined(__i386__))
    return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
    return false;
#endif
}

Backend pick_initial() {
    const char* env = std::getenv("FUNDSIM_SIMD");
    const std::string value = env == nullptr ? "auto" : env;
    if (value == "auto" || value.empty()) {
        return cpu_has_avx2() ? Backend::Avx2 : Backend::Scalar;
    }
    if (value == "scalar") {
        return Backend::Scalar;
    }
    if (value == "avx2") {
        if (!cpu_has_avx2()) {
            throw std::invalid_argument(
                "FUNDSIM_SIMD=avx2 requested, but this build or CPU lacks "
                "AVX2+FMA support");
        }
        return Backend::Avx2;
    }
    throw std::invalid_argument("unknown FUNDSIM_SIMD value \"" + value +
                                "\" (expected auto, scalar, or avx2)");
}

Backend& backend_state() {
    static Backend state = pick_initial();
    return state;
}

}  // namespace

Backend active_backend() { return backend_state(); }

void force_backend(Backend backend) {
    if (backend == Backend::Avx2 && !cpu_has_avx2()) {
        throw std::invalid_argument(
            "cannot force the avx2 backend: this build or CPU lacks "
            "AVX2+FMA support");
    }
    backend_state() = backend;
}

const char* backend_name(Backend backend) {
    return backend == Backend::Avx2 ? "avx2" : "scalar";
}

void vexp(const double* in, double* out, std::size_t n) {
#if defined(FUNDSIM_HAVE_AVX2_TU)
    if (backend_state() == Backend::Avx2) {
        detail::exp_array_avx2(in, out, n);
        return;
    }
#endif
    detail::exp_array_scalar(in, out, n);
}

void vlog(const double* in, double* out, std::size_t n) {
#if defined(FUNDSIM_HAVE_AVX2_TU)
    if (backend_state() == Backend::Avx2) {
        detail::log_array_avx2(in, out, n);
        return;
    }
#endif
    detail::log_array_scalar(in, out, n);
}

void vnorminv(const double* in, double* out, std::size_t n) {
#if defined(FUNDSIM_HAVE_AVX2_TU)
    if (backend_state() == Backend::Avx2) {
        detail::norminv_array_avx2(in, out, n);
        return;
    }
#endif
    detail::norminv_array_scalar(in, out, n);
}

}  // namespace fundsim::simd
