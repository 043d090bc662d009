#include "backends.hpp"
#include "pack_math.hpp"

namespace fundsim::simd::detail {

void exp_array_scalar(const double* in, double* out, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) {
        out[i] = exp_pack<ScalarPack>(in[i]);
    }
}

void log_array_scalar(const double* in, double* out, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) {
        out[i] = log_pack<ScalarPack>(in[i]);
    }
}

void norminv_array_scalar(const double* in, double* out, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) {
        out[i] = norminv_pack<ScalarPack>(in[i]);
    }
}

}  // namespace fundsim::simd::detail
