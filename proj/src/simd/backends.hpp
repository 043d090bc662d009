#pragma once

#include <cstddef>

// Array drivers implemented by the backend translation units.  The avx2
// entry points exist only when the build enabled the AVX2 unit; callers
// must gate on runtime CPU support before invoking them.
namespace fundsim::simd::detail {

void exp_array_scalar(const double* in, double* out, std::size_t n);
void log_array_scalar(const double* in, double* out, std::size_t n);
void norminv_array_scalar(const double* in, double* out, std::size_t n);

#if defined(FUNDSIM_HAVE_AVX2_TU)
void exp_array_avx2(const double* in, double* out, std::size_t n);
void log_array_avx2(const double* in, double* out, std::size_t n);
void norminv_array_avx2(const double* in, double* out, std::size_t n);
#endif

}  // namespace fundsim::simd::detail
