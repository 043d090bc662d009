#pragma once

#include <cstddef>

// Vectorized elementwise math used by the Monte Carlo engine.
//
// Every backend evaluates the same polynomial approximations with the same
// operation order, so results are bit-identical across backends.  Switching
// FUNDSIM_SIMD (or the machine the binary runs on) never changes output.
//
// Accuracy targets (relative, over the supported domains):
//   vexp     ~1 ulp for |x| <= 705; inputs outside are clamped
//   vlog     ~1 ulp for positive normal doubles (subnormals are rescaled)
//   vnorminv ~2 ulp for p in (0, 1); outside (0, 1) yields NaN
namespace fundsim::simd {

enum class Backend {
    Scalar,
    Avx2,
};

// Backend in use for subsequent vexp/vlog/vnorminv calls.  The default is
// the widest instruction set the CPU supports, overridable with the
// FUNDSIM_SIMD environment variable ("auto", "scalar", "avx2").
Backend active_backend();

// Overrides backend selection, for equivalence tests.  Throws
// std::invalid_argument if the CPU cannot execute the requested backend.
void force_backend(Backend backend);

const char* backend_name(Backend backend);

// out[i] = exp(in[i])
void vexp(const double* in, double* out, std::size_t n);

// out[i] = log(in[i])
void vlog(const double* in, double* out, std::size_t n);

// out[i] = Phi^-1(in[i]), the standard normal quantile
void vnorminv(const double* in, double* out, std::size_t n);

}  // namespace fundsim::simd
