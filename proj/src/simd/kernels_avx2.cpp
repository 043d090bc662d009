#if defined(FUNDSIM_HAVE_AVX2_TU)

#include <immintrin.h>

#include <cstddef>
#include <cstdint>

#include "backends.hpp"
#include "pack_math.hpp"

namespace {

// Four double lanes on AVX2.  Each primitive is the direct intrinsic
// counterpart of the ScalarPack operation, so the instantiated kernels
// produce the same bits lane by lane.
struct Avx2Pack {
    using v = __m256d;
    using m = __m256d;
    static constexpr std::size_t width = 4;

    static v load(const double* p) { return _mm256_loadu_pd(p); }
    static void store(double* p, v x) { _mm256_storeu_pd(p, x); }
    static v set1(double c) { return _mm256_set1_pd(c); }
    static v add(v a, v b) { return _mm256_add_pd(a, b); }
    static v sub(v a, v b) { return _mm256_sub_pd(a, b); }
    static v mul(v a, v b) { return _mm256_mul_pd(a, b); }
    static v div(v a, v b) { return _mm256_div_pd(a, b); }
    static v fma(v a, v b, v c) { return _mm256_fmadd_pd(a, b, c); }
    static v sqrt(v a) { return _mm256_sqrt_pd(a); }
    static v round_even(v a) {
        return _mm256_round_pd(a, _MM_FROUND_TO_NEAREST_INT |
                                      _MM_FROUND_NO_EXC);
    }
    static v min(v a, v b) { return _mm256_min_pd(a, b); }
    static v max(v a, v b) { return _mm256_max_pd(a, b); }
    static v abs(v a) { return _mm256_andnot_pd(set1(-0.0), a); }
    static v neg(v a) { return _mm256_xor_pd(a, set1(-0.0)); }
    static m cmp_lt(v a, v b) { return _mm256_cmp_pd(a, b, _CMP_LT_OQ); }
    static m cmp_le(v a, v b) { return _mm256_cmp_pd(a, b, _CMP_LE_OQ); }
    static m cmp_eq(v a, v b) { return _mm256_cmp_pd(a, b, _CMP_EQ_OQ); }
    static m mask_and(m a, m b) { return _mm256_and_pd(a, b); }
    static v select(m c, v a, v b) { return _mm256_blendv_pd(b, a, c); }

    static v pow2i(v n) {
        const __m256i bits =
            _mm256_castpd_si256(_mm256_add_pd(n, set1(0x1.8p52)));
        const __m256i ni = _mm256_sub_epi64(
            _mm256_and_si256(bits, _mm256_set1_epi64x(0xFFFFFFFFFFFFFll)),
            _mm256_set1_epi64x(std::int64_t{1} << 51));
        const __m256i ex = _mm256_slli_epi64(
            _mm256_add_epi64(ni, _mm256_set1_epi64x(1023)), 52);
        return _mm256_castsi256_pd(ex);
    }

    static void log_split(v x, v& mant, v& e) {
        const __m256i bits = _mm256_castpd_si256(x);
        const __m256i expfield = _mm256_srli_epi64(bits, 52);
        e = _mm256_sub_pd(
            _mm256_castsi256_pd(_mm256_or_si256(
                expfield, _mm256_set1_epi64x(0x4330000000000000ll))),
            _mm256_set1_pd(4503599627371519.0));
        mant = _mm256_castsi256_pd(_mm256_or_si256(
            _mm256_and_si256(bits, _mm256_set1_epi64x(0xFFFFFFFFFFFFFll)),
            _mm256_set1_epi64x(0x3FF0000000000000ll)));
    }
};

}  // namespace

namespace fundsim::simd::detail {

// Tails shorter than one pack go through the scalar driver, which computes
// the same bits.

void exp_array_avx2(const double* in, double* out, std::size_t n) {
    std::size_t i = 0;
    for (; i + Avx2Pack::width <= n; i += Avx2Pack::width) {
        Avx2Pack::store(out + i, exp_pack<Avx2Pack>(Avx2Pack::load(in + i)));
    }
    exp_array_scalar(in + i, out + i, n - i);
}

void log_array_avx2(const double* in, double* out, std::size_t n) {
    std::size_t i = 0;
    for (; i + Avx2Pack::width <= n; i += Avx2Pack::width) {
        Avx2Pack::store(out + i, log_pack<Avx2Pack>(Avx2Pack::load(in + i)));
    }
    log_array_scalar(in + i, out + i, n - i);
}

void norminv_array_avx2(const double* in, double* out, std::size_t n) {
    std::size_t i = 0;
    for (; i + Avx2Pack::width <= n; i += Avx2Pack::width) {
        Avx2Pack::store(out + i,
                        norminv_pack<Avx2Pack>(Avx2Pack::load(in + i)));
    }
    norminv_array_scalar(in + i, out + i, n - i);
}

}  // namespace fundsim::simd::detail

#endif
