#pragma once

#include <bit>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>

// Shared elementwise kernels for exp, log and the normal quantile, written
// against a small "pack" vocabulary so that one operation sequence serves
// every backend.  A pack supplies IEEE-754 double lanes plus the handful of
// primitives below; as long as two packs map each primitive to the same
// rounding behaviour (which scalar ops and the AVX2 intrinsics do), the
// instantiated kernels agree bit for bit.
//
// The exp and log kernels follow the classic Cephes rational approximations
// (Moshier, "Methods and Programs for Mathematical Functions"); the normal
// quantile is Wichura's PPND16 (Applied Statistics 37, algorithm AS 241).
namespace fundsim::simd::detail {

inline constexpr double kExpClamp = 705.0;
inline constexpr double kLog2E = 1.4426950408889634073599;
// ln 2 split into a 21-bit head and a tail, so n*C1 is exact for |n| < 2^31.
inline constexpr double kExpC1 = 6.93145751953125e-1;
inline constexpr double kExpC2 = 1.42860682030941723212e-6;
// exp(r) = 1 + 2 r P(r^2) / (Q(r^2) - r P(r^2)) on |r| <= ln(2)/2.
inline constexpr double kExpP[3] = {
    1.26177193074810590878e-4,
    3.02994407707441961300e-2,
    9.99999999999999999910e-1,
};
inline constexpr double kExpQ[4] = {
    3.00198505138664455042e-6,
    2.52448340349684104192e-3,
    2.27265548208155028766e-1,
    2.00000000000000000005e0,
};

inline constexpr double kSqrt2 = 1.41421356237309504880;
// log(1+z) = z - z^2/2 + z^3 P(z)/Q(z) on sqrt(1/2) <= 1+z < sqrt(2).
inline constexpr double kLogP[6] = {
    1.01875663804580931796e-4,
    4.97494994976747001425e-1,
    4.70579119878881725854e0,
    1.44989225341610930846e1,
    1.79368678507819816313e1,
    7.70838733755885391666e0,
};
inline constexpr double kLogQ[5] = {
    1.12873587189167450590e1,
    4.52279145837532221105e1,
    8.29875266912776603211e1,
    7.11544750618563894466e1,
    2.31251620126765340583e1,
};
// ln 2 = kLogC2 - kLogC1 with kLogC2 exactly representable in 12 bits.
inline constexpr double kLogC1 = 2.121944400546905827679e-4;
inline constexpr double kLogC2 = 0.693359375;

// AS 241 rational coefficients, constant term first.
// Central region |p - 1/2| <= 0.425: x = q A(r)/B(r), r = 0.180625 - q^2.
inline constexpr double kNdA[8] = {
    3.3871328727963666080e0,  1.3314166789178437745e2,
    1.9715909503065514427e3,  1.3731693765509461125e4,
    4.5921953931549871457e4,  6.7265770927008700853e4,
    3.3430575583588128105e4,  2.5090809287301226727e3,
};
inline constexpr double kNdB[8] = {
    1.0,                      4.2313330701600911252e1,
    6.8718700749205790830e2,  5.3941960214247511077e3,
    2.1213794301586595867e4,  3.9307895800092710610e4,
    2.8729085735721942674e4,  5.2264952788528545610e3,
};
// Middle tail r = sqrt(-log(min(p, 1-p))) <= 5: x = C(r - 1.6)/D(r - 1.6).
inline constexpr double kNdC[8] = {
    1.42343711074968357734e0,  4.63033784615654529590e0,
    5.76949722146069140550e0,  3.64784832476320460504e0,
    1.27045825245236838258e0,  2.41780725177450611770e-1,
    2.27238449892691845833e-2, 7.74545014278341407640e-4,
};
inline constexpr double kNdD[8] = {
    1.0,                       2.05319162663775882187e0,
    1.67638483018380384940e0,  6.89767334985100004550e-1,
    1.48103976427480074590e-1, 1.51986665636164571966e-2,
    5.47593808499534494600e-4, 1.05075007164441684324e-9,
};
// Far tail r > 5: x = E(r - 5)/F(r - 5).
inline constexpr double kNdE[8] = {
    6.65790464350110377720e0,  5.46378491116411436990e0,
    1.78482653991729133580e0,  2.96560571828504891230e-1,
    2.65321895265761230930e-2, 1.24266094738807843860e-3,
    2.71155556874348757815e-5, 2.01033439929228813265e-7,
};
inline constexpr double kNdF[8] = {
    1.0,                       5.99832206555887937690e-1,
    1.36929880922735805310e-1, 1.48753612908506148525e-2,
    7.86869131145613259100e-4, 1.84631831751005468180e-5,
    1.42151175831644588870e-7, 2.04426310338993978564e-15,
};

// Scalar lanes.  std::fma keeps the one-rounding semantics of the hardware
// FMA, and min/max mirror the NaN and signed-zero rules of _mm256_min_pd /
// _mm256_max_pd (second operand wins when the comparison fails).
struct ScalarPack {
    using v = double;
    using m = bool;
    static constexpr std::size_t width = 1;

    static v load(const double* p) { return *p; }
    static void store(double* p, v x) { *p = x; }
    static v set1(double c) { return c; }
    static v add(v a, v b) { return a + b; }
    static v sub(v a, v b) { return a - b; }
    static v mul(v a, v b) { return a * b; }
    static v div(v a, v b) { return a / b; }
    static v fma(v a, v b, v c) { return std::fma(a, b, c); }
    static v sqrt(v a) { return std::sqrt(a); }
    static v round_even(v a) { return std::nearbyint(a); }
    static v min(v a, v b) { return a < b ? a : b; }
    static v max(v a, v b) { return a > b ? a : b; }
    static v abs(v a) {
        return std::bit_cast<v>(std::bit_cast<std::uint64_t>(a) &
                                0x7FFFFFFFFFFFFFFFull);
    }
    static v neg(v a) {
        return std::bit_cast<v>(std::bit_cast<std::uint64_t>(a) ^
                                0x8000000000000000ull);
    }
    static m cmp_lt(v a, v b) { return a < b; }
    static m cmp_le(v a, v b) { return a <= b; }
    static m cmp_eq(v a, v b) { return a == b; }
    static m mask_and(m a, m b) { return a && b; }
    static v select(m c, v a, v b) { return c ? a : b; }

    // 2^n for a double n holding an integer in the normal exponent range.
    static v pow2i(v n) {
        const std::uint64_t bits = std::bit_cast<std::uint64_t>(n + 0x1.8p52);
        const std::int64_t ni =
            static_cast<std::int64_t>(bits & 0xFFFFFFFFFFFFFull) -
            (std::int64_t{1} << 51);
        return std::bit_cast<double>(static_cast<std::uint64_t>(ni + 1023)
                                     << 52);
    }

    // Splits a positive normal x into mant * 2^e with mant in [1, 2).
    static void log_split(v x, v& mant, v& e) {
        const std::uint64_t bits = std::bit_cast<std::uint64_t>(x);
        e = std::bit_cast<double>((bits >> 52) | 0x4330000000000000ull) -
            4503599627371519.0;
        mant = std::bit_cast<double>((bits & 0xFFFFFFFFFFFFFull) |
                                     0x3FF0000000000000ull);
    }
};

// c[0] + c[1] x + ... + c[N-1] x^(N-1), Horner from the top coefficient.
template <class P, std::size_t N>
typename P::v poly_asc(const double (&c)[N], typename P::v x) {
    auto acc = P::set1(c[N - 1]);
    for (std::size_t k = N - 1; k > 0; --k) {
        acc = P::fma(acc, x, P::set1(c[k - 1]));
    }
    return acc;
}

// c[0] x^(N-1) + ... + c[N-1], the Cephes polevl coefficient order.
template <class P, std::size_t N>
typename P::v poly_desc(const double (&c)[N], typename P::v x) {
    auto acc = P::set1(c[0]);
    for (std::size_t k = 1; k < N; ++k) {
        acc = P::fma(acc, x, P::set1(c[k]));
    }
    return acc;
}

// x^N + c[0] x^(N-1) + ... + c[N-1], the Cephes p1evl order (monic).
template <class P, std::size_t N>
typename P::v poly_desc_monic(const double (&c)[N], typename P::v x) {
    auto acc = P::add(x, P::set1(c[0]));
    for (std::size_t k = 1; k < N; ++k) {
        acc = P::fma(acc, x, P::set1(c[k]));
    }
    return acc;
}

// exp(x) with the argument clamped to [-705, 705].  The clamp keeps 2^n in
// the normal range; callers in this project bound arguments well inside it.
template <class P>
typename P::v exp_pack(typename P::v x) {
    using V = typename P::v;
    x = P::min(P::max(x, P::set1(-kExpClamp)), P::set1(kExpClamp));
    const V n = P::round_even(P::mul(x, P::set1(kLog2E)));
    V r = P::fma(n, P::set1(-kExpC1), x);
    r = P::fma(n, P::set1(-kExpC2), r);
    const V rr = P::mul(r, r);
    const V pr = P::mul(poly_desc<P>(kExpP, rr), r);
    const V qr = poly_desc<P>(kExpQ, rr);
    const V frac = P::div(pr, P::sub(qr, pr));
    const V y = P::fma(P::set1(2.0), frac, P::set1(1.0));
    return P::mul(y, P::pow2i(n));
}

// log(x) for positive x.  Subnormals are rescaled by 2^54 before the
// exponent split; zero, negatives, infinity and NaN get their IEEE results.
template <class P>
typename P::v log_pack(typename P::v x) {
    using V = typename P::v;
    const auto tiny =
        P::cmp_lt(x, P::set1(std::numeric_limits<double>::min()));
    const V xs = P::select(tiny, P::mul(x, P::set1(0x1p54)), x);
    V mant;
    V e;
    P::log_split(xs, mant, e);
    e = P::sub(e, P::select(tiny, P::set1(54.0), P::set1(0.0)));

    // Fold the mantissa into [sqrt(1/2), sqrt(2)) so z = mant - 1 is small.
    const auto lower = P::cmp_lt(mant, P::set1(kSqrt2));
    const V z = P::select(lower, P::sub(mant, P::set1(1.0)),
                          P::sub(P::mul(mant, P::set1(0.5)), P::set1(1.0)));
    e = P::add(e, P::select(lower, P::set1(0.0), P::set1(1.0)));

    const V z2 = P::mul(z, z);
    V y = P::div(P::mul(P::mul(z, z2), poly_desc<P>(kLogP, z)),
                 poly_desc_monic<P>(kLogQ, z));
    y = P::fma(e, P::set1(-kLogC1), y);
    y = P::fma(P::set1(-0.5), z2, y);
    V out = P::add(z, y);
    out = P::fma(e, P::set1(kLogC2), out);

    const V inf = P::set1(std::numeric_limits<double>::infinity());
    const V nan = P::set1(std::numeric_limits<double>::quiet_NaN());
    out = P::select(P::cmp_eq(x, P::set1(0.0)), P::neg(inf), out);
    out = P::select(P::cmp_lt(x, P::set1(0.0)), nan, out);
    out = P::select(P::cmp_eq(x, inf), inf, out);
    out = P::select(P::cmp_eq(x, x), out, nan);
    return out;
}

// Standard normal quantile for p in (0, 1); NaN outside.  All three AS 241
// regions are evaluated and blended so the pack stays branch-free.
template <class P>
typename P::v norminv_pack(typename P::v p) {
    using V = typename P::v;
    const V q = P::sub(p, P::set1(0.5));

    const V rc = P::sub(P::set1(0.180625), P::mul(q, q));
    const V xc =
        P::div(P::mul(q, poly_asc<P>(kNdA, rc)), poly_asc<P>(kNdB, rc));

    const V pm = P::min(p, P::sub(P::set1(1.0), p));
    const V rt = P::sqrt(P::neg(log_pack<P>(pm)));
    const V rm = P::sub(rt, P::set1(1.6));
    const V rf = P::sub(rt, P::set1(5.0));
    const auto mid = P::cmp_le(rt, P::set1(5.0));
    const V num = P::select(mid, poly_asc<P>(kNdC, rm), poly_asc<P>(kNdE, rf));
    const V den = P::select(mid, poly_asc<P>(kNdD, rm), poly_asc<P>(kNdF, rf));
    V xt = P::div(num, den);
    xt = P::select(P::cmp_lt(q, P::set1(0.0)), P::neg(xt), xt);

    V x = P::select(P::cmp_le(P::abs(q), P::set1(0.425)), xc, xt);
    const auto ok = P::mask_and(P::cmp_lt(P::set1(0.0), p),
                                P::cmp_lt(p, P::set1(1.0)));
    return P::select(ok, x,
                     P::set1(std::numeric_limits<double>::quiet_NaN()));
}

}  // namespace fundsim::simd::detail
