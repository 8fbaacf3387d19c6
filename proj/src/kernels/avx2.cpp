// AVX2+FMA variants of the state-vector kernels. Complex<double> lanes are
// packed two per ymm register; complex products use the fmaddsub idiom.
// This translation unit is compiled with -mavx2 -mfma and must only be
// reached through the runtime dispatcher.
#include "impuritykit/kernels.hpp"

#include <bit>
#include <immintrin.h>

namespace impkit::kernels {
namespace {

// [a*x0, a*x1] for complex a broadcast over a register holding two complex.
inline __m256d cmul(__m256d ar, __m256d ai, __m256d x) {
    const __m256d xswap = _mm256_permute_pd(x, 0b0101);
    return _mm256_fmaddsub_pd(ar, x, _mm256_mul_pd(ai, xswap));
}

void axpy_avx2(std::size_t n, cxd a, const cxd* x, cxd* y) {
    const __m256d ar = _mm256_set1_pd(a.real());
    const __m256d ai = _mm256_set1_pd(a.imag());
    std::size_t i = 0;
    for (; i + 2 <= n; i += 2) {
        const __m256d xv = _mm256_loadu_pd(reinterpret_cast<const double*>(x + i));
        __m256d yv = _mm256_loadu_pd(reinterpret_cast<double*>(y + i));
        yv = _mm256_add_pd(yv, cmul(ar, ai, xv));
        _mm256_storeu_pd(reinterpret_cast<double*>(y + i), yv);
    }
    for (; i < n; ++i) y[i] += a * x[i];
}

cxd dot_avx2(std::size_t n, const cxd* x, const cxd* y) {
    // conj(x)*y: re accumulates xr*yr + xi*yi, im accumulates xr*yi - xi*yr.
    const __m256d neg_even = _mm256_set_pd(0.0, -0.0, 0.0, -0.0);
    __m256d acc_re = _mm256_setzero_pd();
    __m256d acc_im = _mm256_setzero_pd();
    std::size_t i = 0;
    for (; i + 2 <= n; i += 2) {
        const __m256d xv = _mm256_loadu_pd(reinterpret_cast<const double*>(x + i));
        const __m256d yv = _mm256_loadu_pd(reinterpret_cast<const double*>(y + i));
        acc_re = _mm256_fmadd_pd(xv, yv, acc_re);
        const __m256d xswap = _mm256_permute_pd(xv, 0b0101);
        const __m256d t = _mm256_xor_pd(_mm256_mul_pd(xswap, yv), neg_even);
        acc_im = _mm256_add_pd(acc_im, t);
    }
    alignas(32) double re4[4], im4[4];
    _mm256_store_pd(re4, acc_re);
    _mm256_store_pd(im4, acc_im);
    double re = re4[0] + re4[1] + re4[2] + re4[3];
    double im = im4[0] + im4[1] + im4[2] + im4[3];
    for (; i < n; ++i) {
        const cxd v = std::conj(x[i]) * y[i];
        re += v.real();
        im += v.imag();
    }
    return {re, im};
}

double nrm2sq_avx2(std::size_t n, const cxd* x) {
    __m256d acc = _mm256_setzero_pd();
    std::size_t i = 0;
    for (; i + 2 <= n; i += 2) {
        const __m256d xv = _mm256_loadu_pd(reinterpret_cast<const double*>(x + i));
        acc = _mm256_fmadd_pd(xv, xv, acc);
    }
    alignas(32) double s4[4];
    _mm256_store_pd(s4, acc);
    double s = s4[0] + s4[1] + s4[2] + s4[3];
    for (; i < n; ++i) s += std::norm(x[i]);
    return s;
}

void scale_avx2(std::size_t n, cxd a, cxd* x) {
    const __m256d ar = _mm256_set1_pd(a.real());
    const __m256d ai = _mm256_set1_pd(a.imag());
    std::size_t i = 0;
    for (; i + 2 <= n; i += 2) {
        const __m256d xv = _mm256_loadu_pd(reinterpret_cast<double*>(x + i));
        _mm256_storeu_pd(reinterpret_cast<double*>(x + i), cmul(ar, ai, xv));
    }
    for (; i < n; ++i) x[i] *= a;
}

void pauli_accum_avx2(unsigned nq, std::uint64_t xmask, std::uint64_t zmask,
                      cxd coeff, const cxd* in, cxd* out) {
    const std::uint64_t dim = std::uint64_t(1) << nq;
    if (dim < 2) {
        scalar_ops().pauli_accum(nq, xmask, zmask, coeff, in, out);
        return;
    }
    const __m256d ar = _mm256_set1_pd(coeff.real());
    const __m256d ai = _mm256_set1_pd(coeff.imag());
    const __m256d negall = _mm256_set1_pd(-0.0);
    // With even block base i, lane signs are (s, s^zlow) where s is the
    // parity of popcount(i & zmask) and zlow = zmask & 1.
    const bool zlow = (zmask & 1) != 0;
    const __m256d flip_hi = _mm256_set_pd(-0.0, -0.0, 0.0, 0.0);
    const __m256d flip_lo = _mm256_set_pd(0.0, 0.0, -0.0, -0.0);

    auto sign_mask = [&](std::uint64_t i) -> __m256d {
        const bool s = (std::popcount(i & zmask) & 1) != 0;
        if (!zlow) return s ? negall : _mm256_setzero_pd();
        return s ? flip_lo : flip_hi;
    };

    if (xmask == 0) {
        for (std::uint64_t i = 0; i < dim; i += 2) {
            const __m256d xv = _mm256_loadu_pd(reinterpret_cast<const double*>(in + i));
            __m256d t = _mm256_xor_pd(cmul(ar, ai, xv), sign_mask(i));
            __m256d yv = _mm256_loadu_pd(reinterpret_cast<double*>(out + i));
            _mm256_storeu_pd(reinterpret_cast<double*>(out + i), _mm256_add_pd(yv, t));
        }
    } else if ((xmask & 1) == 0) {
        // Partner indices of a contiguous even-aligned pair stay contiguous.
        for (std::uint64_t i = 0; i < dim; i += 2) {
            const std::uint64_t j = i ^ xmask;
            const __m256d xv = _mm256_loadu_pd(reinterpret_cast<const double*>(in + i));
            __m256d t = _mm256_xor_pd(cmul(ar, ai, xv), sign_mask(i));
            __m256d yv = _mm256_loadu_pd(reinterpret_cast<double*>(out + j));
            _mm256_storeu_pd(reinterpret_cast<double*>(out + j), _mm256_add_pd(yv, t));
        }
    } else {
        // Odd xmask swaps the two complex lanes inside the partner block.
        const std::uint64_t xeven = xmask ^ 1;
        for (std::uint64_t i = 0; i < dim; i += 2) {
            const std::uint64_t b = i ^ xeven;
            const __m256d xv = _mm256_loadu_pd(reinterpret_cast<const double*>(in + i));
            __m256d t = _mm256_xor_pd(cmul(ar, ai, xv), sign_mask(i));
            t = _mm256_permute2f128_pd(t, t, 0x01);
            __m256d yv = _mm256_loadu_pd(reinterpret_cast<double*>(out + b));
            _mm256_storeu_pd(reinterpret_cast<double*>(out + b), _mm256_add_pd(yv, t));
        }
    }
}

}  // namespace

const Ops* avx2_ops_impl() {
    static const Ops table{"avx2",      axpy_avx2,  dot_avx2,
                           nrm2sq_avx2, scale_avx2, pauli_accum_avx2};
    return &table;
}

}  // namespace impkit::kernels
