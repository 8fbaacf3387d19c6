#pragma once

#include <complex>
#include <cstddef>
#include <cstdint>

namespace impkit::kernels {

using cxd = std::complex<double>;

// State-vector kernels used by the exact-diagonalization path. Each entry
// has a scalar reference implementation and may have SIMD variants; the
// active set is chosen once at startup from CPU capabilities and can be
// overridden for testing.
struct Ops {
    const char* name;

    // y += a * x
    void (*axpy)(std::size_t n, cxd a, const cxd* x, cxd* y);
    // conj(x) . y
    cxd (*dot)(std::size_t n, const cxd* x, const cxd* y);
    // sum |x_i|^2
    double (*nrm2sq)(std::size_t n, const cxd* x);
    // x *= a
    void (*scale)(std::size_t n, cxd a, cxd* x);

    // Accumulate one Pauli term into `out`:
    //   out[i ^ xmask] += coeff * (-1)^{popcount(i & zmask)} * in[i]
    // over all i in [0, 2^nq). xmask == 0 degenerates to a phased axpy.
    void (*pauli_accum)(unsigned nq, std::uint64_t xmask, std::uint64_t zmask,
                        cxd coeff, const cxd* in, cxd* out);
};

const Ops& scalar_ops();

// AVX2 variant; nullptr when unavailable (not compiled in, or the CPU
// lacks the extension).
const Ops* avx2_ops();

// The runtime-selected implementation (best available).
const Ops& ops();

// Force a specific implementation ("scalar", "avx2", "auto"); returns false
// if the request cannot be satisfied. Intended for tests and benchmarks.
bool select(const char* name);

}  // namespace impkit::kernels
