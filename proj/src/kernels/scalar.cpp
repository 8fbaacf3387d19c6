#include "impuritykit/kernels.hpp"

#include <bit>

namespace impkit::kernels {
namespace {

void axpy_scalar(std::size_t n, cxd a, const cxd* x, cxd* y) {
    for (std::size_t i = 0; i < n; ++i) y[i] += a * x[i];
}

cxd dot_scalar(std::size_t n, const cxd* x, const cxd* y) {
    double re = 0.0, im = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const cxd v = std::conj(x[i]) * y[i];
        re += v.real();
        im += v.imag();
    }
    return {re, im};
}

double nrm2sq_scalar(std::size_t n, const cxd* x) {
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i) s += std::norm(x[i]);
    return s;
}

void scale_scalar(std::size_t n, cxd a, cxd* x) {
    for (std::size_t i = 0; i < n; ++i) x[i] *= a;
}

void pauli_accum_scalar(unsigned nq, std::uint64_t xmask, std::uint64_t zmask,
                        cxd coeff, const cxd* in, cxd* out) {
    const std::uint64_t dim = std::uint64_t(1) << nq;
    if (xmask == 0) {
        for (std::uint64_t i = 0; i < dim; ++i) {
            const double s = (std::popcount(i & zmask) & 1) ? -1.0 : 1.0;
            out[i] += s * coeff * in[i];
        }
        return;
    }
    for (std::uint64_t i = 0; i < dim; ++i) {
        const double s = (std::popcount(i & zmask) & 1) ? -1.0 : 1.0;
        out[i ^ xmask] += s * coeff * in[i];
    }
}

}  // namespace

const Ops& scalar_ops() {
    static const Ops table{"scalar",      axpy_scalar,  dot_scalar,
                           nrm2sq_scalar, scale_scalar, pauli_accum_scalar};
    return table;
}

}  // namespace impkit::kernels
