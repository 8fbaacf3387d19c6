#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <complex>
#include <cstdint>
#include <string>
#include <vector>

#include "impuritykit/kernels.hpp"
#include "impuritykit/rng.hpp"

using impkit::Rng;
using impkit::kernels::cxd;

namespace {

std::vector<cxd> random_vec(Rng& rng, std::size_t n) {
    std::vector<cxd> v(n);
    for (auto& x : v) x = cxd(rng.normal(), rng.normal());
    return v;
}

// Straight-line reference for the Pauli accumulate, written independently of
// the kernel implementations.
void pauli_accum_ref(unsigned nq, std::uint64_t xmask, std::uint64_t zmask,
                     cxd coeff, const cxd* in, cxd* out) {
    const std::uint64_t dim = std::uint64_t(1) << nq;
    for (std::uint64_t i = 0; i < dim; ++i) {
        const int sign = __builtin_parityll(i & zmask) ? -1 : 1;
        out[i ^ xmask] += coeff * static_cast<double>(sign) * in[i];
    }
}

}  // namespace

TEST_CASE("scalar kernels match straightforward loops") {
    Rng rng(11);
    const auto& ops = impkit::kernels::scalar_ops();
    for (std::size_t n : {std::size_t(1), std::size_t(2), std::size_t(3),
                          std::size_t(7), std::size_t(8), std::size_t(13),
                          std::size_t(64), std::size_t(1000)}) {
        auto x = random_vec(rng, n);
        auto y = random_vec(rng, n);
        const cxd a(rng.normal(), rng.normal());

        auto y2 = y;
        ops.axpy(n, a, x.data(), y2.data());
        cxd dot_ref = 0.0;
        double nrm_ref = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            CHECK(std::abs(y2[i] - (y[i] + a * x[i])) < 1e-14);
            dot_ref += std::conj(x[i]) * y[i];
            nrm_ref += std::norm(x[i]);
        }
        CHECK(std::abs(ops.dot(n, x.data(), y.data()) - dot_ref) < 1e-12 * (1 + std::abs(dot_ref)));
        CHECK(ops.nrm2sq(n, x.data()) == doctest::Approx(nrm_ref).epsilon(1e-12));

        auto x2 = x;
        ops.scale(n, a, x2.data());
        for (std::size_t i = 0; i < n; ++i)
            CHECK(std::abs(x2[i] - a * x[i]) < 1e-14);
    }
}

TEST_CASE("scalar pauli_accum matches the reference loop") {
    Rng rng(12);
    const auto& ops = impkit::kernels::scalar_ops();
    for (unsigned nq : {1u, 2u, 3u, 5u, 8u}) {
        const std::size_t dim = std::size_t(1) << nq;
        for (int trial = 0; trial < 8; ++trial) {
            const std::uint64_t xmask = rng.below(std::uint64_t(1) << nq);
            const std::uint64_t zmask = rng.below(std::uint64_t(1) << nq);
            const cxd coeff(rng.normal(), rng.normal());
            auto in = random_vec(rng, dim);
            auto out = random_vec(rng, dim);
            auto expect = out;
            pauli_accum_ref(nq, xmask, zmask, coeff, in.data(), expect.data());
            ops.pauli_accum(nq, xmask, zmask, coeff, in.data(), out.data());
            for (std::size_t i = 0; i < dim; ++i)
                CHECK(std::abs(out[i] - expect[i]) < 1e-13);
        }
    }
}

TEST_CASE("vectorized kernels agree with the scalar reference") {
    const auto* simd = impkit::kernels::avx2_ops();
    if (simd == nullptr) {
        MESSAGE("no SIMD variant available on this build/CPU; skipping");
        return;
    }
    const auto& ref = impkit::kernels::scalar_ops();
    Rng rng(13);
    for (std::size_t n : {std::size_t(1), std::size_t(2), std::size_t(4),
                          std::size_t(5), std::size_t(15), std::size_t(16),
                          std::size_t(17), std::size_t(255), std::size_t(1024)}) {
        auto x = random_vec(rng, n);
        auto y = random_vec(rng, n);
        const cxd a(rng.normal(), rng.normal());

        auto y_ref = y, y_simd = y;
        ref.axpy(n, a, x.data(), y_ref.data());
        simd->axpy(n, a, x.data(), y_simd.data());
        for (std::size_t i = 0; i < n; ++i)
            CHECK(std::abs(y_ref[i] - y_simd[i]) < 1e-12);

        CHECK(std::abs(ref.dot(n, x.data(), y.data()) - simd->dot(n, x.data(), y.data())) <
              1e-10 * (1 + std::sqrt(static_cast<double>(n))));
        CHECK(ref.nrm2sq(n, x.data()) ==
              doctest::Approx(simd->nrm2sq(n, x.data())).epsilon(1e-12));

        auto xs = x, xr = x;
        ref.scale(n, a, xr.data());
        simd->scale(n, a, xs.data());
        for (std::size_t i = 0; i < n; ++i)
            CHECK(std::abs(xr[i] - xs[i]) < 1e-12);
    }
    for (unsigned nq : {3u, 6u, 10u}) {
        const std::size_t dim = std::size_t(1) << nq;
        auto in = random_vec(rng, dim);
        auto o1 = random_vec(rng, dim);
        auto o2 = o1;
        const std::uint64_t xmask = rng.below(std::uint64_t(1) << nq);
        const std::uint64_t zmask = rng.below(std::uint64_t(1) << nq);
        const cxd coeff(rng.normal(), rng.normal());
        ref.pauli_accum(nq, xmask, zmask, coeff, in.data(), o1.data());
        simd->pauli_accum(nq, xmask, zmask, coeff, in.data(), o2.data());
        for (std::size_t i = 0; i < dim; ++i)
            CHECK(std::abs(o1[i] - o2[i]) < 1e-12);
    }
}

TEST_CASE("runtime selection honors explicit requests") {
    REQUIRE(impkit::kernels::select("scalar"));
    CHECK(std::string(impkit::kernels::ops().name) == "scalar");
    const bool have_simd = impkit::kernels::avx2_ops() != nullptr;
    CHECK(impkit::kernels::select("avx2") == have_simd);
    REQUIRE(impkit::kernels::select("auto"));
    if (have_simd)
        CHECK(std::string(impkit::kernels::ops().name) == "avx2");
    CHECK_FALSE(impkit::kernels::select("no-such-isa"));
}
