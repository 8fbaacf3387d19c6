#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <complex>
#include <vector>

#include <Eigen/Dense>

#include "dense_oracle.hpp"
#include "frozen_oracles.hpp"
#include "impuritykit/errors.hpp"
#include "impuritykit/exact.hpp"
#include "impuritykit/model.hpp"
#include "impuritykit/pauli.hpp"
#include "impuritykit/rng.hpp"
#include "impuritykit/skew.hpp"
#include "impuritykit/types.hpp"

using impkit::CMat;
using impkit::CVec;
using impkit::cxd;
using impkit::ImpurityModel;
using impkit::Mat;
using impkit::Rng;
using impkit::Vec;

namespace {

Mat random_antisymmetric(Rng& rng, int dim, double scale) {
    Mat h = Mat::Zero(dim, dim);
    for (int p = 0; p < dim; ++p)
        for (int q = p + 1; q < dim; ++q) {
            h(p, q) = scale * rng.normal();
            h(q, p) = -h(p, q);
        }
    return h;
}

ImpurityModel random_model(Rng& rng, int n, int m, double h_scale, double g_scale) {
    std::vector<impkit::ImpurityTerm> terms;
    terms.push_back({{}, cxd(g_scale * rng.normal(), 0.0)});
    for (int p = 1; p <= m; ++p)
        for (int q = p + 1; q <= m; ++q)
            terms.push_back({{p, q}, cxd(0.0, g_scale * rng.normal())});
    if (m >= 4) terms.push_back({{1, 2, 3, 4}, cxd(g_scale * rng.normal(), 0.0)});
    return ImpurityModel(n, m, random_antisymmetric(rng, 2 * n, h_scale), terms);
}

}  // namespace

TEST_CASE("Majorana Pauli encodings reproduce the dense matrices") {
    const int n = 3;
    const std::size_t dim = 1ull << n;
    std::vector<CMat> c(2 * n);
    for (int p = 1; p <= 2 * n; ++p) {
        const impkit::PauliTerm t = impkit::majorana_monomial(n, {p});
        CMat M = CMat::Zero(dim, dim);
        for (std::size_t i = 0; i < dim; ++i) {
            const cxd v = std::popcount(i & t.zmask) % 2 ? -t.coeff : t.coeff;
            M(i ^ t.xmask, i) += v;
        }
        c[p - 1] = M;
        CHECK((M - dense_oracle::majorana(n, p)).cwiseAbs().maxCoeff() < 1e-14);
    }
    for (int p = 0; p < 2 * n; ++p)
        for (int q = 0; q < 2 * n; ++q) {
            const CMat anti = c[p] * c[q] + c[q] * c[p];
            const double want = p == q ? 2.0 : 0.0;
            CHECK((anti - want * CMat::Identity(dim, dim)).cwiseAbs().maxCoeff() < 1e-13);
        }
}

TEST_CASE("dense spectrum matches the independently built Hamiltonian") {
    Rng rng(61);
    for (int trial = 0; trial < 4; ++trial) {
        const ImpurityModel model = random_model(rng, 5, 4, 0.4, 0.5);
        const CMat H = dense_oracle::hamiltonian(model);
        Eigen::SelfAdjointEigenSolver<CMat> es(H, Eigen::EigenvaluesOnly);
        const Vec got = impkit::exact_spectrum(model);
        REQUIRE(got.size() == es.eigenvalues().size());
        CHECK((got - es.eigenvalues()).cwiseAbs().maxCoeff() < 1e-9);
    }
}

TEST_CASE("a bare bath grounds at zero with single-mode excitations") {
    Rng rng(62);
    const int n = 4;
    const ImpurityModel bath(n, 0, random_antisymmetric(rng, 2 * n, 0.7), {});
    const auto modes = impkit::canonical_modes(bath.h());
    const Vec spec = impkit::exact_spectrum(bath);
    CHECK(std::abs(spec(0)) < 1e-10);
    CHECK(spec(1) == doctest::Approx(modes.epsilons.minCoeff()).epsilon(1e-9));
    CHECK(spec(spec.size() - 1) ==
          doctest::Approx(modes.epsilons.sum()).epsilon(1e-9));
    CHECK(impkit::exact_ground_energy(bath) == doctest::Approx(0.0).epsilon(1e-9));
}

TEST_CASE("Lanczos agrees with the dense solver and is seed-stable") {
    Rng rng(63);
    for (int trial = 0; trial < 3; ++trial) {
        const ImpurityModel model = random_model(rng, 6, 4, 0.4, 0.5);
        const Vec spec = impkit::exact_spectrum(model);
        const double e_lanczos = impkit::exact_ground_energy(model);
        CHECK(e_lanczos == doctest::Approx(spec(0)).epsilon(1e-8));
        impkit::LanczosOptions opts;
        opts.seed = 0xfeedface;
        CHECK(impkit::exact_ground_energy(model, opts) ==
              doctest::Approx(spec(0)).epsilon(1e-8));
    }
}

TEST_CASE("single-impurity ring model reproduces frozen ground energies") {
    for (const auto& row : frozen::anderson_ground_table) {
        const int n = static_cast<int>(row[0]);
        if (n != 8) continue;  // n = 16 runs in the acceptance suite
        const ImpurityModel model = impkit::anderson(n, row[1]);
        CHECK(impkit::exact_ground_energy(model) ==
              doctest::Approx(row[2]).epsilon(1e-8));
    }
}

TEST_CASE("ground state satisfies the eigenvalue equation") {
    Rng rng(64);
    const ImpurityModel model = random_model(rng, 5, 4, 0.4, 0.5);
    const auto [e, psi] = impkit::exact_ground_state(model);
    CHECK(std::abs(psi.norm() - 1.0) < 1e-10);
    const CMat H = dense_oracle::hamiltonian(model);
    CHECK((H * psi - e * psi).norm() < 1e-6);
    CHECK(e == doctest::Approx(impkit::exact_spectrum(model)(0)).epsilon(1e-8));
}

TEST_CASE("mode correlations: dense cross-check and physical bounds") {
    Rng rng(65);
    const ImpurityModel model = random_model(rng, 4, 2, 0.5, 0.6);
    const auto [e, psi] = impkit::exact_ground_state(model);
    const CMat C = impkit::mode_correlations(model, psi);

    // Independent route: explicit dense mode operators b_j = sum_q T_jq c_q.
    const auto modes = impkit::canonical_modes(model.h());
    const int n = model.n();
    CMat want(n, n);
    std::vector<CMat> b(n);
    for (int j = 0; j < n; ++j) {
        CMat bj = CMat::Zero(1 << n, 1 << n);
        for (int q = 0; q < 2 * n; ++q) {
            const cxd T = 0.5 * cxd(modes.rotation(2 * j, q), modes.rotation(2 * j + 1, q));
            bj += T * dense_oracle::majorana(n, q + 1);
        }
        b[j] = bj;
    }
    for (int j = 0; j < n; ++j)
        for (int l = 0; l < n; ++l)
            want(j, l) = psi.dot(b[j].adjoint() * b[l] * psi);
    CHECK((C - want).cwiseAbs().maxCoeff() < 1e-9);

    CHECK((C - C.adjoint()).cwiseAbs().maxCoeff() < 1e-12);
    const Vec sigma = impkit::correlation_spectrum(C);
    for (Eigen::Index i = 0; i < sigma.size(); ++i) {
        CHECK(sigma(i) > -1e-10);
        CHECK(sigma(i) < 1.0 + 1e-10);
        if (i > 0) CHECK(sigma(i) <= sigma(i - 1) + 1e-12);
    }

    // The bare-bath ground state holds no occupation at all.
    const ImpurityModel bath(4, 0, model.h(), {});
    const auto [eb, psib] = impkit::exact_ground_state(bath);
    CHECK(impkit::mode_correlations(bath, psib).cwiseAbs().maxCoeff() < 1e-9);
}

TEST_CASE("correlation spectrum of the ring model decays past mid-band") {
    const ImpurityModel model = impkit::anderson(6, 8.0);
    const auto [e, psi] = impkit::exact_ground_state(model);
    const Vec sigma =
        impkit::correlation_spectrum(impkit::mode_correlations(model, psi));
    CHECK(sigma(4) < 1e-2);  // index ceil(n/2) + 1 in 1-based counting
    CHECK(sigma(5) < 1e-2);
}

TEST_CASE("feasibility residuals vanish on ground states and flag excited ones") {
    Rng rng(66);
    const ImpurityModel model = random_model(rng, 5, 2, 0.5, 0.6);
    const auto [e, psi] = impkit::exact_ground_state(model);
    const auto res = impkit::feasibility_residuals(model, impkit::mode_correlations(model, psi));
    CHECK(res.commutator < 1e-7);
    CHECK(res.energy < 1e-7);

    // Fully occupied bath: symmetrized block equals E, residual = eps_max.
    const ImpurityModel bath(4, 0, random_antisymmetric(rng, 8, 0.7), {});
    const auto modes = impkit::canonical_modes(bath.h());
    const CMat H = dense_oracle::hamiltonian(bath);
    Eigen::SelfAdjointEigenSolver<CMat> es(H);
    const CVec top = es.eigenvectors().col(H.rows() - 1);
    const auto bad = impkit::feasibility_residuals(bath, impkit::mode_correlations(bath, top));
    CHECK(bad.energy == doctest::Approx(modes.epsilons.maxCoeff()).epsilon(1e-8));
}

TEST_CASE("bath tail weights locate the occupied energy shell") {
    Rng rng(67);
    const int n = 4;
    const ImpurityModel bath(n, 0, random_antisymmetric(rng, 2 * n, 0.7), {});
    const CMat HB = dense_oracle::hamiltonian(bath);
    Eigen::SelfAdjointEigenSolver<CMat> es(HB);

    // An eigenstate at level L has all its weight above any tau < L.
    const int level = 5;
    const double L = es.eigenvalues()(level);
    REQUIRE(L > 1e-6);
    const CVec psi = es.eigenvectors().col(level);
    Vec taus(3);
    taus << L - 1e-6, L + 1e-6, es.eigenvalues().maxCoeff() + 1.0;
    const Vec w = impkit::bath_tail_weights(bath, psi, taus);
    CHECK(w(0) == doctest::Approx(1.0).epsilon(1e-9));
    CHECK(w(1) < 1e-9);
    CHECK(w(2) < 1e-9);

    // Interacting ground state: monotone nonincreasing tails, zero beyond the band.
    const ImpurityModel model = impkit::anderson(5, 4.0);
    const auto [e, g] = impkit::exact_ground_state(model);
    Vec grid(6);
    grid << 0.0, 1.0, 2.0, 4.0, 8.0, 1e3;
    const Vec tails = impkit::bath_tail_weights(model, g, grid);
    for (Eigen::Index i = 1; i < tails.size(); ++i)
        CHECK(tails(i) <= tails(i - 1) + 1e-12);
    CHECK(tails(tails.size() - 1) < 1e-12);
}

TEST_CASE("size guards reject oversized requests") {
    const int n = 13;
    const ImpurityModel big(n, 0, Mat::Zero(2 * n, 2 * n), {});
    CHECK_THROWS_AS((void)impkit::exact_spectrum(big), impkit::DimensionTooLarge);
    const int huge = 25;
    const ImpurityModel too_big(huge, 0, Mat::Zero(2 * huge, 2 * huge), {});
    CHECK_THROWS_AS((void)impkit::exact_ground_energy(too_big),
                    impkit::DimensionTooLarge);
}
