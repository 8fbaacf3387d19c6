#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <complex>
#include <limits>

#include <Eigen/Dense>

#include "frozen_oracles.hpp"
#include "impuritykit/errors.hpp"
#include "impuritykit/rng.hpp"
#include "impuritykit/skew.hpp"
#include "impuritykit/types.hpp"

using impkit::CMat;
using impkit::cxd;
using impkit::Mat;
using impkit::Rng;
using impkit::Vec;

namespace {

Mat random_antisymmetric(Rng& rng, int dim) {
    Mat A = Mat::Zero(dim, dim);
    for (int i = 0; i < dim; ++i)
        for (int j = i + 1; j < dim; ++j) {
            A(i, j) = rng.normal();
            A(j, i) = -A(i, j);
        }
    return A;
}

CMat random_antisymmetric_complex(Rng& rng, int dim) {
    CMat A = CMat::Zero(dim, dim);
    for (int i = 0; i < dim; ++i)
        for (int j = i + 1; j < dim; ++j) {
            A(i, j) = cxd(rng.normal(), rng.normal());
            A(j, i) = -A(i, j);
        }
    return A;
}

Mat random_orthogonal(Rng& rng, int dim) {
    Mat G(dim, dim);
    for (int i = 0; i < dim; ++i)
        for (int j = 0; j < dim; ++j) G(i, j) = rng.normal();
    const Eigen::HouseholderQR<Mat> qr(G);
    Mat Q = qr.householderQ();
    // Fix the sign convention so Q is a deterministic function of G.
    const Mat R = qr.matrixQR().triangularView<Eigen::Upper>();
    for (int j = 0; j < dim; ++j)
        if (R(j, j) < 0) Q.col(j) *= -1.0;
    return Q;
}

}  // namespace

TEST_CASE("pfaffian of frozen integer matrices") {
    Mat A6(6, 6);
    A6 << 0, 2, -1, 3, 0, 4,
        -2, 0, 5, -2, 1, 0,
        1, -5, 0, 1, -3, 2,
        -3, 2, -1, 0, 2, -1,
        0, -1, 3, -2, 0, 3,
        -4, 0, -2, 1, -3, 0;
    CHECK(impkit::pfaffian(A6) == doctest::Approx(frozen::pf_A6).epsilon(1e-12));

    Mat A8(8, 8);
    for (int i = 0; i < 8; ++i)
        for (int j = 0; j < 8; ++j) A8(i, j) = j - i;
    CHECK(impkit::pfaffian(A8) == doctest::Approx(frozen::pf_A8).scale(1).epsilon(1e-9));
}

TEST_CASE("pfaffian squared equals determinant up to dim 40") {
    Rng rng(21);
    for (int dim = 2; dim <= 40; dim += 2) {
        const Mat A = random_antisymmetric(rng, dim);
        const double pf = impkit::pfaffian(A);
        const double det = A.determinant();
        CHECK(pf * pf == doctest::Approx(det).epsilon(1e-9));

        const CMat B = random_antisymmetric_complex(rng, dim);
        const cxd pfc = impkit::pfaffian(B);
        const cxd detc = B.determinant();
        CHECK(std::abs(pfc * pfc - detc) < 1e-9 * (1.0 + std::abs(detc)));
    }
}

TEST_CASE("pfaffian transforms by det(R) under congruence") {
    Rng rng(22);
    for (int dim : {4, 8, 12}) {
        const Mat A = random_antisymmetric(rng, dim);
        Mat R = random_orthogonal(rng, dim);
        const double pfA = impkit::pfaffian(A);
        Mat C = R * A * R.transpose();
        C = 0.5 * (C - C.transpose().eval());
        CHECK(impkit::pfaffian(C) ==
              doctest::Approx(R.determinant() * pfA).epsilon(1e-10));

        // Flip one column: det(R) changes sign, so must the Pfaffian.
        R.col(0) *= -1.0;
        Mat C2 = R * A * R.transpose();
        C2 = 0.5 * (C2 - C2.transpose().eval());
        CHECK(impkit::pfaffian(C2) ==
              doctest::Approx(R.determinant() * pfA).epsilon(1e-10));
    }
}

TEST_CASE("pfaffian conventions and error paths") {
    CHECK(impkit::pfaffian(Mat(Mat::Zero(0, 0))) == 1.0);
    CHECK(impkit::pfaffian(Mat(Mat::Zero(3, 3))) == 0.0);
    Mat bad(2, 2);
    bad << 0, 1, 1, 0;
    CHECK_THROWS_AS((void)impkit::pfaffian(bad), impkit::NotAntisymmetric);
    Mat ok(2, 2);
    ok << 0, 2.5, -2.5, 0;
    CHECK(impkit::pfaffian(ok) == doctest::Approx(2.5));
}

TEST_CASE("canonical modes: normal form, round trip, ordering") {
    Rng rng(23);
    for (int n : {1, 2, 4, 7}) {
        const Mat h = random_antisymmetric(rng, 2 * n);
        const auto modes = impkit::canonical_modes(h);
        REQUIRE(modes.epsilons.size() == n);
        // Ascending, nonnegative energies.
        for (int j = 0; j < n; ++j) {
            CHECK(modes.epsilons(j) >= 0.0);
            if (j) CHECK(modes.epsilons(j) >= modes.epsilons(j - 1));
        }
        // R orthogonal.
        CHECK((modes.rotation * modes.rotation.transpose() - Mat::Identity(2 * n, 2 * n))
                  .cwiseAbs()
                  .maxCoeff() < 1e-10);
        // R h R^T is the block normal form.
        const Mat D = modes.rotation * h * modes.rotation.transpose();
        for (int j = 0; j < n; ++j) {
            CHECK(D(2 * j, 2 * j + 1) == doctest::Approx(modes.epsilons(j)).epsilon(1e-9));
            CHECK(D(2 * j + 1, 2 * j) == doctest::Approx(-modes.epsilons(j)).epsilon(1e-9));
        }
        Mat off = D;
        for (int j = 0; j < n; ++j)
            off.block(2 * j, 2 * j, 2, 2).setZero();
        CHECK(off.cwiseAbs().maxCoeff() < 1e-9);
        // Round trip.
        CHECK((modes.reassemble() - h).cwiseAbs().maxCoeff() < 1e-9);
        // Energies match the singular values of h (each eps twice).
        const Eigen::JacobiSVD<Mat> svd(h);
        for (int j = 0; j < n; ++j)
            CHECK(modes.epsilons(n - 1 - j) ==
                  doctest::Approx(svd.singularValues()(2 * j)).epsilon(1e-9));
    }
}

TEST_CASE("spectral gap and trace norm") {
    Rng rng(24);
    const int n = 5;
    const Mat h = random_antisymmetric(rng, 2 * n);
    const auto modes = impkit::canonical_modes(h);
    CHECK(impkit::spectral_gap(h) == doctest::Approx(modes.epsilons(0)));
    CHECK(impkit::trace_norm(h) ==
          doctest::Approx(2.0 * modes.epsilons.sum()).epsilon(1e-9));

    // Exact zero mode: gap skips it.
    Mat h0 = Mat::Zero(4, 4);
    h0(2, 3) = 1.75;
    h0(3, 2) = -1.75;
    const auto m0 = impkit::canonical_modes(h0);
    CHECK(m0.epsilons(0) == 0.0);
    CHECK(m0.epsilons(1) == doctest::Approx(1.75));
    CHECK(impkit::spectral_gap(h0) == doctest::Approx(1.75));
    CHECK(impkit::spectral_gap(Mat(Mat::Zero(4, 4))) ==
          std::numeric_limits<double>::infinity());
}
