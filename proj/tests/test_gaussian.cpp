#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <complex>
#include <vector>

#include <Eigen/Dense>

#include "dense_oracle.hpp"
#include "impuritykit/errors.hpp"
#include "impuritykit/gaussian.hpp"
#include "impuritykit/rng.hpp"
#include "impuritykit/types.hpp"

using impkit::CMat;
using impkit::CVec;
using impkit::cxd;
using impkit::GaussianFrame;
using impkit::GaussianState;
using impkit::Mat;
using impkit::Rng;

namespace {

// Tracked state overlapping the dense reference vector well enough to anchor.
dense_oracle::TrackedState anchorable_state(int n, Rng& rng, const CVec& ref_vec,
                                            double min_mag = 1e-3) {
    for (int attempt = 0; attempt < 200; ++attempt) {
        auto s = dense_oracle::random_state(n, rng, 6);
        if (std::abs(ref_vec.dot(s.vec)) > min_mag) return s;
    }
    throw std::runtime_error("no anchorable state found");
}

// Phase p with |state as anchored> = p * |dense vector>.
cxd frame_phase(const GaussianState& s, const CVec& dense_vec, const CVec& ref_vec) {
    const cxd d = ref_vec.dot(dense_vec);
    REQUIRE(std::abs(d) > 1e-10);
    return s.anchor / d;
}

}  // namespace

TEST_CASE("fock covariances match dense two-point functions") {
    Rng rng(41);
    for (int n : {1, 2, 4}) {
        CHECK((impkit::vacuum_covariance(n) -
               dense_oracle::covariance(dense_oracle::vacuum(n)))
                  .cwiseAbs()
                  .maxCoeff() < 1e-12);
        for (int trial = 0; trial < 3; ++trial) {
            std::vector<int> occ(static_cast<std::size_t>(n));
            for (auto& o : occ) o = static_cast<int>(rng.below(2));
            CHECK((impkit::fock_covariance(occ) -
                   dense_oracle::covariance(dense_oracle::fock(occ)))
                      .cwiseAbs()
                      .maxCoeff() < 1e-12);
        }
    }
}

TEST_CASE("givens rotations keep the two representations in lockstep") {
    Rng rng(42);
    for (int n : {2, 3, 5}) {
        const auto s = dense_oracle::random_state(n, rng, 8, true);
        CHECK((s.cov - dense_oracle::covariance(s.vec)).cwiseAbs().maxCoeff() < 1e-10);
        CHECK(impkit::is_pure(s.cov));
        // Parity from the Pfaffian equals the dense expectation of the parity
        // operator (-i)^n c_1...c_2n = prod_j (1 - 2 n_j).
        CMat P = CMat::Identity(1 << n, 1 << n);
        for (int p = 1; p <= 2 * n; ++p) P = P * dense_oracle::majorana(n, p);
        const cxd phase = std::pow(cxd(0.0, -1.0), n);
        const cxd dense_parity = phase * s.vec.dot(P * s.vec);
        CHECK(std::abs(dense_parity.imag()) < 1e-9);
        CHECK(impkit::parity(s.cov) == doctest::Approx(dense_parity.real()).epsilon(1e-9));
    }
    // rotate() validates orthogonality.
    Mat R = Mat::Identity(4, 4);
    R(0, 0) = 2.0;
    CHECK_THROWS_AS((void)impkit::rotate(impkit::vacuum_covariance(2), R),
                    impkit::NotOrthogonal);
}

TEST_CASE("pair overlap magnitude matches dense inner products") {
    Rng rng(43);
    for (int trial = 0; trial < 40; ++trial) {
        const int n = 2 + static_cast<int>(rng.below(4));
        const auto a = dense_oracle::random_state(n, rng, 6, true);
        const auto b = dense_oracle::random_state(n, rng, 6, true);
        const double mag = std::norm(a.vec.dot(b.vec));
        CHECK(impkit::overlap_mag2(a.cov, b.cov) == doctest::Approx(mag).epsilon(1e-7));
    }
    // Different parities: exact zero.
    const Mat even = impkit::fock_covariance({0, 0});
    const Mat odd = impkit::fock_covariance({1, 0});
    CHECK(impkit::overlap_mag2(even, odd) == 0.0);
}

TEST_CASE("vacuum contraction equals dense products of linear forms") {
    Rng rng(44);
    for (int trial = 0; trial < 12; ++trial) {
        const int n = 2 + static_cast<int>(rng.below(3));
        const auto s = dense_oracle::random_state(n, rng, 6, true);
        const int k = 2 * (1 + static_cast<int>(rng.below(2)));  // 2 or 4 forms
        CMat forms(k, 2 * n);
        for (int i = 0; i < k; ++i)
            for (int q = 0; q < 2 * n; ++q)
                forms(i, q) = cxd(rng.normal(), rng.normal());
        // Dense product L_1 ... L_k in the tracked state.
        CMat op = CMat::Identity(1 << n, 1 << n);
        for (int i = 0; i < k; ++i) {
            CMat L = CMat::Zero(1 << n, 1 << n);
            for (int q = 0; q < 2 * n; ++q)
                L += forms(i, q) * dense_oracle::majorana(n, q + 1);
            op = op * L;
        }
        const cxd want = s.vec.dot(op * s.vec);
        const cxd got = impkit::vacuum_contraction(forms, s.cov);
        CHECK(std::abs(got - want) < 1e-8 * (1.0 + std::abs(want)));
        // Odd count vanishes.
        CMat odd_forms = forms.topRows(k - 1);
        CHECK(std::abs(impkit::vacuum_contraction(odd_forms, s.cov)) == 0.0);
    }
}

TEST_CASE("anchors fix the phase against the reference") {
    Rng rng(45);
    const int n = 3;
    const GaussianFrame frame = GaussianFrame::vacuum(n);
    const CVec ref_vec = dense_oracle::vacuum(n);
    for (int trial = 0; trial < 10; ++trial) {
        const auto s = anchorable_state(n, rng, ref_vec);
        const auto anchored = frame.anchor(s.cov);
        CHECK(anchored.anchor.real() > 0.0);
        CHECK(anchored.anchor.imag() == 0.0);
        CHECK(std::abs(anchored.anchor) ==
              doctest::Approx(std::abs(ref_vec.dot(s.vec))).epsilon(1e-7));
    }
    // A state orthogonal to the reference cannot be anchored.
    CHECK_THROWS_AS((void)frame.anchor(impkit::fock_covariance({1, 1, 0})),
                    impkit::SingularTriple);
    // Trusted anchors pass through untouched.
    const auto s = anchorable_state(n, rng, ref_vec);
    const auto trusted = frame.anchor(s.cov, cxd(0.1, 0.2));
    CHECK(trusted.anchor == cxd(0.1, 0.2));
}

TEST_CASE("frame overlaps match dense inner products including phases") {
    Rng rng(46);
    const int n = 3;
    const GaussianFrame frame = GaussianFrame::vacuum(n);
    const CVec ref_vec = dense_oracle::vacuum(n);
    for (int trial = 0; trial < 25; ++trial) {
        const auto a = anchorable_state(n, rng, ref_vec);
        const auto b = anchorable_state(n, rng, ref_vec);
        const auto sa = frame.anchor(a.cov);
        const auto sb = frame.anchor(b.cov);
        const cxd pa = frame_phase(sa, a.vec, ref_vec);
        const cxd pb = frame_phase(sb, b.vec, ref_vec);
        const cxd want = std::conj(pa) * pb * a.vec.dot(b.vec);
        const cxd got = frame.overlap(sa, sb);
        CHECK(std::abs(got - want) < 1e-7);
        // Hermitian symmetry.
        CHECK(std::abs(frame.overlap(sb, sa) - std::conj(got)) < 1e-9);
        CHECK(std::abs(frame.overlap(sa, sa) - cxd(1.0, 0.0)) < 1e-9);
    }
}

TEST_CASE("matrix elements match dense Majorana products") {
    Rng rng(47);
    const int n = 3;
    const GaussianFrame frame = GaussianFrame::vacuum(n);
    const CVec ref_vec = dense_oracle::vacuum(n);
    const std::vector<std::vector<int>> masks = {
        {}, {1, 2}, {2, 5}, {1, 2, 3, 4}, {1, 3, 4, 6}, {1, 2, 3, 4, 5, 6}};
    for (int trial = 0; trial < 12; ++trial) {
        const auto a = anchorable_state(n, rng, ref_vec);
        const auto b = anchorable_state(n, rng, ref_vec);
        const auto sa = frame.anchor(a.cov);
        const auto sb = frame.anchor(b.cov);
        const cxd pa = frame_phase(sa, a.vec, ref_vec);
        const cxd pb = frame_phase(sb, b.vec, ref_vec);
        for (const auto& mask : masks) {
            const cxd want =
                std::conj(pa) * pb * dense_oracle::element(a.vec, mask, b.vec);
            impkit::MajoranaMask mk(mask.begin(), mask.end());
            const cxd got = frame.matrix_element(sa, mk, sb);
            CHECK(std::abs(got - want) < 1e-8 * (1.0 + std::abs(want)));
        }
        // Diagonal elements too (pure Wick in one state).
        for (const auto& mask : masks) {
            const cxd want = dense_oracle::element(a.vec, mask, a.vec);
            impkit::MajoranaMask mk(mask.begin(), mask.end());
            const cxd got = frame.matrix_element(sa, mk, sa);
            CHECK(std::abs(got - want) < 1e-8 * (1.0 + std::abs(want)));
        }
    }
    const auto a = anchorable_state(n, rng, ref_vec);
    const auto sa = frame.anchor(a.cov);
    CHECK_THROWS_AS((void)frame.matrix_element(sa, {1, 2, 3}, sa),
                    impkit::OddWeightMask);
}

TEST_CASE("orthogonal pairs: zero overlap, anchored matrix elements") {
    Rng rng(48);
    const int n = 3;
    // Reference that overlaps every even Fock state: a generic rotation.
    const auto ref = dense_oracle::random_state(n, rng, 10);
    const GaussianFrame frame(ref.cov);
    const Mat ca = impkit::fock_covariance({1, 1, 0});
    const Mat cb = impkit::fock_covariance({0, 1, 1});
    const CVec va = dense_oracle::fock({1, 1, 0});
    const CVec vb = dense_oracle::fock({0, 1, 1});
    REQUIRE(std::abs(ref.vec.dot(va)) > 1e-4);
    REQUIRE(std::abs(ref.vec.dot(vb)) > 1e-4);
    const auto sa = frame.anchor(ca);
    const auto sb = frame.anchor(cb);
    // The pair itself is orthogonal.
    CHECK(frame.overlap(sa, sb) == cxd(0.0, 0.0));
    // But c(x) can connect them; the anchored route must agree with dense.
    const cxd pa = frame_phase(sa, va, ref.vec);
    const cxd pb = frame_phase(sb, vb, ref.vec);
    for (const std::vector<int>& mask :
         {std::vector<int>{1, 5}, {2, 6}, {1, 2, 5, 6}, {3, 4}}) {
        const cxd want = std::conj(pa) * pb * dense_oracle::element(va, mask, vb);
        impkit::MajoranaMask mk(mask.begin(), mask.end());
        const cxd got = frame.matrix_element(sa, mk, sb);
        CHECK(std::abs(got - want) < 1e-8 * (1.0 + std::abs(want)));
    }
    // Parity mismatch short-circuits to exactly zero.
    const auto sc = frame.anchor(ref.cov);
    const Mat codd = impkit::fock_covariance({1, 0, 0});
    CHECK(impkit::overlap_mag2(ca, codd) == 0.0);
}

TEST_CASE("pair covariance reproduces matrix elements for regular pairs") {
    Rng rng(49);
    const int n = 3;
    const GaussianFrame frame = GaussianFrame::vacuum(n);
    const CVec ref_vec = dense_oracle::vacuum(n);
    const auto a = anchorable_state(n, rng, ref_vec);
    const auto b = anchorable_state(n, rng, ref_vec);
    const auto sa = frame.anchor(a.cov);
    const auto sb = frame.anchor(b.cov);
    const CMat Delta = frame.pair_covariance(a.cov, b.cov);
    CHECK((Delta + Delta.transpose()).cwiseAbs().maxCoeff() < 1e-9);
    const cxd ov = frame.overlap(sa, sb);
    for (const std::vector<int>& mask : {std::vector<int>{1, 2}, {1, 4}, {1, 2, 3, 6}}) {
        CMat sub(mask.size(), mask.size());
        for (std::size_t i = 0; i < mask.size(); ++i)
            for (std::size_t j = 0; j < mask.size(); ++j)
                sub(i, j) = cxd(0.0, 1.0) *
                            std::conj(Delta(mask[i] - 1, mask[j] - 1));
        impkit::MajoranaMask mk(mask.begin(), mask.end());
        CHECK(std::abs(ov * impkit::pfaffian(sub) - frame.matrix_element(sa, mk, sb)) <
              1e-8);
    }
    // Singular pair sum: opposite Fock states.
    CHECK_THROWS_AS(
        (void)frame.pair_covariance(impkit::fock_covariance({0, 0, 0}),
                                    impkit::fock_covariance({1, 1, 1})),
        impkit::SingularTriple);
}

TEST_CASE("rebase preserves relative phases and overlaps") {
    Rng rng(50);
    const int n = 3;
    const GaussianFrame frame = GaussianFrame::vacuum(n);
    const CVec ref_vec = dense_oracle::vacuum(n);
    const auto a = anchorable_state(n, rng, ref_vec);
    const auto b = anchorable_state(n, rng, ref_vec);
    std::vector<GaussianState> states = {frame.anchor(a.cov), frame.anchor(b.cov)};
    const cxd ov_before = frame.overlap(states[0], states[1]);

    const auto target = anchorable_state(n, rng, ref_vec);
    const auto [frame2, states2] = impkit::rebase(frame, target.cov, states);
    REQUIRE(states2.size() == 2);
    const cxd ov_after = frame2.overlap(states2[0], states2[1]);
    CHECK(std::abs(ov_after - ov_before) < 1e-8);
    // New anchors measure overlap against the new reference.
    CHECK(std::abs(std::abs(states2[0].anchor) -
                   std::abs(target.vec.dot(a.vec))) < 1e-7);
    // Rebasing onto an orthogonal reference is impossible.
    CHECK_THROWS_AS((void)impkit::rebase(frame, impkit::fock_covariance({1, 1, 0}),
                                         states),
                    impkit::SingularTriple);
}

TEST_CASE("superpositions: gram, norm, covariance against dense sums") {
    Rng rng(51);
    const int n = 3;
    const GaussianFrame frame = GaussianFrame::vacuum(n);
    const CVec ref_vec = dense_oracle::vacuum(n);
    const int chi = 3;
    std::vector<dense_oracle::TrackedState> raw;
    std::vector<GaussianState> states;
    std::vector<cxd> coeff;
    CVec dense_sum = CVec::Zero(1 << n);
    for (int aa = 0; aa < chi; ++aa) {
        raw.push_back(anchorable_state(n, rng, ref_vec));
        states.push_back(frame.anchor(raw.back().cov));
        coeff.push_back(cxd(rng.normal(), rng.normal()));
        const cxd p = frame_phase(states.back(), raw.back().vec, ref_vec);
        dense_sum += coeff.back() * (p * raw.back().vec);
    }
    impkit::Superposition psi{frame, coeff, states};
    const CMat G = impkit::gram(psi);
    for (int i = 0; i < chi; ++i) {
        CHECK(G(i, i) == cxd(1.0, 0.0));
        for (int j = 0; j < chi; ++j) {
            CHECK(std::abs(G(i, j) - std::conj(G(j, i))) < 1e-10);
            const cxd p_i = frame_phase(states[static_cast<std::size_t>(i)],
                                        raw[static_cast<std::size_t>(i)].vec, ref_vec);
            const cxd p_j = frame_phase(states[static_cast<std::size_t>(j)],
                                        raw[static_cast<std::size_t>(j)].vec, ref_vec);
            const cxd want = std::conj(p_i) * p_j *
                             raw[static_cast<std::size_t>(i)].vec.dot(
                                 raw[static_cast<std::size_t>(j)].vec);
            CHECK(std::abs(G(i, j) - want) < 1e-7);
        }
    }
    CHECK(impkit::norm2(psi) == doctest::Approx(dense_sum.squaredNorm()).epsilon(1e-7));
    const Mat M = impkit::covariance_of_superposition(psi);
    const CVec normalized = dense_sum / dense_sum.norm();
    CHECK((M - dense_oracle::covariance(normalized)).cwiseAbs().maxCoeff() < 1e-7);

    // A cancelling superposition has no covariance.
    impkit::Superposition null_psi{frame,
                                   {cxd(1.0, 0.0), cxd(-1.0, 0.0)},
                                   {states[0], states[0]}};
    CHECK(impkit::norm2(null_psi) < 1e-10);
    CHECK_THROWS_AS((void)impkit::covariance_of_superposition(null_psi),
                    impkit::ZeroNorm);
}
