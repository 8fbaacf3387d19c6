// Dense Jordan-Wigner reference implementations used to cross-check the
// covariance-matrix algebra and the impurity Hamiltonian assembly. Everything
// here works on explicit 2^n-dimensional matrices and vectors built with
// Eigen kron products; none of the library's Pauli or Gaussian code is
// reused, so agreement is an independent check of both conventions and
// numerics. Intended for n <= 6 or so.
#pragma once

#include <complex>
#include <stdexcept>
#include <vector>

#include <Eigen/Dense>

#include "impuritykit/gaussian.hpp"
#include "impuritykit/model.hpp"
#include "impuritykit/rng.hpp"
#include "impuritykit/types.hpp"

namespace dense_oracle {

using impkit::CMat;
using impkit::CVec;
using impkit::cxd;
using impkit::Mat;

inline CMat kron(const CMat& A, const CMat& B) {
    CMat out(A.rows() * B.rows(), A.cols() * B.cols());
    for (Eigen::Index i = 0; i < A.rows(); ++i)
        for (Eigen::Index j = 0; j < A.cols(); ++j)
            out.block(i * B.rows(), j * B.cols(), B.rows(), B.cols()) = A(i, j) * B;
    return out;
}

// c_{2a-1} = Z^{a-1} X_a, c_{2a} = Z^{a-1} Y_a (1-based p in 1..2n).
// Qubit a occupies basis-index bit a-1, so qubit 1 is the least significant
// bit — the same layout the library's Pauli masks use.
inline CMat majorana(int n, int p) {
    CMat X(2, 2), Y(2, 2), Z(2, 2), I2(2, 2);
    X << 0, 1, 1, 0;
    Y << 0, cxd(0, -1), cxd(0, 1), 0;
    Z << 1, 0, 0, -1;
    I2.setIdentity();
    const int a = (p + 1) / 2;
    CMat out = CMat::Identity(1, 1);
    for (int q = n; q >= 1; --q) {
        if (q < a)
            out = kron(out, Z);
        else if (q == a)
            out = kron(out, p % 2 == 1 ? X : Y);
        else
            out = kron(out, I2);
    }
    return out;
}

// Ordered product c_{x_1} c_{x_2} ... for an ascending 1-based mask.
inline CMat majorana_product(int n, const std::vector<int>& mask) {
    const Eigen::Index dim = Eigen::Index(1) << n;
    CMat out = CMat::Identity(dim, dim);
    for (int p : mask) out = out * majorana(n, p);
    return out;
}

inline CVec vacuum(int n) {
    CVec v = CVec::Zero(Eigen::Index(1) << n);
    v(0) = 1.0;
    return v;
}

// Occupation-number basis vector; occ[j] in {0, 1}, 0-based mode j maps to
// basis-index bit j with |1> the occupied state.
inline CVec fock(const std::vector<int>& occ) {
    const int n = static_cast<int>(occ.size());
    Eigen::Index index = 0;
    for (int j = 0; j < n; ++j)
        if (occ[static_cast<std::size_t>(j)]) index |= Eigen::Index(1) << j;
    CVec v = CVec::Zero(Eigen::Index(1) << n);
    v(index) = 1.0;
    return v;
}

// exp(theta/2 c_i c_j) = cos(theta/2) I + sin(theta/2) c_i c_j for i != j.
inline CVec apply_givens(int n, const CVec& v, int i, int j, double theta) {
    if (i == j) throw std::invalid_argument("apply_givens: i == j");
    const CMat cc = majorana(n, i) * majorana(n, j);
    return std::cos(theta / 2) * v + std::sin(theta / 2) * (cc * v);
}

inline cxd overlap(const CVec& a, const CVec& b) { return a.dot(b); }

inline cxd element(const CVec& a, const std::vector<int>& mask, const CVec& b) {
    const int n = static_cast<int>(std::log2(static_cast<double>(a.size())) + 0.5);
    return a.dot(majorana_product(n, mask) * b);
}

// M_pq = -(i/2) <v| [c_p, c_q] |v> for a normalized state: the covariance a
// Gaussian state with this dense vector must have.
inline Mat covariance(const CVec& v) {
    const int n = static_cast<int>(std::log2(static_cast<double>(v.size())) + 0.5);
    Mat M = Mat::Zero(2 * n, 2 * n);
    for (int p = 1; p <= 2 * n; ++p)
        for (int q = p + 1; q <= 2 * n; ++q) {
            const cxd e = element(v, {p, q}, v);
            M(p - 1, q - 1) = e.imag();
            M(q - 1, p - 1) = -e.imag();
        }
    return M;
}

// Dense Hamiltonian straight from the model data:
//   H = (e0 + offset) I + (i/4) sum_pq h_pq c_p c_q + sum_x g_x c(x).
inline CMat hamiltonian(const impkit::ImpurityModel& model) {
    const int n = model.n();
    const Eigen::Index dim = Eigen::Index(1) << n;
    CMat H = model.scalar() * CMat::Identity(dim, dim);
    const Mat& h = model.h();
    for (int p = 1; p <= 2 * n; ++p)
        for (int q = 1; q <= 2 * n; ++q)
            if (h(p - 1, q - 1) != 0.0)
                H += cxd(0, 0.25) * h(p - 1, q - 1) *
                     (majorana(n, p) * majorana(n, q));
    for (const auto& term : model.terms()) {
        std::vector<int> mask(term.mask.begin(), term.mask.end());
        H += term.coeff * majorana_product(n, mask);
    }
    return H;
}

// A Gaussian state tracked in both representations: the dense vector evolves
// by explicit 2^n-dimensional rotations, the covariance by the library's
// givens_rotate. Tests compare the two.
struct TrackedState {
    CVec vec;
    Mat cov;
};

inline TrackedState random_state(int n, impkit::Rng& rng, int rotations,
                                 bool random_occupation = false) {
    std::vector<int> occ(static_cast<std::size_t>(n), 0);
    if (random_occupation)
        for (auto& o : occ) o = static_cast<int>(rng.below(2));
    TrackedState s{fock(occ), impkit::fock_covariance(occ)};
    for (int r = 0; r < rotations; ++r) {
        const int i = 1 + static_cast<int>(rng.below(static_cast<std::uint64_t>(2 * n)));
        int j = i;
        while (j == i)
            j = 1 + static_cast<int>(rng.below(static_cast<std::uint64_t>(2 * n)));
        const double theta = rng.uniform(-3.141592653589793, 3.141592653589793);
        s.vec = apply_givens(n, s.vec, i, j, theta);
        s.cov = impkit::givens_rotate(s.cov, i, j, theta);
    }
    return s;
}

}  // namespace dense_oracle
