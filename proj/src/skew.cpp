#include "impuritykit/skew.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <vector>

#include <Eigen/Eigenvalues>

#include "impuritykit/errors.hpp"

namespace impkit {

namespace {

template <typename Scalar>
void check_antisymmetric(const Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>& A,
                         double tol) {
    const double scale = std::max(1.0, A.cwiseAbs().maxCoeff());
    const double defect = (A + A.transpose()).cwiseAbs().maxCoeff();
    if (defect > tol * scale)
        throw NotAntisymmetric("max|A + A^T| = " + std::to_string(defect) +
                               " exceeds tolerance " + std::to_string(tol * scale));
}

// Skew-symmetric elimination: congruence transforms bring A to tridiagonal
// form two columns at a time; the Pfaffian picks up the (k, k+1) pivot at
// each step and a sign per row/column interchange.
template <typename Scalar>
Scalar pfaffian_impl(Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic> A) {
    using Index = Eigen::Index;
    const Index n = A.rows();
    if (n == 0) return Scalar(1);
    if (n % 2 == 1) return Scalar(0);

    Scalar pf(1);
    for (Index k = 0; k + 1 < n; k += 2) {
        Index kp = k + 1;
        double best = std::abs(A(k + 1, k));
        for (Index i = k + 2; i < n; ++i) {
            const double v = std::abs(A(i, k));
            if (v > best) {
                best = v;
                kp = i;
            }
        }
        if (kp != k + 1) {
            A.row(k + 1).swap(A.row(kp));
            A.col(k + 1).swap(A.col(kp));
            pf = -pf;
        }
        const Scalar pivot = A(k, k + 1);
        if (pivot == Scalar(0)) return Scalar(0);
        pf *= pivot;
        if (k + 2 < n) {
            const auto tail = Eigen::seq(k + 2, n - 1);
            Eigen::Matrix<Scalar, Eigen::Dynamic, 1> tau =
                A(tail, k) / A(k + 1, k);
            Eigen::Matrix<Scalar, Eigen::Dynamic, 1> col = A(tail, k + 1);
            A(tail, tail).noalias() += tau * col.transpose();
            A(tail, tail).noalias() -= col * tau.transpose();
        }
    }
    return pf;
}

}  // namespace

cxd pfaffian(const CMat& A, double tol) {
    if (A.rows() != A.cols())
        throw DimensionMismatch("pfaffian requires a square matrix");
    if (A.rows() == 0) return {1.0, 0.0};
    check_antisymmetric(A, tol);
    return pfaffian_impl<cxd>(A);
}

double pfaffian(const Mat& A, double tol) {
    if (A.rows() != A.cols())
        throw DimensionMismatch("pfaffian requires a square matrix");
    if (A.rows() == 0) return 1.0;
    check_antisymmetric(A, tol);
    return pfaffian_impl<double>(A);
}

Mat CanonicalModes::reassemble() const {
    const Eigen::Index n = epsilons.size();
    Mat blocks = Mat::Zero(2 * n, 2 * n);
    for (Eigen::Index j = 0; j < n; ++j) {
        blocks(2 * j, 2 * j + 1) = epsilons(j);
        blocks(2 * j + 1, 2 * j) = -epsilons(j);
    }
    return rotation.transpose() * blocks * rotation;
}

CanonicalModes canonical_modes(const Mat& h, double zero_tol) {
    if (h.rows() != h.cols() || h.rows() % 2 != 0)
        throw DimensionMismatch("canonical_modes requires an even-dimensional square matrix");
    check_antisymmetric(h, kAntisymmetryTol);
    const Eigen::Index n = h.rows() / 2;

    CanonicalModes out;
    out.epsilons = Vec::Zero(n);
    out.rotation = Mat::Identity(2 * n, 2 * n);
    if (n == 0) return out;

    // The real Schur form of an antisymmetric matrix is block diagonal with
    // antisymmetric 2x2 blocks; U^T h U = D, so R = U^T.
    Eigen::RealSchur<Mat> schur(h);
    Mat U = schur.matrixU();
    Mat D = schur.matrixT();

    struct Block {
        double eps;
        Eigen::Index col0, col1;  // columns of U forming the block, ordered so
                                  // that D(col0, col1) = +eps after orientation
    };
    std::vector<Block> blocks;
    blocks.reserve(n);
    std::vector<bool> used(2 * n, false);

    for (Eigen::Index j = 0; j + 1 < 2 * n;) {
        const double b = D(j, j + 1);
        if (std::abs(b) > zero_tol) {
            if (b >= 0.0)
                blocks.push_back({b, j, j + 1});
            else
                blocks.push_back({-b, j + 1, j});
            used[j] = used[j + 1] = true;
            j += 2;
        } else {
            j += 1;
        }
    }
    // Columns not claimed by a 2x2 block belong to (numerically) zero modes;
    // pair them up in order.
    std::vector<Eigen::Index> zeros;
    for (Eigen::Index j = 0; j < 2 * n; ++j)
        if (!used[j]) zeros.push_back(j);
    for (std::size_t z = 0; z + 1 < zeros.size(); z += 2)
        blocks.push_back({0.0, zeros[z], zeros[z + 1]});

    std::stable_sort(blocks.begin(), blocks.end(),
                     [](const Block& a, const Block& b) { return a.eps < b.eps; });

    Mat R(2 * n, 2 * n);
    for (Eigen::Index j = 0; j < n; ++j) {
        out.epsilons(j) = blocks[j].eps;
        R.row(2 * j) = U.col(blocks[j].col0).transpose();
        R.row(2 * j + 1) = U.col(blocks[j].col1).transpose();
    }
    out.rotation = R;
    return out;
}

double spectral_gap(const Mat& h, double zero_tol) {
    const CanonicalModes cm = canonical_modes(h, zero_tol);
    for (Eigen::Index j = 0; j < cm.epsilons.size(); ++j)
        if (cm.epsilons(j) > zero_tol) return cm.epsilons(j);
    return std::numeric_limits<double>::infinity();
}

double trace_norm(const Mat& h) {
    return 2.0 * canonical_modes(h).epsilons.sum();
}

}  // namespace impkit
