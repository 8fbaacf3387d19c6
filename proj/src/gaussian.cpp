#include "impuritykit/gaussian.hpp"

#include <algorithm>
#include <cmath>

#include <Eigen/LU>
#include <Eigen/SVD>

#include "impuritykit/errors.hpp"
#include "impuritykit/skew.hpp"

namespace impkit {

namespace {

constexpr double kOrthogonalPairTol = 1e-10;   // overlap_mag2 below this -> treat as orthogonal
constexpr double kTripleTol = 1e-14;           // |triple| below this is unresolvable
constexpr double kSolveResidualTol = 1e-8;

void check_cov_dims(const Mat& M) {
    if (M.rows() != M.cols() || M.rows() % 2 != 0)
        throw DimensionMismatch("covariance matrix must be square with even dimension");
}

void check_mask(const MajoranaMask& x, int two_n) {
    for (std::size_t i = 0; i < x.size(); ++i) {
        if (x[i] < 1 || x[i] > two_n)
            throw DimensionMismatch("Majorana index out of range in mask");
        if (i > 0 && x[i] <= x[i - 1])
            throw DimensionMismatch("Majorana mask must be strictly increasing");
    }
    if (x.size() % 2 != 0)
        throw OddWeightMask("matrix elements of odd-weight Majorana monomials vanish between fixed-parity states; even weight required");
}

cxd i_pow(int n) {
    switch (((n % 4) + 4) % 4) {
        case 0: return {1.0, 0.0};
        case 1: return {0.0, 1.0};
        case 2: return {-1.0, 0.0};
        default: return {0.0, -1.0};
    }
}

}  // namespace

Mat vacuum_covariance(int n) {
    return fock_covariance(std::vector<int>(n, 0));
}

Mat fock_covariance(const std::vector<int>& occupation) {
    const int n = static_cast<int>(occupation.size());
    Mat M = Mat::Zero(2 * n, 2 * n);
    for (int j = 0; j < n; ++j) {
        const double s = occupation[j] ? -1.0 : 1.0;
        M(2 * j, 2 * j + 1) = s;
        M(2 * j + 1, 2 * j) = -s;
    }
    return M;
}

Mat rotate(const Mat& M, const Mat& R) {
    check_cov_dims(M);
    if (R.rows() != M.rows() || R.cols() != M.rows())
        throw DimensionMismatch("rotation dimension does not match covariance");
    const double defect = (R.transpose() * R - Mat::Identity(R.rows(), R.cols()))
                              .cwiseAbs()
                              .maxCoeff();
    if (defect > kOrthogonalityTol)
        throw NotOrthogonal("max|R^T R - I| = " + std::to_string(defect));
    return R * M * R.transpose();
}

Mat givens_rotate(const Mat& M, int i, int j, double theta) {
    check_cov_dims(M);
    const int d = static_cast<int>(M.rows());
    if (i < 1 || j < 1 || i > d || j > d || i == j)
        throw DimensionMismatch("invalid Givens indices");
    const int p = i - 1, q = j - 1;
    const double c = std::cos(theta), s = std::sin(theta);
    Mat out = M;
    // rows
    Vec rp = c * out.row(p) + s * out.row(q);
    Vec rq = -s * out.row(p) + c * out.row(q);
    out.row(p) = rp;
    out.row(q) = rq;
    // columns
    Vec cp = c * out.col(p) + s * out.col(q);
    Vec cq = -s * out.col(p) + c * out.col(q);
    out.col(p) = cp;
    out.col(q) = cq;
    return out;
}

double parity(const Mat& M) {
    return pfaffian(M) >= 0.0 ? 1.0 : -1.0;
}

bool is_pure(const Mat& M, double tol) {
    check_cov_dims(M);
    return (M * M + Mat::Identity(M.rows(), M.cols())).cwiseAbs().maxCoeff() <= tol;
}

double overlap_mag2(const Mat& M1, const Mat& M2) {
    check_cov_dims(M1);
    if (M1.rows() != M2.rows())
        throw DimensionMismatch("covariance sizes differ");
    const int n = static_cast<int>(M1.rows()) / 2;
    const double s1 = parity(M1), s2 = parity(M2);
    if (s1 != s2) return 0.0;
    const Mat pair_sum = M1 + M2;
    const double val = s1 * std::ldexp(pfaffian(pair_sum), -n);
    return std::max(0.0, val);
}

cxd vacuum_contraction(const CMat& forms, const CMat& ref_cov) {
    const Eigen::Index k = forms.rows();
    if (forms.cols() != ref_cov.rows() || ref_cov.rows() != ref_cov.cols())
        throw DimensionMismatch("form length does not match covariance size");
    if (k % 2 != 0) return {0.0, 0.0};
    if (k == 0) return {1.0, 0.0};
    const CMat P = forms * forms.transpose() +
                   cxd(0.0, 1.0) * (forms * ref_cov * forms.transpose());
    CMat G = CMat::Zero(k, k);
    for (Eigen::Index i = 0; i < k; ++i)
        for (Eigen::Index j = i + 1; j < k; ++j) {
            G(i, j) = P(i, j);
            G(j, i) = -P(i, j);
        }
    return pfaffian(G);
}

cxd vacuum_contraction(const CMat& forms, const Mat& ref_cov) {
    return vacuum_contraction(forms, CMat(ref_cov.cast<cxd>()));
}

// ---------------------------------------------------------------------------
// GaussianFrame
// ---------------------------------------------------------------------------

GaussianFrame::GaussianFrame(Mat reference_cov) : ref_(std::move(reference_cov)) {
    check_cov_dims(ref_);
    n_ = static_cast<int>(ref_.rows()) / 2;
    ref_parity_ = parity(ref_);
}

GaussianFrame GaussianFrame::vacuum(int n) {
    return GaussianFrame(vacuum_covariance(n));
}

GaussianState GaussianFrame::anchor(const Mat& cov) const {
    check_cov_dims(cov);
    if (cov.rows() != ref_.rows())
        throw DimensionMismatch("covariance size does not match frame");
    const double mag2 = impkit::overlap_mag2(ref_, cov);
    const double a = std::sqrt(mag2);
    if (a < kTripleTol)
        throw SingularTriple(
            "state is orthogonal to the frame reference; no phase can be "
            "assigned (re-anchor against a different reference)");
    return GaussianState{cov, cxd(a, 0.0)};
}

GaussianState GaussianFrame::anchor(Mat cov, cxd amplitude) const {
    check_cov_dims(cov);
    if (cov.rows() != ref_.rows())
        throw DimensionMismatch("covariance size does not match frame");
    return GaussianState{std::move(cov), amplitude};
}

CMat GaussianFrame::pair_covariance(const Mat& Ma, const Mat& Mb) const {
    const Eigen::Index d = Ma.rows();
    const Mat S = Ma + Mb;
    const CMat B = cxd(0.0, 1.0) * (Ma - Mb).cast<cxd>() -
                   2.0 * CMat::Identity(d, d);
    Eigen::PartialPivLU<CMat> lu(S.cast<cxd>());
    // Delta = B S^{-1}; with S^T = -S this is -(S^{-1} B^T)^T.
    CMat Delta = -(lu.solve(B.transpose())).transpose();
    const double resid = (Delta * S.cast<cxd>() - B).cwiseAbs().maxCoeff();
    if (!(resid <= kSolveResidualTol * (1.0 + B.cwiseAbs().maxCoeff())))
        throw SingularTriple("M_a + M_b is numerically singular; states are (close to) orthogonal");
    return 0.5 * (Delta - Delta.transpose());
}

cxd GaussianFrame::triple(const Mat& M1, const Mat& M2) const {
    const CMat Delta = pair_covariance(M1, M2);
    const Mat pair_sum = M1 + M2;
    const CMat anchored = Delta + ref_.cast<cxd>();
    const cxd pf1 = cxd(pfaffian(pair_sum), 0.0);
    const cxd pf2 = pfaffian(anchored);
    return std::ldexp(1.0, -2 * n_) * pf1 * pf2;
}

cxd GaussianFrame::triple_threeblock(const Mat& M1, const Mat& M2) const {
    const double s1 = parity(M1), s2 = parity(M2);
    if (s1 != ref_parity_ || s2 != ref_parity_) return {0.0, 0.0};
    const Eigen::Index d = 2 * n_;
    const cxd I1(0.0, 1.0);
    CMat K = CMat::Zero(3 * d, 3 * d);
    const CMat Id = CMat::Identity(d, d);
    K.block(0, 0, d, d) = I1 * ref_.cast<cxd>();
    K.block(d, d, d, d) = I1 * M1.cast<cxd>();
    K.block(2 * d, 2 * d, d, d) = I1 * M2.cast<cxd>();
    K.block(0, d, d, d) = -Id;
    K.block(d, 0, d, d) = Id;
    K.block(0, 2 * d, d, d) = Id;
    K.block(2 * d, 0, d, d) = -Id;
    K.block(d, 2 * d, d, d) = -Id;
    K.block(2 * d, d, d, d) = Id;
    return ref_parity_ * std::ldexp(1.0, -2 * n_) * i_pow(n_) * pfaffian(K);
}

cxd GaussianFrame::overlap(const GaussianState& a, const GaussianState& b) const {
    if (a.cov.rows() != ref_.rows() || b.cov.rows() != ref_.rows())
        throw DimensionMismatch("state size does not match frame");
    const double mag2 = impkit::overlap_mag2(a.cov, b.cov);
    if (mag2 == 0.0) return {0.0, 0.0};
    cxd T;
    if (mag2 < 1e-6) {
        T = triple_threeblock(a.cov, b.cov);
    } else {
        try {
            T = triple(a.cov, b.cov);
        } catch (const SingularTriple&) {
            T = triple_threeblock(a.cov, b.cov);
        }
    }
    if (std::abs(T) < kTripleTol) {
        if (mag2 > kOrthogonalPairTol)
            throw SingularTriple(
                "triple product underflow while the pair overlap is resolvable; "
                "the frame reference is (nearly) orthogonal to a state");
        return {0.0, 0.0};
    }
    return T / (a.anchor * std::conj(b.anchor));
}

cxd GaussianFrame::anchored_element(const GaussianState& a, const MajoranaMask& x,
                                    const GaussianState& b) const {
    // Anchored 6n+w Pfaffian:
    // <phi0|a><a|c(x)|b><b|phi0> = sigma 4^{-n} i^n pf(R_x).
    const Eigen::Index d = 2 * n_;
    const Eigen::Index w = static_cast<Eigen::Index>(x.size());
    const cxd I1(0.0, 1.0);
    const CMat Id = CMat::Identity(d, d);

    Mat Dx = Mat::Identity(d, d);
    Mat Jx = Mat::Zero(w, d);
    for (Eigen::Index i = 0; i < w; ++i) {
        Dx(x[i] - 1, x[i] - 1) = 0.0;
        Jx(i, x[i] - 1) = 1.0;
    }

    const CMat M2 = b.cov.cast<cxd>();
    CMat R = CMat::Zero(3 * d + w, 3 * d + w);
    R.block(0, 0, d, d) = I1 * ref_.cast<cxd>();
    R.block(d, d, d, d) = I1 * a.cov.cast<cxd>();
    R.block(0, d, d, d) = -Id;
    R.block(d, 0, d, d) = Id;
    R.block(0, 2 * d, d, d) = Id;
    R.block(2 * d, 0, d, d) = -Id;
    R.block(d, 2 * d, d, d) = -Id;
    R.block(2 * d, d, d, d) = Id;
    R.block(2 * d, 2 * d, d, d) = I1 * Dx * M2 * Dx;
    R.block(2 * d, 3 * d, d, w) =
        Jx.transpose().cast<cxd>() + I1 * Dx * M2 * Jx.transpose();
    R.block(3 * d, 2 * d, w, d) =
        -Jx.cast<cxd>() + I1 * Jx * M2 * Dx;
    R.block(3 * d, 3 * d, w, w) = I1 * Jx * M2 * Jx.transpose();

    const cxd Tx = ref_parity_ * std::ldexp(1.0, -2 * n_) * i_pow(n_) * pfaffian(R);
    const cxd denom = a.anchor * std::conj(b.anchor);
    if (std::abs(denom) < kTripleTol * kTripleTol)
        throw SingularTriple("anchors too small to divide out the reference phases");
    return Tx / denom;
}

cxd GaussianFrame::matrix_element(const GaussianState& a, const MajoranaMask& x,
                                  const GaussianState& b) const {
    if (a.cov.rows() != ref_.rows() || b.cov.rows() != ref_.rows())
        throw DimensionMismatch("state size does not match frame");
    check_mask(x, 2 * n_);
    if (x.empty()) return overlap(a, b);
    if (parity(a.cov) != parity(b.cov)) return {0.0, 0.0};

    const double mag2 = impkit::overlap_mag2(a.cov, b.cov);
    if (mag2 > kOrthogonalPairTol) {
        try {
            const CMat Delta = pair_covariance(a.cov, b.cov);
            const Eigen::Index w = static_cast<Eigen::Index>(x.size());
            CMat sub(w, w);
            for (Eigen::Index i = 0; i < w; ++i)
                for (Eigen::Index j = 0; j < w; ++j)
                    sub(i, j) = cxd(0.0, 1.0) * std::conj(Delta(x[i] - 1, x[j] - 1));
            return overlap(a, b) * pfaffian(sub);
        } catch (const SingularTriple&) {
            // fall through to the anchored route
        }
    }
    return anchored_element(a, x, b);
}

std::pair<GaussianFrame, std::vector<GaussianState>> rebase(
    const GaussianFrame& frame, const Mat& new_reference,
    const std::vector<GaussianState>& states) {
    // Give the new reference a nonnegative-real overlap with the old one;
    // that single choice fixes every re-expressed anchor.
    const GaussianState bridge = frame.anchor(new_reference);
    GaussianFrame out(new_reference);
    std::vector<GaussianState> rebased;
    rebased.reserve(states.size());
    for (const auto& s : states) {
        const cxd a = frame.overlap(bridge, s);
        rebased.push_back(out.anchor(s.cov, a));
    }
    return {std::move(out), std::move(rebased)};
}

// ---------------------------------------------------------------------------
// Superpositions
// ---------------------------------------------------------------------------

CMat gram(const Superposition& psi) {
    const int chi = psi.rank();
    if (static_cast<int>(psi.coeff.size()) != chi)
        throw DimensionMismatch("coefficient count does not match state count");
    CMat G(chi, chi);
    for (int b = 0; b < chi; ++b) {
        G(b, b) = 1.0;
        for (int a = b + 1; a < chi; ++a) {
            const cxd v = psi.frame.overlap(psi.states[b], psi.states[a]);
            G(b, a) = v;
            G(a, b) = std::conj(v);
        }
    }
    return G;
}

double norm2(const Superposition& psi) {
    const CMat G = gram(psi);
    Eigen::Map<const CVec> x(psi.coeff.data(), psi.coeff.size());
    return std::real(x.dot(G * x));
}

Mat covariance_of_superposition(const Superposition& psi) {
    const int chi = psi.rank();
    const Eigen::Index d = psi.frame.reference().rows();
    const double n2 = norm2(psi);
    if (n2 <= 1e-10)
        throw ZeroNorm("superposition norm^2 = " + std::to_string(n2));

    // E_pq = <psi|c_p c_q|psi>; for each state pair either the two-state Wick
    // covariance gives all entries at once or, for orthogonal pairs, the
    // anchored route fills them element by element.
    CMat E = CMat::Zero(d, d);
    for (int a = 0; a < chi; ++a) {
        for (int b = 0; b < chi; ++b) {
            const cxd w = std::conj(psi.coeff[a]) * psi.coeff[b];
            if (std::abs(w) == 0.0) continue;
            const GaussianState& sa = psi.states[a];
            const GaussianState& sb = psi.states[b];
            const double mag2 = impkit::overlap_mag2(sa.cov, sb.cov);
            if (mag2 > kOrthogonalPairTol) {
                const cxd ov = psi.frame.overlap(sa, sb);
                const CMat Delta = psi.frame.pair_covariance(sa.cov, sb.cov);
                E += (w * ov) * (CMat::Identity(d, d) +
                                 cxd(0.0, 1.0) * Delta.conjugate());
            } else {
                for (Eigen::Index p = 0; p < d; ++p)
                    for (Eigen::Index q = p + 1; q < d; ++q) {
                        const cxd el = psi.frame.matrix_element(
                            sa, {static_cast<int>(p) + 1, static_cast<int>(q) + 1}, sb);
                        E(p, q) += w * el;
                        E(q, p) -= w * el;  // c_q c_p = -c_p c_q for p != q
                    }
                // diagonal contribution is w * <phi_a|phi_b> = 0 here
            }
        }
    }
    const CMat Mc = cxd(0.0, -1.0) * (E / n2 - CMat::Identity(d, d));
    Mat M = Mc.real();
    M = 0.5 * (M - Mat(M.transpose()));
    return M;
}

}  // namespace impkit
