#pragma once

#include <utility>
#include <vector>

#include "impuritykit/types.hpp"

namespace impkit {

// ---------------------------------------------------------------------------
// Covariance matrices. A pure fermionic Gaussian state on n modes is encoded
// by the real antisymmetric 2n x 2n matrix
//   M_pq = -(i/2) <phi| c_p c_q - c_q c_p |phi>,   M^2 = -I,
// and its fermionic parity equals pf(M).
// ---------------------------------------------------------------------------

Mat vacuum_covariance(int n);
Mat fock_covariance(const std::vector<int>& occupation);

// R M R^T after verifying that R is orthogonal (throws NotOrthogonal).
Mat rotate(const Mat& M, const Mat& R);

// Covariance after acting with exp(theta/2 c_i c_j) (1-based i != j).
Mat givens_rotate(const Mat& M, int i, int j, double theta);

double parity(const Mat& M);
bool is_pure(const Mat& M, double tol = 1e-8);

// |<phi_1|phi_2>|^2 = sigma 2^{-n} pf(M_1 + M_2); exactly 0 when the
// parities differ.
double overlap_mag2(const Mat& M1, const Mat& M2);

// Pairwise-contraction ("vacuum Wick") expectation of a product of linear
// forms in Majorana operators. Row i of `forms` holds the coefficients w_i
// with L_i = sum_q (w_i)_q c_q, and the value is pf(Gamma) with
//   Gamma_ij = w_i . w_j + i w_i^T M w_j   (i < j),
// i.e. <L_1 ... L_k> in the Gaussian state with covariance M. Odd k gives 0.
// The complex-M overload evaluates the same contraction against an effective
// pair-state covariance (generalized Wick theorem between two states).
cxd vacuum_contraction(const CMat& forms, const Mat& ref_cov);
cxd vacuum_contraction(const CMat& forms, const CMat& ref_cov);

// ---------------------------------------------------------------------------
// Phase-anchored states. Covariance matrices determine states only up to a
// global phase; fixing a reference state phi0 and storing the amplitude
// anchor = <phi0|phi> makes superpositions well defined. A frame bundles the
// reference and provides all phase-coherent operations.
// ---------------------------------------------------------------------------

struct GaussianState {
    Mat cov;
    cxd anchor;  // <phi0|phi> with phi0 the owning frame's reference
};

class GaussianFrame {
public:
    explicit GaussianFrame(Mat reference_cov);
    static GaussianFrame vacuum(int n);

    int modes() const { return n_; }
    const Mat& reference() const { return ref_; }

    // Anchor a covariance matrix with the nonnegative-real phase convention
    // anchor = +|<phi0|phi>|. Throws SingularTriple when the state is
    // (numerically) orthogonal to the reference, since no phase can then be
    // assigned; re-anchor against a different reference instead.
    GaussianState anchor(const Mat& cov) const;

    // Trust an externally computed anchor (e.g. from rebase()).
    GaussianState anchor(Mat cov, cxd amplitude) const;

    // <a|b> via the reference triple product
    //   <phi0|a><a|b><b|phi0> = 4^{-n} pf(M_a + M_b) pf(Delta + M0).
    // Returns 0 for orthogonal pairs. Throws SingularTriple when the triple
    // degenerates (|triple| < 1e-14) while the pair overlap is resolvable.
    cxd overlap(const GaussianState& a, const GaussianState& b) const;

    // <a| c(x) |b> for an even-weight Majorana multi-index x (1-based,
    // strictly increasing). Non-orthogonal pairs use the two-state Wick
    // theorem pf(i Delta[x]^*); orthogonal pairs fall back to the anchored
    // 6n+|x| Pfaffian. Odd-weight masks throw OddWeightMask.
    cxd matrix_element(const GaussianState& a, const MajoranaMask& x,
                       const GaussianState& b) const;

    // Effective pair covariance Delta for a non-orthogonal pair:
    //   Delta = (-2I + i M_a - i M_b)(M_a + M_b)^{-1},
    // with <a|c(x)|b> = <a|b> pf(i Delta[x]^*). Throws SingularTriple when
    // M_a + M_b is numerically singular.
    CMat pair_covariance(const Mat& Ma, const Mat& Mb) const;

private:
    cxd triple(const Mat& M1, const Mat& M2) const;           // ip3 route
    cxd triple_threeblock(const Mat& M1, const Mat& M2) const; // 6n fallback
    cxd anchored_element(const GaussianState& a, const MajoranaMask& x,
                         const GaussianState& b) const;       // 6n+w route

    Mat ref_;
    int n_;
    double ref_parity_;
};

// Re-express `states` (anchored in `frame`) relative to a new reference
// covariance. The new reference receives a nonnegative-real overlap with the
// old one, which fixes its phase; all relative phases are preserved.
std::pair<GaussianFrame, std::vector<GaussianState>> rebase(
    const GaussianFrame& frame, const Mat& new_reference,
    const std::vector<GaussianState>& states);

// ---------------------------------------------------------------------------
// Superpositions of anchored Gaussian states, |psi> = sum_a coeff_a |phi_a>.
// ---------------------------------------------------------------------------

struct Superposition {
    GaussianFrame frame;
    std::vector<cxd> coeff;
    std::vector<GaussianState> states;

    int rank() const { return static_cast<int>(states.size()); }
};

// Gram matrix G(b, a) = <phi_b|phi_a>.
CMat gram(const Superposition& psi);

// <psi|psi> = x^dag G x.
double norm2(const Superposition& psi);

// Covariance of the (normalized) superposition,
//   M_pq = -i <psi|c_p c_q|psi> / <psi|psi>  (p != q),
// real antisymmetric with singular values <= 1. Throws ZeroNorm when
// <psi|psi> <= 1e-10.
Mat covariance_of_superposition(const Superposition& psi);

}  // namespace impkit
