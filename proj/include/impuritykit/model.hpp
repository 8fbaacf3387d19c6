#pragma once

#include <string>
#include <vector>

#include "impuritykit/skew.hpp"
#include "impuritykit/types.hpp"

namespace impkit {

// One impurity interaction term g_x c(x), where c(x) is the ordered product
// of the Majorana operators selected by `mask` (1-based indices, strictly
// increasing, all within the impurity support 1..m, even weight). Hermiticity
// of g_x c(x) forces the coefficient to be real when |mask| = 0 mod 4 and
// purely imaginary when |mask| = 2 mod 4; constructors reject violations.
struct ImpurityTerm {
    MajoranaMask mask;
    cxd coeff;
};

// Impurity model on n fermionic modes,
//   H = (e0 + offset) I + (i/4) sum_{p,q} h_pq c_p c_q + sum_x g_x c(x),
// with h real antisymmetric (2n x 2n) and e0 = ||h||_1 / 4 chosen so that the
// quadratic part alone has ground energy `offset` (default 0).
class ImpurityModel {
public:
    ImpurityModel(int n, int m, Mat h, std::vector<ImpurityTerm> terms,
                  double offset = 0.0, bool norm_check = false);

    int n() const { return n_; }
    int m() const { return m_; }
    const Mat& h() const { return h_; }
    const std::vector<ImpurityTerm>& terms() const { return terms_; }
    double offset() const { return offset_; }
    double e0() const { return e0_; }
    bool norm_check() const { return norm_check_; }

    // constant prefactor of the identity, e0 + offset
    double scalar() const { return e0_ + offset_; }

private:
    int n_, m_;
    Mat h_;
    std::vector<ImpurityTerm> terms_;
    double offset_;
    double e0_;
    bool norm_check_;
};

// Single-impurity Anderson benchmark: critical Majorana ring
// i sum_{j=1}^{2n} c_j c_{j+1} (periodic) plus the Hubbard-type interaction
//   U a1^dag a1 a2^dag a2 = (U/4)(-c1c2c3c4 + i c1c2 + i c3c4 + I)
// on the first two sites, in the bare normalization (offset = -e0).
ImpurityModel anderson(int n, double U);

// Raise every bath mode energy below gamma/m up to gamma/m (the canonical
// frame is preserved). Shifts the ground energy by at most gamma.
ImpurityModel truncate(const ImpurityModel& model, double gamma);

// ---------------------------------------------------------------------------
// Decoupling: within each group of bath modes with equal energy, mix the
// canonical modes unitarily so that at most m of them couple to the impurity
// Majoranas c_1..c_m; the rest commute with the impurity entirely.
// ---------------------------------------------------------------------------

struct DecoupledFrame {
    Vec epsilons;            // mode energies, ascending (as in CanonicalModes)
    CMat rows;               // n x 2n: row j holds b~_j as a linear form in c_q
    Mat vacuum_cov;          // covariance of the joint vacuum, original frame
    std::vector<int> group;  // energy-group id per mode
    std::vector<char> coupled;  // 1 where the mode couples to the impurity
    std::vector<int> coupled_indices() const;
};

// Group assignment helpers: by numerical degeneracy, or by exact grid index
// for deformed spectra (eps = integer * spacing).
std::vector<int> group_by_degeneracy(const Vec& eps, double tol = 1e-12);
std::vector<int> group_by_grid(const Vec& eps, double spacing);

DecoupledFrame decouple(const CanonicalModes& modes, int m,
                        const std::vector<int>& groups, double rank_tol = 1e-10);

// ---------------------------------------------------------------------------
// Block-tridiagonalization of the bath: restrict h to the Krylov space of the
// impurity directions span(e_1..e_m). In the resulting orthonormal basis the
// coupled part h' is block-tridiagonal with blocks of size <= m (bandwidth
// < 2m) and the remainder h'' never touches the impurity.
// ---------------------------------------------------------------------------

struct BlockTridiagonal {
    Mat basis;                  // 2n x 2n orthogonal; first L rows span the Krylov space
    int L = 0;                  // Krylov dimension (first m rows are e_1..e_m)
    Mat h_coupled;              // L x L block-tridiagonal
    Mat h_rest;                 // (2n-L) x (2n-L)
    std::vector<int> block_sizes;  // Krylov layer widths, each <= m
    std::vector<int> site_dims;    // qudit dims after m-qubit coarse-graining
};

BlockTridiagonal block_tridiagonalize(const Mat& h, int m, double tol = 1e-10);

// ---------------------------------------------------------------------------
// JSON document format (round-trips bit-exactly):
// {
//   "n": 4, "m": 4,
//   "h": [[p, q, value], ...],              1-based, p < q, antisymmetric completion
//   "impurity": [{"mask": [1,2], "re": 0.0, "im": 0.25}, ...],
//   "offset": 0.0,                          optional, default 0
//   "norm_check": false                     optional, default false
// }
// "m" may be omitted, in which case the smallest even integer covering every
// impurity mask is used.
// ---------------------------------------------------------------------------

ImpurityModel model_from_json(const std::string& text);
std::string model_to_json(const ImpurityModel& model);  // serialized document
ImpurityModel load_model(const std::string& path);
void save_model(const std::string& path, const ImpurityModel& model);

}  // namespace impkit
