#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "impuritykit/gaussian.hpp"
#include "impuritykit/model.hpp"
#include "impuritykit/types.hpp"

namespace impkit {

// ---------------------------------------------------------------------------
// Certified lower bounds on the ground energy. A degree-3 operator basis
// C_1..C_N is built from the impurity Majoranas and a rotated Majorana frame;
// the bound is the dual value y0 of the moment-matrix relaxation
//     maximize y0  s.t.  y0 I1 + sum_a y_a K^a <= H1,
// where K^a span the linear dependencies of the C_p^dag C_q and a valid dual
// point certifies  e_ground >= y0.
// ---------------------------------------------------------------------------

// Canonical rotation of a state's covariance: spectrum holds the singular
// values (ascending, in [0,1]); k counts those below 1 - eps. Modes past k
// look Gaussian; the rotated letters used by the operator basis are
//   e_j = sum_q rotation(j, q) c_q.
struct Localization {
    Mat rotation;
    int k = 0;
    Vec spectrum;
};

Localization localize(const Superposition& psi, double eps = 1e-4);
Localization localize(const Mat& covariance, double eps = 1e-4);

// Operator expanded over monomials in the rotated letters; bit j of `mask`
// selects e_{j+1}, factors ordered ascending.
struct MonomialTerm {
    std::uint64_t mask = 0;
    cxd coeff;
};

// The N = 2n + binom(m+2k, 3) basis operators: all rotated letters e_j,
// then every ordered triple of the first m+2k letters in the combined list
// (c_1..c_m, e_1..e_2k). `factors` uses 1..m for impurity Majoranas and
// m+j for rotated letter j; `ops` holds the monomial expansions.
struct OperatorBasis {
    int n = 0;
    int m = 0;
    int k = 0;
    Mat rotation;
    std::vector<std::vector<int>> factors;
    std::vector<std::vector<MonomialTerm>> ops;

    int size() const { return static_cast<int>(factors.size()); }
};

struct SdpOptions {
    double kernel_tol = 1e-8;      // Gram-eigenvalue cutoff for dependencies
    double residual_tol = 1e-10;   // representation residual hard limit
    std::size_t memory_budget = 1ull << 30;  // bytes for the dependency scan
};

struct SdpProgram {
    OperatorBasis basis;
    CMat H1;                   // sum_pq H1_pq C_p^dag C_q == H
    CMat I1;                   // identity representation (unit at the first single)
    std::vector<CMat> kernel;  // Hermitian K^a with sum K_pq C_p^dag C_q == 0
};

// Expands the Hamiltonian in the operator basis and computes the dependency
// space. Throws RepresentationFailure when an interaction cannot be encoded
// (Majorana weight >= 8) or the expansion check fails; BudgetExceeded when
// the monomial scan would exceed the memory budget; NotOrthogonal /
// DimensionMismatch for a bad rotation.
SdpProgram build_program(const ImpurityModel& model, const Mat& rotation,
                         int k, const SdpOptions& opts = {});

struct DualCertificate {
    double y0 = 0.0;
    Vec y;
};

struct CertificateCheck {
    bool valid = false;
    double margin = 0.0;  // smallest eigenvalue of H1 - y0 I1 - sum y_a K^a
};

// A certificate with margin >= -tol is accepted; a valid certificate at
// tol = 0 proves e_ground >= y0.
CertificateCheck verify_certificate(const SdpProgram& program,
                                    const DualCertificate& cert, double tol);

// Always-feasible starting point: the dependency direction
// sum_p (E_pp - E_11) scaled by the most negative eigenvalue of H1, with y0
// then maximized by bisection for that fixed direction.
DualCertificate baseline_certificate(const SdpProgram& program);

void save_certificate(const std::string& path, const DualCertificate& cert);
DualCertificate load_certificate(const std::string& path);

// ---------------------------------------------------------------------------
// Sparse SDPA export of the dual program over x = (y0, y):
//   minimize -y0  s.t.  sum_i x_i F_i - F0 >= 0,
// with F0 = -H1, F1 = -I1, F_{1+a} = -K^a, all complex Hermitian matrices
// embedded as real symmetric [[Re, -Im], [Im, Re]] blocks of size 2N.
// ---------------------------------------------------------------------------

struct SdpaData {
    int nvars = 0;
    int dim = 0;                  // single block of this size
    std::vector<double> cost;     // length nvars
    // mats[0] = F0, mats[i] = F_i; upper-triangle entries (i <= j), 1-based.
    std::vector<std::map<std::pair<int, int>, double>> mats;
};

SdpaData sdpa_data(const SdpProgram& program);
void export_sdpa(const SdpProgram& program, const std::string& path);
SdpaData parse_sdpa(const std::string& path);

}  // namespace impkit
