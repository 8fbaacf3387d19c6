#pragma once

#include "impuritykit/types.hpp"

namespace impkit {

// Pfaffian of a complex antisymmetric matrix, computed by Parlett-Reid-style
// skew-symmetric elimination with greedy partial pivoting (largest column
// entry below the diagonal). Conventions:
//   * empty matrix -> 1, odd dimension -> 0
//   * throws NotAntisymmetric when max|A + A^T| exceeds `tol` relative to
//     max(1, max|A|)
cxd pfaffian(const CMat& A, double tol = kAntisymmetryTol);
double pfaffian(const Mat& A, double tol = kAntisymmetryTol);

// Normal form of a real antisymmetric matrix h (size 2n x 2n):
//   R h R^T = direct sum of blocks [[0, eps_j], [-eps_j, 0]]
// with eps sorted ascending and R orthogonal. Entries of eps below
// `zero_tol` are flushed to exactly zero.
struct CanonicalModes {
    Vec epsilons;  // n nonnegative mode energies, ascending
    Mat rotation;  // 2n x 2n orthogonal R

    // h reassembled from the normal form (round-trip check helper)
    Mat reassemble() const;
};

CanonicalModes canonical_modes(const Mat& h, double zero_tol = kZeroEnergyTol);

// Smallest nonzero mode energy of h; +infinity when all modes are zero
// within `zero_tol`.
double spectral_gap(const Mat& h, double zero_tol = kZeroEnergyTol);

// Trace norm of an antisymmetric h equals 2 * sum_j eps_j.
double trace_norm(const Mat& h);

}  // namespace impkit
