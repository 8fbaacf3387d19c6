#pragma once

#include <cstdint>
#include <utility>

#include "impuritykit/types.hpp"

namespace impkit {

class ImpurityModel;

struct LanczosOptions {
    int max_iter = 400;
    double tol = 1e-12;
    std::uint64_t seed = 0x6b17a5d1ull;
};

// All 2^n eigenvalues, ascending (dense; supports up to 12 modes).
Vec exact_spectrum(const ImpurityModel& model);

// Lowest eigenvalue / eigenpair over both fermion-parity sectors via Lanczos
// with full reorthogonalization. The state vector lives on n qubits under
// the standard Majorana-to-qubit mapping (see pauli.hpp).
double exact_ground_energy(const ImpurityModel& model, const LanczosOptions& opts = {});
std::pair<double, CVec> exact_ground_state(const ImpurityModel& model,
                                           const LanczosOptions& opts = {});

// C_jk = <psi| b_j^dag b_k |psi> for the canonical bath modes of model.h
// (energies ascending). Hermitian, 0 <= C <= I.
CMat mode_correlations(const ImpurityModel& model, const CVec& psi);

// Eigenvalues of a correlation matrix, sorted descending.
Vec correlation_spectrum(const CMat& C);

// Necessary ground-state conditions on C, restricted to bath-mode
// combinations with no impurity component (the kernel of the m x n overlap
// block): in exact arithmetic the commutator with E = diag(eps) vanishes
// there and the symmetrized C E block is negative semidefinite.
struct FeasibilityResiduals {
    double commutator;  // ||P (CE - EC) P||_2, P = kernel projector
    double energy;      // max(0, lambda_max(P (CE + EC) P / 2))
};
FeasibilityResiduals feasibility_residuals(const ImpurityModel& model, const CMat& C);

// ||(I - Q_tau) psi|| for each threshold, where Q_tau projects onto total
// bath energy at most tau (bath ground state at zero energy).
Vec bath_tail_weights(const ImpurityModel& model, const CVec& psi, const Vec& taus);

}  // namespace impkit
