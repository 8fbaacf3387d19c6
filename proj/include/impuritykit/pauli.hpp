#pragma once

#include <cstdint>
#include <vector>

#include "impuritykit/types.hpp"

namespace impkit {

class ImpurityModel;

// One Pauli string coeff * X^xmask Z^zmask (X factors applied after Z, bit q
// of a mask selects qubit q). Y_q is represented as i X_q Z_q.
struct PauliTerm {
    std::uint64_t xmask = 0;
    std::uint64_t zmask = 0;
    cxd coeff;
};

// Majorana-to-qubit mapping on n qubits:
//   c_{2a-1} = Z_1 ... Z_{a-1} X_a,   c_{2a} = Z_1 ... Z_{a-1} Y_a.
// Returns the Pauli expansion of an ordered Majorana monomial (1-based,
// strictly increasing indices) or of a full model Hamiltonian. Terms with
// identical masks are merged; exact zeros are dropped.
PauliTerm majorana_monomial(int n, const MajoranaMask& mask);
std::vector<PauliTerm> to_pauli(const ImpurityModel& model);

// out += sum_t coeff_t X^x Z^z |in>, dense state vectors of 2^nq amplitudes.
void apply_pauli(unsigned nq, const std::vector<PauliTerm>& terms,
                 const cxd* in, cxd* out);

}  // namespace impkit
