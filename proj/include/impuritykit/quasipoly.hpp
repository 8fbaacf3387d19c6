#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "impuritykit/model.hpp"
#include "impuritykit/types.hpp"

namespace impkit {

// Bath spectrum rounded up onto the uniform grid {x * gamma/s_star : x >= 1}.
// The canonical frame is shared with the input model; only energies move, by
// at most gamma/s_star each.
struct DeformedModel {
    ImpurityModel base;    // pre-truncated model (energies >= gamma/m)
    double gamma = 0.0;
    int s_star = 0;
    double spacing = 0.0;  // gamma / s_star
    CanonicalModes modes;  // canonical frame of base.h, original energies
    Vec grid_energies;     // deformed energies, ascending

    Mat deformed_h() const;  // bath matrix rebuilt with the grid energies
};

DeformedModel deform(const ImpurityModel& truncated, double gamma, int s_star);

// Fock basis of the coupled deformed modes: all occupation strings with at
// most `cutoff` excitations, decoupled modes empty. Strings are bitmasks over
// `coupled` (bit i = mode coupled[i]), listed in increasing integer order.
struct SubspaceBasis {
    DecoupledFrame frame;
    std::vector<int> coupled;
    std::vector<std::uint64_t> strings;
    int cutoff = 0;
};

// cutoff < 0 means "use deformed.s_star". Throws BudgetExceeded when the
// basis would exceed dim_cap.
SubspaceBasis build_subspace(const DeformedModel& deformed,
                             std::size_t dim_cap = 20000, int cutoff = -1);

// Restriction of the deformed Hamiltonian to the subspace: diagonal bath part
// offset + sum_j eps'_j z_j plus the impurity block evaluated by Wick
// contractions in the decoupled frame. Hermitian.
CMat assemble(const DeformedModel& deformed, const SubspaceBasis& basis);

struct QuasipolyOptions {
    std::size_t dim_cap = 20000;
    int s_star = 0;  // 0 = adaptive: start at max(m, 2), double until stable
};

struct QuasipolyStep {
    int s_star = 0;
    std::size_t dim = 0;
    double energy = 0.0;
};

struct QuasipolyResult {
    double energy = 0.0;             // smallest restricted eigenvalue
    double undeformed_energy = 0.0;  // state re-evaluated on the undeformed bath
    double gamma = 0.0;
    int s_star = 0;
    std::size_t dim = 0;
    double spacing = 0.0;
    SubspaceBasis basis;
    CVec coefficients;  // ground eigenvector over basis.strings
    std::vector<QuasipolyStep> history;
};

// Full pipeline: truncate -> deform -> decouple -> restricted diagonalization,
// with the excitation cutoff chosen adaptively unless opts.s_star > 0.
QuasipolyResult solve_quasipoly(const ImpurityModel& model, double gamma,
                                const QuasipolyOptions& opts = {});

}  // namespace impkit
