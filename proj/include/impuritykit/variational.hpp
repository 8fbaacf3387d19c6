#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include "impuritykit/gaussian.hpp"
#include "impuritykit/model.hpp"
#include "impuritykit/types.hpp"

namespace impkit {

// Hamiltonian split for Gaussian evaluation: quadratic impurity terms are
// absorbed into the bath matrix and constants into a scalar shift, leaving
// only interaction terms of Majorana weight >= 4.
//   H = shift * I + (i/4) sum_pq heff_pq c_p c_q + sum_{|x|>=4} g_x c(x)
struct HamiltonianNormalForm {
    double shift = 0.0;
    Mat h_eff;
    std::vector<ImpurityTerm> interactions;
};

HamiltonianNormalForm normal_form(const ImpurityModel& model);

// <phi|H|phi> for the pure Gaussian state with covariance M:
//   shift + (1/4) tr(h_eff M) + sum_x g_x pf(i M[x]).
double energy_rank1(const Mat& M, const ImpurityModel& model);

// Rank-chi ansatz |psi> = sum_a coeff_a |phi_a> with M_a = R_a Mvac R_a^T.
// All states are phase-anchored in a common frame; the anchors are the
// nonnegative reals 2^{-n/2} det(M0 + M_a)^{1/4}.
struct VariationalAnsatz {
    int chi = 0;
    std::vector<Mat> rotations;
    GaussianFrame frame;
    std::vector<GaussianState> states;
};

// Anchors rotations[] against the vacuum frame. Throws SingularTriple when a
// rotated state is numerically orthogonal to the reference.
VariationalAnsatz make_ansatz(int n, std::vector<Mat> rotations);

// Optimal superposition energy for fixed covariances: the smallest
// generalized eigenvalue of (H, G) on the subspace where G's eigenvalues
// exceed the conditioning floor. Returns the energy and the superposition
// coefficients (normalized to unit state norm). Throws DegenerateGram when
// every Gram eigenvalue is below the floor.
std::pair<double, CVec> objective(const VariationalAnsatz& ansatz,
                                  const ImpurityModel& model,
                                  double gram_floor = 1e-10);

struct WalkConfig {
    long long steps = 20000;
    int restarts = 1;
    double theta0 = 0.3;    // initial proposal angle (radians)
    double epsilon = 0.2;   // theta *= 1 +- epsilon per adaptation window
    double f0 = 0.1;        // target success fraction
    int window = 100;       // steps per adaptation window
    std::uint64_t seed = 0;
    int threads = 1;        // restart-level parallelism
};

struct TraceEntry {
    long long step = 0;
    double energy = 0.0;
    double theta = 0.0;
};

struct MinimizeResult {
    double energy = 0.0;            // best over restarts
    VariationalAnsatz ansatz;       // argmin
    std::vector<TraceEntry> trace;  // accepted steps of the best restart
    int best_restart = 0;
    std::vector<double> restart_energies;
};

// Greedy random walk on rotations: each step applies exp(theta' A) to one
// randomly chosen M_a (A random antisymmetric, unit operator norm, theta'
// uniform on (0, theta]) and keeps the move iff the objective decreases.
// The angle adapts by the windowed success fraction. Deterministic given
// config.seed; restarts use independent derived streams.
MinimizeResult minimize(const ImpurityModel& model, int chi,
                        const WalkConfig& config);

}  // namespace impkit
