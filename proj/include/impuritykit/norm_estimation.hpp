#pragma once

#include <cstddef>
#include <cstdint>

#include "impuritykit/gaussian.hpp"
#include "impuritykit/rng.hpp"
#include "impuritykit/types.hpp"

namespace impkit {

// Monte Carlo estimate of <psi|psi> for a rank-chi superposition in O(chi)
// inner products per sample. Each sample draws a random pure Gaussian state
// theta (a uniformly permuted Majorana pairing with uniform occupations) and
// evaluates X = 2^n |<theta|psi>|^2, whose mean is the squared norm and whose
// variance is at most 2 sqrt(n) ||psi||^4.
struct EstimatorConfig {
    double eps = 0.1;       // relative precision
    double p_fail = 0.1;    // failure probability
    std::size_t samples = 0;  // 0 = default ceil(2 sqrt(n) / (eps^2 p_fail))
    std::uint64_t seed = 0;
};

std::size_t default_sample_count(int n, double eps, double p_fail);

// Covariance P M_y P^T of |theta> = U_P |y>: P a uniformly random
// permutation of the 2n Majorana indices, y uniform occupations.
Mat sample_theta_covariance(int n, Rng& rng);

// Anchored sample in a caller-supplied frame. Throws SingularTriple when the
// draw is orthogonal to the frame reference (no phase can be assigned).
GaussianState sample_theta(int n, Rng& rng, const GaussianFrame& frame);

struct NormEstimate {
    double value = 0.0;        // xi: mean of X over the samples
    double variance = 0.0;     // unbiased sample variance of X
    std::size_t samples = 0;
    std::size_t degenerate = 0;  // draws abandoned after re-anchoring failed
};

// With probability >= 1 - p_fail (over the sampler seed),
//   (1 - eps) ||psi||^2 <= value <= (1 + eps) ||psi||^2.
// Samples use independent derived streams, so the result is independent of
// evaluation order. A draw orthogonal to the frame reference is re-anchored
// against the best-overlapping state of psi before its overlaps are taken.
NormEstimate estimate_norm2(const Superposition& psi,
                            const EstimatorConfig& config);

}  // namespace impkit
