#include "impuritykit/norm_estimation.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <vector>

#include <Eigen/Dense>

#include "impuritykit/errors.hpp"
#include "impuritykit/skew.hpp"

namespace impkit {

namespace {

// 2^n |<theta|psi>|^2 for one draw. The frame reference need not overlap
// theta (permuted pairings flip parity half the time), so the overlaps are
// taken in whichever frame can anchor theta: the original one, or psi
// rebased onto its state with the largest |pf(M_theta + M_a)|.
double sample_weight(const Superposition& psi, const Mat& theta_cov,
                     bool& degenerate) {
    const int chi = psi.rank();
    int best = -1;
    double best_mag = 0.0;
    for (int a = 0; a < chi; ++a) {
        const double mag = overlap_mag2(theta_cov, psi.states[a].cov);
        if (mag > best_mag) {
            best_mag = mag;
            best = a;
        }
    }
    if (best < 0 || best_mag < 1e-28) return 0.0;  // orthogonal to every state

    auto accumulate = [&](const GaussianFrame& frame, const GaussianState& theta,
                          const std::vector<GaussianState>& states) {
        cxd amp(0.0, 0.0);
        for (int a = 0; a < chi; ++a)
            amp += psi.coeff[a] * frame.overlap(theta, states[a]);
        return std::norm(amp);
    };

    try {
        return accumulate(psi.frame, psi.frame.anchor(theta_cov), psi.states);
    } catch (const SingularTriple&) {
        // fall through to a rebased frame
    }
    try {
        auto [frame, states] = rebase(psi.frame, psi.states[best].cov, psi.states);
        return accumulate(frame, frame.anchor(theta_cov), states);
    } catch (const SingularTriple&) {
        degenerate = true;
        return 0.0;
    }
}

}  // namespace

std::size_t default_sample_count(int n, double eps, double p_fail) {
    const double L = std::ceil(2.0 * std::sqrt(static_cast<double>(n)) /
                               (eps * eps * p_fail));
    return static_cast<std::size_t>(L);
}

Mat sample_theta_covariance(int n, Rng& rng) {
    const int d = 2 * n;
    std::vector<int> perm(static_cast<std::size_t>(d));
    for (int i = 0; i < d; ++i) perm[static_cast<std::size_t>(i)] = i;
    for (int i = d - 1; i > 0; --i) {
        const int j = static_cast<int>(rng.below(static_cast<std::uint64_t>(i + 1)));
        std::swap(perm[static_cast<std::size_t>(i)], perm[static_cast<std::size_t>(j)]);
    }
    std::vector<int> occ(static_cast<std::size_t>(n));
    for (int j = 0; j < n; ++j)
        occ[static_cast<std::size_t>(j)] = static_cast<int>(rng.below(2));

    const Mat My = fock_covariance(occ);
    Mat P = Mat::Zero(d, d);
    for (int i = 0; i < d; ++i) P(i, perm[static_cast<std::size_t>(i)]) = 1.0;
    Mat M = P * My * P.transpose();
    return 0.5 * (M - M.transpose().eval());
}

GaussianState sample_theta(int n, Rng& rng, const GaussianFrame& frame) {
    return frame.anchor(sample_theta_covariance(n, rng));
}

NormEstimate estimate_norm2(const Superposition& psi,
                            const EstimatorConfig& config) {
    if (psi.rank() < 1)
        throw std::invalid_argument("superposition must have rank >= 1");
    if (static_cast<int>(psi.coeff.size()) != psi.rank())
        throw DimensionMismatch("coefficient count does not match state count");
    if (!(config.eps > 0.0))
        throw std::invalid_argument("eps must be positive");
    if (!(config.p_fail > 0.0 && config.p_fail < 1.0))
        throw std::invalid_argument("p_fail must lie in (0, 1)");

    const int n = static_cast<int>(psi.frame.reference().rows()) / 2;
    NormEstimate est;
    est.samples = config.samples > 0
                      ? config.samples
                      : default_sample_count(n, config.eps, config.p_fail);

    const double scale = std::ldexp(1.0, n);  // 2^n
    double sum = 0.0;
    double sumsq = 0.0;
    for (std::size_t i = 0; i < est.samples; ++i) {
        Rng stream(Rng::substream_seed(config.seed, i));
        const Mat theta = sample_theta_covariance(n, stream);
        bool degenerate = false;
        const double x = scale * sample_weight(psi, theta, degenerate);
        if (degenerate) ++est.degenerate;
        sum += x;
        sumsq += x * x;
    }
    if (est.samples > 0) est.value = sum / static_cast<double>(est.samples);
    if (est.samples > 1)
        est.variance = std::max(0.0, (sumsq - sum * sum / static_cast<double>(est.samples)) /
                                         static_cast<double>(est.samples - 1));
    return est;
}

}  // namespace impkit
