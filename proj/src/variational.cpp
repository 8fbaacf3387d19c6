#include "impuritykit/variational.hpp"

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <optional>
#include <stdexcept>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include <Eigen/Dense>
#include <unsupported/Eigen/MatrixFunctions>

#include "impuritykit/errors.hpp"
#include "impuritykit/rng.hpp"
#include "impuritykit/skew.hpp"

namespace impkit {

namespace {

constexpr double kAnchorRebaseTol = 1e-10;

// <phi|c(x)|phi> for a pure covariance M is pf(i M[x]).
double interaction_energy(const std::vector<ImpurityTerm>& terms, const Mat& M) {
    double e = 0.0;
    for (const ImpurityTerm& t : terms) {
        const Eigen::Index w = static_cast<Eigen::Index>(t.mask.size());
        CMat sub(w, w);
        for (Eigen::Index i = 0; i < w; ++i)
            for (Eigen::Index j = 0; j < w; ++j)
                sub(i, j) = cxd(0.0, M(t.mask[static_cast<std::size_t>(i)] - 1,
                                       t.mask[static_cast<std::size_t>(j)] - 1));
        e += (t.coeff * pfaffian(sub)).real();
    }
    return e;
}

double rank1_energy(const HamiltonianNormalForm& nf, const Mat& M) {
    return nf.shift + 0.25 * (nf.h_eff * M).trace() +
           interaction_energy(nf.interactions, M);
}

// <b| H |a> through the shared pair covariance when the overlap is
// resolvable, falling back to per-term anchored elements otherwise.
cxd pair_element(const GaussianFrame& frame, const HamiltonianNormalForm& nf,
                 const GaussianState& b, const GaussianState& a) {
    const cxd ov = frame.overlap(b, a);
    if (ov != cxd(0.0, 0.0)) {
        try {
            const CMat Delta = frame.pair_covariance(b.cov, a.cov);
            const CMat Dc = Delta.conjugate();
            cxd ratio = nf.shift + 0.25 * (nf.h_eff.cast<cxd>() * Dc).trace();
            for (const ImpurityTerm& t : nf.interactions) {
                const Eigen::Index w = static_cast<Eigen::Index>(t.mask.size());
                CMat sub(w, w);
                for (Eigen::Index i = 0; i < w; ++i)
                    for (Eigen::Index j = 0; j < w; ++j)
                        sub(i, j) = cxd(0.0, 1.0) *
                                    Dc(t.mask[static_cast<std::size_t>(i)] - 1,
                                       t.mask[static_cast<std::size_t>(j)] - 1);
                ratio += t.coeff * pfaffian(sub);
            }
            return ov * ratio;
        } catch (const SingularTriple&) {
            // fall through
        }
    }
    // Orthogonal or near-singular pair: every term individually.
    cxd val = nf.shift * ov;
    const Eigen::Index d = nf.h_eff.rows();
    for (Eigen::Index p = 0; p < d; ++p)
        for (Eigen::Index q = p + 1; q < d; ++q)
            if (nf.h_eff(p, q) != 0.0)
                val += cxd(0.0, 0.5) * nf.h_eff(p, q) *
                       frame.matrix_element(b, {static_cast<int>(p) + 1,
                                                static_cast<int>(q) + 1}, a);
    for (const ImpurityTerm& t : nf.interactions)
        val += t.coeff * frame.matrix_element(b, t.mask, a);
    return val;
}

std::pair<double, CVec> optimal_coefficients(const GaussianFrame& frame,
                                             const std::vector<GaussianState>& states,
                                             const HamiltonianNormalForm& nf,
                                             double gram_floor) {
    const int chi = static_cast<int>(states.size());
    CMat G(chi, chi), H(chi, chi);
    for (int b = 0; b < chi; ++b)
        for (int a = b; a < chi; ++a) {
            const cxd g = frame.overlap(states[static_cast<std::size_t>(b)],
                                        states[static_cast<std::size_t>(a)]);
            G(b, a) = g;
            G(a, b) = std::conj(g);
            const cxd h = pair_element(frame, nf, states[static_cast<std::size_t>(b)],
                                       states[static_cast<std::size_t>(a)]);
            H(b, a) = h;
            H(a, b) = std::conj(h);
        }

    Eigen::SelfAdjointEigenSolver<CMat> gs(G);
    std::vector<int> keep;
    for (int i = 0; i < chi; ++i)
        if (gs.eigenvalues()(i) > gram_floor) keep.push_back(i);
    if (keep.empty())
        throw DegenerateGram("all Gram eigenvalues below the conditioning floor");

    CMat B(chi, static_cast<int>(keep.size()));
    for (std::size_t i = 0; i < keep.size(); ++i)
        B.col(static_cast<Eigen::Index>(i)) =
            gs.eigenvectors().col(keep[i]) / std::sqrt(gs.eigenvalues()(keep[i]));

    Eigen::SelfAdjointEigenSolver<CMat> es(B.adjoint() * H * B);
    CVec coeff = B * es.eigenvectors().col(0);
    return {es.eigenvalues()(0), coeff};
}

Mat random_antisymmetric(Rng& rng, Eigen::Index d) {
    Mat A = Mat::Zero(d, d);
    for (Eigen::Index i = 0; i < d; ++i)
        for (Eigen::Index j = i + 1; j < d; ++j) {
            A(i, j) = rng.normal();
            A(j, i) = -A(i, j);
        }
    return A;
}

Mat reorthogonalized(const Mat& R) {
    Eigen::JacobiSVD<Mat> svd(R, Eigen::ComputeFullU | Eigen::ComputeFullV);
    return svd.matrixU() * svd.matrixV().transpose();
}

struct RestartOutcome {
    double energy = 0.0;
    std::vector<Mat> rotations;
    std::vector<TraceEntry> trace;
};

RestartOutcome run_restart(const ImpurityModel& model,
                           const HamiltonianNormalForm& nf, int chi,
                           const WalkConfig& cfg, int restart) {
    Rng rng(Rng::substream_seed(cfg.seed, static_cast<std::uint64_t>(restart)));
    const Eigen::Index d = 2 * model.n();
    const Mat Mvac = vacuum_covariance(model.n());
    GaussianFrame frame = GaussianFrame::vacuum(model.n());

    auto covariance_of = [&](const Mat& R) {
        Mat M = R * Mvac * R.transpose();
        return Mat(0.5 * (M - M.transpose().eval()));
    };

    // Random starting rotations; redraw the rare starts that are orthogonal
    // to the reference (their phase would be undefined).
    std::vector<Mat> rotations;
    std::vector<GaussianState> states;
    for (int a = 0; a < chi; ++a) {
        for (int attempt = 0;; ++attempt) {
            Mat R = random_antisymmetric(rng, d).exp();
            if (chi == 1) {
                rotations.push_back(std::move(R));
                break;
            }
            try {
                states.push_back(frame.anchor(covariance_of(R)));
                rotations.push_back(std::move(R));
                break;
            } catch (const SingularTriple&) {
                if (attempt > 100) throw;
            }
        }
    }

    double energy;
    if (chi == 1) {
        energy = rank1_energy(nf, covariance_of(rotations[0]));
    } else {
        energy = optimal_coefficients(frame, states, nf, 1e-10).first;
    }

    double theta = cfg.theta0;
    std::vector<TraceEntry> trace;
    trace.push_back({0, energy, theta});
    int window_successes = 0;
    long long accepted = 0;

    for (long long step = 1; step <= cfg.steps; ++step) {
        const int a = chi == 1 ? 0 : static_cast<int>(rng.below(
                                         static_cast<std::uint64_t>(chi)));
        Mat A = random_antisymmetric(rng, d);
        const double nrm = A.jacobiSvd().singularValues()(0);
        const double angle = theta * (1.0 - rng.uniform());  // in (0, theta]
        const Mat Rstep = (angle / nrm * A).exp();
        Mat Rnew = Rstep * rotations[static_cast<std::size_t>(a)];
        Mat Mnew = covariance_of(Rnew);

        bool accept = false;
        if (chi == 1) {
            const double cand = rank1_energy(nf, Mnew);
            if (cand < energy) {
                accept = true;
                energy = cand;
            }
        } else {
            try {
                std::vector<GaussianState> cand_states = states;
                cand_states[static_cast<std::size_t>(a)] = frame.anchor(Mnew);
                const double cand =
                    optimal_coefficients(frame, cand_states, nf, 1e-10).first;
                if (cand < energy) {
                    accept = true;
                    energy = cand;
                    states = std::move(cand_states);
                }
            } catch (const SingularTriple&) {
                // proposal lands on a phase-degenerate configuration: reject
            }
        }

        if (accept) {
            rotations[static_cast<std::size_t>(a)] = std::move(Rnew);
            ++window_successes;
            ++accepted;
            trace.push_back({step, energy, theta});
            if (accepted % 512 == 0) {
                // Counter orthogonality drift from the accumulated products.
                for (int s = 0; s < chi; ++s) {
                    rotations[static_cast<std::size_t>(s)] =
                        reorthogonalized(rotations[static_cast<std::size_t>(s)]);
                    if (chi > 1)
                        states[static_cast<std::size_t>(s)].cov =
                            covariance_of(rotations[static_cast<std::size_t>(s)]);
                }
            }
            if (chi > 1) {
                double min_anchor = std::abs(states[0].anchor);
                for (const GaussianState& s : states)
                    min_anchor = std::min(min_anchor, std::abs(s.anchor));
                if (min_anchor < kAnchorRebaseTol) {
                    // The reference is drifting orthogonal to the ansatz;
                    // re-anchor everything against the current first state.
                    try {
                        auto [nframe, nstates] = rebase(frame, states[0].cov, states);
                        frame = std::move(nframe);
                        states = std::move(nstates);
                    } catch (const SingularTriple&) {
                        // keep the old frame; future proposals may recover
                    }
                }
            }
        }

        if (step % cfg.window == 0) {
            const double frac =
                static_cast<double>(window_successes) / cfg.window;
            theta *= frac >= cfg.f0 ? 1.0 + cfg.epsilon : 1.0 - cfg.epsilon;
            theta = std::clamp(theta, 1e-12, 3.141592653589793);
            window_successes = 0;
        }
    }

    return RestartOutcome{energy, std::move(rotations), std::move(trace)};
}

}  // namespace

HamiltonianNormalForm normal_form(const ImpurityModel& model) {
    HamiltonianNormalForm nf;
    nf.shift = model.scalar();
    nf.h_eff = model.h();
    for (const ImpurityTerm& t : model.terms()) {
        if (t.mask.empty()) {
            nf.shift += t.coeff.real();
        } else if (t.mask.size() == 2) {
            // i*u c_p c_q folds into the quadratic matrix as h_pq += 2u.
            const double u = t.coeff.imag();
            nf.h_eff(t.mask[0] - 1, t.mask[1] - 1) += 2.0 * u;
            nf.h_eff(t.mask[1] - 1, t.mask[0] - 1) -= 2.0 * u;
        } else {
            nf.interactions.push_back(t);
        }
    }
    return nf;
}

double energy_rank1(const Mat& M, const ImpurityModel& model) {
    if (M.rows() != 2 * model.n() || M.cols() != 2 * model.n())
        throw DimensionMismatch("covariance size does not match the model");
    return rank1_energy(normal_form(model), M);
}

VariationalAnsatz make_ansatz(int n, std::vector<Mat> rotations) {
    if (rotations.empty())
        throw std::invalid_argument("ansatz needs at least one rotation");
    GaussianFrame frame = GaussianFrame::vacuum(n);
    const Mat Mvac = vacuum_covariance(n);
    std::vector<GaussianState> states;
    states.reserve(rotations.size());
    for (const Mat& R : rotations) {
        Mat M = rotate(Mvac, R);
        M = 0.5 * (M - M.transpose().eval());
        states.push_back(frame.anchor(M));
    }
    return VariationalAnsatz{static_cast<int>(rotations.size()),
                             std::move(rotations), std::move(frame),
                             std::move(states)};
}

std::pair<double, CVec> objective(const VariationalAnsatz& ansatz,
                                  const ImpurityModel& model,
                                  double gram_floor) {
    if (ansatz.chi < 1) throw std::invalid_argument("rank must be >= 1");
    return optimal_coefficients(ansatz.frame, ansatz.states,
                                normal_form(model), gram_floor);
}

MinimizeResult minimize(const ImpurityModel& model, int chi,
                        const WalkConfig& config) {
    if (chi < 1) throw std::invalid_argument("rank must be >= 1");
    if (config.restarts < 1)
        throw std::invalid_argument("restarts must be >= 1");
    if (config.steps < 0) throw std::invalid_argument("steps must be >= 0");
    if (!(config.theta0 > 0.0))
        throw std::invalid_argument("theta0 must be positive");
    if (!(config.epsilon > 0.0 && config.epsilon < 1.0))
        throw std::invalid_argument("epsilon must lie in (0, 1)");
    if (!(config.f0 > 0.0 && config.f0 < 1.0))
        throw std::invalid_argument("f0 must lie in (0, 1)");
    if (config.window < 1) throw std::invalid_argument("window must be >= 1");

    const HamiltonianNormalForm nf = normal_form(model);
    std::vector<std::optional<RestartOutcome>> outcomes(
        static_cast<std::size_t>(config.restarts));

    const int threads = std::max(1, config.threads);
    if (threads == 1 || config.restarts == 1) {
        for (int r = 0; r < config.restarts; ++r)
            outcomes[static_cast<std::size_t>(r)] =
                run_restart(model, nf, chi, config, r);
    } else {
        std::vector<std::thread> pool;
        for (int t = 0; t < threads; ++t)
            pool.emplace_back([&, t] {
                for (int r = t; r < config.restarts; r += threads)
                    outcomes[static_cast<std::size_t>(r)] =
                        run_restart(model, nf, chi, config, r);
            });
        for (std::thread& th : pool) th.join();
    }

    int best = 0;
    std::vector<double> energies(static_cast<std::size_t>(config.restarts));
    for (int r = 0; r < config.restarts; ++r) {
        energies[static_cast<std::size_t>(r)] =
            outcomes[static_cast<std::size_t>(r)]->energy;
        if (energies[static_cast<std::size_t>(r)] <
            energies[static_cast<std::size_t>(best)])
            best = r;
    }

    RestartOutcome& win = *outcomes[static_cast<std::size_t>(best)];
    VariationalAnsatz ansatz = [&] {
        try {
            return make_ansatz(model.n(), win.rotations);
        } catch (const SingularTriple&) {
            // Final state orthogonal to the vacuum: anchor against the first
            // optimized state instead.
            const Mat Mvac = vacuum_covariance(model.n());
            Mat M0 = win.rotations[0] * Mvac * win.rotations[0].transpose();
            M0 = 0.5 * (M0 - M0.transpose().eval());
            GaussianFrame frame{M0};
            std::vector<GaussianState> states;
            for (const Mat& R : win.rotations) {
                Mat M = R * Mvac * R.transpose();
                M = 0.5 * (M - M.transpose().eval());
                states.push_back(frame.anchor(M));
            }
            return VariationalAnsatz{chi, win.rotations, std::move(frame),
                                     std::move(states)};
        }
    }();

    return MinimizeResult{win.energy, std::move(ansatz), std::move(win.trace),
                          best, std::move(energies)};
}

}  // namespace impkit
