#include "impuritykit/exact.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <vector>

#include <Eigen/Dense>

#include "impuritykit/errors.hpp"
#include "impuritykit/kernels.hpp"
#include "impuritykit/model.hpp"
#include "impuritykit/pauli.hpp"
#include "impuritykit/rng.hpp"
#include "impuritykit/skew.hpp"

namespace impkit {

namespace {

constexpr int kDenseMaxQubits = 12;
constexpr std::size_t kLanczosMemoryBudget = 1ull << 30;  // bytes of basis storage

CMat dense_matrix(unsigned nq, const std::vector<PauliTerm>& terms) {
    const std::size_t dim = 1ull << nq;
    CMat H = CMat::Zero(dim, dim);
    for (const PauliTerm& t : terms) {
        for (std::size_t i = 0; i < dim; ++i) {
            const cxd v = std::popcount(i & t.zmask) % 2 ? -t.coeff : t.coeff;
            H(i ^ t.xmask, i) += v;
        }
    }
    return H;
}

// Lowest Ritz pair of the restriction of H to the Krylov space of v0.
// Full reorthogonalization; basis storage capped by the memory budget.
double lanczos_lowest(unsigned nq, const std::vector<PauliTerm>& terms, CVec v0,
                      const LanczosOptions& opts, CVec* ground_out) {
    const std::size_t dim = 1ull << nq;
    const kernels::Ops& k = kernels::ops();

    const double nrm0 = std::sqrt(k.nrm2sq(dim, v0.data()));
    if (nrm0 < 1e-300) throw ZeroNorm("Lanczos starting vector is zero");
    v0 /= nrm0;

    std::size_t cap = std::max<std::size_t>(2, kLanczosMemoryBudget / (16 * dim));
    cap = std::min(cap, dim);
    const int max_iter = static_cast<int>(
        std::min(static_cast<std::size_t>(std::max(2, opts.max_iter)), cap));

    std::vector<CVec> basis;
    basis.reserve(max_iter);
    basis.push_back(std::move(v0));
    std::vector<double> alpha, beta;

    double best = 0.0;
    int stable = 0;
    Vec ritz_weights;

    for (int it = 0; it < max_iter; ++it) {
        CVec w = CVec::Zero(dim);
        apply_pauli(nq, terms, basis.back().data(), w.data());
        const double a = k.dot(dim, basis.back().data(), w.data()).real();
        alpha.push_back(a);

        // Orthogonalize against the whole basis, twice for stability.
        for (int pass = 0; pass < 2; ++pass)
            for (const CVec& b : basis) {
                const cxd c = k.dot(dim, b.data(), w.data());
                k.axpy(dim, -c, b.data(), w.data());
            }

        const int kk = static_cast<int>(alpha.size());
        Mat T = Mat::Zero(kk, kk);
        for (int i = 0; i < kk; ++i) {
            T(i, i) = alpha[i];
            if (i + 1 < kk) T(i, i + 1) = T(i + 1, i) = beta[i];
        }
        Eigen::SelfAdjointEigenSolver<Mat> es(T);
        const double lowest = es.eigenvalues()(0);
        ritz_weights = es.eigenvectors().col(0);

        const double b = std::sqrt(k.nrm2sq(dim, w.data()));
        const double resid = b * std::abs(ritz_weights(kk - 1));
        if (it > 0 && std::abs(lowest - best) <= opts.tol * std::max(1.0, std::abs(lowest)) &&
            resid <= std::sqrt(opts.tol) * std::max(1.0, std::abs(lowest)))
            ++stable;
        else
            stable = 0;
        best = lowest;
        if (stable >= 2 || b <= 1e-14) break;
        if (it + 1 >= max_iter) break;

        beta.push_back(b);
        basis.push_back(w / b);
    }

    if (ground_out) {
        CVec y = CVec::Zero(dim);
        for (std::size_t i = 0; i < basis.size() && i < static_cast<std::size_t>(ritz_weights.size()); ++i)
            k.axpy(dim, cxd(ritz_weights(i), 0.0), basis[i].data(), y.data());
        const double nrm = std::sqrt(k.nrm2sq(dim, y.data()));
        *ground_out = y / nrm;
    }
    return best;
}

CVec random_parity_vector(unsigned nq, int parity, Rng& rng) {
    const std::size_t dim = 1ull << nq;
    CVec v = CVec::Zero(dim);
    for (std::size_t i = 0; i < dim; ++i)
        if (std::popcount(i) % 2 == parity)
            v(i) = cxd(rng.normal(), rng.normal());
    return v;
}

std::pair<double, CVec> ground_by_sector(const ImpurityModel& model,
                                         const LanczosOptions& opts, bool want_state) {
    const unsigned nq = static_cast<unsigned>(model.n());
    if (nq > 24) throw DimensionTooLarge("exact solver supports up to 24 modes");
    const std::vector<PauliTerm> terms = to_pauli(model);
    Rng rng(opts.seed);

    double best = 0.0;
    CVec best_state;
    for (int parity = 0; parity < 2; ++parity) {
        CVec state;
        const double e = lanczos_lowest(nq, terms, random_parity_vector(nq, parity, rng),
                                        opts, want_state ? &state : nullptr);
        if (parity == 0 || e < best) {
            best = e;
            best_state = std::move(state);
        }
    }
    return {best, std::move(best_state)};
}

}  // namespace

Vec exact_spectrum(const ImpurityModel& model) {
    if (model.n() > kDenseMaxQubits)
        throw DimensionTooLarge("dense spectrum supports up to 12 modes");
    const CMat H = dense_matrix(static_cast<unsigned>(model.n()), to_pauli(model));
    Eigen::SelfAdjointEigenSolver<CMat> es(H, Eigen::EigenvaluesOnly);
    return es.eigenvalues();
}

double exact_ground_energy(const ImpurityModel& model, const LanczosOptions& opts) {
    return ground_by_sector(model, opts, false).first;
}

std::pair<double, CVec> exact_ground_state(const ImpurityModel& model,
                                           const LanczosOptions& opts) {
    return ground_by_sector(model, opts, true);
}

CMat mode_correlations(const ImpurityModel& model, const CVec& psi) {
    const int n = model.n();
    const std::size_t dim = 1ull << n;
    if (psi.size() != static_cast<Eigen::Index>(dim))
        throw DimensionMismatch("state vector has wrong dimension");
    const CanonicalModes modes = canonical_modes(model.h());
    const kernels::Ops& k = kernels::ops();

    // c_q |psi> for every Majorana, then b_j |psi> = sum_q T_jq c_q |psi>.
    std::vector<CVec> cpsi(2 * n, CVec::Zero(dim));
    for (int q = 0; q < 2 * n; ++q) {
        const PauliTerm t = majorana_monomial(n, {q + 1});
        k.pauli_accum(n, t.xmask, t.zmask, t.coeff, psi.data(), cpsi[q].data());
    }
    std::vector<CVec> bpsi(n, CVec::Zero(dim));
    for (int j = 0; j < n; ++j)
        for (int q = 0; q < 2 * n; ++q) {
            const cxd T_jq = 0.5 * cxd(modes.rotation(2 * j, q), modes.rotation(2 * j + 1, q));
            if (T_jq != cxd(0.0, 0.0))
                k.axpy(dim, T_jq, cpsi[q].data(), bpsi[j].data());
        }

    CMat C(n, n);
    for (int j = 0; j < n; ++j)
        for (int l = 0; l < n; ++l)
            C(j, l) = k.dot(dim, bpsi[j].data(), bpsi[l].data());
    C = 0.5 * (C + C.adjoint().eval());
    return C;
}

Vec correlation_spectrum(const CMat& C) {
    Eigen::SelfAdjointEigenSolver<CMat> es(C, Eigen::EigenvaluesOnly);
    return es.eigenvalues().reverse();
}

FeasibilityResiduals feasibility_residuals(const ImpurityModel& model, const CMat& C) {
    const int n = model.n();
    const int m = model.m();
    if (C.rows() != n || C.cols() != n)
        throw DimensionMismatch("correlation matrix has wrong dimension");
    const CanonicalModes modes = canonical_modes(model.h());

    // Overlap of each canonical mode with the impurity Majoranas.
    CMat B(m, n);
    for (int j = 0; j < n; ++j)
        for (int r = 0; r < m; ++r)
            B(r, j) = 0.5 * cxd(modes.rotation(2 * j, r), modes.rotation(2 * j + 1, r));

    CMat V0;
    if (m == 0) {
        V0 = CMat::Identity(n, n);
    } else {
        Eigen::JacobiSVD<CMat> svd(B, Eigen::ComputeFullV);
        const double smax = svd.singularValues().size() > 0 ? svd.singularValues()(0) : 0.0;
        int rank = 0;
        for (Eigen::Index i = 0; i < svd.singularValues().size(); ++i)
            if (svd.singularValues()(i) > 1e-10 * std::max(1.0, smax)) ++rank;
        V0 = svd.matrixV().rightCols(n - rank);  // kernel basis
    }

    const Mat E = modes.epsilons.asDiagonal();
    const CMat CE = C * E;
    const CMat comm = V0.adjoint() * (CE - CE.adjoint()) * V0;
    const CMat sym = V0.adjoint() * (CE + CE.adjoint()) * V0 * 0.5;

    FeasibilityResiduals out;
    out.commutator = comm.size() > 0 ? comm.jacobiSvd().singularValues()(0) : 0.0;
    if (sym.size() > 0) {
        Eigen::SelfAdjointEigenSolver<CMat> es(sym, Eigen::EigenvaluesOnly);
        out.energy = std::max(0.0, es.eigenvalues().maxCoeff());
    } else {
        out.energy = 0.0;
    }
    return out;
}

Vec bath_tail_weights(const ImpurityModel& model, const CVec& psi, const Vec& taus) {
    const int n = model.n();
    if (n > kDenseMaxQubits)
        throw DimensionTooLarge("bath tail computation supports up to 12 modes");
    const std::size_t dim = 1ull << n;
    if (psi.size() != static_cast<Eigen::Index>(dim))
        throw DimensionMismatch("state vector has wrong dimension");

    // Bath Hamiltonian sum_j eps_j b_j^dag b_j with its ground state at zero:
    // this is exactly the quadratic model with offset 0.
    const ImpurityModel bath(model.n(), 0, model.h(), {});
    const CMat HB = dense_matrix(static_cast<unsigned>(n), to_pauli(bath));
    Eigen::SelfAdjointEigenSolver<CMat> es(HB);
    const Vec levels = es.eigenvalues();
    const CVec amps = es.eigenvectors().adjoint() * psi;

    Vec out(taus.size());
    for (Eigen::Index t = 0; t < taus.size(); ++t) {
        double tail = 0.0;
        for (Eigen::Index kk = 0; kk < levels.size(); ++kk)
            if (levels(kk) > taus(t)) tail += std::norm(amps(kk));
        out(t) = std::sqrt(std::max(0.0, tail));
    }
    return out;
}

}  // namespace impkit
