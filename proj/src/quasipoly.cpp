#include "impuritykit/quasipoly.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <string>
#include <tuple>
#include <unordered_map>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "impuritykit/errors.hpp"
#include "impuritykit/gaussian.hpp"

namespace impkit {

namespace {

bool has_interaction(const ImpurityModel& model) {
    for (const ImpurityTerm& t : model.terms())
        if (!t.mask.empty()) return true;
    return false;
}

double scalar_terms_sum(const ImpurityModel& model) {
    double s = 0.0;
    for (const ImpurityTerm& t : model.terms())
        if (t.mask.empty()) s += t.coeff.real();
    return s;
}

// Number of occupation strings over kk modes with weight <= cutoff, saturated
// at `cap + 1` to avoid overflow.
std::size_t count_strings(int kk, int cutoff, std::size_t cap) {
    long double total = 0.0L;
    for (int w = 0; w <= std::min(kk, cutoff); ++w) {
        long double c = 1.0L;
        for (int i = 0; i < w; ++i) c = c * (kk - i) / (i + 1);
        total += c;
        if (total > static_cast<long double>(cap) + 0.5L)
            return cap + 1;
    }
    return static_cast<std::size_t>(total + 0.5L);
}

// Annihilator rows of the canonical modes in the original Majorana frame.
CMat annihilator_rows(const CanonicalModes& modes) {
    const Eigen::Index n = modes.epsilons.size();
    CMat T(n, 2 * n);
    for (Eigen::Index j = 0; j < n; ++j)
        T.row(j) = 0.5 * (modes.rotation.row(2 * j).cast<cxd>() +
                          cxd(0.0, 1.0) * modes.rotation.row(2 * j + 1).cast<cxd>());
    return T;
}

// Pairwise vacuum contractions of the "atoms" entering every restricted
// matrix element: annihilators / creators of the coupled modes and the plain
// impurity Majoranas. atom(i)atom(j) contracts to W*W^T + i*W*M0*W^T.
struct ContractionTable {
    int n_coupled = 0;
    int m = 0;
    CMat table;  // (2K + m) square

    int ann(int pos) const { return pos; }
    int cre(int pos) const { return n_coupled + pos; }
    int maj(int r) const { return 2 * n_coupled + r; }  // r is 0-based
};

ContractionTable build_table(const SubspaceBasis& basis, int m) {
    const DecoupledFrame& frame = basis.frame;
    const Eigen::Index two_n = frame.rows.cols();
    const int kk = static_cast<int>(basis.coupled.size());

    CMat atoms(2 * kk + m, two_n);
    for (int j = 0; j < kk; ++j) {
        atoms.row(j) = frame.rows.row(basis.coupled[static_cast<std::size_t>(j)]);
        atoms.row(kk + j) = atoms.row(j).conjugate();
    }
    for (int r = 0; r < m; ++r) {
        atoms.row(2 * kk + r).setZero();
        atoms.row(2 * kk + r)(r) = cxd(1.0, 0.0);
    }

    ContractionTable ct;
    ct.n_coupled = kk;
    ct.m = m;
    ct.table = atoms * atoms.transpose() +
               cxd(0.0, 1.0) * (atoms * frame.vacuum_cov.cast<cxd>() * atoms.transpose());
    return ct;
}

// <z_a| c(x) |z_b> by Wick pairing in the decoupled frame: bra annihilators
// in descending mode order, the mask Majoranas in ascending order, then ket
// creators in ascending order.
cxd fock_element(const ContractionTable& ct, std::uint64_t za, std::uint64_t zb,
                 const MajoranaMask& mask) {
    const int wa = std::popcount(za);
    const int wb = std::popcount(zb);
    const int w = static_cast<int>(mask.size());
    if ((wa + wb + w) % 2 != 0) return {0.0, 0.0};

    std::vector<int> forms;
    forms.reserve(static_cast<std::size_t>(wa + wb + w));
    for (int pos = ct.n_coupled - 1; pos >= 0; --pos)
        if (za >> pos & 1) forms.push_back(ct.ann(pos));
    for (int r : mask) forms.push_back(ct.maj(r - 1));
    for (int pos = 0; pos < ct.n_coupled; ++pos)
        if (zb >> pos & 1) forms.push_back(ct.cre(pos));

    const int L = static_cast<int>(forms.size());
    if (L == 0) return {1.0, 0.0};
    CMat gamma = CMat::Zero(L, L);
    for (int i = 0; i < L; ++i)
        for (int j = i + 1; j < L; ++j) {
            gamma(i, j) = ct.table(forms[static_cast<std::size_t>(i)],
                                   forms[static_cast<std::size_t>(j)]);
            gamma(j, i) = -gamma(i, j);
        }
    return pfaffian(gamma);
}

CMat impurity_block(const ImpurityModel& base, const SubspaceBasis& basis) {
    const std::size_t dim = basis.strings.size();
    const ContractionTable ct = build_table(basis, base.m());

    CMat block = CMat::Zero(dim, dim);
    for (std::size_t a = 0; a < dim; ++a)
        for (std::size_t b = a; b < dim; ++b) {
            cxd val(0.0, 0.0);
            for (const ImpurityTerm& term : base.terms())
                val += term.coeff *
                       fock_element(ct, basis.strings[a], basis.strings[b], term.mask);
            block(a, b) = val;
            block(b, a) = std::conj(val);
        }
    return block;
}

// <z|H_bath|z'> for a bath sum_{a,b} W_ab b_a^dag b_b over the coupled modes
// (W Hermitian, block-diagonal over energy groups), accumulated into `out`.
void add_bath_block(const SubspaceBasis& basis, const CMat& W, double constant,
                    CMat& out) {
    const std::vector<std::uint64_t>& strings = basis.strings;
    const int kk = static_cast<int>(basis.coupled.size());

    std::unordered_map<std::uint64_t, std::size_t> index;
    index.reserve(strings.size() * 2);
    for (std::size_t i = 0; i < strings.size(); ++i) index[strings[i]] = i;

    for (std::size_t i = 0; i < strings.size(); ++i) {
        const std::uint64_t z = strings[i];
        double diag = constant;
        for (int a = 0; a < kk; ++a)
            if (z >> a & 1) diag += W(a, a).real();
        out(i, i) += diag;

        // Hops b_a^dag b_b with b occupied, a empty; fermionic sign counts
        // occupied modes below each position.
        for (int b = 0; b < kk; ++b) {
            if (!(z >> b & 1)) continue;
            const std::uint64_t zb = z ^ (1ull << b);
            for (int a = 0; a < kk; ++a) {
                if (a == b || (zb >> a & 1) || W(a, b) == cxd(0.0, 0.0)) continue;
                const std::uint64_t znew = zb | (1ull << a);
                auto it = index.find(znew);
                if (it == index.end()) continue;
                int sign = std::popcount(z & ((1ull << b) - 1)) +
                           std::popcount(zb & ((1ull << a) - 1));
                const cxd v = (sign % 2 ? -1.0 : 1.0) * W(a, b);
                out(it->second, i) += v;
            }
        }
    }
}

// Hermitian matrix of the coupled-mode bath quadratic form in the mixed
// frame: W = U diag(energies) U^dag restricted to coupled rows/columns,
// where U is the in-group mixing recovered from the frame rows.
CMat coupled_bath_matrix(const SubspaceBasis& basis, const CanonicalModes& raw_modes,
                         const Vec& energies) {
    const DecoupledFrame& frame = basis.frame;
    const CMat T0 = annihilator_rows(raw_modes);

    // U = 2 T' T0^dag maps original canonical modes to mixed ones.
    const CMat U = 2.0 * frame.rows * T0.adjoint();
    CMat W_full = U * energies.asDiagonal() * U.adjoint();
    W_full = 0.5 * (W_full + W_full.adjoint().eval());

    const int kk = static_cast<int>(basis.coupled.size());
    CMat W(kk, kk);
    for (int a = 0; a < kk; ++a)
        for (int b = 0; b < kk; ++b)
            W(a, b) = W_full(basis.coupled[static_cast<std::size_t>(a)],
                             basis.coupled[static_cast<std::size_t>(b)]);
    return W;
}

}  // namespace

Mat DeformedModel::deformed_h() const {
    CanonicalModes grid_modes = modes;
    grid_modes.epsilons = grid_energies;
    Mat h = grid_modes.reassemble();
    return 0.5 * (h - h.transpose().eval());
}

DeformedModel deform(const ImpurityModel& truncated, double gamma, int s_star) {
    if (!(gamma > 0.0) || gamma > 0.5)
        throw GapOutOfRange("gamma: must lie in (0, 1/2]");
    if (s_star < 1) throw GapOutOfRange("s_star: must be at least 1");

    DeformedModel out{truncated, gamma, s_star, gamma / s_star,
                      canonical_modes(truncated.h()), Vec()};
    const Eigen::Index n = out.modes.epsilons.size();
    out.grid_energies = Vec::Zero(n);
    for (Eigen::Index j = 0; j < n; ++j) {
        const double q = out.modes.epsilons(j) / out.spacing;
        long long x = static_cast<long long>(std::ceil(q));
        // Energies already on the grid stay put despite roundoff.
        if (x >= 1 && q - (x - 1) < 1e-9) x -= 1;
        if (x < 1) x = 1;
        out.grid_energies(j) = static_cast<double>(x) * out.spacing;
    }
    return out;
}

SubspaceBasis build_subspace(const DeformedModel& deformed, std::size_t dim_cap,
                             int cutoff) {
    SubspaceBasis basis;
    basis.cutoff = cutoff < 0 ? deformed.s_star : cutoff;

    CanonicalModes grid_modes = deformed.modes;
    grid_modes.epsilons = deformed.grid_energies;
    const std::vector<int> groups =
        group_by_grid(deformed.grid_energies, deformed.spacing);
    const int m_eff = has_interaction(deformed.base) ? deformed.base.m() : 0;
    basis.frame = decouple(grid_modes, m_eff, groups);
    basis.coupled = basis.frame.coupled_indices();

    const int kk = static_cast<int>(basis.coupled.size());
    if (kk > 62) throw DimensionTooLarge("more than 62 coupled modes");
    const std::size_t dim = count_strings(kk, basis.cutoff, dim_cap);
    if (dim > dim_cap)
        throw BudgetExceeded("subspace dimension " + std::to_string(dim) +
                             " exceeds cap " + std::to_string(dim_cap));

    basis.strings.reserve(dim);
    for (int w = 0; w <= std::min(kk, basis.cutoff); ++w) {
        if (w == 0) {
            basis.strings.push_back(0);
            continue;
        }
        std::uint64_t v = (1ull << w) - 1;
        const std::uint64_t limit = kk < 64 ? (1ull << kk) : ~0ull;
        while (v < limit) {
            basis.strings.push_back(v);
            // Gosper's hack: next integer with the same popcount.
            const std::uint64_t c = v & (~v + 1);
            const std::uint64_t r = v + c;
            v = (((r ^ v) >> 2) / c) | r;
        }
    }
    std::sort(basis.strings.begin(), basis.strings.end());
    return basis;
}

CMat assemble(const DeformedModel& deformed, const SubspaceBasis& basis) {
    CMat H = impurity_block(deformed.base, basis);
    const int kk = static_cast<int>(basis.coupled.size());
    for (std::size_t i = 0; i < basis.strings.size(); ++i) {
        double diag = deformed.base.offset();
        for (int a = 0; a < kk; ++a)
            if (basis.strings[i] >> a & 1)
                diag += deformed.grid_energies(basis.coupled[static_cast<std::size_t>(a)]);
        H(i, i) += diag;
    }
    return H;
}

QuasipolyResult solve_quasipoly(const ImpurityModel& model, double gamma,
                                const QuasipolyOptions& opts) {
    if (!(gamma > 0.0) || gamma > 0.5)
        throw GapOutOfRange("gamma: must lie in (0, 1/2]");

    QuasipolyResult result;
    result.gamma = gamma;

    if (!has_interaction(model)) {
        // Free bath: the ground state is the decoupled-frame vacuum.
        result.energy = model.offset() + scalar_terms_sum(model);
        result.undeformed_energy = result.energy;
        result.s_star = 0;
        result.dim = 1;
        result.spacing = 0.0;
        result.coefficients = CVec::Ones(1);
        return result;
    }

    const ImpurityModel truncated = truncate(model, gamma);

    auto run = [&](int s) {
        DeformedModel d = deform(truncated, gamma, s);
        SubspaceBasis basis = build_subspace(d, opts.dim_cap);
        CMat imp = impurity_block(d.base, basis);

        CMat H = imp;
        const int kk = static_cast<int>(basis.coupled.size());
        for (std::size_t i = 0; i < basis.strings.size(); ++i) {
            double diag = d.base.offset();
            for (int a = 0; a < kk; ++a)
                if (basis.strings[i] >> a & 1)
                    diag += d.grid_energies(basis.coupled[static_cast<std::size_t>(a)]);
            H(i, i) += diag;
        }
        Eigen::SelfAdjointEigenSolver<CMat> es(H);
        return std::tuple<DeformedModel, SubspaceBasis, CMat, double, CVec>(
            std::move(d), std::move(basis), std::move(imp), es.eigenvalues()(0),
            es.eigenvectors().col(0));
    };

    int s = opts.s_star > 0 ? opts.s_star
                            : std::max(2, truncated.m());
    auto [d, basis, imp, energy, ground] = run(s);
    result.history.push_back({s, basis.strings.size(), energy});

    if (opts.s_star == 0) {
        while (true) {
            const std::size_t dim_prev = basis.strings.size();
            const int s_next = 2 * s;
            auto [d2, basis2, imp2, energy2, ground2] = run(s_next);
            result.history.push_back({s_next, basis2.strings.size(), energy2});
            const bool stable = std::abs(energy2 - energy) <= gamma / 4.0;
            const bool saturated = basis2.strings.size() == dim_prev &&
                                   std::abs(energy2 - energy) <= 1e-12;
            s = s_next;
            d = std::move(d2);
            basis = std::move(basis2);
            imp = std::move(imp2);
            energy = energy2;
            ground = std::move(ground2);
            if (stable || saturated) break;
        }
    }

    // Re-evaluate the winning state against the undeformed (truncated) bath.
    const CMat W = coupled_bath_matrix(basis, d.modes, d.modes.epsilons);
    CMat Hu = imp;
    add_bath_block(basis, W, d.base.offset(), Hu);
    result.undeformed_energy = (ground.adjoint() * Hu * ground)(0, 0).real();

    result.energy = energy;
    result.s_star = s;
    result.dim = basis.strings.size();
    result.spacing = d.spacing;
    result.basis = std::move(basis);
    result.coefficients = std::move(ground);
    return result;
}

}  // namespace impkit
