#include "impuritykit/sdp.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include <Eigen/Dense>
#include <json.hpp>

#include "impuritykit/errors.hpp"
#include "impuritykit/skew.hpp"
#include "impuritykit/variational.hpp"

namespace impkit {

namespace {

using MonomialMap = std::unordered_map<std::uint64_t, cxd>;

// e^{m1} * e^{m2} = sign * e^{m1 xor m2}: insert the letters of m2 one by
// one (ascending); each insertion anticommutes past the current letters
// above it.
std::pair<std::uint64_t, int> mono_mul(std::uint64_t m1, std::uint64_t m2) {
    std::uint64_t mu = m1;
    int sgn = 1;
    while (m2) {
        const int j = std::countr_zero(m2);
        const std::uint64_t bit = 1ull << j;
        m2 &= m2 - 1;
        const std::uint64_t upper = ~((bit << 1) - 1);
        if (std::popcount(mu & upper) & 1) sgn = -sgn;
        mu ^= bit;
    }
    return {mu, sgn};
}

// X * (sum_j w_j e_{j+1})
MonomialMap mul_letter(const MonomialMap& X, const Vec& w) {
    MonomialMap out;
    out.reserve(X.size() * static_cast<std::size_t>(w.size()));
    for (const auto& [mask, alpha] : X) {
        for (Eigen::Index j = 0; j < w.size(); ++j) {
            if (w(j) == 0.0) continue;
            const std::uint64_t bit = 1ull << j;
            const std::uint64_t upper = ~((bit << 1) - 1);
            const double sgn = std::popcount(mask & upper) & 1 ? -1.0 : 1.0;
            out[mask ^ bit] += sgn * w(j) * alpha;
        }
    }
    return out;
}

MonomialMap multiply(const MonomialMap& X, const MonomialMap& Y) {
    MonomialMap out;
    out.reserve(X.size() * Y.size());
    for (const auto& [mx, ax] : X)
        for (const auto& [my, ay] : Y) {
            const auto [mu, sgn] = mono_mul(mx, my);
            out[mu] += static_cast<double>(sgn) * ax * ay;
        }
    return out;
}

// (e^{y})^dag reverses the letters: sign (-1)^{w(w-1)/2}.
MonomialMap adjoint(const MonomialMap& X) {
    MonomialMap out;
    out.reserve(X.size());
    for (const auto& [mask, alpha] : X) {
        const int w = std::popcount(mask);
        const double sgn = (w * (w - 1) / 2) % 2 ? -1.0 : 1.0;
        out[mask] = sgn * std::conj(alpha);
    }
    return out;
}

std::vector<MonomialTerm> to_terms(const MonomialMap& X) {
    std::vector<MonomialTerm> terms;
    terms.reserve(X.size());
    for (const auto& [mask, alpha] : X)
        if (alpha != cxd(0.0, 0.0)) terms.push_back({mask, alpha});
    std::sort(terms.begin(), terms.end(),
              [](const MonomialTerm& a, const MonomialTerm& b) {
                  return a.mask < b.mask;
              });
    return terms;
}

// Coefficient vector of letter `t` (1..m impurity, m+j rotated) over the e's.
Vec letter_vector(int t, int m, const Mat& S) {
    const Eigen::Index d = S.rows();
    if (t <= m) return S.col(t - 1);
    Vec w = Vec::Zero(d);
    w(t - m - 1) = 1.0;
    return w;
}

struct PackedTriple {
    int a, b, c;
};

std::uint64_t pack3(int a, int b, int c) {
    return (static_cast<std::uint64_t>(a) << 40) |
           (static_cast<std::uint64_t>(b) << 20) | static_cast<std::uint64_t>(c);
}

double matrix_scale(const CMat& A) {
    return std::max(1.0, A.cwiseAbs().maxCoeff());
}

double lambda_min(const CMat& A) {
    Eigen::SelfAdjointEigenSolver<CMat> es(A, Eigen::EigenvaluesOnly);
    return es.eigenvalues()(0);
}

}  // namespace

Localization localize(const Mat& covariance, double eps) {
    const CanonicalModes cm = canonical_modes(covariance);
    int k = 0;
    for (Eigen::Index j = 0; j < cm.epsilons.size(); ++j)
        if (cm.epsilons(j) < 1.0 - eps) ++k;
    return Localization{cm.rotation, k, cm.epsilons};
}

Localization localize(const Superposition& psi, double eps) {
    return localize(covariance_of_superposition(psi), eps);
}

SdpProgram build_program(const ImpurityModel& model, const Mat& rotation,
                         int k, const SdpOptions& opts) {
    const int n = model.n();
    const int m = model.m();
    const Eigen::Index d = 2 * n;
    if (n > 31) throw DimensionTooLarge("monomial masks support at most 31 modes");
    if (rotation.rows() != d || rotation.cols() != d)
        throw DimensionMismatch("rotation size does not match the model");
    if ((rotation * rotation.transpose() - Mat::Identity(d, d))
            .cwiseAbs()
            .maxCoeff() > kOrthogonalityTol)
        throw NotOrthogonal("rotation is not orthogonal");
    if (k < 0 || 2 * k > d)
        throw DimensionMismatch("localization size k must lie in [0, n]");

    const HamiltonianNormalForm nf = normal_form(model);
    for (const ImpurityTerm& t : nf.interactions)
        if (t.mask.size() > 6)
            throw RepresentationFailure(
                "interactions of Majorana weight >= 8 are not representable by "
                "degree-3 operator products");

    SdpProgram prog;
    OperatorBasis& basis = prog.basis;
    basis.n = n;
    basis.m = m;
    basis.k = k;
    basis.rotation = rotation;

    // Singles e_1..e_2n, then triples of the first m+2k letters.
    std::vector<MonomialMap> ops;
    for (int j = 0; j < d; ++j) {
        basis.factors.push_back({m + j + 1});
        ops.push_back({{1ull << j, cxd(1.0, 0.0)}});
    }
    std::unordered_map<std::uint64_t, int> triple_index;
    const int letters = m + 2 * k;
    for (int a = 1; a <= letters; ++a)
        for (int b = a + 1; b <= letters; ++b)
            for (int c = b + 1; c <= letters; ++c) {
                triple_index[pack3(a, b, c)] = static_cast<int>(ops.size());
                basis.factors.push_back({a, b, c});
                MonomialMap X{{0ull, cxd(1.0, 0.0)}};
                X = mul_letter(X, letter_vector(a, m, rotation));
                X = mul_letter(X, letter_vector(b, m, rotation));
                X = mul_letter(X, letter_vector(c, m, rotation));
                ops.push_back(std::move(X));
            }
    const int N = static_cast<int>(ops.size());
    for (const MonomialMap& X : ops) basis.ops.push_back(to_terms(X));

    // Monomial space: even degrees <= 6 over 2n letters.
    std::size_t Mdim = 0;
    for (int w = 0; w <= 6 && w <= d; w += 2) {
        std::size_t c = 1;
        for (int i = 0; i < w; ++i)
            c = c * static_cast<std::size_t>(d - i) / static_cast<std::size_t>(i + 1);
        Mdim += c;
    }
    const std::size_t ncols = static_cast<std::size_t>(N) * N;
    const std::size_t bytes = (2 * Mdim * ncols + ncols * ncols) * sizeof(double);
    if (bytes > opts.memory_budget)
        throw BudgetExceeded("dependency scan needs " + std::to_string(bytes) +
                             " bytes, budget is " +
                             std::to_string(opts.memory_budget));
    std::vector<std::uint64_t> monomials;
    monomials.reserve(Mdim);
    for (int w = 0; w <= 6 && w <= d; w += 2) {
        if (w == 0) {
            monomials.push_back(0);
            continue;
        }
        std::uint64_t y = (1ull << w) - 1;
        const std::uint64_t lim = 1ull << d;
        while (y < lim) {
            monomials.push_back(y);
            const std::uint64_t c = y & (~y + 1);
            const std::uint64_t r = y + c;
            y = (((r ^ y) >> 2) / c) | r;
        }
    }
    std::sort(monomials.begin(), monomials.end());
    std::unordered_map<std::uint64_t, std::size_t> mono_row;
    mono_row.reserve(Mdim * 2);
    for (std::size_t i = 0; i < Mdim; ++i) mono_row[monomials[i]] = i;

    // ---- H1: direct construction ------------------------------------------
    CMat H1 = CMat::Zero(N, N);
    const Mat At = rotation * nf.h_eff * rotation.transpose();
    for (Eigen::Index j = 0; j < d; ++j) {
        for (Eigen::Index l = 0; l < d; ++l)
            if (j != l) H1(j, l) = cxd(0.0, 0.25) * At(j, l);
        H1(j, j) += nf.shift / static_cast<double>(d);
    }
    for (const ImpurityTerm& t : nf.interactions) {
        if (t.mask.size() == 4) {
            const int a = t.mask[0], b = t.mask[1], c = t.mask[2], w4 = t.mask[3];
            const int row = triple_index.at(pack3(a, b, c));
            const double beta = -t.coeff.real() / 2.0;
            for (Eigen::Index p = 0; p < d; ++p) {
                const double v = beta * rotation(p, w4 - 1);
                H1(row, p) += v;
                H1(p, row) += v;
            }
        } else {  // weight 6
            const int row = triple_index.at(pack3(t.mask[0], t.mask[1], t.mask[2]));
            const int col = triple_index.at(pack3(t.mask[3], t.mask[4], t.mask[5]));
            const double beta_im = -t.coeff.imag() / 2.0;
            H1(row, col) += cxd(0.0, beta_im);
            H1(col, row) += cxd(0.0, -beta_im);
        }
    }

    // ---- verify the representation against the monomial expansion of H ----
    MonomialMap target;
    target[0] = nf.shift;
    for (Eigen::Index j = 0; j < d; ++j)
        for (Eigen::Index l = j + 1; l < d; ++l)
            if (At(j, l) != 0.0)
                target[(1ull << j) | (1ull << l)] += cxd(0.0, 0.5 * At(j, l));
    for (const ImpurityTerm& t : nf.interactions) {
        MonomialMap X{{0ull, t.coeff}};
        for (int idx : t.mask) X = mul_letter(X, rotation.col(idx - 1));
        for (const auto& [mask, alpha] : X) target[mask] += alpha;
    }

    std::vector<MonomialMap> adjoints;
    adjoints.reserve(ops.size());
    for (const MonomialMap& X : ops) adjoints.push_back(adjoint(X));

    MonomialMap realized;
    for (int p = 0; p < N; ++p)
        for (int q = 0; q < N; ++q) {
            const cxd w = H1(p, q);
            if (w == cxd(0.0, 0.0)) continue;
            const MonomialMap prod =
                multiply(adjoints[static_cast<std::size_t>(p)],
                         ops[static_cast<std::size_t>(q)]);
            for (const auto& [mask, alpha] : prod) realized[mask] += w * alpha;
        }
    double resid = 0.0;
    double scale = 1.0;
    for (const auto& [mask, alpha] : target) scale = std::max(scale, std::abs(alpha));
    for (const auto& [mask, alpha] : realized) {
        auto it = target.find(mask);
        const cxd want = it == target.end() ? cxd(0.0, 0.0) : it->second;
        resid = std::max(resid, std::abs(alpha - want));
    }
    for (const auto& [mask, alpha] : target) {
        auto it = realized.find(mask);
        const cxd got = it == realized.end() ? cxd(0.0, 0.0) : it->second;
        resid = std::max(resid, std::abs(alpha - got));
    }
    if (!(resid <= opts.residual_tol * scale))
        throw RepresentationFailure(
            "operator-basis expansion of H has residual " + std::to_string(resid));

    prog.H1 = std::move(H1);
    prog.I1 = CMat::Zero(N, N);
    prog.I1(0, 0) = 1.0;

    // ---- dependency space --------------------------------------------------
    // Columns: orthonormal Hermitian basis E_pp, (E_pq+E_qp)/sqrt2,
    // i(E_pq-E_qp)/sqrt2; rows: Re/Im of each monomial coefficient.
    Mat A = Mat::Zero(static_cast<Eigen::Index>(2 * Mdim),
                      static_cast<Eigen::Index>(ncols));
    struct ColDesc {
        int p, q;   // p == q: diagonal; p < q: pair
        int kind;   // 0 diag, 1 symmetric, 2 antisymmetric
    };
    std::vector<ColDesc> cols;
    cols.reserve(ncols);
    const double isq2 = 1.0 / std::sqrt(2.0);

    auto emit = [&](Eigen::Index col, const MonomialMap& X, cxd weight) {
        for (const auto& [mask, alpha] : X) {
            const cxd v = weight * alpha;
            const std::size_t r = mono_row.at(mask);
            A(static_cast<Eigen::Index>(2 * r), col) += v.real();
            A(static_cast<Eigen::Index>(2 * r + 1), col) += v.imag();
        }
    };

    for (int p = 0; p < N; ++p) {
        const Eigen::Index col = static_cast<Eigen::Index>(cols.size());
        cols.push_back({p, p, 0});
        emit(col, multiply(adjoints[static_cast<std::size_t>(p)],
                           ops[static_cast<std::size_t>(p)]),
             cxd(1.0, 0.0));
    }
    for (int p = 0; p < N; ++p)
        for (int q = p + 1; q < N; ++q) {
            const MonomialMap pq = multiply(adjoints[static_cast<std::size_t>(p)],
                                            ops[static_cast<std::size_t>(q)]);
            const MonomialMap qp = adjoint(pq);  // C_q^dag C_p = (C_p^dag C_q)^dag
            Eigen::Index col = static_cast<Eigen::Index>(cols.size());
            cols.push_back({p, q, 1});
            emit(col, pq, cxd(isq2, 0.0));
            emit(col, qp, cxd(isq2, 0.0));
            col = static_cast<Eigen::Index>(cols.size());
            cols.push_back({p, q, 2});
            emit(col, pq, cxd(0.0, isq2));
            emit(col, qp, cxd(0.0, -isq2));
        }

    const Mat G = A.transpose() * A;
    Eigen::SelfAdjointEigenSolver<Mat> es(G);
    for (Eigen::Index i = 0; i < es.eigenvalues().size(); ++i) {
        if (es.eigenvalues()(i) > opts.kernel_tol) continue;
        const Vec v = es.eigenvectors().col(i);
        if ((A * v).cwiseAbs().maxCoeff() > opts.residual_tol) continue;
        CMat K = CMat::Zero(N, N);
        for (std::size_t c = 0; c < cols.size(); ++c) {
            const double x = v(static_cast<Eigen::Index>(c));
            if (x == 0.0) continue;
            const ColDesc& cd = cols[c];
            if (cd.kind == 0) {
                K(cd.p, cd.p) += x;
            } else if (cd.kind == 1) {
                K(cd.p, cd.q) += x * isq2;
                K(cd.q, cd.p) += x * isq2;
            } else {
                K(cd.p, cd.q) += cxd(0.0, x * isq2);
                K(cd.q, cd.p) += cxd(0.0, -x * isq2);
            }
        }
        prog.kernel.push_back(std::move(K));
    }
    return prog;
}

CertificateCheck verify_certificate(const SdpProgram& program,
                                    const DualCertificate& cert, double tol) {
    if (static_cast<std::size_t>(cert.y.size()) != program.kernel.size())
        throw DimensionMismatch("certificate length does not match the kernel basis");
    CMat Acc = program.H1 - cert.y0 * program.I1;
    for (std::size_t a = 0; a < program.kernel.size(); ++a)
        Acc -= cert.y(static_cast<Eigen::Index>(a)) * program.kernel[a];
    Acc = 0.5 * (Acc + Acc.adjoint().eval());
    const double margin = lambda_min(Acc);
    return CertificateCheck{margin >= -tol, margin};
}

DualCertificate baseline_certificate(const SdpProgram& program) {
    const Eigen::Index N = program.H1.rows();
    const double h1_scale = matrix_scale(program.H1);
    const double lambda = lambda_min(program.H1) - 1e-9 * h1_scale;

    // Dependency direction sum_p (E_pp - E_11), projected on the computed
    // kernel basis (the basis is Frobenius-orthonormal).
    CMat T = lambda * CMat::Identity(N, N);
    T(0, 0) -= lambda * static_cast<double>(N);
    DualCertificate cert;
    cert.y = Vec::Zero(static_cast<Eigen::Index>(program.kernel.size()));
    for (std::size_t a = 0; a < program.kernel.size(); ++a)
        cert.y(static_cast<Eigen::Index>(a)) =
            (program.kernel[a].conjugate().cwiseProduct(T)).sum().real();

    CMat A0 = program.H1;
    for (std::size_t a = 0; a < program.kernel.size(); ++a)
        A0 -= cert.y(static_cast<Eigen::Index>(a)) * program.kernel[a];
    const double req = 1e-12 * matrix_scale(A0);
    auto feasible = [&](double y0) {
        CMat Acc = A0 - y0 * program.I1;
        return lambda_min(Acc) >= req;
    };

    double lo = lambda * static_cast<double>(N) - 1.0;
    {
        double drop = 1.0;
        int tries = 0;
        while (!feasible(lo) && tries < 60) {
            lo -= drop;
            drop *= 2.0;
            ++tries;
        }
        if (tries == 60) {  // no feasible point found in this direction
            cert.y0 = lo;
            return cert;
        }
    }
    double hi = lo + std::max(1.0, 2.0 * matrix_scale(A0) * static_cast<double>(N));
    {
        double push = hi - lo;
        int tries = 0;
        while (feasible(hi) && tries < 60) {
            push *= 2.0;
            hi += push;
            ++tries;
        }
    }
    for (int it = 0; it < 200 && hi - lo > 1e-14 * (1.0 + std::abs(lo)); ++it) {
        const double mid = 0.5 * (lo + hi);
        if (feasible(mid))
            lo = mid;
        else
            hi = mid;
    }
    cert.y0 = lo;
    return cert;
}

void save_certificate(const std::string& path, const DualCertificate& cert) {
    nlohmann::json doc;
    doc["y0"] = cert.y0;
    doc["y"] = std::vector<double>(cert.y.data(), cert.y.data() + cert.y.size());
    std::ofstream out(path);
    if (!out) throw IoError("cannot write " + path);
    out << doc.dump(2) << "\n";
    if (!out) throw IoError("write failed: " + path);
}

DualCertificate load_certificate(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot read " + path);
    nlohmann::json doc;
    try {
        in >> doc;
        DualCertificate cert;
        cert.y0 = doc.at("y0").get<double>();
        const auto ys = doc.at("y").get<std::vector<double>>();
        cert.y = Eigen::Map<const Vec>(ys.data(), static_cast<Eigen::Index>(ys.size()));
        return cert;
    } catch (const nlohmann::json::exception& e) {
        throw IoError("certificate parse error in " + path + ": " + e.what());
    }
}

SdpaData sdpa_data(const SdpProgram& program) {
    const Eigen::Index N = program.H1.rows();
    SdpaData data;
    data.nvars = 1 + static_cast<int>(program.kernel.size());
    data.dim = static_cast<int>(2 * N);
    data.cost.assign(static_cast<std::size_t>(data.nvars), 0.0);
    data.cost[0] = -1.0;  // minimize -y0
    data.mats.resize(static_cast<std::size_t>(data.nvars) + 1);

    auto embed = [&](const CMat& Z, std::map<std::pair<int, int>, double>& out) {
        // real symmetric [[Re, -Im], [Im, Re]], upper triangle, 1-based
        for (Eigen::Index i = 0; i < N; ++i)
            for (Eigen::Index j = 0; j < N; ++j) {
                const double re = Z(i, j).real();
                const double im = Z(i, j).imag();
                if (re != 0.0 && i <= j)
                    out[{static_cast<int>(i) + 1, static_cast<int>(j) + 1}] += re;
                if (re != 0.0)
                    out[{static_cast<int>(i) + 1 + static_cast<int>(N),
                         static_cast<int>(j) + 1 + static_cast<int>(N)}] += re;
                if (im != 0.0)
                    out[{static_cast<int>(i) + 1,
                         static_cast<int>(j) + 1 + static_cast<int>(N)}] += -im;
            }
        // keep only upper triangle
        for (auto it = out.begin(); it != out.end();) {
            if (it->first.first > it->first.second)
                it = out.erase(it);
            else
                ++it;
        }
    };

    embed(-program.H1, data.mats[0]);
    embed(-program.I1, data.mats[1]);
    for (std::size_t a = 0; a < program.kernel.size(); ++a)
        embed(-program.kernel[a], data.mats[a + 2]);
    for (auto& mat : data.mats)
        for (auto it = mat.begin(); it != mat.end();)
            it = it->second == 0.0 ? mat.erase(it) : std::next(it);
    return data;
}

void export_sdpa(const SdpProgram& program, const std::string& path) {
    const SdpaData data = sdpa_data(program);
    std::ofstream out(path);
    if (!out) throw IoError("cannot write " + path);
    out << data.nvars << "\n1\n" << data.dim << "\n";
    char buf[64];
    for (std::size_t i = 0; i < data.cost.size(); ++i) {
        std::snprintf(buf, sizeof buf, "%.17g", data.cost[i]);
        out << (i ? " " : "") << buf;
    }
    out << "\n";
    for (std::size_t mno = 0; mno < data.mats.size(); ++mno)
        for (const auto& [ij, val] : data.mats[mno]) {
            std::snprintf(buf, sizeof buf, "%.17g", val);
            out << mno << " 1 " << ij.first << " " << ij.second << " " << buf
                << "\n";
        }
    if (!out) throw IoError("write failed: " + path);
}

SdpaData parse_sdpa(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot read " + path);
    std::string text((std::istreambuf_iterator<char>(in)),
                     std::istreambuf_iterator<char>());
    for (char& ch : text)
        if (ch == ',' || ch == '{' || ch == '}' || ch == '(' || ch == ')')
            ch = ' ';
    std::istringstream ss(text);
    SdpaData data;
    int nblock = 0;
    if (!(ss >> data.nvars >> nblock >> data.dim) || nblock != 1)
        throw IoError("unsupported SDPA layout in " + path);
    data.cost.resize(static_cast<std::size_t>(data.nvars));
    for (double& c : data.cost)
        if (!(ss >> c)) throw IoError("truncated cost vector in " + path);
    data.mats.resize(static_cast<std::size_t>(data.nvars) + 1);
    int mno = 0, blk = 0, i = 0, j = 0;
    double val = 0.0;
    while (ss >> mno >> blk >> i >> j >> val) {
        if (mno < 0 || mno > data.nvars || blk != 1)
            throw IoError("bad entry in " + path);
        data.mats[static_cast<std::size_t>(mno)][{i, j}] += val;
    }
    return data;
}

}  // namespace impkit
