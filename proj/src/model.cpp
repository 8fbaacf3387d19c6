#include "impuritykit/model.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>
#include <utility>

#include <Eigen/QR>
#include <json.hpp>

#include "impuritykit/errors.hpp"
#include "impuritykit/gaussian.hpp"

namespace impkit {

using nlohmann::json;

namespace {

// Majorana monomials square to +1 or -1 depending on the reversal sign
// (-1)^{w(w-1)/2}; Hermiticity of g c(x) then forces g real when w = 0 mod 4
// and purely imaginary when w = 2 mod 4.
bool coeff_must_be_real(std::size_t weight) { return weight % 4 == 0; }

std::string mask_to_string(const MajoranaMask& mask) {
    std::string s = "[";
    for (std::size_t i = 0; i < mask.size(); ++i) {
        if (i) s += ",";
        s += std::to_string(mask[i]);
    }
    return s + "]";
}

}  // namespace

ImpurityModel::ImpurityModel(int n, int m, Mat h, std::vector<ImpurityTerm> terms,
                             double offset, bool norm_check)
    : n_(n), m_(m), h_(std::move(h)), terms_(std::move(terms)),
      offset_(offset), norm_check_(norm_check) {
    if (n_ < 1) throw InvalidModel("n: must be at least 1");
    if (m_ < 0 || m_ % 2 != 0 || m_ > 2 * n_)
        throw InvalidModel("m: must be even and between 0 and 2n");
    if (h_.rows() != 2 * n_ || h_.cols() != 2 * n_)
        throw InvalidModel("h: expected a " + std::to_string(2 * n_) + "x" +
                           std::to_string(2 * n_) + " matrix");
    const double scale = std::max(1.0, h_.cwiseAbs().maxCoeff());
    const double defect = (h_ + h_.transpose()).cwiseAbs().maxCoeff();
    if (defect > kAntisymmetryTol * scale)
        throw InvalidModel("h: not antisymmetric (max|h + h^T| = " +
                           std::to_string(defect) + ")");

    std::vector<MajoranaMask> seen;
    for (std::size_t t = 0; t < terms_.size(); ++t) {
        const std::string where = "impurity[" + std::to_string(t) + "]";
        const MajoranaMask& mask = terms_[t].mask;
        for (std::size_t i = 0; i < mask.size(); ++i) {
            if (mask[i] < 1 || mask[i] > m_)
                throw InvalidModel(where + ".mask: index " + std::to_string(mask[i]) +
                                   " outside 1.." + std::to_string(m_));
            if (i > 0 && mask[i] <= mask[i - 1])
                throw InvalidModel(where + ".mask: indices must be strictly increasing");
        }
        if (mask.size() % 2 != 0)
            throw OddWeightMask(where + ".mask: " + mask_to_string(mask) +
                                " has odd weight; such terms do not preserve parity");
        if (std::find(seen.begin(), seen.end(), mask) != seen.end())
            throw InvalidModel(where + ".mask: duplicate of an earlier term");
        seen.push_back(mask);

        const cxd g = terms_[t].coeff;
        const double tol = 1e-12 * (1.0 + std::abs(g));
        if (coeff_must_be_real(mask.size())) {
            if (std::abs(g.imag()) > tol)
                throw InvalidModel(where + ": coefficient of a weight-" +
                                   std::to_string(mask.size()) +
                                   " term must be real for Hermiticity");
        } else if (std::abs(g.real()) > tol) {
            throw InvalidModel(where + ": coefficient of a weight-" +
                               std::to_string(mask.size()) +
                               " term must be purely imaginary for Hermiticity");
        }
    }

    const CanonicalModes modes = canonical_modes(h_);
    e0_ = modes.epsilons.sum() / 2.0;  // trace norm of h over 4
    if (norm_check_) {
        const double hnorm = modes.epsilons.size() > 0
                                 ? modes.epsilons.maxCoeff()
                                 : 0.0;
        if (hnorm > 1.0 + 1e-12)
            throw InvalidModel("h: operator norm " + std::to_string(hnorm) +
                               " exceeds 1 (norm_check is enabled)");
    }
}

ImpurityModel anderson(int n, double U) {
    if (n < 3) throw InvalidModel("n: the Anderson ring needs at least 3 sites");
    Mat h = Mat::Zero(2 * n, 2 * n);
    for (int p = 0; p + 1 < 2 * n; ++p) {
        h(p, p + 1) = 2.0;
        h(p + 1, p) = -2.0;
    }
    h(2 * n - 1, 0) = 2.0;
    h(0, 2 * n - 1) = -2.0;

    std::vector<ImpurityTerm> terms;
    terms.push_back({{}, cxd(U / 4.0, 0.0)});
    terms.push_back({{1, 2}, cxd(0.0, U / 4.0)});
    terms.push_back({{3, 4}, cxd(0.0, U / 4.0)});
    terms.push_back({{1, 2, 3, 4}, cxd(-U / 4.0, 0.0)});

    ImpurityModel model(n, 4, std::move(h), std::move(terms));
    // Report energies relative to the bare Hamiltonian, i.e. drop the +e0
    // shift that normalizes the quadratic ground energy to zero.
    return ImpurityModel(model.n(), model.m(), model.h(), model.terms(),
                         -model.e0(), false);
}

ImpurityModel truncate(const ImpurityModel& model, double gamma) {
    if (!(gamma > 0.0)) throw GapOutOfRange("gamma: must be positive");
    if (model.m() < 2)
        throw InvalidModel("m: truncation requires an impurity (m >= 2)");
    CanonicalModes modes = canonical_modes(model.h());
    const double floor_eps = gamma / model.m();
    for (Eigen::Index j = 0; j < modes.epsilons.size(); ++j)
        modes.epsilons(j) = std::max(modes.epsilons(j), floor_eps);
    Mat h_new = modes.reassemble();
    h_new = 0.5 * (h_new - h_new.transpose().eval());
    return ImpurityModel(model.n(), model.m(), std::move(h_new), model.terms(),
                         model.offset(), false);
}

std::vector<int> group_by_degeneracy(const Vec& eps, double tol) {
    std::vector<int> out(static_cast<std::size_t>(eps.size()), 0);
    int id = 0;
    for (Eigen::Index j = 1; j < eps.size(); ++j) {
        if (eps(j) - eps(j - 1) > tol) ++id;
        out[static_cast<std::size_t>(j)] = id;
    }
    return out;
}

std::vector<int> group_by_grid(const Vec& eps, double spacing) {
    if (!(spacing > 0.0)) throw GapOutOfRange("spacing: must be positive");
    std::vector<int> out(static_cast<std::size_t>(eps.size()), 0);
    int id = -1;
    long long last = -1;
    for (Eigen::Index j = 0; j < eps.size(); ++j) {
        const long long idx = std::llround(eps(j) / spacing);
        if (std::abs(eps(j) - static_cast<double>(idx) * spacing) >
            1e-8 * std::max(1.0, std::abs(eps(j))))
            throw GapOutOfRange("mode energy " + std::to_string(eps(j)) +
                                " is not on the grid with spacing " +
                                std::to_string(spacing));
        if (idx != last) {
            ++id;
            last = idx;
        }
        out[static_cast<std::size_t>(j)] = id;
    }
    return out;
}

std::vector<int> DecoupledFrame::coupled_indices() const {
    std::vector<int> out;
    for (std::size_t j = 0; j < coupled.size(); ++j)
        if (coupled[j]) out.push_back(static_cast<int>(j));
    return out;
}

DecoupledFrame decouple(const CanonicalModes& modes, int m,
                        const std::vector<int>& groups, double rank_tol) {
    const Eigen::Index n = modes.epsilons.size();
    if (static_cast<Eigen::Index>(groups.size()) != n)
        throw DimensionMismatch("decouple: one group id per mode expected");
    if (m < 0 || m > 2 * n)
        throw DimensionMismatch("decouple: impurity width out of range");

    DecoupledFrame frame;
    frame.epsilons = modes.epsilons;
    frame.group = groups;
    frame.coupled.assign(static_cast<std::size_t>(n), 0);

    // Annihilator rows of the canonical modes as linear forms in the original
    // Majorana operators: b_j = sum_q T_jq c_q.
    CMat T(n, 2 * n);
    for (Eigen::Index j = 0; j < n; ++j)
        T.row(j) = 0.5 * (modes.rotation.row(2 * j).cast<cxd>() +
                          cxd(0.0, 1.0) * modes.rotation.row(2 * j + 1).cast<cxd>());

    // Within each equal-energy group, rotate the modes so that only the
    // leading rank(W) of them overlap the impurity columns; such a unitary
    // mixing leaves the mode energies and the joint vacuum unchanged.
    Eigen::Index lo = 0;
    while (lo < n) {
        Eigen::Index hi = lo;
        while (hi < n && groups[static_cast<std::size_t>(hi)] ==
                             groups[static_cast<std::size_t>(lo)])
            ++hi;
        const Eigen::Index g = hi - lo;
        Eigen::Index rank = 0;
        if (m > 0) {
            CMat W = T.block(lo, 0, g, m);
            Eigen::ColPivHouseholderQR<CMat> qr(W);
            qr.setThreshold(rank_tol);
            rank = qr.rank();
            CMat Q = qr.householderQ() * CMat::Identity(g, g);
            T.block(lo, 0, g, 2 * n) =
                Q.adjoint() * T.block(lo, 0, g, 2 * n).eval();
        }
        for (Eigen::Index j = 0; j < rank; ++j)
            frame.coupled[static_cast<std::size_t>(lo + j)] = 1;
        lo = hi;
    }

    frame.rows = std::move(T);
    frame.vacuum_cov =
        modes.rotation.transpose() * vacuum_covariance(static_cast<int>(n)) *
        modes.rotation;
    frame.vacuum_cov =
        0.5 * (frame.vacuum_cov - frame.vacuum_cov.transpose().eval());
    return frame;
}

BlockTridiagonal block_tridiagonalize(const Mat& h, int m, double tol) {
    const Eigen::Index dim = h.rows();
    if (h.cols() != dim || dim % 2 != 0)
        throw DimensionMismatch("block_tridiagonalize requires an even square matrix");
    if (m < 1 || m > dim)
        throw DimensionMismatch("block_tridiagonalize: impurity width out of range");

    BlockTridiagonal out;
    Mat F = Mat::Zero(dim, dim);  // orthonormal columns, grown layer by layer
    Eigen::Index L = m;
    F.topLeftCorner(m, m).setIdentity();
    out.block_sizes.push_back(m);

    Eigen::Index layer_lo = 0, layer_hi = m;
    while (layer_hi < dim && layer_hi > layer_lo) {
        Eigen::Index new_lo = layer_hi;
        for (Eigen::Index j = layer_lo; j < layer_hi; ++j) {
            Vec v = h * F.col(j);
            // Re-orthogonalize twice against everything accepted so far.
            for (int pass = 0; pass < 2; ++pass)
                v -= F.leftCols(L) * (F.leftCols(L).transpose() * v).eval();
            const double nrm = v.norm();
            if (nrm > tol) {
                F.col(L) = v / nrm;
                ++L;
            }
        }
        if (L > new_lo) out.block_sizes.push_back(static_cast<int>(L - new_lo));
        layer_lo = new_lo;
        layer_hi = L;
    }

    out.L = static_cast<int>(L);
    Mat B(dim, dim);
    B.leftCols(L) = F.leftCols(L);
    if (L < dim) {
        // Orthogonal complement of the Krylov space: trailing columns of the
        // full Q factor are orthogonal to the span of F by construction.
        Eigen::HouseholderQR<Mat> qr(F.leftCols(L));
        Mat Qfull = qr.householderQ() * Mat::Identity(dim, dim);
        B.rightCols(dim - L) = Qfull.rightCols(dim - L);
    }

    Mat hb = B.transpose() * h * B;
    out.basis = B.transpose();
    out.h_coupled = hb.topLeftCorner(L, L);
    out.h_coupled = 0.5 * (out.h_coupled - out.h_coupled.transpose().eval());
    out.h_rest = hb.bottomRightCorner(dim - L, dim - L);
    out.h_rest = 0.5 * (out.h_rest - out.h_rest.transpose().eval());

    // Qudit chain bookkeeping: L (possibly padded to even) Majoranas make
    // L/2 modes; grouping m consecutive modes per site keeps all couplings
    // nearest-neighbor because the bandwidth of h_coupled is below 2m.
    const Eigen::Index padded = L + (L % 2);
    Eigen::Index remaining = padded / 2;
    while (remaining > 0) {
        const Eigen::Index take = std::min<Eigen::Index>(m, remaining);
        out.site_dims.push_back(1 << take);
        remaining -= take;
    }
    return out;
}

// ---------------------------------------------------------------------------
// JSON serialization
// ---------------------------------------------------------------------------

namespace {

const json& require_field(const json& doc, const std::string& key) {
    auto it = doc.find(key);
    if (it == doc.end()) throw InvalidModel(key + ": missing field");
    return *it;
}

int read_int(const json& value, const std::string& where) {
    if (!value.is_number_integer())
        throw InvalidModel(where + ": expected an integer");
    return value.get<int>();
}

double read_number(const json& value, const std::string& where) {
    if (!value.is_number())
        throw InvalidModel(where + ": expected a number");
    return value.get<double>();
}

}  // namespace

ImpurityModel model_from_json(const std::string& text) {
    json doc;
    try {
        doc = json::parse(text);
    } catch (const json::exception& e) {
        throw InvalidModel(std::string("invalid JSON: ") + e.what());
    }
    if (!doc.is_object()) throw InvalidModel("document: expected a JSON object");

    const int n = read_int(require_field(doc, "n"), "n");
    if (n < 1) throw InvalidModel("n: must be at least 1");

    Mat h = Mat::Zero(2 * n, 2 * n);
    const json& hj = require_field(doc, "h");
    if (!hj.is_array()) throw InvalidModel("h: expected an array of [p, q, value]");
    for (std::size_t i = 0; i < hj.size(); ++i) {
        const std::string where = "h[" + std::to_string(i) + "]";
        const json& entry = hj[i];
        if (!entry.is_array() || entry.size() != 3)
            throw InvalidModel(where + ": expected [p, q, value]");
        const int p = read_int(entry[0], where + "[0]");
        const int q = read_int(entry[1], where + "[1]");
        const double v = read_number(entry[2], where + "[2]");
        if (p < 1 || q < 1 || p > 2 * n || q > 2 * n)
            throw InvalidModel(where + ": indices outside 1.." + std::to_string(2 * n));
        if (p >= q)
            throw InvalidModel(where + ": requires p < q");
        if (h(p - 1, q - 1) != 0.0)
            throw InvalidModel(where + ": duplicate entry for (" +
                               std::to_string(p) + "," + std::to_string(q) + ")");
        h(p - 1, q - 1) = v;
        h(q - 1, p - 1) = -v;
    }

    std::vector<ImpurityTerm> terms;
    int max_index = 0;
    if (auto it = doc.find("impurity"); it != doc.end()) {
        if (!it->is_array()) throw InvalidModel("impurity: expected an array");
        for (std::size_t i = 0; i < it->size(); ++i) {
            const std::string where = "impurity[" + std::to_string(i) + "]";
            const json& entry = (*it)[i];
            if (!entry.is_object())
                throw InvalidModel(where + ": expected an object");
            const json& maskj = require_field(entry, "mask");
            if (!maskj.is_array())
                throw InvalidModel(where + ".mask: expected an array of indices");
            MajoranaMask mask;
            for (std::size_t k = 0; k < maskj.size(); ++k) {
                mask.push_back(read_int(maskj[k], where + ".mask[" + std::to_string(k) + "]"));
                max_index = std::max(max_index, mask.back());
            }
            double re = 0.0, im = 0.0;
            if (auto f = entry.find("re"); f != entry.end())
                re = read_number(*f, where + ".re");
            if (auto f = entry.find("im"); f != entry.end())
                im = read_number(*f, where + ".im");
            terms.push_back({std::move(mask), cxd(re, im)});
        }
    }

    int m = max_index + (max_index % 2);
    if (auto it = doc.find("m"); it != doc.end()) m = read_int(*it, "m");

    double offset = 0.0;
    if (auto it = doc.find("offset"); it != doc.end())
        offset = read_number(*it, "offset");
    bool norm_check = false;
    if (auto it = doc.find("norm_check"); it != doc.end()) {
        if (!it->is_boolean()) throw InvalidModel("norm_check: expected a boolean");
        norm_check = it->get<bool>();
    }

    return ImpurityModel(n, m, std::move(h), std::move(terms), offset, norm_check);
}

std::string model_to_json(const ImpurityModel& model) {
    json doc;
    doc["n"] = model.n();
    doc["m"] = model.m();
    json hj = json::array();
    const Mat& h = model.h();
    for (Eigen::Index p = 0; p < h.rows(); ++p)
        for (Eigen::Index q = p + 1; q < h.cols(); ++q)
            if (h(p, q) != 0.0)
                hj.push_back({static_cast<int>(p) + 1, static_cast<int>(q) + 1, h(p, q)});
    doc["h"] = std::move(hj);
    json tj = json::array();
    for (const ImpurityTerm& term : model.terms()) {
        json entry;
        entry["mask"] = term.mask;
        entry["re"] = term.coeff.real();
        entry["im"] = term.coeff.imag();
        tj.push_back(std::move(entry));
    }
    doc["impurity"] = std::move(tj);
    doc["offset"] = model.offset();
    doc["norm_check"] = model.norm_check();
    return doc.dump(2) + "\n";
}

ImpurityModel load_model(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError(path + ": cannot open for reading");
    std::ostringstream buf;
    buf << in.rdbuf();
    return model_from_json(buf.str());
}

void save_model(const std::string& path, const ImpurityModel& model) {
    std::ofstream out(path);
    if (!out) throw IoError(path + ": cannot open for writing");
    out << model_to_json(model);
    if (!out) throw IoError(path + ": write failed");
}

}  // namespace impkit
