#include "impuritykit/pauli.hpp"

#include <bit>
#include <map>
#include <utility>

#include "impuritykit/errors.hpp"
#include "impuritykit/kernels.hpp"
#include "impuritykit/model.hpp"

namespace impkit {

namespace {

// Single Majorana factor, 1-based index mu on qubit a = (mu+1)/2.
PauliTerm majorana_factor(int mu) {
    const int a = (mu + 1) / 2;                     // 1-based qubit
    const std::uint64_t bit = 1ull << (a - 1);
    PauliTerm t;
    t.xmask = bit;
    t.zmask = bit - 1;  // Jordan-Wigner string over qubits 1..a-1
    t.coeff = cxd(1.0, 0.0);
    if (mu % 2 == 0) {  // Y component: Y = i X Z
        t.zmask |= bit;
        t.coeff = cxd(0.0, 1.0);
    }
    return t;
}

// (X^{x1} Z^{z1}) (X^{x2} Z^{z2}) = (-1)^{|z1 & x2|} X^{x1^x2} Z^{z1^z2}
PauliTerm multiply(const PauliTerm& a, const PauliTerm& b) {
    PauliTerm out;
    out.xmask = a.xmask ^ b.xmask;
    out.zmask = a.zmask ^ b.zmask;
    out.coeff = a.coeff * b.coeff;
    if (std::popcount(a.zmask & b.xmask) % 2 != 0) out.coeff = -out.coeff;
    return out;
}

}  // namespace

PauliTerm majorana_monomial(int n, const MajoranaMask& mask) {
    PauliTerm acc;
    acc.coeff = cxd(1.0, 0.0);
    for (std::size_t i = 0; i < mask.size(); ++i) {
        const int mu = mask[i];
        if (mu < 1 || mu > 2 * n)
            throw DimensionMismatch("Majorana index outside 1..2n");
        if (i > 0 && mask[i] <= mask[i - 1])
            throw DimensionMismatch("Majorana monomial indices must be strictly increasing");
        acc = multiply(acc, majorana_factor(mu));
    }
    return acc;
}

std::vector<PauliTerm> to_pauli(const ImpurityModel& model) {
    const int n = model.n();
    if (n > 62) throw DimensionTooLarge("qubit mapping supports up to 62 modes");

    std::map<std::pair<std::uint64_t, std::uint64_t>, cxd> acc;
    auto add = [&acc](const PauliTerm& t, cxd weight) {
        acc[{t.xmask, t.zmask}] += weight * t.coeff;
    };

    add(PauliTerm{0, 0, cxd(1.0, 0.0)}, cxd(model.scalar(), 0.0));

    const Mat& h = model.h();
    for (int p = 0; p < 2 * n; ++p)
        for (int q = p + 1; q < 2 * n; ++q)
            if (h(p, q) != 0.0)
                add(majorana_monomial(n, {p + 1, q + 1}),
                    cxd(0.0, 0.5 * h(p, q)));  // (i/4)(h_pq c_p c_q + h_qp c_q c_p)

    for (const ImpurityTerm& term : model.terms())
        add(majorana_monomial(n, term.mask), term.coeff);

    std::vector<PauliTerm> out;
    out.reserve(acc.size());
    for (const auto& [masks, coeff] : acc)
        if (coeff != cxd(0.0, 0.0))
            out.push_back({masks.first, masks.second, coeff});
    return out;
}

void apply_pauli(unsigned nq, const std::vector<PauliTerm>& terms,
                 const cxd* in, cxd* out) {
    const kernels::Ops& k = kernels::ops();
    for (const PauliTerm& t : terms)
        k.pauli_accum(nq, t.xmask, t.zmask, t.coeff, in, out);
}

}  // namespace impkit
