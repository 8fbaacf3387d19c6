#include "impuritykit/zolotarev.hpp"

#include <cmath>

#include "impuritykit/errors.hpp"

namespace impkit {

namespace {
constexpr int kMaxAgmIter = 64;
}

double elliptic_K(double mu) {
    if (!(mu >= 0.0 && mu < 1.0))
        throw ModulusOutOfRange("elliptic_K requires 0 <= mu < 1, got " +
                                std::to_string(mu));
    // K(mu) = pi / (2 agm(1, mu')) with mu' the complementary modulus.
    double a = 1.0;
    double b = std::sqrt((1.0 - mu) * (1.0 + mu));
    for (int it = 0; it < kMaxAgmIter && std::abs(a - b) > 1e-16 * a; ++it) {
        const double an = 0.5 * (a + b);
        b = std::sqrt(a * b);
        a = an;
    }
    return M_PI / (2.0 * a);
}

SnCn jacobi_sn_cn(double u, double mu) {
    if (!(mu >= 0.0 && mu < 1.0))
        throw ModulusOutOfRange("jacobi_sn_cn requires 0 <= mu < 1, got " +
                                std::to_string(mu));
    if (mu < 1e-12) {
        // Degenerate modulus: circular functions (first Landen term is O(mu^2)).
        return {std::sin(u), std::cos(u)};
    }
    // AGM chain a_i, b_i, c_i followed by the descending phase recursion
    //   phi_{i-1} = ( phi_i + asin(c_i sin(phi_i)/a_i) ) / 2,
    // seeded with phi_N = 2^N a_N u; then sn = sin(phi_0), cn = cos(phi_0).
    double a[kMaxAgmIter + 1], c[kMaxAgmIter + 1];
    a[0] = 1.0;
    c[0] = mu;
    double b = std::sqrt((1.0 - mu) * (1.0 + mu));
    int N = 0;
    for (int i = 1; i <= kMaxAgmIter; ++i) {
        a[i] = 0.5 * (a[i - 1] + b);
        c[i] = 0.5 * (a[i - 1] - b);
        b = std::sqrt(a[i - 1] * b);
        N = i;
        if (std::abs(c[i]) <= 1e-16 * a[i]) break;
    }
    double phi = std::ldexp(a[N] * u, N);
    for (int i = N; i >= 1; --i) {
        double s = c[i] * std::sin(phi) / a[i];
        s = std::min(1.0, std::max(-1.0, s));
        phi = 0.5 * (phi + std::asin(s));
    }
    return {std::sin(phi), std::cos(phi)};
}

double ZolotarevApprox::evaluate(double x) const {
    double r = scale * x;
    for (int j = 0; j < d; ++j) r *= (x + lambda[2 * j + 1]) / (x + lambda[2 * j]);
    return r;
}

ZolotarevApprox zolotarev_build(double omega, int d) {
    if (!(omega > 0.0 && omega <= 1.0))
        throw GapOutOfRange("zolotarev_build requires 0 < omega <= 1, got " +
                            std::to_string(omega));
    if (d < 1)
        throw GapOutOfRange("zolotarev_build requires degree d >= 1");

    ZolotarevApprox z;
    z.omega = omega;
    z.d = d;
    const double mu = std::sqrt(1.0 - omega);
    const double K = elliptic_K(mu);
    z.lambda.resize(2 * d);
    for (int j = 1; j <= 2 * d; ++j) {
        const SnCn sc = jacobi_sn_cn(j * K / (2 * d + 1), mu);
        const double t = sc.sn / sc.cn;
        z.lambda[j - 1] = omega * t * t;
    }
    double p1 = 1.0, p2 = 1.0;
    for (int j = 1; j <= d; ++j) {
        p1 *= (1.0 + z.lambda[2 * j - 1]) / (1.0 + z.lambda[2 * j - 2]);
        p2 *= (omega + z.lambda[2 * j - 1]) / (omega + z.lambda[2 * j - 2]);
    }
    z.scale = 2.0 / (p1 + std::sqrt(omega) * p2);
    return z;
}

double zolotarev_worst_case_error(const ZolotarevApprox& z, int grid_points) {
    if (grid_points < 2) grid_points = 2;
    const double lo = std::log(z.omega);
    double worst = 0.0;
    for (int i = 0; i <= grid_points; ++i) {
        const double x = std::exp(lo * (1.0 - static_cast<double>(i) / grid_points));
        const double s = std::sqrt(x);
        worst = std::max(worst, std::abs(s - z.evaluate(x)) / s);
    }
    return worst;
}

double zolotarev_error_bound(double omega, int d) {
    return 2.0 * std::exp(-d / std::log(2.0 / omega));
}

}  // namespace impkit
