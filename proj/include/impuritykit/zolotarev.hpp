#pragma once

#include <vector>

namespace impkit {

// Complete elliptic integral of the first kind in the modulus convention,
//   K(mu) = int_0^{pi/2} dtheta / sqrt(1 - mu^2 sin^2 theta),
// computed by the arithmetic-geometric mean to ~1e-15 relative accuracy.
// Requires 0 <= mu < 1 (ModulusOutOfRange otherwise).
double elliptic_K(double mu);

// Jacobi elliptic sn, cn at modulus mu via the AGM and a descending Landen
// phase recursion. Satisfies sn^2 + cn^2 = 1 to ~1e-14.
struct SnCn {
    double sn;
    double cn;
};
SnCn jacobi_sn_cn(double u, double mu);

// Best rational approximation of sqrt(x) on [omega, 1] of the form
//   sqrt(x) ~ x P_d(x)/Q_d(x),
//   P_d(x) = scale * prod_j (x + lambda_{2j}),  Q_d(x) = prod_j (x + lambda_{2j-1}),
// with the 2d roots lambda_j = omega (sn/cn)^2 at u = j K(mu)/(2d+1),
// mu = sqrt(1 - omega). The scale balances the relative error at the two
// endpoints, which makes the error equioscillate.
struct ZolotarevApprox {
    double omega = 0.0;
    int d = 0;
    std::vector<double> lambda;  // lambda_1 .. lambda_{2d}, strictly increasing
    double scale = 0.0;

    // x P_d(x) / Q_d(x)
    double evaluate(double x) const;
};

// Throws GapOutOfRange unless 0 < omega <= 1 and d >= 1.
ZolotarevApprox zolotarev_build(double omega, int d);

// max over a log-spaced grid on [omega, 1] of |sqrt(x) - x P/Q| / sqrt(x).
double zolotarev_worst_case_error(const ZolotarevApprox& z, int grid_points = 4000);

// Proven envelope 2 exp(-d / log(2/omega)) for the worst-case relative error.
double zolotarev_error_bound(double omega, int d);

}  // namespace impkit
