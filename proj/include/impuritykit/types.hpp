#pragma once

#include <complex>
#include <cstdint>
#include <vector>

#include <Eigen/Dense>

namespace impkit {

using cxd = std::complex<double>;

using Mat = Eigen::MatrixXd;
using CMat = Eigen::MatrixXcd;
using Vec = Eigen::VectorXd;
using CVec = Eigen::VectorXcd;

// A multi-index over Majorana modes: sorted, strictly increasing, 1-based.
using MajoranaMask = std::vector<int>;

inline constexpr double kAntisymmetryTol = 1e-12;
inline constexpr double kOrthogonalityTol = 1e-10;
inline constexpr double kZeroEnergyTol = 1e-12;

}  // namespace impkit
