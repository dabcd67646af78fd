#pragma once

#include <Eigen/Dense>

namespace pnewton {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

// Dense Hessians are only materialized up to this dimension; above it the
// solvers fall back to Hessian-vector products and Krylov methods.
inline constexpr Eigen::Index kDenseHessianMaxDim = 512;

// Overflow guard shared by the solvers and the divergence report.
inline constexpr double kDivergenceThreshold = 1e300;

}  // namespace pnewton
