#pragma once

#include <vector>

#include "pnewton/linalg.hpp"
#include "pnewton/types.hpp"

namespace pnewton {

/// Generalized eigendata of the pencil (A, M) together with the right-hand
/// side expressed in its eigenbasis.
struct PencilData {
    linalg::GenEig decomp;
    Vector gV;                      ///< gV_i = v_i' M g
    Matrix G;                       ///< G_ij = v_i' v_j
    double lambda_s = 0.0;          ///< max(-xi_1, 0)
    std::vector<int> hard_index_set;  ///< i with xi_i - xi_1 <= 1e-10 max(1, |xi_1|)
};

/// (s, lambda, z) with (A + lambda M) s = -M (g - z), lambda = sigma ||s||,
/// A + lambda M psd. z is the residual of M^{-1}(A + lambda M) s = -g + z.
struct SubproblemSolution {
    Vector s;
    double lambda = 0.0;
    Vector z;
    bool hard_case = false;
    /// lambda_min(A + lambda M).
    double psd_margin = 0.0;
    double sigma = 0.0;
    /// ||(A + lambda M) s + M (g - z)||.
    double residual = 0.0;
    /// ||A||_F + lambda ||M||_F, the scale of the psd and residual tolerances.
    double scale = 0.0;
    double tol_lambda = 1e-13;
    int root_iterations = 0;
};

inline constexpr double kTieTol = 1e-10;
inline constexpr double kHardCaseTol = 1e-10;
inline constexpr double kPsdTol = 1e-8;

PencilData build_pencil(const Matrix& A, const Matrix& M, const Vector& g);

/// Psi(lambda) = c' G c - lambda^2 / sigma^2 with c_i = gV_i / (xi_i + lambda).
/// Requires lambda > lambda_s.
double psi_eval(const PencilData& pd, double lambda, double sigma);

/// Solves the regularization subproblem exactly, covering the root-finding
/// cases and the hard case. tol_lambda bounds |lambda - sigma ||s|| | / (1 + lambda).
SubproblemSolution solve_exact(const Matrix& A, const Matrix& M, const Vector& g, double sigma,
                               double tol_lambda = 1e-13);

/// Inexact solution for testing: the `drop` eigencomponents with the largest
/// xi are removed from the right-hand side, which yields z = sum over the
/// dropped set of gV_i v_i while lambda = sigma ||s|| and psd still hold.
SubproblemSolution solve_truncated(const Matrix& A, const Matrix& M, const Vector& g, double sigma, int drop,
                                   double tol_lambda = 1e-13);

/// ||z|| <= theta ||s||^2 / 2, psd within tolerance and lambda = sigma ||s||.
bool accept_inexact(const SubproblemSolution& sol, double theta);

}  // namespace pnewton
