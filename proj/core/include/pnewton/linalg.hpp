#pragma once

#include <functional>
#include <optional>
#include <stdexcept>
#include <vector>

#include "pnewton/types.hpp"

namespace pnewton::linalg {

/// v -> A v. Closures must be re-entrant.
using LinearOperator = std::function<Vector(const Vector&)>;

/// Relative pivot threshold below which a factorization is declared singular.
inline constexpr double kPivotTol = 1e-12;

class NotPositiveDefinite : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

/// Solves A x = b. Returns std::nullopt (the singular signal) when a pivot
/// falls below kPivotTol * ||A||_F or the residual contract
/// ||Ax - b|| <= 1e-10 (||A|| ||x|| + ||b||) cannot be met.
std::optional<Vector> solve_dense(const Matrix& A, const Vector& b, bool symmetric);

struct KrylovResult {
    Vector x;
    int iterations = 0;
    int matvecs = 0;
    bool converged = false;
    /// CG only: a direction of non-positive curvature was met.
    bool indefinite = false;
    double residual_norm = 0.0;
    /// ||b - A x_j|| after every inner iteration.
    std::vector<double> residual_history;
};

KrylovResult cg_solve(const LinearOperator& apply, const Vector& b, double tol, int maxit);

/// Restarted GMRES(restart) from x0 = 0 with Givens rotations.
KrylovResult gmres_solve(const LinearOperator& apply, const Vector& b, double tol, int restart = 50,
                         int maxit = 1000);

/// Lower Cholesky factor of an SPD matrix; throws NotPositiveDefinite when a
/// pivot is below kPivotTol * ||M||_F.
Matrix cholesky(const Matrix& M);

/// Generalized eigenpairs of the symmetric-definite pencil (A, M):
/// A V = M V diag(xi), V' M V = I, xi ascending.
struct GenEig {
    Vector xi;
    Matrix V;
};

GenEig gen_sym_eig(const Matrix& A, const Matrix& M);

/// Smallest eigenvalue of a symmetric matrix.
double min_eigenvalue(const Matrix& A);

/// Largest singular value.
double spectral_norm(const Matrix& A);

}  // namespace pnewton::linalg
