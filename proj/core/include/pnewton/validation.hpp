#pragma once

#include <cstdint>
#include <string_view>
#include <utility>
#include <vector>

#include "pnewton/problems.hpp"
#include "pnewton/reference.hpp"
#include "pnewton/types.hpp"

namespace pnewton::validation {

/// Relative central-difference step factors; the actual step is factor * (1 + ||x||).
struct FdSteps {
    double grad = 1e-5;
    double hess = 1e-4;
};

struct FdReport {
    double grad_relerr = 0.0;
    /// NaN when the dense Hessian is not available.
    double hess_relerr = 0.0;
    double hessvec_relerr = 0.0;
};

/// ||a - b|| / max(||a||, ||b||), zero when both vanish.
double relative_error(const Vector& a, const Vector& b);
double relative_error(const Matrix& a, const Matrix& b);

/// Compares gradient, dense Hessian and one Hessian-vector product (along a
/// direction drawn from `seed`) with central differences.
FdReport fd_check(const Objective& obj, const Vector& x, const FdSteps& steps = {}, std::uint64_t seed = 0);

enum class LipschitzMethod { Grid1D_ClosedForm, RandomSecant };

std::string_view to_string(LipschitzMethod m);

struct LipschitzEstimate {
    double value = 0.0;
    LipschitzMethod method = LipschitzMethod::Grid1D_ClosedForm;
    long sample_count = 0;
    double box_lo = 0.0;
    double box_hi = 0.0;
};

/// H(x) = f''(x) / sqrt(1 + f'(x)^2) for the unit-scale Cosh reference, and its derivative.
double preconditioned_hessian_1d(const Poly1D& p, double x);
double preconditioned_hessian_1d_derivative(const Poly1D& p, double x);

/// max |H'| over grid_n equally spaced points of [lo, hi]. Grids with
/// 2(grid_n - 1) + 1 points refine the grid with grid_n points.
LipschitzEstimate estimate_LH_1d(const Poly1D& p, const ReferenceFunction& ref, double lo, double hi, long grid_n);

/// H(x) = hess phi*(grad f(x)) hess f(x).
Matrix preconditioned_hessian(const Objective& obj, const ReferenceFunction& ref, const Vector& x);

/// max ||H(x) - H(y)||_2 / ||x - y|| over n_pairs seeded pairs: x uniform in
/// the box [lo, hi]^n, y = x + pair_radius u with u a random unit vector.
LipschitzEstimate estimate_LH_secant(const Objective& obj, const ReferenceFunction& ref, double lo, double hi,
                                     long n_pairs, std::uint64_t seed, double pair_radius = 1e-4);

struct AnisoViolation {
    std::size_t pair_index = 0;
    /// f(x) minus the upper model; positive.
    double gap = 0.0;
};

struct AnisoReport {
    std::vector<AnisoViolation> violations;
    /// Pairs whose scaled argument left dom phi.
    std::vector<std::size_t> inconclusive;
    std::size_t checked = 0;

    bool clean() const { return violations.empty(); }
};

/// Tests f(x) <= f(xb) + phi(L (x - yb)) / L - phi(L (xb - yb)) / L with
/// yb = xb - grad phi*(grad f(xb)) / L on each pair (x, xb).
AnisoReport check_aniso(const Objective& obj, const ReferenceFunction& ref, double L,
                        const std::vector<std::pair<Vector, Vector>>& pairs);

struct ConvergenceOrder {
    double q = 0.0;
    /// Root-mean-square residual of the fit in log space.
    double residual = 0.0;
    int points = 0;
    bool conclusive = false;
};

/// Least-squares slope of log e_{k+1} against log e_k. Errors at or below
/// 100 machine epsilons are discarded; last_n > 0 keeps only the last usable points.
ConvergenceOrder convergence_order(const std::vector<double>& errors, int last_n = 0);

}  // namespace pnewton::validation
