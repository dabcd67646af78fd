#pragma once

#include <optional>
#include <string_view>

#include "pnewton/types.hpp"

namespace pnewton {

enum class KernelKind { Quadratic, Cosh, ExpAbs, LogBarrier };

std::string_view to_string(KernelKind kind);
std::optional<KernelKind> parse_kernel_kind(std::string_view name);

/// Scalar building block h of a reference function, scaled as c*h(x).
///
/// The conjugate of c*h is c*h*(y/c), so every dual quantity below is
/// evaluated at u = y/c and chained accordingly. Kernels:
///   Quadratic   x^2/2
///   Cosh        cosh(x) - 1
///   ExpAbs      exp|x| - |x| - 1
///   LogBarrier  -|x| - ln(1 - |x|),   dom = (-1, 1)
class ScalarKernel {
public:
    explicit ScalarKernel(KernelKind kind, double scale = 1.0);

    KernelKind kind() const { return kind_; }
    double scale() const { return scale_; }

    // Uniform lower bound of y / h*'(y) on y > 0.
    double ltilde() const { return scale_; }

    bool in_domain(double x) const;
    double value(double x) const;
    double derivative(double x) const;
    double second_derivative(double x) const;

    // Conjugate side. Arguments are magnitudes y >= 0; conj_grad is extended
    // to negative y as an odd function.
    double conj_value(double y) const;
    double conj_grad(double y) const;
    double conj_hess(double y) const;

    /// h*'(r) / (h*''(r) r), continuously extended with 1 at r = 0.
    double alpha(double r) const;
    /// r / h*'(r), continuously extended with ltilde() at r = 0.
    double nu(double r) const;
    /// h(h*'(r)) evaluated without cancellation.
    double value_at_conj_grad(double r) const;

private:
    KernelKind kind_;
    double scale_;
};

enum class Structure { Isotropic, Separable, QuadraticForm };

/// Reference function phi together with the maps of its conjugate that the
/// preconditioned methods consume. Immutable after construction.
///
/// Isotropic:      phi(z) = h(||z||)
/// Separable:      phi(z) = sum_i h(z_i)
/// QuadraticForm:  phi(z) = z'Qz / 2 for a fixed SPD Q (generic, non-kernel
///                 reference; grad phi* is linear and the PN system is solved
///                 in its raw asymmetric form)
class ReferenceFunction {
public:
    static ReferenceFunction isotropic(ScalarKernel kernel, Eigen::Index dim);
    static ReferenceFunction separable(ScalarKernel kernel, Eigen::Index dim);
    static ReferenceFunction quadratic_form(const Matrix& Q);

    Structure structure() const { return structure_; }
    bool is_isotropic() const { return structure_ == Structure::Isotropic; }
    Eigen::Index dim() const { return dim_; }

    /// Throws std::logic_error for the quadratic-form reference.
    const ScalarKernel& kernel() const;
    double ltilde() const;

    double value(const Vector& z) const;
    Vector grad(const Vector& z) const;

    double dual_value(const Vector& y) const;
    Vector dual_grad(const Vector& y) const;
    Matrix dual_hess(const Vector& y) const;
    /// M(y) = [hess phi*(y)]^{-1}.
    Matrix precond_matrix(const Vector& y) const;

    /// hess phi*(y) v and M(y) v without forming the matrices.
    Vector apply_dual_hess(const Vector& y, const Vector& v) const;
    Vector apply_precond(const Vector& y, const Vector& v) const;

    /// Isotropic only (std::logic_error otherwise).
    double alpha(double gradnorm) const;
    double nu(double gradnorm) const;

    /// phi(grad phi*(y)); zero iff y = 0.
    double stationarity(const Vector& y) const;

private:
    ReferenceFunction(Structure s, std::optional<ScalarKernel> k, Eigen::Index dim);

    void check_dim(const Vector& v, const char* what) const;
    void require_isotropic(const char* what) const;

    Structure structure_;
    std::optional<ScalarKernel> kernel_;
    Eigen::Index dim_;
    Matrix Q_;
    Eigen::LLT<Matrix> Q_llt_;
};

}  // namespace pnewton
