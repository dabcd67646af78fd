#include "pnewton/reference.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>
#include <string>

namespace pnewton {

namespace {

// Below this u the log1p/expm1 differences lose digits; alternating series take over.
constexpr double kSeriesArg = 1e-2;
constexpr int kSeriesTerms = 14;
// alpha and nu switch to truncated Taylor series below this u; the closed forms
// round to within an ulp of 1 there and can dip below their lower bounds.
constexpr double kRatioSeriesArg = 1e-4;

void require_finite(double v, const char* what)
{
    if (!std::isfinite(v)) {
        throw std::domain_error(std::string(what) + ": non-finite argument");
    }
}

void require_finite(const Vector& v, const char* what)
{
    if (!v.allFinite()) {
        throw std::domain_error(std::string(what) + ": non-finite argument");
    }
}

// sum_{n>=2} coef(n) u^n
template <class Coef>
double tail_series(double u, Coef coef)
{
    double sum = 0.0;
    double pw = u * u;
    for (int n = 2; n < 2 + kSeriesTerms; ++n) {
        sum += coef(n) * pw;
        pw *= u;
    }
    return sum;
}

// u - log1p(u)
double u_minus_log1p(double u)
{
    if (u < kSeriesArg) {
        return tail_series(u, [](int n) { return (n % 2 == 0 ? 1.0 : -1.0) / n; });
    }
    return u - std::log1p(u);
}

double norm_of(const Vector& v)
{
    return v.stableNorm();
}

}  // namespace

std::string_view to_string(KernelKind kind)
{
    switch (kind) {
    case KernelKind::Quadratic: return "quad";
    case KernelKind::Cosh: return "cosh";
    case KernelKind::ExpAbs: return "expabs";
    case KernelKind::LogBarrier: return "logbar";
    }
    return "?";
}

std::optional<KernelKind> parse_kernel_kind(std::string_view name)
{
    if (name == "quad" || name == "quadratic") return KernelKind::Quadratic;
    if (name == "cosh") return KernelKind::Cosh;
    if (name == "expabs") return KernelKind::ExpAbs;
    if (name == "logbar" || name == "logbarrier") return KernelKind::LogBarrier;
    return std::nullopt;
}

// ---------------------------------------------------------------------------
// ScalarKernel

ScalarKernel::ScalarKernel(KernelKind kind, double scale) : kind_(kind), scale_(scale)
{
    if (!(scale > 0.0) || !std::isfinite(scale)) {
        throw std::invalid_argument("ScalarKernel: scale must be positive and finite");
    }
}

bool ScalarKernel::in_domain(double x) const
{
    if (!std::isfinite(x)) return false;
    return kind_ != KernelKind::LogBarrier || std::abs(x) < 1.0;
}

double ScalarKernel::value(double x) const
{
    require_finite(x, "ScalarKernel::value");
    const double a = std::abs(x);
    switch (kind_) {
    case KernelKind::Quadratic:
        return scale_ * 0.5 * x * x;
    case KernelKind::Cosh: {
        const double s = std::sinh(0.5 * a);
        return scale_ * 2.0 * s * s;
    }
    case KernelKind::ExpAbs:
        if (a < kSeriesArg) {
            // sum_{n>=2} a^n / n!
            double fact = 1.0;
            double sum = 0.0;
            double pw = a;
            for (int n = 2; n < 2 + kSeriesTerms; ++n) {
                fact *= n;
                pw *= a;
                sum += pw / fact;
            }
            return scale_ * sum;
        }
        return scale_ * (std::expm1(a) - a);
    case KernelKind::LogBarrier:
        if (a >= 1.0) {
            std::ostringstream os;
            os << "LogBarrier kernel: |x| = " << a << " outside the domain |x| < 1";
            throw std::domain_error(os.str());
        }
        if (a < kSeriesArg) {
            return scale_ * tail_series(a, [](int n) { return 1.0 / n; });
        }
        return scale_ * (-a - std::log1p(-a));
    }
    return 0.0;
}

double ScalarKernel::derivative(double x) const
{
    require_finite(x, "ScalarKernel::derivative");
    switch (kind_) {
    case KernelKind::Quadratic: return scale_ * x;
    case KernelKind::Cosh: return scale_ * std::sinh(x);
    case KernelKind::ExpAbs: return scale_ * std::copysign(std::expm1(std::abs(x)), x);
    case KernelKind::LogBarrier:
        if (std::abs(x) >= 1.0) throw std::domain_error("LogBarrier kernel: |x| >= 1");
        return scale_ * x / (1.0 - std::abs(x));
    }
    return 0.0;
}

double ScalarKernel::second_derivative(double x) const
{
    require_finite(x, "ScalarKernel::second_derivative");
    switch (kind_) {
    case KernelKind::Quadratic: return scale_;
    case KernelKind::Cosh: return scale_ * std::cosh(x);
    case KernelKind::ExpAbs: return scale_ * std::exp(std::abs(x));
    case KernelKind::LogBarrier: {
        if (std::abs(x) >= 1.0) throw std::domain_error("LogBarrier kernel: |x| >= 1");
        const double t = 1.0 - std::abs(x);
        return scale_ / (t * t);
    }
    }
    return 0.0;
}

double ScalarKernel::conj_value(double y) const
{
    require_finite(y, "ScalarKernel::conj_value");
    const double u = std::abs(y) / scale_;
    switch (kind_) {
    case KernelKind::Quadratic:
        return scale_ * 0.5 * u * u;
    case KernelKind::Cosh:
        return scale_ * (u * std::asinh(u) - u * u / (1.0 + std::hypot(1.0, u)));
    case KernelKind::ExpAbs:
        if (u < kSeriesArg) {
            return scale_ * tail_series(u, [](int n) { return (n % 2 == 0 ? 1.0 : -1.0) / (n * (n - 1.0)); });
        }
        return scale_ * ((1.0 + u) * std::log1p(u) - u);
    case KernelKind::LogBarrier:
        return scale_ * u_minus_log1p(u);
    }
    return 0.0;
}

double ScalarKernel::conj_grad(double y) const
{
    require_finite(y, "ScalarKernel::conj_grad");
    const double u = std::abs(y) / scale_;
    double g = 0.0;
    switch (kind_) {
    case KernelKind::Quadratic: g = u; break;
    case KernelKind::Cosh: g = std::asinh(u); break;
    case KernelKind::ExpAbs: g = std::log1p(u); break;
    case KernelKind::LogBarrier: g = u / (1.0 + u); break;
    }
    return std::copysign(g, y);
}

double ScalarKernel::conj_hess(double y) const
{
    require_finite(y, "ScalarKernel::conj_hess");
    const double u = std::abs(y) / scale_;
    switch (kind_) {
    case KernelKind::Quadratic: return 1.0 / scale_;
    case KernelKind::Cosh: return 1.0 / (scale_ * std::hypot(1.0, u));
    case KernelKind::ExpAbs: return 1.0 / (scale_ * (1.0 + u));
    case KernelKind::LogBarrier: return 1.0 / (scale_ * (1.0 + u) * (1.0 + u));
    }
    return 0.0;
}

double ScalarKernel::alpha(double r) const
{
    require_finite(r, "ScalarKernel::alpha");
    if (r < 0.0) throw std::domain_error("ScalarKernel::alpha: negative gradient norm");
    const double u = r / scale_;
    switch (kind_) {
    case KernelKind::Quadratic: return 1.0;
    case KernelKind::Cosh:
        if (u < kRatioSeriesArg) return 1.0 + u * u * (1.0 / 3.0 - 2.0 * u * u / 15.0);
        return std::asinh(u) * std::hypot(1.0, u) / u;
    case KernelKind::ExpAbs:
        if (u < kRatioSeriesArg) return 1.0 + u * (0.5 - u * (1.0 / 6.0 - u / 12.0));
        return std::log1p(u) * (1.0 + u) / u;
    case KernelKind::LogBarrier: return 1.0 + u;
    }
    return 1.0;
}

double ScalarKernel::nu(double r) const
{
    require_finite(r, "ScalarKernel::nu");
    if (r < 0.0) throw std::domain_error("ScalarKernel::nu: negative gradient norm");
    const double u = r / scale_;
    switch (kind_) {
    case KernelKind::Quadratic: return scale_;
    case KernelKind::Cosh:
        if (u < kRatioSeriesArg) return scale_ * (1.0 + u * u * (1.0 / 6.0 - 17.0 * u * u / 360.0));
        return scale_ * u / std::asinh(u);
    case KernelKind::ExpAbs:
        if (u < kRatioSeriesArg) return scale_ * (1.0 + u * (0.5 - u * (1.0 / 12.0 - u / 24.0)));
        return scale_ * u / std::log1p(u);
    case KernelKind::LogBarrier: return scale_ * (1.0 + u);
    }
    return scale_;
}

double ScalarKernel::value_at_conj_grad(double r) const
{
    require_finite(r, "ScalarKernel::value_at_conj_grad");
    const double u = std::abs(r) / scale_;
    switch (kind_) {
    case KernelKind::Quadratic:
        return scale_ * 0.5 * u * u;
    case KernelKind::Cosh:
        // cosh(asinh u) - 1 = sqrt(1 + u^2) - 1
        return scale_ * u * u / (1.0 + std::hypot(1.0, u));
    case KernelKind::ExpAbs:
        return scale_ * u_minus_log1p(u);
    case KernelKind::LogBarrier:
        if (u < kSeriesArg) {
            return scale_ * tail_series(u, [](int n) { return (n % 2 == 0 ? 1.0 : -1.0) * (n - 1.0) / n; });
        }
        return scale_ * (std::log1p(u) - u / (1.0 + u));
    }
    return 0.0;
}

// ---------------------------------------------------------------------------
// ReferenceFunction

ReferenceFunction::ReferenceFunction(Structure s, std::optional<ScalarKernel> k, Eigen::Index dim)
    : structure_(s), kernel_(k), dim_(dim)
{
    if (dim <= 0) throw std::invalid_argument("ReferenceFunction: dimension must be positive");
}

ReferenceFunction ReferenceFunction::isotropic(ScalarKernel kernel, Eigen::Index dim)
{
    return ReferenceFunction(Structure::Isotropic, kernel, dim);
}

ReferenceFunction ReferenceFunction::separable(ScalarKernel kernel, Eigen::Index dim)
{
    return ReferenceFunction(Structure::Separable, kernel, dim);
}

ReferenceFunction ReferenceFunction::quadratic_form(const Matrix& Q)
{
    if (Q.rows() != Q.cols()) throw std::invalid_argument("quadratic_form: Q must be square");
    ReferenceFunction ref(Structure::QuadraticForm, std::nullopt, Q.rows());
    ref.Q_ = 0.5 * (Q + Q.transpose());
    ref.Q_llt_.compute(ref.Q_);
    if (ref.Q_llt_.info() != Eigen::Success) {
        throw std::domain_error("quadratic_form: Q is not positive definite");
    }
    return ref;
}

const ScalarKernel& ReferenceFunction::kernel() const
{
    if (!kernel_) throw std::logic_error("quadratic-form reference has no scalar kernel");
    return *kernel_;
}

double ReferenceFunction::ltilde() const
{
    return kernel().ltilde();
}

void ReferenceFunction::check_dim(const Vector& v, const char* what) const
{
    if (v.size() != dim_) {
        std::ostringstream os;
        os << what << ": expected dimension " << dim_ << ", got " << v.size();
        throw std::invalid_argument(os.str());
    }
}

void ReferenceFunction::require_isotropic(const char* what) const
{
    if (structure_ != Structure::Isotropic) {
        throw std::logic_error(std::string(what) + " is only defined for isotropic references");
    }
}

double ReferenceFunction::value(const Vector& z) const
{
    check_dim(z, "phi");
    require_finite(z, "phi");
    switch (structure_) {
    case Structure::Isotropic: {
        const double r = norm_of(z);
        if (!kernel_->in_domain(r)) {
            std::ostringstream os;
            os << "phi: ||z|| = " << r << " outside the domain ||z|| < 1";
            throw std::domain_error(os.str());
        }
        return kernel_->value(r);
    }
    case Structure::Separable: {
        double sum = 0.0;
        for (Eigen::Index i = 0; i < z.size(); ++i) {
            if (!kernel_->in_domain(z[i])) {
                std::ostringstream os;
                os << "phi: |z_" << i << "| = " << std::abs(z[i]) << " outside the domain |z_i| < 1";
                throw std::domain_error(os.str());
            }
            sum += kernel_->value(z[i]);
        }
        return sum;
    }
    case Structure::QuadraticForm:
        return 0.5 * z.dot(Q_ * z);
    }
    return 0.0;
}

Vector ReferenceFunction::grad(const Vector& z) const
{
    check_dim(z, "grad phi");
    require_finite(z, "grad phi");
    switch (structure_) {
    case Structure::Isotropic: {
        const double r = norm_of(z);
        if (r == 0.0) return Vector::Zero(dim_);
        return (kernel_->derivative(r) / r) * z;
    }
    case Structure::Separable: {
        Vector out(dim_);
        for (Eigen::Index i = 0; i < dim_; ++i) out[i] = kernel_->derivative(z[i]);
        return out;
    }
    case Structure::QuadraticForm:
        return Q_ * z;
    }
    return {};
}

double ReferenceFunction::dual_value(const Vector& y) const
{
    check_dim(y, "phi*");
    require_finite(y, "phi*");
    switch (structure_) {
    case Structure::Isotropic:
        return kernel_->conj_value(norm_of(y));
    case Structure::Separable: {
        double sum = 0.0;
        for (Eigen::Index i = 0; i < dim_; ++i) sum += kernel_->conj_value(y[i]);
        return sum;
    }
    case Structure::QuadraticForm:
        return 0.5 * y.dot(Q_llt_.solve(y));
    }
    return 0.0;
}

Vector ReferenceFunction::dual_grad(const Vector& y) const
{
    check_dim(y, "grad phi*");
    require_finite(y, "grad phi*");
    switch (structure_) {
    case Structure::Isotropic: {
        const double r = norm_of(y);
        if (r == 0.0) return Vector::Zero(dim_);
        return kernel_->conj_grad(r) * (y / r);
    }
    case Structure::Separable: {
        Vector out(dim_);
        for (Eigen::Index i = 0; i < dim_; ++i) out[i] = kernel_->conj_grad(y[i]);
        return out;
    }
    case Structure::QuadraticForm:
        return Q_llt_.solve(y);
    }
    return {};
}

Matrix ReferenceFunction::dual_hess(const Vector& y) const
{
    check_dim(y, "hess phi*");
    require_finite(y, "hess phi*");
    switch (structure_) {
    case Structure::Isotropic: {
        const double r = norm_of(y);
        const double radial = kernel_->conj_hess(r);
        if (r == 0.0) return radial * Matrix::Identity(dim_, dim_);
        const Vector e = y / r;
        const double tangential = 1.0 / kernel_->nu(r);
        Matrix out = tangential * Matrix::Identity(dim_, dim_);
        out.noalias() += (radial - tangential) * e * e.transpose();
        return out;
    }
    case Structure::Separable: {
        Vector d(dim_);
        for (Eigen::Index i = 0; i < dim_; ++i) d[i] = kernel_->conj_hess(y[i]);
        return d.asDiagonal();
    }
    case Structure::QuadraticForm:
        return Q_llt_.solve(Matrix::Identity(dim_, dim_));
    }
    return {};
}

Matrix ReferenceFunction::precond_matrix(const Vector& y) const
{
    check_dim(y, "precond_matrix");
    require_finite(y, "precond_matrix");
    switch (structure_) {
    case Structure::Isotropic: {
        const double r = norm_of(y);
        const double radial = 1.0 / kernel_->conj_hess(r);
        if (r == 0.0) return radial * Matrix::Identity(dim_, dim_);
        const Vector e = y / r;
        const double tangential = kernel_->nu(r);
        Matrix out = tangential * Matrix::Identity(dim_, dim_);
        out.noalias() += (radial - tangential) * e * e.transpose();
        return out;
    }
    case Structure::Separable: {
        Vector d(dim_);
        for (Eigen::Index i = 0; i < dim_; ++i) d[i] = 1.0 / kernel_->conj_hess(y[i]);
        return d.asDiagonal();
    }
    case Structure::QuadraticForm:
        return Q_;
    }
    return {};
}

Vector ReferenceFunction::apply_dual_hess(const Vector& y, const Vector& v) const
{
    check_dim(y, "apply_dual_hess");
    check_dim(v, "apply_dual_hess");
    switch (structure_) {
    case Structure::Isotropic: {
        const double r = norm_of(y);
        const double radial = kernel_->conj_hess(r);
        if (r == 0.0) return radial * v;
        const Vector e = y / r;
        const double tangential = 1.0 / kernel_->nu(r);
        return tangential * v + (radial - tangential) * e.dot(v) * e;
    }
    case Structure::Separable: {
        Vector out(dim_);
        for (Eigen::Index i = 0; i < dim_; ++i) out[i] = kernel_->conj_hess(y[i]) * v[i];
        return out;
    }
    case Structure::QuadraticForm:
        return Q_llt_.solve(v);
    }
    return {};
}

Vector ReferenceFunction::apply_precond(const Vector& y, const Vector& v) const
{
    check_dim(y, "apply_precond");
    check_dim(v, "apply_precond");
    switch (structure_) {
    case Structure::Isotropic: {
        const double r = norm_of(y);
        const double radial = 1.0 / kernel_->conj_hess(r);
        if (r == 0.0) return radial * v;
        const Vector e = y / r;
        const double tangential = kernel_->nu(r);
        return tangential * v + (radial - tangential) * e.dot(v) * e;
    }
    case Structure::Separable: {
        Vector out(dim_);
        for (Eigen::Index i = 0; i < dim_; ++i) out[i] = v[i] / kernel_->conj_hess(y[i]);
        return out;
    }
    case Structure::QuadraticForm:
        return Q_ * v;
    }
    return {};
}

double ReferenceFunction::alpha(double gradnorm) const
{
    require_isotropic("alpha");
    return kernel_->alpha(gradnorm);
}

double ReferenceFunction::nu(double gradnorm) const
{
    require_isotropic("nu");
    return kernel_->nu(gradnorm);
}

double ReferenceFunction::stationarity(const Vector& y) const
{
    check_dim(y, "stationarity");
    require_finite(y, "stationarity");
    switch (structure_) {
    case Structure::Isotropic:
        return kernel_->value_at_conj_grad(norm_of(y));
    case Structure::Separable: {
        double sum = 0.0;
        for (Eigen::Index i = 0; i < dim_; ++i) sum += kernel_->value_at_conj_grad(y[i]);
        return sum;
    }
    case Structure::QuadraticForm:
        return 0.5 * y.dot(Q_llt_.solve(y));
    }
    return 0.0;
}

}  // namespace pnewton
