#include "pnewton/validation.hpp"

#include <cmath>
#include <limits>
#include <random>
#include <stdexcept>

#include "pnewton/linalg.hpp"

namespace pnewton::validation {

namespace {

template <class A, class B>
double rel(const A& a, const B& b)
{
    const double denom = std::max(a.norm(), b.norm());
    if (denom == 0.0) return 0.0;
    return (a - b).norm() / denom;
}

void require_unit_cosh_1d(const ReferenceFunction& ref)
{
    if (ref.structure() == Structure::QuadraticForm || ref.dim() != 1 || ref.kernel().kind() != KernelKind::Cosh ||
        ref.kernel().scale() != 1.0) {
        throw std::logic_error("estimate_LH_1d: requires the unit-scale Cosh reference in one dimension");
    }
}

}  // namespace

double relative_error(const Vector& a, const Vector& b)
{
    return rel(a, b);
}

double relative_error(const Matrix& a, const Matrix& b)
{
    return rel(a, b);
}

FdReport fd_check(const Objective& obj, const Vector& x, const FdSteps& steps, std::uint64_t seed)
{
    if (!(steps.grad > 0.0) || !(steps.hess > 0.0)) throw std::invalid_argument("fd_check: steps must be positive");
    const Eigen::Index n = obj.dim();
    if (x.size() != n) throw std::invalid_argument("fd_check: point has the wrong dimension");
    const double scale = 1.0 + x.norm();

    FdReport out;
    const double hg = steps.grad * scale;
    Vector g_fd(n);
    Vector e = Vector::Zero(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        e[i] = hg;
        g_fd[i] = (obj.value(x + e) - obj.value(x - e)) / (2.0 * hg);
        e[i] = 0.0;
    }
    out.grad_relerr = rel(obj.gradient(x), g_fd);

    const double hh = steps.hess * scale;
    if (obj.has_dense_hessian()) {
        Matrix H_fd(n, n);
        for (Eigen::Index j = 0; j < n; ++j) {
            e[j] = hh;
            H_fd.col(j) = (obj.gradient(x + e) - obj.gradient(x - e)) / (2.0 * hh);
            e[j] = 0.0;
        }
        out.hess_relerr = rel(obj.hessian(x), H_fd);
    } else {
        out.hess_relerr = std::numeric_limits<double>::quiet_NaN();
    }

    std::mt19937_64 rng(seed);
    std::normal_distribution<double> normal;
    Vector v(n);
    for (Eigen::Index i = 0; i < n; ++i) v[i] = normal(rng);
    v.normalize();
    const Vector hv_fd = (obj.gradient(x + hh * v) - obj.gradient(x - hh * v)) / (2.0 * hh);
    out.hessvec_relerr = rel(obj.hess_vec(x, v), hv_fd);
    return out;
}

std::string_view to_string(LipschitzMethod m)
{
    return m == LipschitzMethod::Grid1D_ClosedForm ? "grid1d_closed_form" : "random_secant";
}

double preconditioned_hessian_1d(const Poly1D& p, double x)
{
    const PolyValues v = p.eval(x);
    return v.d2 / std::hypot(1.0, v.d1);
}

double preconditioned_hessian_1d_derivative(const Poly1D& p, double x)
{
    const PolyValues v = p.eval(x);
    const double q = std::hypot(1.0, v.d1);
    const double a = v.d2 / q;
    return v.d3 / q - a * a * (v.d1 / q);
}

LipschitzEstimate estimate_LH_1d(const Poly1D& p, const ReferenceFunction& ref, double lo, double hi, long grid_n)
{
    require_unit_cosh_1d(ref);
    if (!(hi > lo) || grid_n < 2) throw std::invalid_argument("estimate_LH_1d: need lo < hi and grid_n >= 2");
    LipschitzEstimate out;
    out.method = LipschitzMethod::Grid1D_ClosedForm;
    out.sample_count = grid_n;
    out.box_lo = lo;
    out.box_hi = hi;
    const double h = (hi - lo) / static_cast<double>(grid_n - 1);
    for (long i = 0; i < grid_n; ++i) {
        const double x = i == grid_n - 1 ? hi : lo + static_cast<double>(i) * h;
        const double d = std::abs(preconditioned_hessian_1d_derivative(p, x));
        if (std::isfinite(d)) out.value = std::max(out.value, d);
    }
    return out;
}

Matrix preconditioned_hessian(const Objective& obj, const ReferenceFunction& ref, const Vector& x)
{
    return ref.dual_hess(obj.gradient(x)) * obj.hessian(x);
}

LipschitzEstimate estimate_LH_secant(const Objective& obj, const ReferenceFunction& ref, double lo, double hi,
                                     long n_pairs, std::uint64_t seed, double pair_radius)
{
    if (!(hi > lo) || n_pairs < 1 || !(pair_radius > 0.0)) {
        throw std::invalid_argument("estimate_LH_secant: bad box, pair count or radius");
    }
    if (!obj.has_dense_hessian()) throw std::logic_error("estimate_LH_secant: dense Hessian required");
    const Eigen::Index n = obj.dim();
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> uniform(lo, hi);
    std::normal_distribution<double> normal;

    LipschitzEstimate out;
    out.method = LipschitzMethod::RandomSecant;
    out.sample_count = n_pairs;
    out.box_lo = lo;
    out.box_hi = hi;
    Vector x(n);
    Vector u(n);
    for (long k = 0; k < n_pairs; ++k) {
        for (Eigen::Index i = 0; i < n; ++i) x[i] = uniform(rng);
        for (Eigen::Index i = 0; i < n; ++i) u[i] = normal(rng);
        u.normalize();
        const Vector y = x + pair_radius * u;
        const double dist = (x - y).norm();
        if (dist == 0.0) continue;
        const double ratio =
            linalg::spectral_norm(preconditioned_hessian(obj, ref, x) - preconditioned_hessian(obj, ref, y)) / dist;
        if (std::isfinite(ratio)) out.value = std::max(out.value, ratio);
    }
    return out;
}

AnisoReport check_aniso(const Objective& obj, const ReferenceFunction& ref, double L,
                        const std::vector<std::pair<Vector, Vector>>& pairs)
{
    if (!(L > 0.0)) throw std::invalid_argument("check_aniso: L must be positive");
    AnisoReport out;
    for (std::size_t i = 0; i < pairs.size(); ++i) {
        const auto& [x, xb] = pairs[i];
        const double fx = obj.value(x);
        const double fxb = obj.value(xb);
        const Vector g = ref.dual_grad(obj.gradient(xb));
        const Vector yb = xb - g / L;
        double upper = 0.0;
        try {
            upper = fxb + ref.value(L * (x - yb)) / L - ref.value(g) / L;
        } catch (const std::domain_error&) {
            out.inconclusive.push_back(i);
            continue;
        }
        ++out.checked;
        const double gap = fx - upper;
        const double tol = 1e-12 * (1.0 + std::abs(fx) + std::abs(fxb));
        if (gap > tol) out.violations.push_back({i, gap});
    }
    return out;
}

ConvergenceOrder convergence_order(const std::vector<double>& errors, int last_n)
{
    const double floor = 100.0 * std::numeric_limits<double>::epsilon();
    std::vector<double> usable;
    for (double e : errors) {
        if (std::isfinite(e) && e > floor) usable.push_back(e);
    }
    if (last_n > 0 && static_cast<int>(usable.size()) > last_n) {
        usable.erase(usable.begin(), usable.end() - last_n);
    }
    ConvergenceOrder out;
    out.points = static_cast<int>(usable.size());
    if (usable.size() < 3) {
        out.q = std::numeric_limits<double>::quiet_NaN();
        return out;
    }
    const std::size_t m = usable.size() - 1;
    double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
    for (std::size_t k = 0; k < m; ++k) {
        const double a = std::log(usable[k]);
        const double b = std::log(usable[k + 1]);
        sx += a;
        sy += b;
        sxx += a * a;
        sxy += a * b;
    }
    const double md = static_cast<double>(m);
    const double denom = md * sxx - sx * sx;
    if (!(std::abs(denom) > 0.0)) {
        out.q = std::numeric_limits<double>::quiet_NaN();
        return out;
    }
    out.q = (md * sxy - sx * sy) / denom;
    const double intercept = (sy - out.q * sx) / md;
    double ss = 0.0;
    for (std::size_t k = 0; k < m; ++k) {
        const double r = std::log(usable[k + 1]) - (out.q * std::log(usable[k]) + intercept);
        ss += r * r;
    }
    out.residual = std::sqrt(ss / md);
    out.conclusive = true;
    return out;
}

}  // namespace pnewton::validation
