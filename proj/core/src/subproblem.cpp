#include "pnewton/subproblem.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace pnewton {

namespace {

constexpr double kEps = std::numeric_limits<double>::epsilon();
constexpr int kMaxRootIterations = 300;

void check_inputs(const Matrix& A, const Matrix& M, const Vector& g)
{
    if (A.rows() != A.cols() || M.rows() != M.cols() || A.rows() != M.rows() || g.size() != A.rows()) {
        throw std::invalid_argument("subproblem: dimension mismatch");
    }
    if (A.rows() == 0) throw std::invalid_argument("subproblem: empty system");
    if (!A.allFinite() || !M.allFinite() || !g.allFinite()) {
        throw std::domain_error("subproblem: non-finite input");
    }
}

// Secular machinery restricted to the components flagged active.
class Secular {
public:
    Secular(const PencilData& pd, double sigma, std::vector<bool> active)
        : pd_(pd), sigma_(sigma), active_(std::move(active))
    {
    }

    Vector coeffs(double lambda) const
    {
        const Vector& xi = pd_.decomp.xi;
        Vector c = Vector::Zero(xi.size());
        for (Eigen::Index i = 0; i < xi.size(); ++i) {
            if (active_[static_cast<std::size_t>(i)]) c[i] = pd_.gV[i] / (xi[i] + lambda);
        }
        return c;
    }

    Vector step(double lambda) const { return -(pd_.decomp.V * coeffs(lambda)); }

    /// sigma ||s(lambda)|| - lambda; same sign as Psi.
    double r(double lambda) const { return sigma_ * step(lambda).norm() - lambda; }

private:
    const PencilData& pd_;
    double sigma_;
    std::vector<bool> active_;
};

struct RootResult {
    double lambda;
    int iterations;
};

RootResult find_root(const Secular& sec, double lo, double hi, double tol)
{
    double a = lo;
    double b = hi;
    double fa = sec.r(a);
    double fb = sec.r(b);
    int side = 0;
    double width = b - a;
    for (int it = 1; it <= kMaxRootIterations; ++it) {
        // Illinois false position, with a bisection step whenever the bracket
        // fails to halve over a couple of iterations.
        double m = (a * fb - b * fa) / (fb - fa);
        if (!(m > a && m < b) || (it % 3 == 0 && (b - a) > 0.5 * width)) {
            m = 0.5 * (a + b);
            if (it % 3 == 0) width = b - a;
        }
        const double fm = sec.r(m);
        if (std::abs(fm) <= tol * (1.0 + m)) return {m, it};
        if (fm > 0.0) {
            a = m;
            fa = fm;
            if (side == 1) fb *= 0.5;
            side = 1;
        } else {
            b = m;
            fb = fm;
            if (side == -1) fa *= 0.5;
            side = -1;
        }
        if (b - a <= 4.0 * kEps * std::max(1.0, b)) {
            const double ra = sec.r(a);
            const double rb = sec.r(b);
            return {std::abs(ra) <= std::abs(rb) ? a : b, it};
        }
    }
    const double ra = sec.r(a);
    const double rb = sec.r(b);
    return {std::abs(ra) <= std::abs(rb) ? a : b, kMaxRootIterations};
}

// s = s_s + alpha v_1 with ||s|| = lambda_s / sigma; the bottom-eigenspace
// components of the right-hand side are treated as zero.
Vector hard_case_step(const PencilData& pd, const std::vector<bool>& active, double sigma)
{
    const Vector& xi = pd.decomp.xi;
    const Matrix& V = pd.decomp.V;
    std::vector<bool> outside = active;
    for (int i : pd.hard_index_set) outside[static_cast<std::size_t>(i)] = false;
    Vector c = Vector::Zero(xi.size());
    for (Eigen::Index i = 0; i < xi.size(); ++i) {
        if (outside[static_cast<std::size_t>(i)]) c[i] = pd.gV[i] / (xi[i] + pd.lambda_s);
    }
    const Vector s_s = -(V * c);
    const Vector v1 = V.col(pd.hard_index_set.front());

    const double qa = v1.squaredNorm();
    const double qb = 2.0 * v1.dot(s_s);
    const double target = pd.lambda_s / sigma;
    const double qc = s_s.squaredNorm() - target * target;
    const double disc = std::max(0.0, qb * qb - 4.0 * qa * qc);
    double alpha = 0.0;
    if (qb == 0.0) {
        alpha = std::sqrt(std::max(0.0, -qc / qa));
    } else {
        const double q = -0.5 * (qb + std::copysign(std::sqrt(disc), qb));
        const double r1 = q / qa;
        const double r2 = q != 0.0 ? qc / q : 0.0;
        if (std::abs(r1) < std::abs(r2)) {
            alpha = r1;
        } else if (std::abs(r2) < std::abs(r1)) {
            alpha = r2;
        } else {
            alpha = std::max(r1, r2);
        }
    }
    return s_s + alpha * v1;
}

SubproblemSolution solve_pencil(const Matrix& A, const Matrix& M, const Vector& g, const PencilData& pd,
                                const std::vector<bool>& active, double sigma, double tol_lambda)
{
    if (!(sigma > 0.0) || !std::isfinite(sigma)) throw std::invalid_argument("subproblem: sigma must be positive");
    if (!(tol_lambda > 0.0)) throw std::invalid_argument("subproblem: tol_lambda must be positive");

    const Vector& xi = pd.decomp.xi;
    const Matrix& V = pd.decomp.V;
    const Eigen::Index n = xi.size();
    const double xi1 = xi[0];
    const double lambda_s = pd.lambda_s;

    Vector gV_active = Vector::Zero(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        if (active[static_cast<std::size_t>(i)]) gV_active[i] = pd.gV[i];
    }
    const double gV_norm = gV_active.norm();
    if (gV_norm == 0.0) throw std::invalid_argument("subproblem: right-hand side vanishes");

    const Secular sec(pd, sigma, active);
    const double eps0 = 1e-12 * (1.0 + lambda_s);

    SubproblemSolution out;
    out.sigma = sigma;
    out.tol_lambda = tol_lambda;

    bool hard = false;
    if (xi1 < 0.0) {
        const bool orthogonal = std::all_of(pd.hard_index_set.begin(), pd.hard_index_set.end(), [&](int i) {
            return std::abs(gV_active[i]) <= kHardCaseTol * gV_norm;
        });
        if (orthogonal) {
            std::vector<bool> outside = active;
            for (int i : pd.hard_index_set) outside[static_cast<std::size_t>(i)] = false;
            const bool any_outside = std::any_of(outside.begin(), outside.end(), [](bool b) { return b; });
            const double r_red = any_outside ? Secular(pd, sigma, outside).r(lambda_s + eps0) : -(lambda_s + eps0);
            hard = r_red <= 0.0;
        }
    }

    double lambda = lambda_s;
    if (!hard) {
        double lo = (lambda_s == 0.0 && xi1 > 0.0) ? 0.0 : lambda_s + eps0;
        double r_lo = sec.r(lo);
        if (!(r_lo > 0.0)) {
            // The root sits closer to lambda_s than eps0.
            double gap = lo - lambda_s;
            while (!(r_lo > 0.0) && gap > 4.0 * kEps * (1.0 + lambda_s)) {
                gap *= 1.0 / 16.0;
                lo = lambda_s + gap;
                r_lo = sec.r(lo);
            }
            if (!(r_lo > 0.0)) hard = lambda_s > 0.0;
        }
        if (!hard) {
            if (!(r_lo > 0.0)) {
                lambda = lo;
            } else {
                double hi = std::max(1.0, 2.0 * lambda_s);
                double r_hi = sec.r(hi);
                while (r_hi >= 0.0) {
                    lo = hi;
                    hi *= 2.0;
                    if (!std::isfinite(hi) || hi > kDivergenceThreshold) {
                        throw std::runtime_error("subproblem: failed to bracket the secular root");
                    }
                    r_hi = sec.r(hi);
                }
                const RootResult root = find_root(sec, lo, hi, tol_lambda);
                lambda = root.lambda;
                out.root_iterations = root.iterations;
            }
        }
    }

    // z is the part of g the active set leaves out.
    Vector z = Vector::Zero(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        if (!active[static_cast<std::size_t>(i)]) z += pd.gV[i] * V.col(i);
    }
    const Vector rhs = -(M * (g - z));
    const Matrix K = A + lambda * M;

    Vector s = hard ? hard_case_step(pd, active, sigma) : sec.step(lambda);
    double residual = (K * s - rhs).norm();
    if (!hard) {
        // One refinement step with (A + lambda M)^{-1} = V (Xi + lambda)^{-1} V'.
        const Vector corr = V * ((V.transpose() * (rhs - K * s)).array() / (xi.array() + lambda)).matrix();
        const Vector s_ref = s + corr;
        const double res_ref = (K * s_ref - rhs).norm();
        if (res_ref < residual &&
            std::abs(sigma * s_ref.norm() - lambda) <= std::max(std::abs(sigma * s.norm() - lambda),
                                                               tol_lambda * (1.0 + lambda))) {
            s = s_ref;
            residual = res_ref;
        }
        // Near lambda_s the slope of sigma ||s(lambda)|| is large, so an
        // ulp-accurate lambda can still leave a visible mismatch. Rescaling s
        // closes it at a relative residual cost of |sigma ||s|| - lambda| / lambda.
        const double s_norm = s.norm();
        if (lambda > 0.0 && s_norm > 0.0 && std::abs(sigma * s_norm - lambda) > tol_lambda * (1.0 + lambda)) {
            s *= lambda / (sigma * s_norm);
            residual = (K * s - rhs).norm();
        }
    }

    out.s = std::move(s);
    out.lambda = lambda;
    out.z = std::move(z);
    out.hard_case = hard;
    out.residual = residual;
    out.psd_margin = linalg::min_eigenvalue(K);
    out.scale = A.norm() + lambda * M.norm();
    return out;
}

}  // namespace

PencilData build_pencil(const Matrix& A, const Matrix& M, const Vector& g)
{
    check_inputs(A, M, g);
    if (g.squaredNorm() == 0.0) throw std::invalid_argument("build_pencil: g must be nonzero");
    PencilData pd;
    pd.decomp = linalg::gen_sym_eig(A, M);
    const Matrix& V = pd.decomp.V;
    pd.gV = V.transpose() * (M * g);
    pd.G = V.transpose() * V;
    const double xi1 = pd.decomp.xi[0];
    pd.lambda_s = std::max(-xi1, 0.0);
    const double tie = kTieTol * std::max(1.0, std::abs(xi1));
    for (Eigen::Index i = 0; i < pd.decomp.xi.size(); ++i) {
        if (pd.decomp.xi[i] - xi1 <= tie) pd.hard_index_set.push_back(static_cast<int>(i));
    }
    return pd;
}

double psi_eval(const PencilData& pd, double lambda, double sigma)
{
    if (!(lambda > pd.lambda_s)) throw std::domain_error("psi_eval: lambda must exceed lambda_s");
    if (!(sigma > 0.0)) throw std::domain_error("psi_eval: sigma must be positive");
    const Vector c = pd.gV.array() / (pd.decomp.xi.array() + lambda);
    return c.dot(pd.G * c) - (lambda * lambda) / (sigma * sigma);
}

SubproblemSolution solve_exact(const Matrix& A, const Matrix& M, const Vector& g, double sigma, double tol_lambda)
{
    const PencilData pd = build_pencil(A, M, g);
    return solve_pencil(A, M, g, pd, std::vector<bool>(static_cast<std::size_t>(g.size()), true), sigma,
                        tol_lambda);
}

SubproblemSolution solve_truncated(const Matrix& A, const Matrix& M, const Vector& g, double sigma, int drop,
                                   double tol_lambda)
{
    const PencilData pd = build_pencil(A, M, g);
    const auto n = static_cast<int>(g.size());
    if (drop < 0 || drop >= n) throw std::invalid_argument("solve_truncated: need 0 <= drop < n");
    std::vector<bool> active(static_cast<std::size_t>(n), true);
    for (int i = n - drop; i < n; ++i) active[static_cast<std::size_t>(i)] = false;
    return solve_pencil(A, M, g, pd, active, sigma, tol_lambda);
}

bool accept_inexact(const SubproblemSolution& sol, double theta)
{
    const double snorm = sol.s.norm();
    const double znorm = sol.z.size() == 0 ? 0.0 : sol.z.norm();
    const bool small_residual = znorm <= 0.5 * theta * snorm * snorm;
    const bool psd = sol.psd_margin >= -kPsdTol * sol.scale;
    const bool consistent = std::abs(sol.lambda - sol.sigma * snorm) <= sol.tol_lambda * (1.0 + sol.lambda);
    return small_residual && psd && consistent;
}

}  // namespace pnewton
