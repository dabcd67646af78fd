// Acceptance checks. One PASS/FAIL line per criterion; exit status 1 if any
// selected criterion fails. Usage: acceptance [criterion ...], where a
// criterion is 1..12 or "logreg". No arguments runs everything.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <iostream>
#include <limits>
#include <map>
#include <memory>
#include <mutex>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "commands.hpp"
#include "output.hpp"
#include "pnewton/problems.hpp"
#include "pnewton/solvers.hpp"
#include "pnewton/subproblem.hpp"
#include "pnewton/validation.hpp"
#include "test_support.hpp"

using namespace pnewton;
namespace cli = pnewton::cli;
using pnewton::testing::randn;
using pnewton::testing::random_orthogonal;
using pnewton::testing::random_spd;
using pnewton::testing::with_spectrum;

namespace {

constexpr double kEps = std::numeric_limits<double>::epsilon();
constexpr double kInf = std::numeric_limits<double>::infinity();

struct Result {
    bool pass = false;
    std::string tolerance;
    std::string detail;
};

std::string fmt(double v)
{
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.4g", v);
    return buf;
}

ReferenceFunction iso(KernelKind k, Eigen::Index n, double c = 1.0)
{
    return ReferenceFunction::isotropic(ScalarKernel(k, c), n);
}

Vector scalar(double v)
{
    return Vector::Constant(1, v);
}

// L_H estimate for the unit Cosh reference on [-r, r]; iterates of the
// monotone methods below never leave that box because f is even and
// increasing in |x|.
double lh_hat(int p, double r)
{
    return validation::estimate_LH_1d(Poly1D::power_plus_quadratic(p), iso(KernelKind::Cosh, 1), -r, r, 200001)
        .value;
}

double slope(const std::vector<double>& xs, const std::vector<double>& ys)
{
    const double n = static_cast<double>(xs.size());
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        sx += xs[i];
        sy += ys[i];
        sxx += xs[i] * xs[i];
        sxy += xs[i] * ys[i];
    }
    return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

// ---------------------------------------------------------------------------

Result criterion1()
{
    int bad = 0;
    double worst = 0.0;
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
        const Eigen::Index n = 1 + static_cast<Eigen::Index>(seed);
        const auto q = QuadraticProblem::random(n, 1e3, cli::derive_seed(1, seed));
        const auto ref = ReferenceFunction::quadratic_form(q.Q());
        const Vector x0 = cli::random_normal(n, cli::derive_seed(1, seed, 1), 10.0);
        const auto t = run_pn(q, ref, x0, {1e-9, StopMeasure::GradNorm, 10});
        const double err = t.records.size() > 1 ? (t.records[1].x - q.xstar()).norm() : kInf;
        worst = std::max(worst, err);
        if (!(t.iterations() == 1 && t.converged() && err <= 1e-10)) ++bad;
    }
    return {bad == 0, "||x1 - x*|| <= 1e-10 and K == 1",
            "10 quadratics n=1..10 cond=1e3, failures=" + std::to_string(bad) + ", worst err=" + fmt(worst)};
}

Result criterion2()
{
    const auto f = PolynomialObjective::power_plus_quadratic(4);
    const auto ref = iso(KernelKind::Cosh, 1);
    const auto t = run_pn(f, ref, scalar(0.2), {1e-300, StopMeasure::GradNorm, 20});
    std::vector<double> errs;
    for (const auto& r : t.records) errs.push_back(std::abs(r.x(0)));
    const auto q = validation::convergence_order(errs);

    const double LH = lh_hat(4, 1.0);
    const double mu = f.hessian(t.x_final)(0, 0);
    const double Lt = ref.ltilde();
    const double radius = 2.0 * mu / (3.0 * Lt * LH);
    int checked = 0;
    int violations = 0;
    for (std::size_t k = 0; k + 1 < errs.size(); ++k) {
        const double e = errs[k];
        const double denom = mu - Lt * LH * e;
        if (e == 0.0 || e > radius || denom <= 0.0) continue;
        // 4 eps e covers the rounding of x - d when d cancels x.
        const double rhs = 1.5 * Lt * LH / (2.0 * denom) * e * e + 4.0 * kEps * e;
        ++checked;
        if (errs[k + 1] > rhs) ++violations;
    }
    const bool pass = q.conclusive && q.q >= 1.8 && checked >= 1 && violations == 0;
    return {pass, "q >= 1.8; e_{k+1} <= 1.5 Lt LH e_k^2 / (2(mu - Lt LH e_k)) + 4 eps e_k",
            "q=" + fmt(q.q) + " (" + std::to_string(q.points) + " pts), LH_hat=" + fmt(LH) + " mu_hat=" + fmt(mu) +
                ", tail steps checked=" + std::to_string(checked) + " violations=" + std::to_string(violations)};
}

Result criterion3()
{
    cli::Poly1dOptions o;
    o.kernels = {"quad", "cosh"};
    o.with_globalized = false;
    o.max_iters = 100;
    o.eps = 1e-8;
    const auto start = std::chrono::steady_clock::now();
    const auto rows = cli::poly1d_grid(o);
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();

    int lo = std::numeric_limits<int>::max();
    int hi = 0;
    std::vector<std::string> bad_cells;
    int newton_16_100 = -1;
    for (const auto& r : rows) {
        if (r.method == "newton" && r.p == 16 && r.x0 == 100.0) newton_16_100 = r.converged ? r.iterations : -1;
        if (r.method != "pn-cosh") continue;
        if (!r.converged || r.iterations > 30) {
            bad_cells.push_back("(p=" + std::to_string(r.p) + ",x0=" + fmt(r.x0) + ":" + r.status + ")");
            continue;
        }
        lo = std::min(lo, r.iterations);
        hi = std::max(hi, r.iterations);
    }
    const double ratio = hi > 0 ? static_cast<double>(hi) / lo : kInf;
    const bool pass = bad_cells.empty() && ratio <= 3.0 && newton_16_100 > 50 && secs < 5.0;
    std::string cells;
    for (const auto& c : bad_cells) cells += " " + c;
    return {pass, "pn-cosh converged within 30 its in all 12 cells, max/min <= 3; newton(16,100) > 50; < 5 s",
            "pn-cosh failing cells:" + (cells.empty() ? std::string(" none") : cells) + "; ratio over converged=" +
                fmt(ratio) + "; newton(16,100)=" + std::to_string(newton_16_100) + " its; " + fmt(secs) + " s"};
}

// Sublinear-rate bound on one globalized trace. With n completed steps the
// bound covers K = n - 1: min over phi(g^0..g^{n-1}) against f(x^0) minus the
// best f over x^0..x^n. L_final is the largest L used by a completed step.
// Returns false when no step was completed (nothing to check).
bool globalized_bound_applies(const SolverTrace& t, const GlobalizedConfig& cfg, bool* holds, double* ratio)
{
    int n = 0;
    double L_final = cfg.L;
    for (std::size_t k = 0; k + 1 < t.records.size() && t.records[k].accepted; ++k) {
        ++n;
        L_final = std::max(L_final, t.records[k].L);
    }
    if (n == 0) return false;
    double min_phi = kInf;
    double f_best = t.records[0].f;
    for (int k = 0; k <= n; ++k) {
        if (k < n) min_phi = std::min(min_phi, t.records[k].stationarity);
        f_best = std::min(f_best, t.records[k].f);
    }
    const double bound = L_final * (t.records[0].f - f_best) / (cfg.alpha * cfg.sigma_ls * n);
    *ratio = bound > 0.0 ? min_phi / bound : (min_phi == 0.0 ? 0.0 : kInf);
    *holds = min_phi <= bound + 1e-12;
    return true;
}

cli::MatfactOptions matfact_options()
{
    cli::MatfactOptions o;
    o.cond = {1.0, 1e4, 1e8};
    o.n = 10;
    o.r = 5;
    o.x0_scale = 100.0;
    o.repeats = 20;
    o.kernels = {"cosh", "expabs", "logbar"};
    o.family = "globalized";
    return o;
}

Result criterion4()
{
    const GlobalizedConfig defaults;
    std::mutex mu;
    int checked = 0;
    int stepless = 0;
    double worst = 0.0;
    std::vector<std::string> failures;
    std::vector<std::string> aborted;
    auto check = [&](const std::string& label, const SolverTrace& t) {
        if (t.algorithm != "globalized") return;
        bool ok = true;
        double ratio = 0.0;
        const bool applies = globalized_bound_applies(t, defaults, &ok, &ratio);
        std::lock_guard<std::mutex> lock(mu);
        if (t.status == RunStatus::LinesearchFailed) aborted.push_back(label);
        if (!applies) {
            ++stepless;
            return;
        }
        ++checked;
        worst = std::max(worst, ratio);
        if (!ok) failures.push_back(label);
    };

    cli::Poly1dOptions po;
    po.kernels = {"quad", "cosh", "expabs", "logbar"};
    po.on_trace = check;
    cli::poly1d_grid(po);

    auto mo = matfact_options();
    mo.on_trace = check;
    cli::matfact_runs(mo);

    for (const auto& file : cli::default_logreg_files()) {
        const auto prob = load_libsvm(file);
        const Vector w0 = Vector::Zero(prob.dim());
        const double scale = std::max(1e-12, prob.gradient(w0).norm());
        for (KernelKind k : {KernelKind::Quadratic, KernelKind::Cosh, KernelKind::ExpAbs, KernelKind::LogBarrier}) {
            GlobalizedConfig cfg;
            cfg.adaptive_L = true;
            cfg.max_L_doublings = 200;
            cfg.max_backtracks = 200;
            const auto ref = iso(k, prob.dim(), k == KernelKind::Quadratic ? 1.0 : scale);
            check(file + " " + std::string(to_string(k)),
                  run_globalized(prob, ref, cfg, w0, {1e-6, StopMeasure::GradNorm, 200}));
        }
    }
    std::string names;
    for (std::size_t i = 0; i < std::min<std::size_t>(failures.size(), 5); ++i) names += " [" + failures[i] + "]";
    std::string aborted_names;
    for (const auto& a : aborted) aborted_names += " [" + a + "]";
    return {failures.empty() && checked > 0,
            "min_{k<=K} phi(g^k) <= L_final (f0 - f_best) / (alpha sigma (K+1)) + 1e-12",
            std::to_string(checked) + " globalized runs checked, violations=" + std::to_string(failures.size()) +
                names + ", max lhs/rhs=" + fmt(worst) + "; runs without a completed step=" +
                std::to_string(stepless) + "; linesearch aborts:" +
                (aborted_names.empty() ? std::string(" none") : aborted_names)};
}

double min_eig(const Matrix& A)
{
    return Eigen::SelfAdjointEigenSolver<Matrix>(A, Eigen::EigenvaluesOnly).eigenvalues()(0);
}

bool satisfies_conditions(const Matrix& A, const Matrix& M, const Vector& g, double sigma,
                          const SubproblemSolution& sol, double* worst_res)
{
    const double lam = sol.lambda;
    const double scale = A.norm() + lam * M.norm();
    const double res = ((A + lam * M) * sol.s + M * g).norm() / (scale * (1.0 + sol.s.norm()));
    *worst_res = std::max(*worst_res, res);
    return lam >= 0.0 && res <= 1e-8 && std::abs(lam - sigma * sol.s.norm()) <= sol.tol_lambda * (1.0 + lam) &&
           min_eig(A + lam * M) >= -kPsdTol * scale;
}

Result criterion5()
{
    double worst_res = 0.0;
    int bad_random = 0;
    {
        std::mt19937_64 rng(cli::derive_seed(5, 0));
        std::uniform_int_distribution<int> dim(1, 12);
        std::uniform_real_distribution<double> log_sigma(-3.0, 3.0);
        std::uniform_real_distribution<double> spread(-2.0, 2.0);
        for (int k = 0; k < 500; ++k) {
            const int n = dim(rng);
            Vector d(n);
            for (int i = 0; i < n; ++i) d(i) = spread(rng) * std::pow(10.0, spread(rng));
            const Matrix A = with_spectrum(d, rng);
            const Matrix M = random_spd(n, rng, 1e2);
            const Vector g = randn(n, rng);
            const double sigma = std::pow(10.0, log_sigma(rng));
            if (!satisfies_conditions(A, M, g, sigma, solve_exact(A, M, g, sigma), &worst_res)) ++bad_random;
        }
    }
    int bad_hard = 0;
    {
        std::mt19937_64 rng(cli::derive_seed(5, 1));
        std::uniform_real_distribution<double> unif(0.5, 3.0);
        for (int k = 0; k < 50; ++k) {
            const int n = 2 + k % 7;
            const Matrix M = random_spd(n, rng, 1e2);
            // Prescribed generalized eigenvalues: A = M V diag(xi) V' M with V' M V = I.
            const Matrix L = M.llt().matrixL();
            const Matrix V = L.transpose().triangularView<Eigen::Upper>().solve(random_orthogonal(n, rng));
            Vector xi(n);
            xi(0) = -unif(rng);
            for (int i = 1; i < n; ++i) xi(i) = xi(0) + unif(rng);
            Matrix A = M * V * xi.asDiagonal() * V.transpose() * M;
            A = (0.5 * (A + A.transpose())).eval();
            Vector g = randn(n, rng);
            const Vector Mv1 = M * V.col(0);
            g -= (Mv1.dot(g) / Mv1.squaredNorm()) * Mv1;
            const double lam_s = -xi(0);
            Vector c = Vector::Zero(n);
            const Vector gV = V.transpose() * M * g;
            for (int i = 1; i < n; ++i) c(i) = gV(i) / (xi(i) + lam_s);
            const double sigma = 0.5 * lam_s / (V * c).norm();
            const auto sol = solve_exact(A, M, g, sigma);
            if (!satisfies_conditions(A, M, g, sigma, sol, &worst_res) || !sol.hard_case) ++bad_hard;
        }
    }
    int bad_oracle = 0;
    double worst_oracle = 0.0;
    {
        std::mt19937_64 rng(cli::derive_seed(5, 2));
        std::uniform_real_distribution<double> eig(-3.0, 3.0);
        for (int k = 0; k < 100; ++k) {
            const int n = 1 + k % 8;
            Vector d(n);
            for (int i = 0; i < n; ++i) d(i) = eig(rng);
            const Matrix A = with_spectrum(d, rng);
            const Vector g = randn(n, rng);
            const double sigma = std::pow(10.0, eig(rng) / 1.5);
            const auto sol = solve_exact(A, Matrix::Identity(n, n), g, sigma);
            const Vector s = pnewton::testing::cubic_reg_step_bisect(A, g, sigma);
            const double diff = (sol.s - s).norm();
            worst_oracle = std::max(worst_oracle, diff);
            if (!(diff <= 1e-8)) ++bad_oracle;
        }
    }
    const bool pass = bad_random == 0 && bad_hard == 0 && bad_oracle == 0;
    return {pass, "residual <= 1e-8 (||A||+lam||M||)(1+||s||), |lam - sigma||s||| <= tol (1+lam), psd; oracle <= 1e-8",
            "random failures=" + std::to_string(bad_random) + "/500, hard-case failures=" +
                std::to_string(bad_hard) + "/50, oracle mismatches=" + std::to_string(bad_oracle) +
                "/100, worst rel residual=" + fmt(worst_res) + ", worst ||s - s_oracle||=" + fmt(worst_oracle)};
}

Result criterion6()
{
    int steps = 0;
    int viol1 = 0;
    int viol2 = 0;
    int unconverged = 0;
    for (int p : {2, 4, 8, 16}) {
        for (double x0 : {1.0, 10.0}) {
            const auto f = PolynomialObjective::power_plus_quadratic(p);
            const auto ref = iso(KernelKind::Cosh, 1);
            const double LH = 1.5 * lh_hat(p, x0);
            const double sigma = LH;
            const double Lt = ref.ltilde();
            const auto t = run_regularized(f, ref, sigma, scalar(x0), {1e-10, StopMeasure::PrecondGradNorm, 5000});
            if (!t.converged()) ++unconverged;
            for (std::size_t k = 0; k + 1 < t.records.size(); ++k) {
                const auto& r = t.records[k];
                const auto& n = t.records[k + 1];
                const double s = r.step_norm;
                ++steps;
                const double slack = 4.0 * kEps * std::max(std::abs(r.f), std::abs(n.f));
                if (n.f - r.f > -(Lt * LH / 3.0) * s * s * s + slack) ++viol1;
                if (s * s < 2.0 / (2.0 * sigma + LH) * n.pgrad_norm * (1.0 - 4.0 * kEps)) ++viol2;
            }
        }
    }
    return {viol1 == 0 && viol2 == 0 && unconverged == 0 && steps > 0,
            "sigma = L_H = 1.5 LH_hat; f+ - f <= -Lt L_H ||s||^3/3 (+4 eps |f|); ||s||^2 >= 2||g+||/(2 sigma + L_H)",
            "p in {2,4,8,16} x x0 in {1,10}: " + std::to_string(steps) + " steps, cubic-decrease violations=" +
                std::to_string(viol1) + ", step-length violations=" + std::to_string(viol2) +
                ", unconverged runs=" + std::to_string(unconverged)};
}

Result criterion7()
{
    const auto f = PolynomialObjective::power_plus_quadratic(4);
    const auto ref = iso(KernelKind::Cosh, 1);
    const double x0 = 50.0;
    const double LH = 1.5 * lh_hat(4, x0);
    const double sigma = LH;
    const double f0 = f.value(scalar(x0));
    const double inf_f = 0.0;
    const std::vector<double> eps = {1e-1, 1e-2, 1e-3, 1e-4};
    std::vector<double> log_inv_eps, log_k2, log_k3;
    std::string counts2, counts3;
    bool all_converged = true;
    int bound_violations = 0;
    for (double e : eps) {
        const StoppingCriteria stop{e, StopMeasure::PrecondGradNorm, 100000};
        const auto t2 = run_regularized(f, ref, sigma, scalar(x0), stop);
        const auto t3 = run_adaptive(f, ref, AdaptiveConfig{}, scalar(x0), stop);
        all_converged = all_converged && t2.converged() && t3.converged();
        const int K2 = t2.iterations();
        const int K3 = t3.iterations();
        const double bound = 6.0 * std::pow(sigma, 1.5) * (f0 - inf_f) / (ref.ltilde() * LH * std::pow(e, 1.5));
        if (K2 > bound) ++bound_violations;
        log_inv_eps.push_back(std::log(1.0 / e));
        log_k2.push_back(std::log(std::max(1, K2)));
        log_k3.push_back(std::log(std::max(1, K3)));
        counts2 += " " + std::to_string(K2);
        counts3 += " " + std::to_string(K3);
    }
    const double s2 = slope(log_inv_eps, log_k2);
    const double s3 = slope(log_inv_eps, log_k3);
    const bool pass = all_converged && s2 <= 1.65 && s3 <= 1.65 && bound_violations == 0;
    return {pass, "slope(log K, log 1/eps) <= 1.65; regularized K <= 6 sigma^1.5 (f0 - inf f)/(Lt L_H eps^1.5), L_H = 1.5 LH_hat",
            "regularized K =" + counts2 + " slope=" + fmt(s2) + "; adaptive K =" + counts3 + " slope=" + fmt(s3) +
                "; K-bound violations=" + std::to_string(bound_violations)};
}

Result criterion8()
{
    const auto ref = iso(KernelKind::Cosh, 1);
    const double Lt = ref.ltilde();
    int traces = 0;
    int sigma_low = 0;
    int sigma_high = 0;
    int d4 = 0;
    int success_bound = 0;
    int unconverged = 0;
    for (int p : {2, 4, 8, 16}) {
        for (double x0 : {1.0, 10.0, 50.0}) {
            const auto f = PolynomialObjective::power_plus_quadratic(p);
            const double LH = 1.5 * lh_hat(p, x0);
            const double f0 = f.value(scalar(x0));
            for (double sigma0 : {1e-3, 1.0, 100.0}) {
                AdaptiveConfig cfg;
                cfg.sigma0 = sigma0;
                const double eps = 1e-8;
                const auto t = run_adaptive(f, ref, cfg, scalar(x0), {eps, StopMeasure::PrecondGradNorm, 5000});
                ++traces;
                if (!t.converged()) ++unconverged;
                const double sigma_cap = std::max(cfg.sigma0, cfg.gamma3 * (LH + cfg.theta));
                double sigma_seen = cfg.sigma0;
                int successes = 0;
                const std::size_t steps = t.records.size() - 1;
                for (std::size_t k = 0; k < steps; ++k) {
                    const auto& r = t.records[k];
                    if (r.sigma < cfg.sigma_min) ++sigma_low;
                    if (r.sigma > sigma_cap) ++sigma_high;
                    sigma_seen = std::max(sigma_seen, r.sigma);
                    if (r.accepted) ++successes;
                }
                if (steps > 0 && std::isfinite(t.records[steps - 1].rho)) {
                    const auto& last = t.records[steps - 1];
                    sigma_seen = std::max(sigma_seen, adaptive_sigma_update(cfg, last.sigma, last.rho));
                }
                const int K = t.iterations();
                const double k_bound = successes * (1.0 + std::abs(std::log(cfg.gamma1)) / std::log(cfg.gamma2)) +
                                       std::log(sigma_seen / cfg.sigma0) / std::log(cfg.gamma2);
                if (K > k_bound + 1e-9) ++d4;
                const double s_bound = 4.0 / (cfg.eta1 * Lt * cfg.sigma_min) *
                                           std::pow((2.0 * sigma_cap + LH + cfg.theta) / 2.0, 1.5) * f0 /
                                           std::pow(eps, 1.5) +
                                       1.0;
                if (successes > s_bound) ++success_bound;
            }
        }
    }
    const bool pass = sigma_low == 0 && sigma_high == 0 && d4 == 0 && success_bound == 0 && unconverged == 0;
    return {pass,
            "sigma_k >= sigma_min; sigma_k <= max(sigma0, gamma3 (1.5 LH_hat + theta)); "
            "K <= |S|(1 + |log g1|/log g2) + log(sigma_max/sigma0)/log g2; |S| <= success bound",
            std::to_string(traces) + " adaptive traces (p x x0 x sigma0): sigma_min violations=" +
                std::to_string(sigma_low) + ", sigma_max violations=" + std::to_string(sigma_high) +
                ", iteration-bound violations=" + std::to_string(d4) +
                ", success-bound violations=" + std::to_string(success_bound) +
                ", unconverged=" + std::to_string(unconverged)};
}

Result criterion9()
{
    std::mt19937_64 rng(cli::derive_seed(9, 0));
    std::uniform_real_distribution<double> log_norm(-8.0, 8.0);
    std::uniform_int_distribution<int> dim(1, 6);
    double worst = 0.0;
    int bad = 0;
    for (int i = 0; i < 1000; ++i) {
        const int n = dim(rng);
        Vector y = randn(n, rng);
        const double r = std::pow(10.0, log_norm(rng));
        y *= r / y.norm();
        const auto ref = iso(KernelKind::Cosh, n);
        long double sq = 0.0L;
        for (int j = 0; j < n; ++j) sq += static_cast<long double>(y(j)) * y(j);
        const long double expected = sq / (std::sqrt(1.0L + sq) + 1.0L);
        const double tol = 1e-10 * std::max(1.0L, expected);
        for (double got : {ref.value(ref.dual_grad(y)), ref.stationarity(y)}) {
            const double diff = static_cast<double>(std::abs(static_cast<long double>(got) - expected));
            worst = std::max(worst, diff / static_cast<double>(std::max(1.0L, expected)));
            if (!(diff <= tol)) ++bad;
        }
    }
    return {bad == 0, "|phi(grad phi*(y)) - (sqrt(1+||y||^2) - 1)| <= 1e-10 max(1, reference)",
            "1000 y with ||y|| in [1e-8, 1e8], composed and direct: failures=" + std::to_string(bad) +
                ", worst scaled diff=" + fmt(worst)};
}

bool agree(const Vector& a, const Vector& b, double* worst)
{
    const double scale = std::max(1.0, b.cwiseAbs().maxCoeff());
    const double d = (a - b).cwiseAbs().maxCoeff() / scale;
    *worst = std::max(*worst, d);
    return d <= 1e-12;
}

Result criterion10()
{
    const auto prob = matfact_generate(4, 2, 10.0, cli::derive_seed(10, 0));
    const auto ref = iso(KernelKind::Quadratic, prob.dim());
    int bad_pn = 0, bad_cr = 0, bad_pg = 0;
    double w_pn = 0.0, w_cr = 0.0, w_pg = 0.0;
    for (std::uint64_t k = 0; k < 50; ++k) {
        const Vector x = cli::random_normal(prob.dim(), cli::derive_seed(10, 1, k), 1.0);
        const Matrix H = prob.hessian(x);
        const Vector g = prob.gradient(x);

        const auto pn = pn_direction(prob, ref, x);
        const Vector newton = -H.fullPivLu().solve(g);
        if (!pn.solved || !agree(x + pn.d, x + newton, &w_pn)) ++bad_pn;

        const double sigma = 0.5 + static_cast<double>(k % 10);
        const auto st = regularized_step(prob, ref, sigma, x);
        const Vector cubic = x + pnewton::testing::cubic_reg_step_bisect(H, g, sigma);
        if (!agree(st.x_next, cubic, &w_cr)) ++bad_cr;

        const double gamma = 0.01 * static_cast<double>(1 + k % 5);
        if (!agree(pg_step(prob, ref, x, gamma), x - gamma * g, &w_pg)) ++bad_pg;
    }
    return {bad_pn == 0 && bad_cr == 0 && bad_pg == 0, "elementwise |a - b| <= 1e-12 max(1, ||b||_inf)",
            "50 steps each on matfact 4x2: PN vs Newton mismatches=" + std::to_string(bad_pn) + " (worst " +
                fmt(w_pn) + "), regularized vs cubic regularization=" + std::to_string(bad_cr) + " (worst " +
                fmt(w_cr) + "), PG vs gradient descent=" + std::to_string(bad_pg) + " (worst " + fmt(w_pg) + ")"};
}

Result criterion11()
{
    const auto summary = cli::matfact_summarize(cli::matfact_runs(matfact_options()));
    std::map<double, double> newton;
    for (const auto& s : summary) {
        if (s.method == "globalized-newton") newton[s.cond] = s.median_matvecs;
    }
    int compared = 0;
    std::vector<std::string> losses;
    std::string table;
    for (const auto& s : summary) {
        table += " " + s.method.substr(s.method.find('-') + 1) + "@" + fmt(s.cond) + "=" + fmt(s.median_matvecs);
        if (s.method == "globalized-newton") continue;
        ++compared;
        if (!(s.median_matvecs < newton.at(s.cond))) losses.push_back(s.method + "@" + fmt(s.cond));
    }
    std::string names;
    for (const auto& l : losses) names += " " + l;
    return {losses.empty() && compared == 9, "median matvecs(kernel) < median matvecs(newton) per cond (failed runs = inf)",
            "not below newton:" + (names.empty() ? std::string(" none") : names) + "; medians:" + table};
}

Result criterion12()
{
    std::vector<std::pair<std::string, std::unique_ptr<Objective>>> problems;
    for (int p : {2, 4, 8, 16}) {
        problems.emplace_back("poly1d p=" + std::to_string(p),
                              std::make_unique<PolynomialObjective>(PolynomialObjective::power_plus_quadratic(p)));
    }
    problems.emplace_back("quadratic", std::make_unique<QuadraticProblem>(QuadraticProblem::random(10, 1e4, 12)));
    for (const auto& file : cli::default_logreg_files()) {
        problems.emplace_back("logistic " + file, std::make_unique<LogisticProblem>(load_libsvm(file)));
    }
    problems.emplace_back("matfact", std::make_unique<SymMatFactProblem>(matfact_generate(10, 5, 1e4, 12)));

    double worst_g = 0.0;
    double worst_h = 0.0;
    int bad = 0;
    for (std::size_t i = 0; i < problems.size(); ++i) {
        const auto& obj = *problems[i].second;
        for (std::uint64_t j = 0; j < 20; ++j) {
            const Vector x = cli::random_normal(obj.dim(), cli::derive_seed(12, i, j), 1.0);
            const auto rep = validation::fd_check(obj, x, {}, cli::derive_seed(12, i, j, 1));
            const double h = std::max(std::isnan(rep.hess_relerr) ? 0.0 : rep.hess_relerr, rep.hessvec_relerr);
            worst_g = std::max(worst_g, rep.grad_relerr);
            worst_h = std::max(worst_h, h);
            if (!(rep.grad_relerr <= 1e-5 && h <= 1e-4)) ++bad;
        }
    }
    return {bad == 0, "gradient relerr <= 1e-5, Hessian and Hessian-vector relerr <= 1e-4",
            std::to_string(problems.size()) + " problems x 20 points: failures=" + std::to_string(bad) +
                ", worst grad=" + fmt(worst_g) + ", worst hess=" + fmt(worst_h)};
}

Result logreg_baseline()
{
    const auto rows = cli::logreg_rows(cli::LogregOptions{});
    int newton_rows = 0;
    int newton_fail = 0;
    std::string report;
    for (const auto& r : rows) {
        report += " " + r.method + "@" + std::filesystem::path(r.dataset).stem().string() + "=" +
                  (r.converged ? std::to_string(r.iterations) : r.status);
        if (r.method != "newton") continue;
        ++newton_rows;
        if (!(r.converged && r.iterations <= 100 && r.final_grad_norm <= 1e-6)) ++newton_fail;
    }
    return {newton_rows > 0 && newton_fail == 0,
            "quadratic-kernel baseline: ||grad f|| <= 1e-6 within 100 its (others reported only)",
            "newton failures=" + std::to_string(newton_fail) + "/" + std::to_string(newton_rows) +
                "; iterations:" + report};
}

}  // namespace

int main(int argc, char** argv)
{
    const std::vector<std::pair<std::string, std::function<Result()>>> all = {
        {"1", criterion1},   {"2", criterion2},   {"3", criterion3},   {"4", criterion4},   {"5", criterion5},
        {"6", criterion6},   {"7", criterion7},   {"8", criterion8},   {"9", criterion9},   {"10", criterion10},
        {"11", criterion11}, {"12", criterion12}, {"logreg", logreg_baseline}};
    std::vector<std::string> wanted(argv + 1, argv + argc);
    int failed = 0;
    int ran = 0;
    for (const auto& [name, fn] : all) {
        if (!wanted.empty() && std::find(wanted.begin(), wanted.end(), name) == wanted.end()) continue;
        ++ran;
        Result r;
        try {
            r = fn();
        } catch (const std::exception& e) {
            r = {false, "-", std::string("exception: ") + e.what()};
        }
        if (!r.pass) ++failed;
        std::cout << (r.pass ? "PASS" : "FAIL") << " criterion " << name << " | tol: " << r.tolerance << " | "
                  << r.detail << std::endl;
    }
    if (ran == 0) {
        std::cerr << "no such criterion\n";
        return 2;
    }
    std::cout << (ran - failed) << "/" << ran << " criteria passed" << std::endl;
    return failed == 0 ? 0 : 1;
}
