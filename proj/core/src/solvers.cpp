#include "pnewton/solvers.hpp"

#include <cmath>
#include <functional>

namespace pnewton {

std::string_view to_string(StopMeasure m)
{
    switch (m) {
    case StopMeasure::PrecondGradNorm: return "precond_grad_norm";
    case StopMeasure::GradNorm: return "grad_norm";
    case StopMeasure::StationarityMeasure: return "stationarity";
    }
    return "unknown";
}

std::optional<StopMeasure> parse_stop_measure(std::string_view name)
{
    if (name == "precond_grad_norm" || name == "pgrad") return StopMeasure::PrecondGradNorm;
    if (name == "grad_norm" || name == "grad") return StopMeasure::GradNorm;
    if (name == "stationarity") return StopMeasure::StationarityMeasure;
    return std::nullopt;
}

std::string_view to_string(RunStatus s)
{
    switch (s) {
    case RunStatus::Converged: return "converged";
    case RunStatus::StepTooSmall: return "step_too_small";
    case RunStatus::MaxIters: return "max_iters";
    case RunStatus::Diverged: return "diverged";
    case RunStatus::Singular: return "singular";
    case RunStatus::LinesearchFailed: return "linesearch_failed";
    case RunStatus::SubproblemFailed: return "subproblem_failed";
    }
    return "unknown";
}

void GlobalizedConfig::validate() const
{
    if (!(L > 0.0) || !std::isfinite(L)) throw std::invalid_argument("globalized: L must be positive");
    if (!(alpha > 0.0 && alpha < 1.0)) throw std::invalid_argument("globalized: alpha must lie in (0, 1)");
    if (!(sigma_ls > 0.0 && sigma_ls < 1.0)) throw std::invalid_argument("globalized: sigma must lie in (0, 1)");
    if (max_backtracks < 1) throw std::invalid_argument("globalized: max_backtracks must be positive");
    if (max_L_doublings < 1) throw std::invalid_argument("globalized: max_L_doublings must be positive");
}

void AdaptiveConfig::validate() const
{
    if (!(sigma0 > 0.0)) throw std::invalid_argument("adaptive: sigma0 must be positive");
    if (!(sigma_min > 0.0 && sigma_min <= sigma0)) throw std::invalid_argument("adaptive: need 0 < sigma_min <= sigma0");
    if (!(theta >= 0.0)) throw std::invalid_argument("adaptive: theta must be nonnegative");
    if (!(eta1 > 0.0 && eta1 <= eta2 && eta2 < 1.0)) throw std::invalid_argument("adaptive: need 0 < eta1 <= eta2 < 1");
    if (!(gamma1 > 0.0 && gamma1 < 1.0)) throw std::invalid_argument("adaptive: gamma1 must lie in (0, 1)");
    if (!(gamma2 > 1.0 && gamma2 < gamma3)) throw std::invalid_argument("adaptive: need 1 < gamma2 < gamma3");
}

double stop_value(StopMeasure m, const ReferenceFunction& ref, const Vector& grad)
{
    switch (m) {
    case StopMeasure::PrecondGradNorm: return ref.dual_grad(grad).stableNorm();
    case StopMeasure::GradNorm: return grad.stableNorm();
    case StopMeasure::StationarityMeasure: return ref.stationarity(grad);
    }
    return kNaN;
}

namespace {

// Rounding allowance for decrease tests: f values of size |f| cannot resolve
// differences below a few ulps.
double rounding_slack(double f0, double f1)
{
    return 4.0 * std::numeric_limits<double>::epsilon() * std::max(std::abs(f0), std::abs(f1));
}

bool blown_up(const Vector& x, double f, const Vector& grad)
{
    return !x.allFinite() || x.lpNorm<Eigen::Infinity>() > kDivergenceThreshold || !std::isfinite(f) ||
           std::abs(f) > kDivergenceThreshold || !grad.allFinite();
}

enum class StepOutcome { Continue, Stop };

struct StepContext {
    Vector& x;
    IterationRecord& rec;
    long& matvecs;
    RunStatus& status;
    std::string& message;
};

using StepFn = std::function<StepOutcome(StepContext&)>;

SolverTrace run_loop(const std::string& name, const Objective& obj, const ReferenceFunction& ref, const Vector& x0,
                     const StoppingCriteria& stop, const StepFn& step)
{
    if (x0.size() != obj.dim()) throw std::invalid_argument(name + ": x0 has the wrong dimension");
    if (ref.dim() != obj.dim()) throw std::invalid_argument(name + ": reference and objective dimensions differ");
    if (!(stop.epsilon > 0.0)) throw std::invalid_argument(name + ": epsilon must be positive");
    if (stop.max_iters < 0) throw std::invalid_argument(name + ": max_iters must be nonnegative");

    SolverTrace trace;
    trace.algorithm = name;
    Vector x = x0;
    long matvecs = 0;
    for (int k = 0;; ++k) {
        IterationRecord rec;
        rec.k = k;
        rec.x = x;
        rec.matvecs = matvecs;
        const double f = x.allFinite() ? obj.value(x) : kNaN;
        const Vector grad = x.allFinite() ? obj.gradient(x) : Vector::Constant(x.size(), kNaN);
        rec.f = f;
        if (blown_up(x, f, grad)) {
            trace.records.push_back(std::move(rec));
            trace.status = RunStatus::Diverged;
            trace.message = "iterate or objective exceeded the overflow guard";
            break;
        }
        rec.grad_norm = grad.stableNorm();
        rec.pgrad_norm = ref.dual_grad(grad).stableNorm();
        rec.stationarity = ref.stationarity(grad);
        if (stop_value(stop.measure, ref, grad) <= stop.epsilon) {
            trace.records.push_back(std::move(rec));
            trace.status = RunStatus::Converged;
            break;
        }
        if (k >= stop.max_iters) {
            trace.records.push_back(std::move(rec));
            trace.status = RunStatus::MaxIters;
            break;
        }
        RunStatus status = RunStatus::MaxIters;
        std::string message;
        StepContext ctx{x, rec, matvecs, status, message};
        const StepOutcome outcome = step(ctx);
        rec.matvecs = matvecs;
        trace.records.push_back(std::move(rec));
        if (outcome == StepOutcome::Stop) {
            trace.status = status;
            trace.message = message;
            if (status != RunStatus::Diverged) break;
            // Record the offending iterate as the final entry.
            IterationRecord last;
            last.k = k + 1;
            last.x = x;
            last.matvecs = matvecs;
            trace.records.push_back(std::move(last));
            break;
        }
    }
    trace.x_final = trace.records.back().x;
    return trace;
}

ReferenceFunction unit_quadratic(Eigen::Index n)
{
    return ReferenceFunction::isotropic(ScalarKernel(KernelKind::Quadratic, 1.0), n);
}

// Right-hand side r with hess f d = r equivalent to the preconditioned system.
Vector transformed_rhs(const ReferenceFunction& ref, const Vector& grad)
{
    if (ref.structure() == Structure::Isotropic) {
        return -ref.alpha(grad.stableNorm()) * grad;
    }
    const ScalarKernel& h = ref.kernel();
    Vector r(grad.size());
    for (Eigen::Index i = 0; i < grad.size(); ++i) {
        const double y = grad[i];
        r[i] = y == 0.0 ? 0.0 : -h.conj_grad(y) / h.conj_hess(std::abs(y));
    }
    return r;
}

}  // namespace

Vector pg_step(const Objective& obj, const ReferenceFunction& ref, const Vector& x, double gamma)
{
    if (!(gamma > 0.0)) throw std::invalid_argument("pg_step: gamma must be positive");
    return x - gamma * ref.dual_grad(obj.gradient(x));
}

PnDirection pn_direction(const Objective& obj, const ReferenceFunction& ref, const Vector& x,
                         const LinearSolveOptions& opts)
{
    PnDirection out;
    const Vector grad = obj.gradient(x);
    if (!grad.allFinite()) return out;
    if (grad.squaredNorm() == 0.0) {
        out.d = Vector::Zero(x.size());
        out.solved = true;
        return out;
    }
    const bool dense = opts.method == SolveMethod::Direct ||
                       (opts.method == SolveMethod::Auto && obj.has_dense_hessian());
    const bool transformed = opts.form == SystemForm::Transformed && ref.structure() != Structure::QuadraticForm;

    if (transformed) {
        const Vector r = transformed_rhs(ref, grad);
        if (dense) {
            if (auto d = linalg::solve_dense(obj.hessian(x), r, true)) {
                out.d = std::move(*d);
                out.solved = true;
            }
        } else {
            const auto res = linalg::cg_solve([&](const Vector& v) { return obj.hess_vec(x, v); }, r, opts.krylov_tol,
                                              opts.krylov_maxit);
            out.matvecs = res.matvecs;
            if (res.converged && !res.indefinite) {
                out.d = res.x;
                out.solved = true;
            }
        }
    } else {
        const Vector rhs = -ref.dual_grad(grad);
        if (dense) {
            const Matrix B = ref.dual_hess(grad) * obj.hessian(x);
            if (auto d = linalg::solve_dense(B, rhs, false)) {
                out.d = std::move(*d);
                out.solved = true;
            }
        } else {
            const auto res = linalg::gmres_solve(
                [&](const Vector& v) { return ref.apply_dual_hess(grad, obj.hess_vec(x, v)); }, rhs, opts.krylov_tol,
                opts.gmres_restart, opts.krylov_maxit);
            // Every GMRES operator application costs one Hessian-vector product.
            out.matvecs = res.matvecs;
            if (res.converged) {
                out.d = res.x;
                out.solved = true;
            }
        }
    }
    if (out.solved && !out.d.allFinite()) {
        out.solved = false;
        out.d = Vector{};
    }
    return out;
}

SolverTrace run_pg(const Objective& obj, const ReferenceFunction& ref, const Vector& x0, double gamma,
                   const StoppingCriteria& stop)
{
    if (!(gamma > 0.0)) throw std::invalid_argument("run_pg: gamma must be positive");
    return run_loop("pg", obj, ref, x0, stop, [&](StepContext& c) {
        const Vector next = pg_step(obj, ref, c.x, gamma);
        c.rec.step_norm = (next - c.x).norm();
        c.rec.accepted = true;
        c.x = next;
        return StepOutcome::Continue;
    });
}

SolverTrace run_pn(const Objective& obj, const ReferenceFunction& ref, const Vector& x0,
                   const StoppingCriteria& stop, const LinearSolveOptions& opts)
{
    return run_loop("pn", obj, ref, x0, stop, [&](StepContext& c) {
        const PnDirection dir = pn_direction(obj, ref, c.x, opts);
        c.matvecs += dir.matvecs;
        if (!dir.solved) {
            c.status = RunStatus::Singular;
            c.message = "Newton system is singular";
            return StepOutcome::Stop;
        }
        c.rec.step_norm = dir.d.norm();
        c.rec.tau = 1.0;
        c.rec.accepted = true;
        c.x += dir.d;
        if (!c.x.allFinite() || c.x.lpNorm<Eigen::Infinity>() > kDivergenceThreshold) {
            c.status = RunStatus::Diverged;
            c.message = "iterate exceeded the overflow guard";
            return StepOutcome::Stop;
        }
        return StepOutcome::Continue;
    });
}

SolverTrace run_newton(const Objective& obj, const Vector& x0, const StoppingCriteria& stop,
                       const LinearSolveOptions& opts)
{
    SolverTrace t = run_pn(obj, unit_quadratic(obj.dim()), x0, stop, opts);
    t.algorithm = "newton";
    return t;
}

// ---------------------------------------------------------------------------

GlobalizedStep globalized_step(const Objective& obj, const ReferenceFunction& ref, const GlobalizedConfig& cfg,
                               const Vector& x, const LinearSolveOptions& opts)
{
    cfg.validate();
    GlobalizedStep out;
    out.L = cfg.L;
    const double f = obj.value(x);
    const Vector grad = obj.gradient(x);
    const Vector g = ref.dual_grad(grad);
    const double phi_g = ref.stationarity(grad);

    double gamma = cfg.alpha / out.L;
    Vector p = -gamma * g;
    if (cfg.adaptive_L) {
        for (;;) {
            const double fp = obj.value(x + p);
            if (std::isfinite(fp) && fp - f <= -gamma * phi_g + rounding_slack(f, fp)) break;
            if (out.L_doublings >= cfg.max_L_doublings) {
                throw LinesearchError("globalized: L doubling budget exhausted", out.L, 0);
            }
            out.L *= 2.0;
            ++out.L_doublings;
            gamma = cfg.alpha / out.L;
            p = -gamma * g;
        }
    }

    const PnDirection dir = pn_direction(obj, ref, x, opts);
    out.matvecs = dir.matvecs;
    out.fallback = !dir.solved;
    const Vector d = dir.solved ? dir.d : p;
    out.decrease_target = -gamma * cfg.sigma_ls * phi_g;

    double tau = 1.0;
    for (int i = 0; i <= cfg.max_backtracks; ++i) {
        const Vector trial = x + tau * d + (1.0 - tau) * p;
        const double ft = obj.value(trial);
        if (std::isfinite(ft) && ft - f <= out.decrease_target + rounding_slack(f, ft)) {
            out.x_next = trial;
            out.f_next = ft;
            out.tau = tau;
            out.backtracks = i;
            return out;
        }
        if (out.fallback) break;
        tau *= 0.5;
    }
    throw LinesearchError("globalized: no stepsize satisfied sufficient decrease (L too small?)", out.L,
                          cfg.max_backtracks);
}

SolverTrace run_globalized(const Objective& obj, const ReferenceFunction& ref, const GlobalizedConfig& cfg,
                           const Vector& x0, const StoppingCriteria& stop, const LinearSolveOptions& opts)
{
    cfg.validate();
    GlobalizedConfig state = cfg;
    return run_loop("globalized", obj, ref, x0, stop, [&](StepContext& c) {
        GlobalizedStep st;
        try {
            st = globalized_step(obj, ref, state, c.x, opts);
        } catch (const LinesearchError& e) {
            c.rec.L = e.L();
            c.status = RunStatus::LinesearchFailed;
            c.message = e.what();
            return StepOutcome::Stop;
        }
        state.L = st.L;
        c.matvecs += st.matvecs;
        c.rec.L = st.L;
        c.rec.L_doublings = st.L_doublings;
        c.rec.tau = st.tau;
        c.rec.backtracks = st.backtracks;
        c.rec.fallback = st.fallback;
        c.rec.decrease_target = st.decrease_target;
        c.rec.step_norm = (st.x_next - c.x).norm();
        c.rec.accepted = true;
        c.x = st.x_next;
        return StepOutcome::Continue;
    });
}

// ---------------------------------------------------------------------------

namespace {

SubproblemSolution regularized_subproblem(const Objective& obj, const ReferenceFunction& ref, double sigma,
                                          const Vector& x)
{
    if (!ref.is_isotropic()) throw std::logic_error("regularized methods require an isotropic reference");
    if (!obj.has_dense_hessian()) throw std::logic_error("regularized methods require a dense Hessian");
    const Vector grad = obj.gradient(x);
    return solve_exact(obj.hessian(x), ref.precond_matrix(grad), ref.dual_grad(grad), sigma);
}

}  // namespace

RegularizedStep regularized_step(const Objective& obj, const ReferenceFunction& ref, double sigma, const Vector& x)
{
    if (!(sigma > 0.0)) throw std::invalid_argument("regularized_step: sigma must be positive");
    RegularizedStep out;
    out.sub = regularized_subproblem(obj, ref, sigma, x);
    out.x_next = x + out.sub.s;
    return out;
}

SolverTrace run_regularized(const Objective& obj, const ReferenceFunction& ref, double sigma, const Vector& x0,
                            const StoppingCriteria& stop)
{
    if (!(sigma > 0.0)) throw std::invalid_argument("run_regularized: sigma must be positive");
    if (!ref.is_isotropic()) throw std::logic_error("run_regularized: isotropic reference required");
    return run_loop("regularized", obj, ref, x0, stop, [&](StepContext& c) {
        RegularizedStep st;
        try {
            st = regularized_step(obj, ref, sigma, c.x);
        } catch (const std::runtime_error& e) {
            c.status = RunStatus::SubproblemFailed;
            c.message = e.what();
            return StepOutcome::Stop;
        }
        c.rec.sigma = sigma;
        c.rec.lambda = st.sub.lambda;
        c.rec.hard_case = st.sub.hard_case;
        c.rec.step_norm = st.sub.s.norm();
        c.rec.accepted = true;
        c.x = st.x_next;
        return StepOutcome::Continue;
    });
}

double adaptive_sigma_update(const AdaptiveConfig& cfg, double sigma, double rho)
{
    if (rho >= cfg.eta2) return std::max(cfg.sigma_min, cfg.gamma1 * sigma);
    if (rho >= cfg.eta1) return sigma;
    return cfg.gamma2 * sigma;
}

AdaptiveStep adaptive_step(const Objective& obj, const ReferenceFunction& ref, const AdaptiveConfig& cfg,
                           double sigma, const Vector& x)
{
    cfg.validate();
    if (!(sigma > 0.0)) throw std::invalid_argument("adaptive_step: sigma must be positive");
    AdaptiveStep out;
    out.sub = regularized_subproblem(obj, ref, sigma, x);
    const double snorm = out.sub.s.norm();
    if (snorm < 1e-14 * (1.0 + x.norm())) {
        out.step_too_small = true;
        out.x_next = x;
        out.sigma_next = sigma;
        return out;
    }
    const double f = obj.value(x);
    const Vector trial = x + out.sub.s;
    const double ft = obj.value(trial);
    const double model = 0.25 * ref.ltilde() * sigma * snorm * snorm * snorm;
    out.rho = std::isfinite(ft) ? (f - ft) / model : -std::numeric_limits<double>::infinity();
    out.accepted = out.rho >= cfg.eta1;
    out.x_next = out.accepted ? trial : x;
    out.sigma_next = adaptive_sigma_update(cfg, sigma, out.rho);
    return out;
}

SolverTrace run_adaptive(const Objective& obj, const ReferenceFunction& ref, const AdaptiveConfig& cfg,
                         const Vector& x0, const StoppingCriteria& stop)
{
    cfg.validate();
    if (!ref.is_isotropic()) throw std::logic_error("run_adaptive: isotropic reference required");
    double sigma = cfg.sigma0;
    return run_loop("adaptive", obj, ref, x0, stop, [&](StepContext& c) {
        AdaptiveStep st;
        try {
            st = adaptive_step(obj, ref, cfg, sigma, c.x);
        } catch (const std::runtime_error& e) {
            c.status = RunStatus::SubproblemFailed;
            c.message = e.what();
            return StepOutcome::Stop;
        }
        c.rec.sigma = sigma;
        c.rec.lambda = st.sub.lambda;
        c.rec.hard_case = st.sub.hard_case;
        c.rec.step_norm = st.sub.s.norm();
        if (st.step_too_small) {
            c.status = RunStatus::StepTooSmall;
            c.message = "step below 1e-14 (1 + ||x||)";
            return StepOutcome::Stop;
        }
        c.rec.rho = st.rho;
        c.rec.accepted = st.accepted;
        sigma = st.sigma_next;
        c.x = st.x_next;
        return StepOutcome::Continue;
    });
}

}  // namespace pnewton
