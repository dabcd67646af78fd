#pragma once

#include <limits>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "pnewton/problems.hpp"
#include "pnewton/reference.hpp"
#include "pnewton/subproblem.hpp"
#include "pnewton/types.hpp"

namespace pnewton {

inline constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

enum class StopMeasure { PrecondGradNorm, GradNorm, StationarityMeasure };

std::string_view to_string(StopMeasure m);
std::optional<StopMeasure> parse_stop_measure(std::string_view name);

struct StoppingCriteria {
    double epsilon = 1e-8;
    StopMeasure measure = StopMeasure::PrecondGradNorm;
    int max_iters = 1000;
};

enum class SolveMethod { Auto, Direct, Krylov };
/// Transformed: symmetric Hessian system with a modified right-hand side
/// (isotropic and separable references). Raw: the asymmetric product system.
enum class SystemForm { Transformed, Raw };

struct LinearSolveOptions {
    SolveMethod method = SolveMethod::Auto;
    SystemForm form = SystemForm::Transformed;
    double krylov_tol = 1e-8;
    int krylov_maxit = 1000;
    int gmres_restart = 50;
};

struct GlobalizedConfig {
    double L = 1.0;
    double alpha = 0.5;
    double sigma_ls = 0.1;
    bool adaptive_L = false;
    int max_backtracks = 60;
    int max_L_doublings = 60;

    void validate() const;
};

struct AdaptiveConfig {
    double sigma0 = 1.0;
    double sigma_min = 1e-8;
    double theta = 0.0;
    double eta1 = 0.1;
    double eta2 = 0.9;
    double gamma1 = 0.5;
    double gamma2 = 2.0;
    double gamma3 = 10.0;

    void validate() const;
};

enum class RunStatus { Converged, StepTooSmall, MaxIters, Diverged, Singular, LinesearchFailed, SubproblemFailed };

std::string_view to_string(RunStatus s);

/// State at x^k and the step taken from it. Step fields are NaN on the final
/// record and wherever they do not apply to the algorithm.
struct IterationRecord {
    int k = 0;
    Vector x;
    double f = kNaN;
    double grad_norm = kNaN;
    double pgrad_norm = kNaN;
    double stationarity = kNaN;
    double step_norm = kNaN;
    double tau = kNaN;
    double sigma = kNaN;
    double lambda = kNaN;
    double rho = kNaN;
    double L = kNaN;
    /// Sufficient-decrease target -gamma sigma_ls phi(g) of the globalized linesearch.
    double decrease_target = kNaN;
    bool accepted = false;
    bool fallback = false;
    bool hard_case = false;
    int backtracks = 0;
    int L_doublings = 0;
    /// Cumulative Hessian-vector products spent in Krylov solves.
    long matvecs = 0;
};

struct SolverTrace {
    std::string algorithm;
    std::vector<IterationRecord> records;
    RunStatus status = RunStatus::MaxIters;
    std::string message;
    Vector x_final;

    /// Number of steps attempted (accepted or rejected).
    int iterations() const { return records.empty() ? 0 : static_cast<int>(records.size()) - 1; }
    const IterationRecord& final_record() const { return records.back(); }
    bool converged() const { return status == RunStatus::Converged || status == RunStatus::StepTooSmall; }
};

class LinesearchError : public std::runtime_error {
public:
    LinesearchError(const std::string& what, double L, int backtracks)
        : std::runtime_error(what), L_(L), backtracks_(backtracks)
    {
    }
    double L() const { return L_; }
    int backtracks() const { return backtracks_; }

private:
    double L_;
    int backtracks_;
};

double stop_value(StopMeasure m, const ReferenceFunction& ref, const Vector& grad);

// ---------------------------------------------------------------------------

/// x - gamma grad phi*(grad f(x)).
Vector pg_step(const Objective& obj, const ReferenceFunction& ref, const Vector& x, double gamma);

struct PnDirection {
    Vector d;
    bool solved = false;
    int matvecs = 0;
};

/// Solves hess phi*(grad f) hess f d = -grad phi*(grad f).
PnDirection pn_direction(const Objective& obj, const ReferenceFunction& ref, const Vector& x,
                         const LinearSolveOptions& opts = {});

SolverTrace run_pg(const Objective& obj, const ReferenceFunction& ref, const Vector& x0, double gamma,
                   const StoppingCriteria& stop);
SolverTrace run_pn(const Objective& obj, const ReferenceFunction& ref, const Vector& x0,
                   const StoppingCriteria& stop, const LinearSolveOptions& opts = {});
/// run_pn with the quadratic kernel at unit scale.
SolverTrace run_newton(const Objective& obj, const Vector& x0, const StoppingCriteria& stop,
                       const LinearSolveOptions& opts = {});

struct GlobalizedStep {
    Vector x_next;
    double f_next = kNaN;
    double tau = kNaN;
    /// L after any doublings made during this step.
    double L = kNaN;
    int L_doublings = 0;
    int backtracks = 0;
    bool fallback = false;
    int matvecs = 0;
    double decrease_target = kNaN;
};

/// One linesearch iteration over x(tau) = x + tau d + (1 - tau) p, tau = 2^-i.
/// With adaptive_L, L is doubled until f(x + p) - f(x) <= -gamma phi(g).
/// Throws LinesearchError when the backtracking or doubling budget runs out.
GlobalizedStep globalized_step(const Objective& obj, const ReferenceFunction& ref, const GlobalizedConfig& cfg,
                               const Vector& x, const LinearSolveOptions& opts = {});

SolverTrace run_globalized(const Objective& obj, const ReferenceFunction& ref, const GlobalizedConfig& cfg,
                           const Vector& x0, const StoppingCriteria& stop, const LinearSolveOptions& opts = {});

struct RegularizedStep {
    Vector x_next;
    SubproblemSolution sub;
};

/// x + s with (s, lambda) from the exact subproblem on
/// A = hess f(x), M = M(grad f(x)), g = grad phi*(grad f(x)). Isotropic references only.
RegularizedStep regularized_step(const Objective& obj, const ReferenceFunction& ref, double sigma, const Vector& x);

SolverTrace run_regularized(const Objective& obj, const ReferenceFunction& ref, double sigma, const Vector& x0,
                            const StoppingCriteria& stop);

struct AdaptiveStep {
    Vector x_next;
    double sigma_next = kNaN;
    double rho = kNaN;
    bool accepted = false;
    bool step_too_small = false;
    SubproblemSolution sub;
};

/// sigma update keeps the lower endpoint of each admissible interval.
double adaptive_sigma_update(const AdaptiveConfig& cfg, double sigma, double rho);

AdaptiveStep adaptive_step(const Objective& obj, const ReferenceFunction& ref, const AdaptiveConfig& cfg,
                           double sigma, const Vector& x);

SolverTrace run_adaptive(const Objective& obj, const ReferenceFunction& ref, const AdaptiveConfig& cfg,
                         const Vector& x0, const StoppingCriteria& stop);

}  // namespace pnewton
