#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "config.hpp"
#include "pnewton/problems.hpp"

namespace pnewton::cli {

enum ExitCode : int {
    kExitConverged = 0,
    kExitConfigError = 1,
    kExitBudget = 2,
    kExitDiverged = 3,
    kExitSolverFailure = 4,
    kExitValidationFailure = 5,
};

int exit_code_for(RunStatus s);

/// Deterministic 64-bit seed derivation (splitmix64 over the parts).
std::uint64_t derive_seed(std::uint64_t base, std::uint64_t a, std::uint64_t b = 0, std::uint64_t c = 0);

/// Seeded standard-normal vector scaled by `scale`.
Vector random_normal(Eigen::Index n, std::uint64_t seed, double scale);

/// Directory holding the bundled LIBSVM files.
std::string default_data_dir();
std::vector<std::string> default_logreg_files();

/// Receives each bench run's trace with a label such as "p=4 x0=10 pn-cosh".
/// Called from worker threads, possibly concurrently.
using TraceObserver = std::function<void(const std::string& label, const SolverTrace& trace)>;

// ---------------------------------------------------------------------------

struct SolveOptions {
    std::optional<std::string> config;
    Overrides overrides;
};

struct BuiltProblem {
    std::unique_ptr<Objective> objective;
    Vector x0;
};

BuiltProblem build_problem(const RunConfig& cfg);
ReferenceFunction build_reference(const RunConfig& cfg, const Objective& obj, const Vector& x0);
SolverTrace run_configured(const RunConfig& cfg, const Objective& obj, const ReferenceFunction& ref,
                           const Vector& x0);

int cmd_solve(const SolveOptions& opts, std::ostream& out, std::ostream& err);

// ---------------------------------------------------------------------------

struct Poly1dOptions {
    std::vector<int> p = {2, 4, 8, 16};
    std::vector<double> x0 = {1.0, 10.0, 100.0};
    std::vector<std::string> kernels = {"quad", "cosh"};
    int max_iters = 100;
    double eps = 1e-8;
    bool with_globalized = true;
    std::string out = "runs";
    TraceObserver on_trace;
};

struct Poly1dRow {
    int p = 0;
    double x0 = 0.0;
    std::string method;
    int iterations = 0;
    bool converged = false;
    std::string status;
};

/// Pure PN per kernel ("pn-<kernel>", or "newton" for the quadratic kernel) and,
/// when requested, globalized PN with adaptive L ("globalized-<kernel>", or
/// "globalized-newton").
/// Convergence means |f'| <= eps.
std::vector<Poly1dRow> poly1d_grid(const Poly1dOptions& opts);
int cmd_bench_poly1d(const Poly1dOptions& opts, std::ostream& out, std::ostream& err);

// ---------------------------------------------------------------------------

struct LogregOptions {
    std::vector<std::string> data;
    std::vector<std::string> kernels = {"quad", "cosh", "expabs", "logbar"};
    std::string scale = "auto";
    double l2 = 0.0;
    int max_iters = 100;
    double eps = 1e-6;
    std::string out = "runs";
};

struct LogregRow {
    std::string dataset;
    std::string method;
    double scale = 0.0;
    int iterations = 0;
    bool converged = false;
    double final_grad_norm = 0.0;
    std::string status;
};

/// Vanilla Newton plus pure PN per kernel from w = 0, success meaning
/// ||grad f|| <= eps within max_iters.
std::vector<LogregRow> logreg_rows(const LogregOptions& opts);
int cmd_bench_logreg(const LogregOptions& opts, std::ostream& out, std::ostream& err);

// ---------------------------------------------------------------------------

struct MatfactOptions {
    std::vector<double> cond = {1.0, 1e4, 1e8};
    long n = 10;
    long r = 5;
    double x0_scale = 100.0;
    int repeats = 20;
    std::uint64_t seed = 0;
    std::vector<std::string> kernels = {"cosh", "expabs", "logbar"};
    std::string scale = "auto";
    std::string family = "globalized";  ///< globalized | regularized | adaptive
    double sigma = 1.0;
    int max_iters = 1000;
    double eps = 1e-8;
    std::string out = "runs";
    TraceObserver on_trace;
};

struct MatfactRun {
    double cond = 0.0;
    int repeat = 0;
    std::string method;
    long matvecs = 0;
    int iterations = 0;
    bool converged = false;
    std::string status;
};

struct MatfactSummary {
    double cond = 0.0;
    std::string method;
    /// +infinity when half or more of the runs failed.
    double median_matvecs = 0.0;
    double median_iterations = 0.0;
    int converged_runs = 0;
    int repeats = 0;
};

/// Every (cond, repeat) pair runs the vanilla method (quadratic kernel, CG on
/// the Newton system) and each kernel (GMRES on the raw preconditioned system
/// for the globalized family). Failed runs count as +infinity in medians.
std::vector<MatfactRun> matfact_runs(const MatfactOptions& opts);
std::vector<MatfactSummary> matfact_summarize(const std::vector<MatfactRun>& runs);
int cmd_bench_matfact(const MatfactOptions& opts, std::ostream& out, std::ostream& err);

// ---------------------------------------------------------------------------

struct ValidateOptions {
    std::vector<std::string> problems = {"poly1d", "quadratic", "logistic", "matfact"};
    int points = 20;
    std::uint64_t seed = 0;
    bool inject_fault = false;
    std::string out = "runs";
};

struct CheckResult {
    std::string check;
    std::string subject;
    double value = 0.0;
    double threshold = 0.0;
    bool pass = false;
};

std::vector<CheckResult> validation_checks(const ValidateOptions& opts);
int cmd_validate(const ValidateOptions& opts, std::ostream& out, std::ostream& err);

}  // namespace pnewton::cli
