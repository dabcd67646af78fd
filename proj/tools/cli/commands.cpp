#include "commands.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <filesystem>
#include <functional>
#include <iostream>
#include <limits>
#include <mutex>
#include <random>
#include <set>
#include <thread>

#include "output.hpp"
#include "pnewton/validation.hpp"

#ifndef PNEWTON_DATA_DIR
#define PNEWTON_DATA_DIR "data"
#endif

namespace pnewton::cli {

namespace fs = std::filesystem;

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
// Starting from L = 1, steep polynomials far from the minimizer need L ~ 1e28.
constexpr int kBenchMaxLDoublings = 200;
// PN directions can exceed the iterate by 30 orders of magnitude there, so
// tau has to fall below 2^-100 before x(tau) is usable.
constexpr int kBenchMaxBacktracks = 200;

/// Runs fn(i) for i in [0, n) on up to hardware_concurrency threads. Results
/// must be written to per-index slots, so the output order never depends on
/// scheduling.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& fn)
{
    const std::size_t workers = std::min<std::size_t>(n, std::max(1u, std::thread::hardware_concurrency()));
    if (workers <= 1) {
        for (std::size_t i = 0; i < n; ++i) fn(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::exception_ptr failure;
    std::mutex failure_mutex;
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (std::size_t w = 0; w < workers; ++w) {
        pool.emplace_back([&] {
            for (std::size_t i = next++; i < n; i = next++) {
                try {
                    fn(i);
                } catch (...) {
                    std::lock_guard<std::mutex> lock(failure_mutex);
                    if (!failure) failure = std::current_exception();
                }
            }
        });
    }
    for (auto& t : pool) t.join();
    if (failure) std::rethrow_exception(failure);
}

double auto_scale(const Objective& obj, const Vector& x0)
{
    const double g = obj.gradient(x0).norm();
    return (std::isfinite(g) && g > 0.0) ? g : 1.0;
}

std::string method_name(const std::string& family, KernelKind k)
{
    if (k == KernelKind::Quadratic) return family == "pn" ? "newton" : family + "-newton";
    return family + "-" + std::string(to_string(k));
}

std::vector<KernelKind> parse_kernels(const std::vector<std::string>& names)
{
    std::vector<KernelKind> out;
    for (const auto& n : names) out.push_back(parse_kernel_or_throw(n));
    if (out.empty()) throw ConfigError("at least one kernel is required");
    return out;
}

double median(std::vector<double> v)
{
    if (v.empty()) return kNaN;
    std::sort(v.begin(), v.end());
    const std::size_t m = v.size() / 2;
    if (v.size() % 2 == 1) return v[m];
    if (std::isinf(v[m - 1]) || std::isinf(v[m])) return kInf;
    return 0.5 * (v[m - 1] + v[m]);
}

template <class T>
nlohmann::json list_json(const std::vector<T>& v)
{
    nlohmann::json a = nlohmann::json::array();
    for (const auto& e : v) a.push_back(e);
    return a;
}

nlohmann::json bench_meta(const std::string& command)
{
    nlohmann::json j = environment_meta();
    j["command"] = command;
    return j;
}

// ---------------------------------------------------------------------------
// Fault injection for validate: perturbs the gradient by a relative 1e-3.

class FaultyObjective final : public Objective {
public:
    explicit FaultyObjective(const Objective& inner) : inner_(inner) {}

    Eigen::Index dim() const override { return inner_.dim(); }
    double value(const Vector& x) const override { return inner_.value(x); }
    Vector gradient(const Vector& x) const override { return inner_.gradient(x) * (1.0 + 1e-3); }
    Matrix hessian(const Vector& x) const override { return inner_.hessian(x); }
    Vector hess_vec(const Vector& x, const Vector& v) const override { return inner_.hess_vec(x, v); }
    std::string name() const override { return inner_.name(); }

private:
    const Objective& inner_;
};

double scalar_relerr(double a, double b)
{
    const double d = std::max(std::abs(a), std::abs(b));
    return d == 0.0 ? 0.0 : std::abs(a - b) / d;
}

}  // namespace

// ---------------------------------------------------------------------------

int exit_code_for(RunStatus s)
{
    switch (s) {
    case RunStatus::Converged:
    case RunStatus::StepTooSmall: return kExitConverged;
    case RunStatus::MaxIters: return kExitBudget;
    case RunStatus::Diverged: return kExitDiverged;
    case RunStatus::Singular:
    case RunStatus::LinesearchFailed:
    case RunStatus::SubproblemFailed: return kExitSolverFailure;
    }
    return kExitSolverFailure;
}

std::uint64_t derive_seed(std::uint64_t base, std::uint64_t a, std::uint64_t b, std::uint64_t c)
{
    auto mix = [](std::uint64_t z) {
        z += 0x9e3779b97f4a7c15ULL;
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    };
    std::uint64_t h = mix(base);
    h = mix(h ^ a);
    h = mix(h ^ b);
    h = mix(h ^ c);
    return h;
}

Vector random_normal(Eigen::Index n, std::uint64_t seed, double scale)
{
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> nd;
    Vector v(n);
    for (Eigen::Index i = 0; i < n; ++i) v(i) = scale * nd(rng);
    return v;
}

std::string default_data_dir() { return PNEWTON_DATA_DIR; }

std::vector<std::string> default_logreg_files()
{
    std::vector<std::string> files;
    std::error_code ec;
    for (const auto& e : fs::directory_iterator(default_data_dir(), ec)) {
        if (e.is_regular_file() && e.path().extension() == ".libsvm") files.push_back(e.path().string());
    }
    std::sort(files.begin(), files.end());
    return files;
}

// ---------------------------------------------------------------------------
// solve

BuiltProblem build_problem(const RunConfig& cfg)
{
    const ProblemSpec& p = cfg.problem;
    BuiltProblem out;
    if (p.kind == "poly1d") {
        out.objective = std::make_unique<PolynomialObjective>(PolynomialObjective::power_plus_quadratic(p.p));
    } else if (p.kind == "quadratic") {
        out.objective = std::make_unique<QuadraticProblem>(QuadraticProblem::random(p.n, p.cond, derive_seed(cfg.seed, 1)));
    } else if (p.kind == "logistic") {
        try {
            out.objective = std::make_unique<LogisticProblem>(load_libsvm(p.data, p.l2));
        } catch (const ParseError& e) {
            throw ConfigError(p.data + ":" + std::to_string(e.line()) + ": " + e.what());
        } catch (const std::runtime_error& e) {
            throw ConfigError(e.what());
        }
    } else if (p.kind == "matfact") {
        out.objective = std::make_unique<SymMatFactProblem>(matfact_generate(p.n, p.r, p.cond, derive_seed(cfg.seed, 1)));
    } else {
        throw ConfigError("unknown problem kind '" + p.kind + "'");
    }

    const Eigen::Index n = out.objective->dim();
    if (!p.x0.empty()) {
        if (static_cast<Eigen::Index>(p.x0.size()) != n) {
            throw ConfigError("problem.x0 has " + std::to_string(p.x0.size()) + " entries, expected " +
                              std::to_string(n));
        }
        out.x0 = Eigen::Map<const Vector>(p.x0.data(), n);
    } else if (p.kind == "poly1d") {
        out.x0 = Vector::Constant(1, p.x0_scale);
    } else if (p.kind == "logistic") {
        out.x0 = Vector::Zero(n);
    } else {
        out.x0 = random_normal(n, derive_seed(cfg.seed, 2), p.x0_scale);
    }
    return out;
}

ReferenceFunction build_reference(const RunConfig& cfg, const Objective& obj, const Vector& x0)
{
    const double scale = cfg.reference.scale ? *cfg.reference.scale : auto_scale(obj, x0);
    const ScalarKernel kernel(cfg.reference.kernel, scale);
    if (cfg.reference.structure == Structure::Separable) return ReferenceFunction::separable(kernel, obj.dim());
    return ReferenceFunction::isotropic(kernel, obj.dim());
}

SolverTrace run_configured(const RunConfig& cfg, const Objective& obj, const ReferenceFunction& ref,
                           const Vector& x0)
{
    const AlgorithmSpec& a = cfg.algorithm;
    if (a.name == "pg") return run_pg(obj, ref, x0, a.gamma, cfg.stopping);
    if (a.name == "newton") return run_newton(obj, x0, cfg.stopping, a.linear);
    if (a.name == "pn") return run_pn(obj, ref, x0, cfg.stopping, a.linear);
    if (a.name == "globalized") return run_globalized(obj, ref, a.globalized, x0, cfg.stopping, a.linear);
    if (a.name == "regularized") return run_regularized(obj, ref, a.sigma, x0, cfg.stopping);
    if (a.name == "adaptive") return run_adaptive(obj, ref, a.adaptive, x0, cfg.stopping);
    throw ConfigError("unknown algorithm '" + a.name + "'");
}

int cmd_solve(const SolveOptions& opts, std::ostream& out, std::ostream& err)
{
    RunConfig cfg;
    BuiltProblem built;
    std::optional<ReferenceFunction> ref;
    try {
        if (opts.config) cfg = load_config(*opts.config);
        apply_overrides(cfg, opts.overrides);
        validate(cfg);
        built = build_problem(cfg);
        ref = build_reference(cfg, *built.objective, built.x0);
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return kExitConfigError;
    }

    SolverTrace trace;
    try {
        trace = run_configured(cfg, *built.objective, *ref, built.x0);
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return kExitSolverFailure;
    }

    const int code = exit_code_for(trace.status);
    try {
        const fs::path dir = make_run_dir(cfg.out, "solve");
        const bool has_nan = write_trace_csv(dir / "trace.csv", trace);
        nlohmann::json meta = describe(cfg);
        meta.update(environment_meta());
        const IterationRecord& last = trace.final_record();
        meta["command"] = "solve";
        meta["reference.scale_used"] = ref->kernel().scale();
        meta["run.algorithm"] = trace.algorithm;
        meta["run.status"] = std::string(to_string(trace.status));
        meta["run.message"] = trace.message;
        meta["run.exit_code"] = code;
        meta["run.iterations"] = trace.iterations();
        meta["run.final_f"] = last.f;
        meta["run.final_grad_norm"] = last.grad_norm;
        meta["run.final_measure"] = stop_value(cfg.stopping.measure, *ref, built.objective->gradient(trace.x_final));
        meta["run.matvecs"] = last.matvecs;
        meta["run.dir"] = dir.string();
        meta["trace.has_nan"] = has_nan;
        write_json(dir / "meta.json", meta);
        out << "status=" << to_string(trace.status) << " iterations=" << trace.iterations()
            << " f=" << format_double(last.f) << " measure=" << format_double(meta["run.final_measure"].get<double>())
            << " dir=" << dir.string() << '\n';
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return kExitSolverFailure;
    }
    return code;
}

// ---------------------------------------------------------------------------
// bench-poly1d

std::vector<Poly1dRow> poly1d_grid(const Poly1dOptions& opts)
{
    const auto kernels = parse_kernels(opts.kernels);
    for (int p : opts.p) {
        if (p < 2) throw ConfigError("p must be >= 2");
    }
    if (opts.p.empty() || opts.x0.empty()) throw ConfigError("p and x0 lists must not be empty");
    const StoppingCriteria stop{opts.eps, StopMeasure::GradNorm, opts.max_iters};

    struct Job {
        int p;
        double x0;
        KernelKind kernel;
        bool globalized;
    };
    std::vector<Job> jobs;
    for (int p : opts.p) {
        for (double x0 : opts.x0) {
            for (KernelKind k : kernels) jobs.push_back({p, x0, k, false});
            if (opts.with_globalized) {
                for (KernelKind k : kernels) jobs.push_back({p, x0, k, true});
            }
        }
    }

    std::vector<Poly1dRow> rows(jobs.size());
    parallel_for(jobs.size(), [&](std::size_t i) {
        const Job& j = jobs[i];
        const auto obj = PolynomialObjective::power_plus_quadratic(j.p);
        const auto ref = ReferenceFunction::isotropic(ScalarKernel(j.kernel, 1.0), 1);
        const Vector x0 = Vector::Constant(1, j.x0);
        SolverTrace tr;
        if (j.globalized) {
            GlobalizedConfig gc;
            gc.adaptive_L = true;
            gc.max_L_doublings = kBenchMaxLDoublings;
            gc.max_backtracks = kBenchMaxBacktracks;
            tr = run_globalized(obj, ref, gc, x0, stop);
        } else {
            tr = run_pn(obj, ref, x0, stop);
        }
        rows[i] = {j.p, j.x0, method_name(j.globalized ? "globalized" : "pn", j.kernel), tr.iterations(),
                   tr.status == RunStatus::Converged, std::string(to_string(tr.status))};
        if (opts.on_trace) {
            opts.on_trace("p=" + std::to_string(j.p) + " x0=" + format_double(j.x0) + " " + rows[i].method, tr);
        }
    });
    return rows;
}

int cmd_bench_poly1d(const Poly1dOptions& opts, std::ostream& out, std::ostream& err)
{
    std::vector<Poly1dRow> rows;
    try {
        rows = poly1d_grid(opts);
    } catch (const ConfigError& e) {
        err << "error: " << e.what() << '\n';
        return kExitConfigError;
    }
    const fs::path dir = make_run_dir(opts.out, "bench-poly1d");
    CsvWriter w(dir / "summary.csv", {"p", "x0", "method", "iterations", "converged", "status"});
    for (const auto& r : rows) {
        w.cell(r.p).cell(r.x0).cell(r.method).cell(r.iterations).cell(r.converged).cell(r.status);
        w.end_row();
        out << "p=" << r.p << " x0=" << format_double(r.x0) << " " << r.method << " iterations=" << r.iterations
            << " " << r.status << '\n';
    }
    nlohmann::json meta = bench_meta("bench-poly1d");
    meta["bench.p"] = list_json(opts.p);
    meta["bench.x0"] = list_json(opts.x0);
    meta["bench.kernels"] = list_json(opts.kernels);
    meta["bench.globalized"] = opts.with_globalized;
    meta["bench.L0"] = 1.0;
    meta["bench.max_L_doublings"] = kBenchMaxLDoublings;
    meta["bench.max_backtracks"] = kBenchMaxBacktracks;
    meta["stopping.epsilon"] = opts.eps;
    meta["stopping.measure"] = "grad_norm";
    meta["stopping.max_iters"] = opts.max_iters;
    meta["bench.rows"] = rows.size();
    write_json(dir / "meta.json", meta);
    out << "wrote " << (dir / "summary.csv").string() << '\n';
    return kExitConverged;
}

// ---------------------------------------------------------------------------
// bench-logreg

std::vector<LogregRow> logreg_rows(const LogregOptions& opts)
{
    const auto kernels = parse_kernels(opts.kernels);
    const std::optional<double> fixed_scale = parse_scale_or_throw(opts.scale);
    const std::vector<std::string> files = opts.data.empty() ? default_logreg_files() : opts.data;
    if (files.empty()) throw ConfigError("no LIBSVM data files given and none bundled in " + default_data_dir());
    if (!(opts.l2 >= 0.0)) throw ConfigError("l2 must be nonnegative");
    const StoppingCriteria stop{opts.eps, StopMeasure::GradNorm, opts.max_iters};

    std::vector<LogregRow> rows;
    for (const auto& path : files) {
        std::optional<LogisticProblem> prob;
        try {
            prob.emplace(load_libsvm(path, opts.l2));
        } catch (const ParseError& e) {
            throw ConfigError(path + ":" + std::to_string(e.line()) + ": " + e.what());
        } catch (const std::runtime_error& e) {
            throw ConfigError(e.what());
        }
        const std::string dataset = fs::path(path).stem().string();
        const Vector x0 = Vector::Zero(prob->dim());
        const double scale = fixed_scale ? *fixed_scale : auto_scale(*prob, x0);

        std::vector<LogregRow> block(kernels.size() + 1);
        parallel_for(block.size(), [&](std::size_t i) {
            SolverTrace tr;
            LogregRow row;
            row.dataset = dataset;
            if (i == 0) {
                tr = run_newton(*prob, x0, stop);
                row.method = "newton";
                row.scale = 1.0;
            } else {
                const KernelKind k = kernels[i - 1];
                const auto ref = ReferenceFunction::isotropic(ScalarKernel(k, scale), prob->dim());
                tr = run_pn(*prob, ref, x0, stop);
                row.method = "pn-" + std::string(to_string(k));
                row.scale = scale;
            }
            row.iterations = tr.iterations();
            row.converged = tr.status == RunStatus::Converged;
            row.final_grad_norm = tr.final_record().grad_norm;
            row.status = std::string(to_string(tr.status));
            block[i] = row;
        });
        rows.insert(rows.end(), block.begin(), block.end());
    }
    return rows;
}

int cmd_bench_logreg(const LogregOptions& opts, std::ostream& out, std::ostream& err)
{
    std::vector<LogregRow> rows;
    try {
        rows = logreg_rows(opts);
    } catch (const ConfigError& e) {
        err << "error: " << e.what() << '\n';
        return kExitConfigError;
    }
    const fs::path dir = make_run_dir(opts.out, "bench-logreg");
    CsvWriter w(dir / "summary.csv",
                {"dataset", "method", "scale", "iterations", "converged", "final_grad_norm", "status"});
    for (const auto& r : rows) {
        w.cell(r.dataset).cell(r.method).cell(r.scale).cell(r.iterations).cell(r.converged).cell(r.final_grad_norm)
            .cell(r.status);
        w.end_row();
        out << r.dataset << " " << r.method << " iterations=" << r.iterations << " grad_norm="
            << format_double(r.final_grad_norm) << " " << r.status << '\n';
    }
    nlohmann::json meta = bench_meta("bench-logreg");
    meta["bench.data"] = list_json(opts.data.empty() ? default_logreg_files() : opts.data);
    meta["bench.kernels"] = list_json(opts.kernels);
    meta["bench.scale"] = opts.scale;
    meta["bench.l2"] = opts.l2;
    meta["bench.x0"] = "zero";
    meta["stopping.epsilon"] = opts.eps;
    meta["stopping.measure"] = "grad_norm";
    meta["stopping.max_iters"] = opts.max_iters;
    meta["csv.has_nan"] = w.saw_nan();
    write_json(dir / "meta.json", meta);
    out << "wrote " << (dir / "summary.csv").string() << '\n';
    return kExitConverged;
}

// ---------------------------------------------------------------------------
// bench-matfact

std::vector<MatfactRun> matfact_runs(const MatfactOptions& opts)
{
    static const std::set<std::string> families = {"globalized", "regularized", "adaptive"};
    if (!families.count(opts.family)) {
        throw ConfigError("unknown family '" + opts.family + "' (expected globalized, regularized or adaptive)");
    }
    std::vector<KernelKind> kernels = {KernelKind::Quadratic};
    for (KernelKind k : parse_kernels(opts.kernels)) {
        if (k != KernelKind::Quadratic) kernels.push_back(k);
    }
    const std::optional<double> fixed_scale = parse_scale_or_throw(opts.scale);
    if (opts.cond.empty()) throw ConfigError("cond list must not be empty");
    for (double c : opts.cond) {
        if (!(c >= 1.0)) throw ConfigError("cond values must be >= 1");
    }
    if (opts.repeats < 1) throw ConfigError("repeats must be >= 1");
    if (opts.r < 1 || opts.r > opts.n) throw ConfigError("r must satisfy 1 <= r <= n");
    if (!(opts.x0_scale > 0.0)) throw ConfigError("x0 scale must be positive");
    if (!(opts.sigma > 0.0)) throw ConfigError("sigma must be positive");
    const StoppingCriteria stop{opts.eps, StopMeasure::GradNorm, opts.max_iters};

    const std::size_t per_instance = kernels.size();
    const std::size_t instances = opts.cond.size() * static_cast<std::size_t>(opts.repeats);
    std::vector<MatfactRun> runs(instances * per_instance);
    parallel_for(runs.size(), [&](std::size_t idx) {
        const std::size_t inst = idx / per_instance;
        const KernelKind k = kernels[idx % per_instance];
        const std::size_t ci = inst / static_cast<std::size_t>(opts.repeats);
        const int rep = static_cast<int>(inst % static_cast<std::size_t>(opts.repeats));
        const double cond = opts.cond[ci];

        const auto prob = matfact_generate(opts.n, opts.r, cond, derive_seed(opts.seed, ci, rep, 0));
        const Vector x0 = random_normal(prob.dim(), derive_seed(opts.seed, ci, rep, 1), opts.x0_scale);
        const double scale = k == KernelKind::Quadratic ? 1.0 : (fixed_scale ? *fixed_scale : auto_scale(prob, x0));
        const auto ref = ReferenceFunction::isotropic(ScalarKernel(k, scale), prob.dim());

        SolverTrace tr;
        if (opts.family == "globalized") {
            GlobalizedConfig gc;
            gc.adaptive_L = true;
            gc.max_L_doublings = kBenchMaxLDoublings;
            gc.max_backtracks = kBenchMaxBacktracks;
            LinearSolveOptions lin;
            lin.method = SolveMethod::Krylov;
            lin.form = k == KernelKind::Quadratic ? SystemForm::Transformed : SystemForm::Raw;
            tr = run_globalized(prob, ref, gc, x0, stop, lin);
        } else if (opts.family == "regularized") {
            tr = run_regularized(prob, ref, opts.sigma, x0, stop);
        } else {
            AdaptiveConfig ac;
            ac.sigma0 = opts.sigma;
            tr = run_adaptive(prob, ref, ac, x0, stop);
        }
        runs[idx] = {cond,
                     rep,
                     method_name(opts.family, k),
                     tr.final_record().matvecs,
                     tr.iterations(),
                     tr.converged(),
                     std::string(to_string(tr.status))};
        if (opts.on_trace) {
            opts.on_trace("cond=" + format_double(cond) + " repeat=" + std::to_string(rep) + " " + runs[idx].method,
                          tr);
        }
    });
    return runs;
}

std::vector<MatfactSummary> matfact_summarize(const std::vector<MatfactRun>& runs)
{
    std::vector<MatfactSummary> out;
    std::vector<std::pair<double, std::string>> keys;
    for (const auto& r : runs) {
        const std::pair<double, std::string> key{r.cond, r.method};
        if (std::find(keys.begin(), keys.end(), key) == keys.end()) keys.push_back(key);
    }
    for (const auto& [cond, method] : keys) {
        std::vector<double> mv;
        std::vector<double> it;
        MatfactSummary s;
        s.cond = cond;
        s.method = method;
        for (const auto& r : runs) {
            if (r.cond != cond || r.method != method) continue;
            ++s.repeats;
            if (r.converged) ++s.converged_runs;
            mv.push_back(r.converged ? static_cast<double>(r.matvecs) : kInf);
            it.push_back(r.converged ? static_cast<double>(r.iterations) : kInf);
        }
        s.median_matvecs = median(mv);
        s.median_iterations = median(it);
        out.push_back(s);
    }
    return out;
}

int cmd_bench_matfact(const MatfactOptions& opts, std::ostream& out, std::ostream& err)
{
    std::vector<MatfactRun> runs;
    try {
        runs = matfact_runs(opts);
    } catch (const ConfigError& e) {
        err << "error: " << e.what() << '\n';
        return kExitConfigError;
    }
    const auto summary = matfact_summarize(runs);
    const fs::path dir = make_run_dir(opts.out, "bench-matfact");
    {
        CsvWriter w(dir / "runs.csv", {"cond", "repeat", "method", "matvecs", "iterations", "converged", "status"});
        for (const auto& r : runs) {
            w.cell(r.cond).cell(r.repeat).cell(r.method).cell(r.matvecs).cell(r.iterations).cell(r.converged)
                .cell(r.status);
            w.end_row();
        }
    }
    CsvWriter w(dir / "summary.csv",
                {"cond", "method", "median_matvecs", "median_iterations", "converged_runs", "repeats"});
    for (const auto& s : summary) {
        w.cell(s.cond).cell(s.method).cell(s.median_matvecs).cell(s.median_iterations).cell(s.converged_runs)
            .cell(s.repeats);
        w.end_row();
        out << "cond=" << format_double(s.cond) << " " << s.method << " median_matvecs="
            << format_double(s.median_matvecs) << " median_iterations=" << format_double(s.median_iterations)
            << " converged=" << s.converged_runs << "/" << s.repeats << '\n';
    }
    nlohmann::json meta = bench_meta("bench-matfact");
    meta["bench.cond"] = list_json(opts.cond);
    meta["bench.n"] = opts.n;
    meta["bench.r"] = opts.r;
    meta["bench.x0_scale"] = opts.x0_scale;
    meta["bench.repeats"] = opts.repeats;
    meta["bench.seed"] = opts.seed;
    meta["bench.kernels"] = list_json(opts.kernels);
    meta["bench.scale"] = opts.scale;
    meta["bench.family"] = opts.family;
    meta["bench.sigma"] = opts.sigma;
    meta["bench.L0"] = 1.0;
    meta["bench.adaptive_L"] = true;
    meta["bench.max_L_doublings"] = kBenchMaxLDoublings;
    meta["bench.max_backtracks"] = kBenchMaxBacktracks;
    meta["stopping.epsilon"] = opts.eps;
    meta["stopping.measure"] = "grad_norm";
    meta["stopping.max_iters"] = opts.max_iters;
    write_json(dir / "meta.json", meta);
    out << "wrote " << (dir / "summary.csv").string() << '\n';
    return kExitConverged;
}

// ---------------------------------------------------------------------------
// validate

namespace {

struct ValidationProblem {
    std::string name;
    std::unique_ptr<Objective> objective;
    std::function<Vector(std::uint64_t)> sample;
};

ValidationProblem make_validation_problem(const std::string& name, std::uint64_t seed)
{
    ValidationProblem vp;
    vp.name = name;
    if (name == "poly1d") {
        vp.objective = std::make_unique<PolynomialObjective>(PolynomialObjective::power_plus_quadratic(4));
        vp.sample = [](std::uint64_t s) {
            std::mt19937_64 rng(s);
            std::uniform_real_distribution<double> u(-3.0, 3.0);
            return Vector::Constant(1, u(rng));
        };
    } else if (name == "quadratic") {
        vp.objective = std::make_unique<QuadraticProblem>(QuadraticProblem::random(8, 1e2, derive_seed(seed, 11)));
        vp.sample = [](std::uint64_t s) { return random_normal(8, s, 1.0); };
    } else if (name == "logistic") {
        const auto files = default_logreg_files();
        if (files.empty()) throw ConfigError("no bundled LIBSVM data found in " + default_data_dir());
        auto prob = std::make_unique<LogisticProblem>(load_libsvm(files.front(), 0.0));
        const Eigen::Index n = prob->dim();
        vp.objective = std::move(prob);
        vp.sample = [n](std::uint64_t s) { return random_normal(n, s, 1.0); };
    } else if (name == "matfact") {
        vp.objective = std::make_unique<SymMatFactProblem>(matfact_generate(10, 5, 1e2, derive_seed(seed, 12)));
        vp.sample = [](std::uint64_t s) { return random_normal(50, s, 1.0); };
    } else {
        throw ConfigError("unknown problem '" + name + "' (expected poly1d, quadratic, logistic or matfact)");
    }
    return vp;
}

void kernel_checks(std::vector<CheckResult>& out, bool inject_fault)
{
    const double fault = inject_fault ? 1.0 + 1e-3 : 1.0;
    for (KernelKind kind : {KernelKind::Quadratic, KernelKind::Cosh, KernelKind::ExpAbs, KernelKind::LogBarrier}) {
        for (double scale : {1.0, 2.5}) {
            const ScalarKernel k(kind, scale);
            const std::string subject = std::string(to_string(kind)) + "@" + format_double(scale);
            double grad_err = 0.0;
            double hess_err = 0.0;
            double inverse_err = 0.0;
            double alpha_min = kInf;
            double nu_gap = kInf;
            for (double u : {0.05, 0.3, 1.0, 2.0, 5.0, 12.0}) {
                const double y = u * scale;
                const double h = 1e-6 * (1.0 + y);
                const double fd_grad = (k.conj_value(y + h) - k.conj_value(y - h)) / (2.0 * h);
                const double grad = fault * k.conj_grad(y);
                grad_err = std::max(grad_err, scalar_relerr(grad, fd_grad));
                const double fd_hess = (k.conj_grad(y + h) - k.conj_grad(y - h)) / (2.0 * h);
                hess_err = std::max(hess_err, scalar_relerr(k.conj_hess(y), fd_hess));
                inverse_err = std::max(inverse_err, scalar_relerr(k.derivative(k.conj_grad(y)), y));
                alpha_min = std::min(alpha_min, k.alpha(y));
                nu_gap = std::min(nu_gap, k.nu(y) / k.ltilde() - 1.0);
            }
            out.push_back({"kernel_conj_grad_fd", subject, grad_err, 1e-5, grad_err <= 1e-5});
            out.push_back({"kernel_conj_hess_fd", subject, hess_err, 1e-4, hess_err <= 1e-4});
            out.push_back({"kernel_conj_grad_inverse", subject, inverse_err, 1e-10, inverse_err <= 1e-10});
            out.push_back({"kernel_alpha_ge_1", subject, alpha_min, 1.0, alpha_min >= 1.0 - 1e-12});
            out.push_back({"kernel_nu_ge_ltilde", subject, nu_gap, 0.0, nu_gap >= -1e-12});
        }
    }
}

}  // namespace

std::vector<CheckResult> validation_checks(const ValidateOptions& opts)
{
    if (opts.problems.empty()) throw ConfigError("the problem set is empty");
    if (opts.points < 1) throw ConfigError("points must be >= 1");
    std::vector<ValidationProblem> problems;
    for (const auto& name : opts.problems) problems.push_back(make_validation_problem(name, opts.seed));

    std::vector<CheckResult> out;
    for (const auto& vp : problems) {
        std::optional<FaultyObjective> faulty;
        if (opts.inject_fault) faulty.emplace(*vp.objective);
        const Objective& obj = opts.inject_fault ? static_cast<const Objective&>(*faulty) : *vp.objective;
        double g = 0.0;
        double h = 0.0;
        double hv = 0.0;
        for (int i = 0; i < opts.points; ++i) {
            const std::uint64_t s = derive_seed(opts.seed, 21, static_cast<std::uint64_t>(i));
            const auto rep = validation::fd_check(obj, vp.sample(s), {}, derive_seed(s, 1));
            g = std::max(g, rep.grad_relerr);
            if (!std::isnan(rep.hess_relerr)) h = std::max(h, rep.hess_relerr);
            hv = std::max(hv, rep.hessvec_relerr);
        }
        out.push_back({"fd_gradient", vp.name, g, 1e-5, g <= 1e-5});
        out.push_back({"fd_hessian", vp.name, h, 1e-4, h <= 1e-4});
        out.push_back({"fd_hessvec", vp.name, hv, 1e-4, hv <= 1e-4});
    }

    kernel_checks(out, opts.inject_fault);

    {
        // Two independent estimates of the preconditioned-Hessian Lipschitz constant.
        const auto poly = Poly1D::power_plus_quadratic(4);
        const PolynomialObjective obj(poly);
        const auto ref = ReferenceFunction::isotropic(ScalarKernel(KernelKind::Cosh, 1.0), 1);
        const auto grid = validation::estimate_LH_1d(poly, ref, -2.0, 2.0, 20001);
        const auto secant = validation::estimate_LH_secant(obj, ref, -2.0, 2.0, 4000, derive_seed(opts.seed, 31));
        const double rel = scalar_relerr(grid.value, secant.value);
        out.push_back({"lipschitz_grid_vs_secant", "poly1d_p4_cosh", rel, 0.1, rel <= 0.1});
    }

    {
        // Descent-lemma form of the upper model on a quadratic with its exact constant.
        const auto q = QuadraticProblem::random(6, 1e3, derive_seed(opts.seed, 41));
        const auto ref = ReferenceFunction::isotropic(ScalarKernel(KernelKind::Quadratic, 1.0), 6);
        const double L = Eigen::SelfAdjointEigenSolver<Matrix>(q.Q()).eigenvalues().maxCoeff();
        std::vector<std::pair<Vector, Vector>> pairs;
        for (int i = 0; i < 100; ++i) {
            const std::uint64_t s = derive_seed(opts.seed, 42, static_cast<std::uint64_t>(i));
            pairs.emplace_back(random_normal(6, s, 3.0), random_normal(6, derive_seed(s, 1), 3.0));
        }
        const auto rep = validation::check_aniso(q, ref, L, pairs);
        out.push_back({"aniso_upper_model", "quadratic_quad", static_cast<double>(rep.violations.size()), 0.0,
                       rep.clean()});
    }
    return out;
}

int cmd_validate(const ValidateOptions& opts, std::ostream& out, std::ostream& err)
{
    std::vector<CheckResult> checks;
    try {
        checks = validation_checks(opts);
    } catch (const ConfigError& e) {
        err << "error: " << e.what() << '\n';
        return kExitConfigError;
    }
    const fs::path dir = make_run_dir(opts.out, "validate");
    CsvWriter w(dir / "report.csv", {"check", "subject", "value", "threshold", "pass"});
    int failures = 0;
    for (const auto& c : checks) {
        w.cell(c.check).cell(c.subject).cell(c.value).cell(c.threshold).cell(c.pass);
        w.end_row();
        if (!c.pass) ++failures;
        out << (c.pass ? "PASS " : "FAIL ") << c.check << " " << c.subject << " value=" << format_double(c.value)
            << " threshold=" << format_double(c.threshold) << '\n';
    }
    nlohmann::json meta = bench_meta("validate");
    meta["validate.problems"] = list_json(opts.problems);
    meta["validate.points"] = opts.points;
    meta["validate.seed"] = opts.seed;
    meta["validate.inject_fault"] = opts.inject_fault;
    meta["validate.checks"] = checks.size();
    meta["validate.failures"] = failures;
    write_json(dir / "meta.json", meta);
    out << (failures == 0 ? "all checks passed" : std::to_string(failures) + " check(s) failed") << '\n';
    return failures == 0 ? kExitConverged : kExitValidationFailure;
}

}  // namespace pnewton::cli
