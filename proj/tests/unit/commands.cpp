#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>
#include <sstream>
#include <string>

#include <gtest/gtest.h>
#include <nlohmann/json.hpp>

#include "commands.hpp"

using namespace pnewton;
using namespace pnewton::cli;
namespace fs = std::filesystem;

namespace {

const std::string kQuartic = PNEWTON_TEST_DATA_DIR "/quartic_pn.toml";

fs::path scratch(const std::string& name)
{
    const fs::path dir = fs::path(::testing::TempDir()) / ("pnewton_commands_" + name);
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir;
}

std::string slurp(const fs::path& p)
{
    std::ifstream in(p, std::ios::binary);
    std::ostringstream os;
    os << in.rdbuf();
    return os.str();
}

struct SolveResult {
    int rc;
    std::string out;
    std::string err;
    fs::path dir;
};

SolveResult solve(Overrides o, const std::optional<std::string>& config = kQuartic)
{
    SolveOptions opts;
    opts.config = config;
    opts.overrides = std::move(o);
    std::ostringstream out, err;
    SolveResult r;
    r.rc = cmd_solve(opts, out, err);
    r.out = out.str();
    r.err = err.str();
    const auto pos = r.out.find("dir=");
    if (pos != std::string::npos) {
        std::string d = r.out.substr(pos + 4);
        d.erase(d.find_last_not_of("\r\n") + 1);
        r.dir = d;
    }
    return r;
}

Overrides into(const fs::path& out)
{
    Overrides o;
    o.out = out.string();
    return o;
}

}  // namespace

TEST(ExitCodes, StatusMapping)
{
    EXPECT_EQ(exit_code_for(RunStatus::Converged), 0);
    EXPECT_EQ(exit_code_for(RunStatus::StepTooSmall), 0);
    EXPECT_EQ(exit_code_for(RunStatus::MaxIters), 2);
    EXPECT_EQ(exit_code_for(RunStatus::Diverged), 3);
    EXPECT_EQ(exit_code_for(RunStatus::Singular), 4);
    EXPECT_EQ(exit_code_for(RunStatus::LinesearchFailed), 4);
    EXPECT_EQ(exit_code_for(RunStatus::SubproblemFailed), 4);
}

TEST(Seeds, DerivationIsDeterministicAndSpreads)
{
    EXPECT_EQ(derive_seed(1, 2, 3, 4), derive_seed(1, 2, 3, 4));
    EXPECT_NE(derive_seed(1, 2, 3, 4), derive_seed(1, 2, 4, 3));
    EXPECT_NE(derive_seed(0, 0), derive_seed(0, 1));
    EXPECT_EQ(random_normal(5, 9, 2.0), random_normal(5, 9, 2.0));
    EXPECT_NE(random_normal(5, 9, 2.0), random_normal(5, 10, 2.0));
    EXPECT_EQ(random_normal(5, 9, 2.0), 2.0 * random_normal(5, 9, 1.0));
}

TEST(Seeds, BundledDataIsFound)
{
    const auto files = default_logreg_files();
    ASSERT_EQ(files.size(), 3u);
    for (const auto& f : files) EXPECT_TRUE(fs::exists(f)) << f;
}

TEST(Solve, QuarticConvergesAndWritesArtifacts)
{
    const fs::path out = scratch("solve");
    const auto r = solve(into(out));
    ASSERT_EQ(r.rc, 0) << r.err;
    ASSERT_TRUE(fs::exists(r.dir / "trace.csv"));
    const auto meta = nlohmann::json::parse(slurp(r.dir / "meta.json"));
    for (const auto& [k, v] : meta.items()) EXPECT_FALSE(v.is_structured()) << k;
    EXPECT_EQ(meta.at("run.status"), "converged");
    EXPECT_EQ(meta.at("run.exit_code"), 0);
    EXPECT_EQ(meta.at("problem.kind"), "poly1d");
    EXPECT_LE(meta.at("run.final_measure").get<double>(), 1e-10);
    EXPECT_TRUE(meta.contains("trace.has_nan"));
}

TEST(Solve, InvalidKernelIsConfigError)
{
    Overrides o = into(scratch("badkernel"));
    o.kernel = "nope";
    const auto r = solve(o);
    EXPECT_EQ(r.rc, 1);
    EXPECT_NE(r.err.find("nope"), std::string::npos);
}

TEST(Solve, MissingConfigFileIsConfigError)
{
    EXPECT_EQ(solve(into(scratch("missing")), std::string("/nonexistent/x.toml")).rc, 1);
}

TEST(Solve, ZeroBudgetExitsTwo)
{
    Overrides o = into(scratch("budget"));
    o.max_iters = 0;
    EXPECT_EQ(solve(o).rc, 2);
}

TEST(Solve, FarStartPureCoshReportsFailureCode)
{
    // x0 = 100 on x^2/2 + x^2/2 overshoots without globalization.
    const fs::path out = scratch("far");
    const fs::path cfg = out / "far.toml";
    std::ofstream(cfg) << "[problem]\nkind = \"poly1d\"\np = 2\nx0 = [100.0]\n[algorithm]\nname = \"pn\"\n";
    const auto r = solve(into(out), cfg.string());
    EXPECT_EQ(r.rc, 3);
}

TEST(Solve, TraceIsByteIdenticalAcrossRuns)
{
    const fs::path out = scratch("determinism");
    const fs::path cfg = out / "mf.toml";
    std::ofstream(cfg) << "seed = 5\n[problem]\nkind = \"matfact\"\nn = 6\nr = 3\ncond = 100.0\n"
                          "x0_scale = 3.0\n[algorithm]\nname = \"globalized\"\nadaptive_L = true\n"
                          "[stopping]\nmax_iters = 200\n";
    const auto a = solve(into(out), cfg.string());
    const auto b = solve(into(out), cfg.string());
    ASSERT_EQ(a.rc, b.rc);
    ASSERT_NE(a.dir, b.dir);
    EXPECT_EQ(slurp(a.dir / "trace.csv"), slurp(b.dir / "trace.csv"));
    Overrides o = into(out);
    o.seed = 6;
    const auto c = solve(o, cfg.string());
    EXPECT_NE(slurp(a.dir / "trace.csv"), slurp(c.dir / "trace.csv"));
}

TEST(Solve, BuildProblemHonoursKinds)
{
    RunConfig cfg;
    cfg.problem.kind = "quadratic";
    cfg.problem.n = 4;
    cfg.problem.cond = 10.0;
    auto b = build_problem(cfg);
    EXPECT_EQ(b.objective->dim(), 4);
    EXPECT_EQ(b.x0.size(), 4);
    cfg.problem.x0 = {1.0, 2.0};
    EXPECT_THROW(build_problem(cfg), ConfigError);
    cfg.problem = {};
    cfg.problem.kind = "logistic";
    cfg.problem.data = "/nonexistent.libsvm";
    EXPECT_THROW(build_problem(cfg), ConfigError);
}

TEST(Solve, AutoScaleIsInitialGradientNorm)
{
    RunConfig cfg;
    cfg.problem.kind = "poly1d";
    cfg.problem.p = 4;
    cfg.problem.x0 = {3.0};
    cfg.reference.scale = std::nullopt;
    const auto b = build_problem(cfg);
    const auto ref = build_reference(cfg, *b.objective, b.x0);
    EXPECT_DOUBLE_EQ(ref.kernel().scale(), 27.0 + 3.0);
}

TEST(BenchPoly1d, SmallGrid)
{
    Poly1dOptions o;
    o.p = {2, 16};
    o.x0 = {1.0, 100.0};
    const auto rows = poly1d_grid(o);
    ASSERT_EQ(rows.size(), 2u * 2u * 4u);
    for (const auto& r : rows) {
        if (r.method == "newton" && r.p == 2) {
            EXPECT_EQ(r.iterations, 1);
        }
        if (r.method == "newton" && r.p == 16 && r.x0 == 100.0) {
            EXPECT_TRUE(r.converged);
            EXPECT_GT(r.iterations, 50);
        }
        if (r.method == "globalized-cosh") {
            EXPECT_TRUE(r.converged) << r.p << " " << r.x0;
        }
    }
}

TEST(BenchPoly1d, WritesSummary)
{
    Poly1dOptions o;
    o.p = {4};
    o.x0 = {1.0};
    o.out = scratch("poly").string();
    std::ostringstream out, err;
    EXPECT_EQ(cmd_bench_poly1d(o, out, err), 0);
    bool found = false;
    for (const auto& e : fs::recursive_directory_iterator(o.out)) {
        if (e.path().filename() != "summary.csv") continue;
        found = true;
        const std::string text = slurp(e.path());
        EXPECT_EQ(text.substr(0, text.find('\n')), "p,x0,method,iterations,converged,status");
    }
    EXPECT_TRUE(found);
}

TEST(BenchLogreg, QuadraticKernelRowEqualsNewton)
{
    LogregOptions o;
    o.data = {default_logreg_files().front()};
    o.kernels = {"quad", "cosh"};
    const auto rows = logreg_rows(o);
    ASSERT_EQ(rows.size(), 3u);
    const LogregRow* newton = nullptr;
    const LogregRow* quad = nullptr;
    for (const auto& r : rows) {
        if (r.method == "newton") newton = &r;
        if (r.method == "pn-quad") quad = &r;
    }
    ASSERT_TRUE(newton && quad);
    EXPECT_TRUE(newton->converged);
    EXPECT_LE(newton->iterations, 100);
    EXPECT_LE(newton->final_grad_norm, 1e-6);
    EXPECT_EQ(newton->iterations, quad->iterations);
    EXPECT_EQ(newton->final_grad_norm, quad->final_grad_norm);
}

TEST(BenchLogreg, MissingFileIsConfigError)
{
    LogregOptions o;
    o.data = {"/nonexistent.libsvm"};
    o.out = scratch("logreg_missing").string();
    std::ostringstream out, err;
    EXPECT_EQ(cmd_bench_logreg(o, out, err), 1);
}

TEST(BenchMatfact, DeterministicAndSummarized)
{
    MatfactOptions o;
    o.cond = {1.0, 1e4};
    o.n = 4;
    o.r = 2;
    o.x0_scale = 3.0;
    o.repeats = 3;
    o.kernels = {"cosh"};
    const auto a = matfact_runs(o);
    const auto b = matfact_runs(o);
    ASSERT_EQ(a.size(), 2u * 3u * 2u);
    for (std::size_t i = 0; i < a.size(); ++i) {
        EXPECT_EQ(a[i].matvecs, b[i].matvecs);
        EXPECT_EQ(a[i].iterations, b[i].iterations);
        EXPECT_EQ(a[i].status, b[i].status);
    }
    const auto s = matfact_summarize(a);
    ASSERT_EQ(s.size(), 4u);
    for (const auto& row : s) {
        EXPECT_EQ(row.repeats, 3);
        if (row.converged_runs * 2 > row.repeats) {
            EXPECT_TRUE(std::isfinite(row.median_matvecs));
        }
    }
}

TEST(BenchMatfact, MedianTreatsFailuresAsInfinite)
{
    std::vector<MatfactRun> runs;
    for (int i = 0; i < 4; ++i) {
        MatfactRun r;
        r.cond = 1.0;
        r.repeat = i;
        r.method = "m";
        r.matvecs = 10 * (i + 1);
        r.iterations = i + 1;
        r.converged = i < 2;
        runs.push_back(r);
    }
    const auto half = matfact_summarize(runs);
    ASSERT_EQ(half.size(), 1u);
    EXPECT_TRUE(std::isinf(half[0].median_matvecs));
    runs[2].converged = true;
    const auto most = matfact_summarize(runs);
    EXPECT_EQ(most[0].median_matvecs, 25.0);
    EXPECT_EQ(most[0].converged_runs, 3);
}

TEST(Validate, AllChecksPass)
{
    ValidateOptions o;
    o.points = 5;
    for (const auto& c : validation_checks(o)) EXPECT_TRUE(c.pass) << c.check << " " << c.subject << " " << c.value;
}

TEST(Validate, FaultInjectionFails)
{
    ValidateOptions o;
    o.points = 3;
    o.inject_fault = true;
    o.out = scratch("validate_fault").string();
    std::ostringstream out, err;
    EXPECT_EQ(cmd_validate(o, out, err), 5);
    EXPECT_NE(out.str().find("FAIL"), std::string::npos);
}

TEST(Validate, EmptyOrUnknownProblemSetIsConfigError)
{
    ValidateOptions o;
    o.out = scratch("validate_empty").string();
    o.problems.clear();
    std::ostringstream out, err;
    EXPECT_EQ(cmd_validate(o, out, err), 1);
    o.problems = {"spheres"};
    EXPECT_EQ(cmd_validate(o, out, err), 1);
}
