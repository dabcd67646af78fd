#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "commands.hpp"

using namespace pnewton::cli;

int main(int argc, char** argv)
{
    CLI::App app{"Preconditioned Newton methods: solve single problems and run the benchmark suites"};
    app.require_subcommand(1);

    // solve
    SolveOptions solve;
    auto* s = app.add_subcommand("solve", "Run one solver on one problem described by a TOML config");
    s->add_option("--config", solve.config, "TOML run configuration")->check(CLI::ExistingFile);
    s->add_option("--seed", solve.overrides.seed, "Seed for problem generation and x0");
    s->add_option("--out", solve.overrides.out, "Results directory");
    s->add_option("--eps", solve.overrides.eps, "Stopping tolerance");
    s->add_option("--max-iters", solve.overrides.max_iters, "Iteration budget");
    s->add_option("--kernel", solve.overrides.kernel, "quad | cosh | expabs | logbar");
    s->add_option("--scale", solve.overrides.scale, "Kernel scale, a positive number or 'auto'");
    s->add_option("--algo", solve.overrides.algo, "pg | newton | pn | globalized | regularized | adaptive");

    // bench-poly1d
    Poly1dOptions poly;
    bool poly_no_glob = false;
    auto* bp = app.add_subcommand("bench-poly1d", "Pure PN vs vanilla Newton on x^p/p + x^2/2");
    bp->add_option("--p", poly.p, "Powers")->delimiter(',')->capture_default_str();
    bp->add_option("--x0", poly.x0, "Starting points")->delimiter(',')->capture_default_str();
    bp->add_option("--kernel,--kernels", poly.kernels, "Kernels")->delimiter(',')->capture_default_str();
    bp->add_option("--eps", poly.eps, "Tolerance on |f'|")->capture_default_str();
    bp->add_option("--max-iters", poly.max_iters, "Iteration budget")->capture_default_str();
    bp->add_option("--out", poly.out, "Results directory")->capture_default_str();
    bp->add_flag("--no-globalized", poly_no_glob, "Skip the globalized contrast rows");

    // bench-logreg
    LogregOptions logreg;
    auto* bl = app.add_subcommand("bench-logreg", "Logistic regression on LIBSVM files from w = 0");
    bl->add_option("--data", logreg.data, "LIBSVM files (default: bundled data/*.libsvm)")->delimiter(',');
    bl->add_option("--kernel,--kernels", logreg.kernels, "Kernels")->delimiter(',')->capture_default_str();
    bl->add_option("--scale", logreg.scale, "Kernel scale or 'auto' (gradient norm at w = 0)")->capture_default_str();
    bl->add_option("--l2", logreg.l2, "l2 regularization weight")->capture_default_str();
    bl->add_option("--eps", logreg.eps, "Tolerance on the gradient norm")->capture_default_str();
    bl->add_option("--max-iters", logreg.max_iters, "Iteration budget")->capture_default_str();
    bl->add_option("--out", logreg.out, "Results directory")->capture_default_str();

    // bench-matfact
    MatfactOptions mf;
    auto* bm = app.add_subcommand("bench-matfact", "Symmetric low-rank factorization, median matvec counts");
    bm->add_option("--cond", mf.cond, "Condition numbers")->delimiter(',')->capture_default_str();
    bm->add_option("--n", mf.n, "Rows of Y")->capture_default_str();
    bm->add_option("--r", mf.r, "Rank")->capture_default_str();
    bm->add_option("--x0-scale", mf.x0_scale, "Scale of the normal starting point")->capture_default_str();
    bm->add_option("--repeats", mf.repeats, "Runs per condition number")->capture_default_str();
    bm->add_option("--seed", mf.seed, "Base seed")->capture_default_str();
    bm->add_option("--kernel,--kernels", mf.kernels, "Kernels")->delimiter(',')->capture_default_str();
    bm->add_option("--scale", mf.scale, "Kernel scale or 'auto'")->capture_default_str();
    bm->add_option("--family", mf.family, "globalized | regularized | adaptive")->capture_default_str();
    bm->add_option("--sigma", mf.sigma, "Regularization weight (regularized) or sigma0 (adaptive)")
        ->capture_default_str();
    bm->add_option("--eps", mf.eps, "Tolerance on the gradient norm")->capture_default_str();
    bm->add_option("--max-iters", mf.max_iters, "Iteration budget")->capture_default_str();
    bm->add_option("--out", mf.out, "Results directory")->capture_default_str();

    // validate
    ValidateOptions val;
    std::vector<std::string> problems_arg;
    auto* v = app.add_subcommand("validate", "Derivative, kernel and Lipschitz oracles on the built-in problems");
    auto* problems_opt = v->add_option("--problems", problems_arg, "Subset of poly1d,quadratic,logistic,matfact")
                             ->delimiter(',')
                             ->expected(0, -1);
    v->add_option("--points", val.points, "Random points per problem")->capture_default_str();
    v->add_option("--seed", val.seed, "Seed")->capture_default_str();
    v->add_option("--out", val.out, "Results directory")->capture_default_str();
    v->add_flag("--inject-fault", val.inject_fault, "Corrupt derivatives to exercise the failure path");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : kExitConfigError;
    }

    try {
        if (*s) return cmd_solve(solve, std::cout, std::cerr);
        if (*bp) {
            poly.with_globalized = !poly_no_glob;
            return cmd_bench_poly1d(poly, std::cout, std::cerr);
        }
        if (*bl) return cmd_bench_logreg(logreg, std::cout, std::cerr);
        if (*bm) return cmd_bench_matfact(mf, std::cout, std::cerr);
        if (*v) {
            if (problems_opt->count() > 0) {
                val.problems.clear();
                for (const auto& p : problems_arg) {
                    if (!p.empty()) val.problems.push_back(p);
                }
            }
            return cmd_validate(val, std::cout, std::cerr);
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitSolverFailure;
    }
    return kExitConfigError;
}
