#include <random>

#include <benchmark/benchmark.h>

#include "pnewton/linalg.hpp"
#include "pnewton/problems.hpp"
#include "pnewton/solvers.hpp"
#include "pnewton/subproblem.hpp"

using namespace pnewton;

namespace {

Matrix random_spd(Eigen::Index n, std::mt19937_64& rng)
{
    std::normal_distribution<double> nd;
    Matrix B(n, n);
    for (Eigen::Index j = 0; j < n; ++j)
        for (Eigen::Index i = 0; i < n; ++i) B(i, j) = nd(rng);
    return B * B.transpose() + static_cast<double>(n) * Matrix::Identity(n, n);
}

Matrix random_sym(Eigen::Index n, std::mt19937_64& rng)
{
    std::normal_distribution<double> nd;
    Matrix B(n, n);
    for (Eigen::Index j = 0; j < n; ++j)
        for (Eigen::Index i = 0; i < n; ++i) B(i, j) = nd(rng);
    return 0.5 * (B + B.transpose());
}

Vector random_vec(Eigen::Index n, std::mt19937_64& rng)
{
    std::normal_distribution<double> nd;
    Vector v(n);
    for (Eigen::Index i = 0; i < n; ++i) v(i) = nd(rng);
    return v;
}

void BM_GenSymEig(benchmark::State& state)
{
    std::mt19937_64 rng(1);
    const auto n = static_cast<Eigen::Index>(state.range(0));
    const Matrix A = random_sym(n, rng);
    const Matrix M = random_spd(n, rng);
    for (auto _ : state) benchmark::DoNotOptimize(linalg::gen_sym_eig(A, M));
}
BENCHMARK(BM_GenSymEig)->Arg(10)->Arg(50)->Arg(100);

// Indefinite A, so the root search starts from lambda_s > 0.
void BM_SolveExact(benchmark::State& state)
{
    std::mt19937_64 rng(2);
    const auto n = static_cast<Eigen::Index>(state.range(0));
    const Matrix A = random_sym(n, rng);
    const Matrix M = random_spd(n, rng);
    const Vector g = random_vec(n, rng);
    for (auto _ : state) benchmark::DoNotOptimize(solve_exact(A, M, g, 1.0));
}
BENCHMARK(BM_SolveExact)->Arg(10)->Arg(50)->Arg(100);

void BM_PnDirection(benchmark::State& state)
{
    const auto prob = matfact_generate(10, 5, 1e4, 3);
    std::mt19937_64 rng(3);
    const Vector x = 10.0 * random_vec(prob.dim(), rng);
    const auto ref = ReferenceFunction::isotropic(ScalarKernel(KernelKind::Cosh, 1.0), prob.dim());
    LinearSolveOptions opts;
    opts.method = state.range(0) == 0 ? SolveMethod::Direct : SolveMethod::Krylov;
    opts.form = state.range(0) == 0 ? SystemForm::Transformed : SystemForm::Raw;
    for (auto _ : state) benchmark::DoNotOptimize(pn_direction(prob, ref, x, opts));
}
BENCHMARK(BM_PnDirection)->Arg(0)->Arg(1)->ArgNames({"krylov"});

void BM_Gmres(benchmark::State& state)
{
    std::mt19937_64 rng(4);
    const auto n = static_cast<Eigen::Index>(state.range(0));
    const Matrix A = random_spd(n, rng) + 0.1 * random_sym(n, rng).triangularView<Eigen::Upper>().toDenseMatrix();
    const Vector b = random_vec(n, rng);
    const linalg::LinearOperator op = [&](const Vector& v) -> Vector { return A * v; };
    for (auto _ : state) benchmark::DoNotOptimize(linalg::gmres_solve(op, b, 1e-8, 50, 1000));
}
BENCHMARK(BM_Gmres)->Arg(50)->Arg(200);

void BM_Cg(benchmark::State& state)
{
    std::mt19937_64 rng(5);
    const auto n = static_cast<Eigen::Index>(state.range(0));
    const Matrix A = random_spd(n, rng);
    const Vector b = random_vec(n, rng);
    const linalg::LinearOperator op = [&](const Vector& v) -> Vector { return A * v; };
    for (auto _ : state) benchmark::DoNotOptimize(linalg::cg_solve(op, b, 1e-8, 1000));
}
BENCHMARK(BM_Cg)->Arg(50)->Arg(200);

}  // namespace

BENCHMARK_MAIN();
