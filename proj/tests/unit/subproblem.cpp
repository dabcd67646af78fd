#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "pnewton/subproblem.hpp"
#include "test_support.hpp"

using namespace pnewton;
using pnewton::testing::randn;
using pnewton::testing::random_spd;
using pnewton::testing::relerr;
using pnewton::testing::with_spectrum;

namespace {

constexpr double kGoldenConj = 0.618033988749894848205;

Matrix diag2(double a, double b)
{
    Matrix D = Matrix::Zero(2, 2);
    D(0, 0) = a;
    D(1, 1) = b;
    return D;
}

double min_eig(const Matrix& A)
{
    return Eigen::SelfAdjointEigenSolver<Matrix>(A, Eigen::EigenvaluesOnly).eigenvalues()(0);
}

// The three defining conditions, recomputed from scratch.
void expect_solves(const Matrix& A, const Matrix& M, const Vector& g, double sigma, const SubproblemSolution& sol,
                   double tol_lambda = 1e-13)
{
    const double lam = sol.lambda;
    const double scale = A.norm() + lam * M.norm();
    EXPECT_GE(lam, 0.0);
    EXPECT_LE(((A + lam * M) * sol.s + M * g).norm(), 1e-8 * scale * (1.0 + sol.s.norm()));
    EXPECT_LE(std::abs(lam - sigma * sol.s.norm()), tol_lambda * (1.0 + lam));
    EXPECT_GE(min_eig(A + lam * M), -1e-8 * scale);
    EXPECT_EQ(sol.z.size(), g.size());
    EXPECT_EQ(sol.z.norm(), 0.0);
}

}  // namespace

TEST(BuildPencil, DiagonalPencil)
{
    const PencilData pd = build_pencil(diag2(1.0, 2.0), Matrix::Identity(2, 2), Vector::Ones(2));
    EXPECT_NEAR(pd.decomp.xi(0), 1.0, 1e-15);
    EXPECT_NEAR(pd.decomp.xi(1), 2.0, 1e-15);
    EXPECT_NEAR(std::abs(pd.gV(0)), 1.0, 1e-15);
    EXPECT_NEAR(std::abs(pd.gV(1)), 1.0, 1e-15);
    EXPECT_LT((pd.G - Matrix::Identity(2, 2)).norm(), 1e-15);
    EXPECT_EQ(pd.lambda_s, 0.0);
    EXPECT_EQ(pd.hard_index_set, std::vector<int>{0});
}

TEST(BuildPencil, NegativeBottomEigenvalue)
{
    Vector g(2);
    g << 0.0, 1.0;
    const PencilData pd = build_pencil(diag2(-1.0, 1.0), Matrix::Identity(2, 2), g);
    EXPECT_NEAR(pd.lambda_s, 1.0, 1e-15);
    EXPECT_EQ(pd.hard_index_set, std::vector<int>{0});
    EXPECT_EQ(pd.gV(0), 0.0);
}

TEST(BuildPencil, PositivePencilAndGramInvariants)
{
    std::mt19937_64 rng(1);
    const Matrix M = random_spd(5, rng, 50.0);
    const PencilData pd = build_pencil(2.0 * M, M, randn(5, rng));
    EXPECT_EQ(pd.lambda_s, 0.0);
    EXPECT_EQ(pd.hard_index_set.size(), 5u);
    EXPECT_LT((pd.G - pd.G.transpose()).norm(), 1e-14 * pd.G.norm());
    EXPECT_GT(min_eig(pd.G), 0.0);
}

TEST(BuildPencil, ZeroGradientRejected)
{
    EXPECT_THROW(build_pencil(Matrix::Identity(2, 2), Matrix::Identity(2, 2), Vector::Zero(2)),
                 std::invalid_argument);
}

TEST(Psi, ScalarFormula)
{
    const PencilData pd = build_pencil(Matrix::Identity(2, 2), Matrix::Identity(2, 2), Vector::Unit(2, 0));
    EXPECT_NEAR(psi_eval(pd, 1.0, 1.0), -0.75, 1e-15);
    EXPECT_NEAR(psi_eval(pd, 1e-12, 1.0), 1.0, 1e-11);
    for (double lam : {0.1, 0.5, 3.0, 40.0}) {
        EXPECT_NEAR(psi_eval(pd, lam, 2.0), 1.0 / ((1.0 + lam) * (1.0 + lam)) - lam * lam / 4.0, 1e-14);
    }
}

TEST(Psi, FiniteAtHardCaseShift)
{
    Vector g(2);
    g << 0.0, 1.0;
    const PencilData pd = build_pencil(diag2(-1.0, 1.0), Matrix::Identity(2, 2), g);
    EXPECT_NEAR(psi_eval(pd, 1.0 + 1e-12, 1.0), -0.75, 1e-11);
    EXPECT_THROW(psi_eval(pd, 1.0, 1.0), std::domain_error);
    EXPECT_THROW(psi_eval(pd, 0.5, 1.0), std::domain_error);
}

TEST(SolveExact, IdentityPencilGivesGoldenRatio)
{
    const auto sol = solve_exact(Matrix::Identity(2, 2), Matrix::Identity(2, 2), Vector::Unit(2, 0), 1.0);
    EXPECT_NEAR(sol.lambda, kGoldenConj, 1e-13);
    EXPECT_NEAR(sol.s(0), -kGoldenConj, 1e-13);
    EXPECT_EQ(sol.s(1), 0.0);
    EXPECT_FALSE(sol.hard_case);
}

TEST(SolveExact, HardCase)
{
    Vector g(2);
    g << 0.0, 1.0;
    const Matrix A = diag2(-1.0, 1.0);
    const auto sol = solve_exact(A, Matrix::Identity(2, 2), g, 1.0);
    EXPECT_TRUE(sol.hard_case);
    EXPECT_NEAR(sol.lambda, 1.0, 1e-12);
    EXPECT_NEAR(std::abs(sol.s(0)), std::sqrt(3.0) / 2.0, 1e-12);
    EXPECT_NEAR(sol.s(1), -0.5, 1e-12);
    EXPECT_NEAR(sol.s.norm(), 1.0, 1e-12);
    expect_solves(A, Matrix::Identity(2, 2), g, 1.0, sol);
}

TEST(SolveExact, TinySigmaRecoversNewtonStep)
{
    std::mt19937_64 rng(2);
    const Matrix A = random_spd(4, rng, 10.0);
    const Matrix M = random_spd(4, rng, 10.0);
    const Vector g = randn(4, rng);
    const auto sol = solve_exact(A, M, g, 1e-8);
    const Vector newton = -A.ldlt().solve(M * g);
    EXPECT_LT((sol.s - newton).norm() / newton.norm(), 1e-6);
}

TEST(SolveExact, RejectsBadArguments)
{
    const Matrix I = Matrix::Identity(2, 2);
    EXPECT_THROW(solve_exact(I, I, Vector::Zero(2), 1.0), std::invalid_argument);
    EXPECT_THROW(solve_exact(I, I, Vector::Ones(2), 0.0), std::invalid_argument);
    EXPECT_THROW(solve_exact(I, I, Vector::Ones(3), 1.0), std::invalid_argument);
    EXPECT_THROW(solve_exact(I, -I, Vector::Ones(2), 1.0), linalg::NotPositiveDefinite);
}

TEST(SolveExact, RandomInstancesSatisfyDefiningConditions)
{
    std::mt19937_64 rng(3);
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
        SCOPED_TRACE(k);
        const auto sol = solve_exact(A, M, g, sigma);
        expect_solves(A, M, g, sigma, sol);
        EXPECT_GE(sol.psd_margin, -kPsdTol * sol.scale);
    }
}

TEST(SolveExact, ConstructedHardCases)
{
    std::mt19937_64 rng(4);
    std::uniform_real_distribution<double> unif(0.5, 3.0);
    int hard = 0;
    for (int k = 0; k < 50; ++k) {
        const int n = 2 + k % 7;
        const Matrix M = random_spd(n, rng, 1e2);
        // Pencil with prescribed generalized eigenvalues: A = M V diag(xi) V' M with V' M V = I.
        const Matrix L = M.llt().matrixL();
        const Matrix W = pnewton::testing::random_orthogonal(n, rng);
        const Matrix V = L.transpose().triangularView<Eigen::Upper>().solve(W);
        Vector xi(n);
        xi(0) = -unif(rng);
        for (int i = 1; i < n; ++i) xi(i) = xi(0) + unif(rng);
        Matrix A = M * V * xi.asDiagonal() * V.transpose() * M;
        A = (0.5 * (A + A.transpose())).eval();
        // g with no component along v1: v1' M g = 0.
        Vector g = randn(n, rng);
        const Vector Mv1 = M * V.col(0);
        g -= (Mv1.dot(g) / Mv1.squaredNorm()) * Mv1;
        const double lam_s = -xi(0);
        // Psi(lambda_s) <= 0 needs ||s_s|| <= lambda_s / sigma; pick sigma to leave room.
        Vector c = Vector::Zero(n);
        const Vector gV = V.transpose() * M * g;
        for (int i = 1; i < n; ++i) c(i) = gV(i) / (xi(i) + lam_s);
        const double ss = (V * c).norm();
        const double sigma = 0.5 * lam_s / ss;
        SCOPED_TRACE(k);
        const auto sol = solve_exact(A, M, g, sigma);
        expect_solves(A, M, g, sigma, sol);
        EXPECT_TRUE(sol.hard_case);
        EXPECT_NEAR(sol.s.norm(), lam_s / sigma, 1e-8 * (1.0 + lam_s / sigma));
        hard += sol.hard_case ? 1 : 0;
    }
    EXPECT_EQ(hard, 50);
}

TEST(SolveExact, IdentityMetricMatchesBisectionOracle)
{
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> eig(-3.0, 3.0);
    for (int k = 0; k < 100; ++k) {
        const int n = 1 + k % 8;
        Vector d(n);
        for (int i = 0; i < n; ++i) d(i) = eig(rng);
        const Matrix A = with_spectrum(d, rng);
        const Vector g = randn(n, rng);
        const double sigma = std::pow(10.0, eig(rng) / 1.5);
        const auto sol = solve_exact(A, Matrix::Identity(n, n), g, sigma);
        double lam = 0.0;
        const Vector s = pnewton::testing::cubic_reg_step_bisect(A, g, sigma, &lam);
        EXPECT_LT(std::abs(sol.lambda - lam), 1e-8 * (1.0 + lam)) << "k=" << k;
        EXPECT_LE((sol.s - s).norm(), 1e-8) << "k=" << k;
    }
}

TEST(Truncated, ResidualMatchesDroppedComponents)
{
    std::mt19937_64 rng(6);
    const int n = 6;
    const Matrix A = random_spd(n, rng, 1e2);
    const Matrix M = random_spd(n, rng, 1e1);
    const Vector g = randn(n, rng);
    const double sigma = 0.7;
    for (int drop : {0, 1, 3}) {
        const auto sol = solve_truncated(A, M, g, sigma, drop);
        const double lam = sol.lambda;
        // M^{-1}(A + lambda M) s = -g + z
        const Vector lhs = M.ldlt().solve((A + lam * M) * sol.s);
        EXPECT_LT((lhs + g - sol.z).norm(), 1e-9 * (1.0 + g.norm()));
        EXPECT_LT(std::abs(lam - sigma * sol.s.norm()), 1e-12 * (1.0 + lam));
        EXPECT_GE(min_eig(A + lam * M), -1e-8 * (A.norm() + lam * M.norm()));
        if (drop == 0) EXPECT_LT(sol.z.norm(), 1e-12 * g.norm());
        else EXPECT_GT(sol.z.norm(), 0.0);
    }
    EXPECT_THROW(solve_truncated(A, M, g, sigma, n), std::invalid_argument);
}

TEST(AcceptInexact, HalfFactorBound)
{
    SubproblemSolution sol;
    sol.s = Vector::Ones(2);  // ||s||^2 = 2
    sol.sigma = 1.0;
    sol.lambda = std::sqrt(2.0);
    sol.psd_margin = 1.0;
    sol.scale = 1.0;
    sol.z = Vector::Zero(2);
    EXPECT_TRUE(accept_inexact(sol, 0.0));
    EXPECT_TRUE(accept_inexact(sol, 3.0));
    const double theta = 0.5;
    sol.z = Vector::Unit(2, 0) * (theta * 2.0);
    EXPECT_FALSE(accept_inexact(sol, theta));
    sol.z = Vector::Unit(2, 0) * (0.4 * theta * 2.0);
    EXPECT_TRUE(accept_inexact(sol, theta));
    sol.psd_margin = -1.0;
    EXPECT_FALSE(accept_inexact(sol, theta));
    sol.psd_margin = 1.0;
    sol.lambda = 2.0;
    EXPECT_FALSE(accept_inexact(sol, theta));
}
