#include "pnewton/linalg.hpp"

#include <cmath>

#include <Eigen/Eigenvalues>
#include <Eigen/LU>
#include <Eigen/SVD>

namespace pnewton::linalg {

namespace {

bool residual_ok(const Matrix& A, const Vector& x, const Vector& b, double normA)
{
    const double res = (A * x - b).norm();
    return std::isfinite(res) && res <= 1e-10 * (normA * x.norm() + b.norm());
}

}  // namespace

std::optional<Vector> solve_dense(const Matrix& A, const Vector& b, bool symmetric)
{
    if (A.rows() != A.cols() || A.rows() != b.size()) {
        throw std::invalid_argument("solve_dense: dimension mismatch");
    }
    const Eigen::Index n = A.rows();
    if (n == 0) return Vector{};
    const double normA = A.norm();
    if (normA == 0.0 || !std::isfinite(normA)) return std::nullopt;
    const double pivot_floor = kPivotTol * normA;

    if (symmetric) {
        // Fast path for the definite case; indefinite matrices go through LU.
        Eigen::LDLT<Matrix> ldlt(A);
        if (ldlt.info() == Eigen::Success && ldlt.isPositive()) {
            const Vector d = ldlt.vectorD();
            if (d.minCoeff() > pivot_floor) {
                Vector x = ldlt.solve(b);
                if (residual_ok(A, x, b, normA)) return x;
            }
        }
    }

    Eigen::FullPivLU<Matrix> lu(A);
    const Vector pivots = lu.matrixLU().diagonal().cwiseAbs();
    if (pivots.minCoeff() <= pivot_floor) return std::nullopt;
    Vector x = lu.solve(b);
    if (!residual_ok(A, x, b, normA)) {
        x += lu.solve(Vector(b - A * x));
        if (!residual_ok(A, x, b, normA)) return std::nullopt;
    }
    return x;
}

KrylovResult cg_solve(const LinearOperator& apply, const Vector& b, double tol, int maxit)
{
    if (!(tol > 0.0)) throw std::invalid_argument("cg_solve: tol must be positive");
    KrylovResult out;
    out.x = Vector::Zero(b.size());
    const double bnorm = b.norm();
    if (bnorm == 0.0) {
        out.converged = true;
        return out;
    }
    Vector r = b;
    Vector p = r;
    double rr = r.squaredNorm();
    for (int k = 0; k < maxit; ++k) {
        const Vector Ap = apply(p);
        ++out.matvecs;
        const double curvature = p.dot(Ap);
        if (!(curvature > 0.0)) {
            out.indefinite = true;
            break;
        }
        const double step = rr / curvature;
        out.x += step * p;
        r -= step * Ap;
        ++out.iterations;
        const double rr_new = r.squaredNorm();
        out.residual_history.push_back(std::sqrt(rr_new));
        if (std::sqrt(rr_new) <= tol * bnorm) {
            out.converged = true;
            rr = rr_new;
            break;
        }
        p = r + (rr_new / rr) * p;
        rr = rr_new;
    }
    out.residual_norm = std::sqrt(rr);
    return out;
}

KrylovResult gmres_solve(const LinearOperator& apply, const Vector& b, double tol, int restart, int maxit)
{
    if (!(tol > 0.0)) throw std::invalid_argument("gmres_solve: tol must be positive");
    if (restart < 1) throw std::invalid_argument("gmres_solve: restart must be >= 1");
    const Eigen::Index n = b.size();
    KrylovResult out;
    out.x = Vector::Zero(n);
    const double bnorm = b.norm();
    if (bnorm == 0.0) {
        out.converged = true;
        return out;
    }
    const int m = static_cast<int>(std::min<Eigen::Index>(restart, std::max<Eigen::Index>(n, 1)));

    Vector r = b;
    double beta = bnorm;
    while (out.iterations < maxit) {
        Matrix Q(n, m + 1);
        Matrix H = Matrix::Zero(m + 1, m);
        Vector cs = Vector::Zero(m);
        Vector sn = Vector::Zero(m);
        Vector e = Vector::Zero(m + 1);
        e[0] = beta;
        Q.col(0) = r / beta;

        int j = 0;
        bool breakdown = false;
        for (; j < m && out.iterations < maxit; ++j) {
            Vector w = apply(Q.col(j));
            ++out.matvecs;
            // Modified Gram-Schmidt.
            for (int i = 0; i <= j; ++i) {
                H(i, j) = Q.col(i).dot(w);
                w -= H(i, j) * Q.col(i);
            }
            H(j + 1, j) = w.norm();
            breakdown = H(j + 1, j) <= 1e-14 * H.col(j).head(j + 1).norm();
            if (!breakdown) Q.col(j + 1) = w / H(j + 1, j);

            for (int i = 0; i < j; ++i) {
                const double t = cs[i] * H(i, j) + sn[i] * H(i + 1, j);
                H(i + 1, j) = -sn[i] * H(i, j) + cs[i] * H(i + 1, j);
                H(i, j) = t;
            }
            const double denom = std::hypot(H(j, j), H(j + 1, j));
            cs[j] = denom == 0.0 ? 1.0 : H(j, j) / denom;
            sn[j] = denom == 0.0 ? 0.0 : H(j + 1, j) / denom;
            H(j, j) = cs[j] * H(j, j) + sn[j] * H(j + 1, j);
            H(j + 1, j) = 0.0;
            e[j + 1] = -sn[j] * e[j];
            e[j] = cs[j] * e[j];

            ++out.iterations;
            out.residual_history.push_back(std::abs(e[j + 1]));
            if (std::abs(e[j + 1]) <= tol * bnorm || breakdown) {
                ++j;
                break;
            }
        }

        // Back substitution on the j x j triangle.
        Vector y = Vector::Zero(j);
        for (int i = j - 1; i >= 0; --i) {
            double acc = e[i];
            for (int k = i + 1; k < j; ++k) acc -= H(i, k) * y[k];
            y[i] = H(i, i) == 0.0 ? 0.0 : acc / H(i, i);
        }
        out.x += Q.leftCols(j) * y;

        r = b - apply(out.x);
        ++out.matvecs;
        beta = r.norm();
        out.residual_norm = beta;
        if (beta <= tol * bnorm) {
            out.converged = true;
            break;
        }
        if (breakdown) {
            // Happy breakdown with an unresolved residual means a singular operator.
            break;
        }
    }
    return out;
}

Matrix cholesky(const Matrix& M)
{
    if (M.rows() != M.cols()) throw std::invalid_argument("cholesky: matrix must be square");
    const double normM = M.norm();
    Eigen::LLT<Matrix> llt(0.5 * (M + M.transpose()));
    if (llt.info() != Eigen::Success) throw NotPositiveDefinite("cholesky: matrix is not positive definite");
    Matrix L = llt.matrixL();
    const double min_pivot = L.diagonal().cwiseAbs2().minCoeff();
    if (!(min_pivot > kPivotTol * normM)) {
        throw NotPositiveDefinite("cholesky: pivot below the relative threshold");
    }
    return L;
}

GenEig gen_sym_eig(const Matrix& A, const Matrix& M)
{
    if (A.rows() != A.cols() || M.rows() != M.cols() || A.rows() != M.rows()) {
        throw std::invalid_argument("gen_sym_eig: dimension mismatch");
    }
    const Matrix L = cholesky(M);
    const auto tri = L.triangularView<Eigen::Lower>();
    // C = L^{-1} A L^{-T}
    Matrix C = tri.solve(Matrix(0.5 * (A + A.transpose())));
    C = tri.solve(Matrix(C.transpose()));
    C = 0.5 * (C + C.transpose());
    Eigen::SelfAdjointEigenSolver<Matrix> es(C);
    if (es.info() != Eigen::Success) throw std::runtime_error("gen_sym_eig: eigensolver failed");
    GenEig out;
    out.xi = es.eigenvalues();
    out.V = L.transpose().triangularView<Eigen::Upper>().solve(es.eigenvectors());
    return out;
}

double min_eigenvalue(const Matrix& A)
{
    Eigen::SelfAdjointEigenSolver<Matrix> es(0.5 * (A + A.transpose()), Eigen::EigenvaluesOnly);
    return es.eigenvalues()[0];
}

double spectral_norm(const Matrix& A)
{
    if (A.size() == 0) return 0.0;
    if (A.rows() == 1 && A.cols() == 1) return std::abs(A(0, 0));
    Eigen::JacobiSVD<Matrix> svd(A);
    return svd.singularValues()[0];
}

}  // namespace pnewton::linalg
