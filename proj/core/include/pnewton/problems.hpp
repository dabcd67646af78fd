#pragma once

#include <cstdint>
#include <istream>
#include <optional>
#include <ostream>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/SparseCore>

#include "pnewton/types.hpp"

namespace pnewton {

/// Evaluation contract for a twice continuously differentiable objective.
///
/// Implementations must be re-entrant: the solvers and the validation
/// oracles evaluate the same instance at many points, possibly concurrently.
class Objective {
public:
    virtual ~Objective() = default;

    virtual Eigen::Index dim() const = 0;
    virtual double value(const Vector& x) const = 0;
    virtual Vector gradient(const Vector& x) const = 0;
    /// Dense Hessian. Only required for dim() <= kDenseHessianMaxDim.
    virtual Matrix hessian(const Vector& x) const = 0;
    virtual Vector hess_vec(const Vector& x, const Vector& v) const { return hessian(x) * v; }

    /// inf f when it is known in closed form.
    virtual std::optional<double> lower_bound_hint() const { return std::nullopt; }
    virtual std::string name() const = 0;

    bool has_dense_hessian() const { return dim() <= kDenseHessianMaxDim; }

protected:
    void check_point(const Vector& x) const;
};

// ---------------------------------------------------------------------------

struct PolyValues {
    double f;
    double d1;
    double d2;
    double d3;
};

/// 1D polynomial sum_i a_i x^i (coefficients in ascending degree).
class Poly1D {
public:
    explicit Poly1D(std::vector<double> coefficients);

    /// x^p / p + x^2 / 2
    static Poly1D power_plus_quadratic(int p);

    const std::vector<double>& coefficients() const { return coeffs_; }
    int degree() const { return static_cast<int>(coeffs_.size()) - 1; }

    PolyValues eval(double x) const;

private:
    std::vector<double> coeffs_;
};

class PolynomialObjective final : public Objective {
public:
    explicit PolynomialObjective(Poly1D poly, std::optional<double> lower_bound = std::nullopt);

    /// x^p / p + x^2 / 2 with inf f = 0.
    static PolynomialObjective power_plus_quadratic(int p);

    const Poly1D& poly() const { return poly_; }

    Eigen::Index dim() const override { return 1; }
    double value(const Vector& x) const override;
    Vector gradient(const Vector& x) const override;
    Matrix hessian(const Vector& x) const override;
    std::optional<double> lower_bound_hint() const override { return lower_bound_; }
    std::string name() const override;

private:
    Poly1D poly_;
    std::optional<double> lower_bound_;
};

// ---------------------------------------------------------------------------

/// f(x) = (x - x*)' Q (x - x*) / 2 + c
class QuadraticProblem final : public Objective {
public:
    QuadraticProblem(Matrix Q, Vector xstar, double offset = 0.0);

    /// SPD Q with a seeded random orthogonal basis and spectrum spaced
    /// geometrically in [1/cond, 1]; x* standard normal.
    static QuadraticProblem random(Eigen::Index n, double cond, std::uint64_t seed);

    const Matrix& Q() const { return Q_; }
    const Vector& xstar() const { return xstar_; }
    double offset() const { return offset_; }

    Eigen::Index dim() const override { return Q_.rows(); }
    double value(const Vector& x) const override;
    Vector gradient(const Vector& x) const override;
    Matrix hessian(const Vector& x) const override;
    Vector hess_vec(const Vector& x, const Vector& v) const override;
    std::optional<double> lower_bound_hint() const override { return offset_; }
    std::string name() const override { return "quadratic"; }

private:
    Matrix Q_;
    Vector xstar_;
    double offset_;
};

// ---------------------------------------------------------------------------

using SparseRowMatrix = Eigen::SparseMatrix<double, Eigen::RowMajor>;

/// Binary logistic regression
///   f(w) = (1/m) sum_i ln(1 + exp(-y_i <w, x_i>)) + (l2/2) ||w||^2
class LogisticProblem final : public Objective {
public:
    LogisticProblem(SparseRowMatrix features, std::vector<int> labels, double l2 = 0.0);

    const SparseRowMatrix& features() const { return X_; }
    const std::vector<int>& labels() const { return labels_; }
    double l2() const { return l2_; }
    Eigen::Index samples() const { return X_.rows(); }

    LogisticProblem with_l2(double l2) const { return {X_, labels_, l2}; }

    Eigen::Index dim() const override { return X_.cols(); }
    double value(const Vector& w) const override;
    Vector gradient(const Vector& w) const override;
    Matrix hessian(const Vector& w) const override;
    Vector hess_vec(const Vector& w, const Vector& v) const override;
    std::optional<double> lower_bound_hint() const override { return 0.0; }
    std::string name() const override { return "logistic"; }

private:
    Vector margins(const Vector& w) const;

    SparseRowMatrix X_;
    std::vector<int> labels_;
    Vector y_;
    double l2_;
};

class ParseError : public std::runtime_error {
public:
    ParseError(std::size_t line, const std::string& what);
    std::size_t line() const { return line_; }

private:
    std::size_t line_;
};

/// Reads LIBSVM text (`label index:value ...`, 1-based indices, `#` comments).
/// Labels 0/-1 map to -1 and 1/+1 to +1; n is the largest index seen.
LogisticProblem parse_libsvm(std::istream& in, double l2 = 0.0);
LogisticProblem load_libsvm(const std::string& path, double l2 = 0.0);
/// Writes the canonical form: `+1`/`-1` labels, single spaces, shortest
/// round-trip values, one sample per line.
void write_libsvm(std::ostream& out, const LogisticProblem& prob);

// ---------------------------------------------------------------------------

/// f(X) = ||X X' - Y||_F^2 / 4 over X in R^{n x r}, flattened column-major.
class SymMatFactProblem final : public Objective {
public:
    SymMatFactProblem(Matrix Y, Eigen::Index rank);

    const Matrix& Y() const { return Y_; }
    Eigen::Index n() const { return Y_.rows(); }
    Eigen::Index rank() const { return rank_; }

    Matrix unflatten(const Vector& x) const;
    static Vector flatten(const Matrix& X);

    Eigen::Index dim() const override { return Y_.rows() * rank_; }
    double value(const Vector& x) const override;
    Vector gradient(const Vector& x) const override;
    Matrix hessian(const Vector& x) const override;
    Vector hess_vec(const Vector& x, const Vector& v) const override;
    std::optional<double> lower_bound_hint() const override { return 0.0; }
    std::string name() const override { return "matfact"; }

private:
    Matrix Y_;
    Eigen::Index rank_;
};

/// Y = U diag(d) U' with seeded random orthogonal U and r positive
/// eigenvalues spaced geometrically from 1 down to 1/cond.
SymMatFactProblem matfact_generate(Eigen::Index n, Eigen::Index r, double cond, std::uint64_t seed);

}  // namespace pnewton
