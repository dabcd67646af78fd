#include "pnewton/problems.hpp"

#include <cmath>
#include <random>
#include <sstream>

#include <Eigen/QR>

namespace pnewton {

void Objective::check_point(const Vector& x) const
{
    if (x.size() != dim()) {
        std::ostringstream os;
        os << name() << ": expected a point of dimension " << dim() << ", got " << x.size();
        throw std::invalid_argument(os.str());
    }
}

// ---------------------------------------------------------------------------
// Poly1D

Poly1D::Poly1D(std::vector<double> coefficients) : coeffs_(std::move(coefficients))
{
    if (coeffs_.empty()) coeffs_.push_back(0.0);
}

Poly1D Poly1D::power_plus_quadratic(int p)
{
    if (p < 2) throw std::invalid_argument("power_plus_quadratic: p must be >= 2");
    std::vector<double> c(static_cast<std::size_t>(p) + 1, 0.0);
    c[2] += 0.5;
    c[static_cast<std::size_t>(p)] += 1.0 / p;
    return Poly1D(std::move(c));
}

PolyValues Poly1D::eval(double x) const
{
    // Horner on the value and its first three derivatives simultaneously; the
    // recursion accumulates p^(k)(x) / k!.
    PolyValues v{0.0, 0.0, 0.0, 0.0};
    for (auto it = coeffs_.rbegin(); it != coeffs_.rend(); ++it) {
        v.d3 = v.d3 * x + v.d2;
        v.d2 = v.d2 * x + v.d1;
        v.d1 = v.d1 * x + v.f;
        v.f = v.f * x + *it;
    }
    v.d2 *= 2.0;
    v.d3 *= 6.0;
    return v;
}

PolynomialObjective::PolynomialObjective(Poly1D poly, std::optional<double> lower_bound)
    : poly_(std::move(poly)), lower_bound_(lower_bound)
{
}

PolynomialObjective PolynomialObjective::power_plus_quadratic(int p)
{
    return PolynomialObjective(Poly1D::power_plus_quadratic(p), 0.0);
}

double PolynomialObjective::value(const Vector& x) const
{
    check_point(x);
    return poly_.eval(x[0]).f;
}

Vector PolynomialObjective::gradient(const Vector& x) const
{
    check_point(x);
    return Vector::Constant(1, poly_.eval(x[0]).d1);
}

Matrix PolynomialObjective::hessian(const Vector& x) const
{
    check_point(x);
    return Matrix::Constant(1, 1, poly_.eval(x[0]).d2);
}

std::string PolynomialObjective::name() const
{
    return "poly1d";
}

// ---------------------------------------------------------------------------
// QuadraticProblem

QuadraticProblem::QuadraticProblem(Matrix Q, Vector xstar, double offset)
    : Q_(std::move(Q)), xstar_(std::move(xstar)), offset_(offset)
{
    if (Q_.rows() != Q_.cols() || Q_.rows() != xstar_.size() || Q_.rows() == 0) {
        throw std::invalid_argument("QuadraticProblem: Q must be square and match x*");
    }
    Q_ = 0.5 * (Q_ + Q_.transpose());
}

QuadraticProblem QuadraticProblem::random(Eigen::Index n, double cond, std::uint64_t seed)
{
    if (n <= 0 || !(cond >= 1.0)) throw std::invalid_argument("QuadraticProblem::random: bad arguments");
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> normal;
    Matrix G(n, n);
    for (Eigen::Index j = 0; j < n; ++j)
        for (Eigen::Index i = 0; i < n; ++i) G(i, j) = normal(rng);
    const Matrix U = Eigen::HouseholderQR<Matrix>(G).householderQ();
    Vector d(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        d[i] = n == 1 ? 1.0 : std::pow(cond, -static_cast<double>(i) / static_cast<double>(n - 1));
    }
    Vector xs(n);
    for (Eigen::Index i = 0; i < n; ++i) xs[i] = normal(rng);
    return QuadraticProblem(U * d.asDiagonal() * U.transpose(), xs, 0.0);
}

double QuadraticProblem::value(const Vector& x) const
{
    check_point(x);
    const Vector e = x - xstar_;
    return 0.5 * e.dot(Q_ * e) + offset_;
}

Vector QuadraticProblem::gradient(const Vector& x) const
{
    check_point(x);
    return Q_ * (x - xstar_);
}

Matrix QuadraticProblem::hessian(const Vector& x) const
{
    check_point(x);
    return Q_;
}

Vector QuadraticProblem::hess_vec(const Vector& x, const Vector& v) const
{
    check_point(x);
    return Q_ * v;
}

// ---------------------------------------------------------------------------
// LogisticProblem

namespace {

// ln(1 + exp(t)) without overflow.
double softplus(double t)
{
    return t > 0.0 ? t + std::log1p(std::exp(-t)) : std::log1p(std::exp(t));
}

double sigmoid(double t)
{
    if (t >= 0.0) return 1.0 / (1.0 + std::exp(-t));
    const double e = std::exp(t);
    return e / (1.0 + e);
}

}  // namespace

LogisticProblem::LogisticProblem(SparseRowMatrix features, std::vector<int> labels, double l2)
    : X_(std::move(features)), labels_(std::move(labels)), l2_(l2)
{
    if (static_cast<Eigen::Index>(labels_.size()) != X_.rows()) {
        throw std::invalid_argument("LogisticProblem: one label per sample required");
    }
    if (X_.cols() == 0) throw std::invalid_argument("LogisticProblem: no features");
    if (X_.rows() == 0) throw std::invalid_argument("LogisticProblem: no samples");
    if (!(l2 >= 0.0)) throw std::invalid_argument("LogisticProblem: l2 must be nonnegative");
    y_.resize(X_.rows());
    for (std::size_t i = 0; i < labels_.size(); ++i) {
        if (labels_[i] != 1 && labels_[i] != -1) throw std::invalid_argument("LogisticProblem: labels must be +-1");
        y_[static_cast<Eigen::Index>(i)] = labels_[i];
    }
    X_.makeCompressed();
}

Vector LogisticProblem::margins(const Vector& w) const
{
    return y_.cwiseProduct(X_ * w);
}

double LogisticProblem::value(const Vector& w) const
{
    check_point(w);
    const Vector m = margins(w);
    double sum = 0.0;
    for (Eigen::Index i = 0; i < m.size(); ++i) sum += softplus(-m[i]);
    return sum / static_cast<double>(m.size()) + 0.5 * l2_ * w.squaredNorm();
}

Vector LogisticProblem::gradient(const Vector& w) const
{
    check_point(w);
    const Vector m = margins(w);
    Vector coef(m.size());
    for (Eigen::Index i = 0; i < m.size(); ++i) coef[i] = -y_[i] * sigmoid(-m[i]);
    Vector g = X_.transpose() * coef;
    g /= static_cast<double>(m.size());
    g += l2_ * w;
    return g;
}

Matrix LogisticProblem::hessian(const Vector& w) const
{
    check_point(w);
    const Vector m = margins(w);
    Vector d(m.size());
    for (Eigen::Index i = 0; i < m.size(); ++i) d[i] = sigmoid(m[i]) * sigmoid(-m[i]);
    const Matrix Xd = Matrix(X_);
    Matrix H = Xd.transpose() * d.asDiagonal() * Xd;
    H /= static_cast<double>(m.size());
    H.diagonal().array() += l2_;
    return 0.5 * (H + H.transpose());
}

Vector LogisticProblem::hess_vec(const Vector& w, const Vector& v) const
{
    check_point(w);
    check_point(v);
    const Vector m = margins(w);
    Vector t = X_ * v;
    for (Eigen::Index i = 0; i < m.size(); ++i) t[i] *= sigmoid(m[i]) * sigmoid(-m[i]);
    Vector out = X_.transpose() * t;
    out /= static_cast<double>(m.size());
    out += l2_ * v;
    return out;
}

// ---------------------------------------------------------------------------
// SymMatFactProblem

SymMatFactProblem::SymMatFactProblem(Matrix Y, Eigen::Index rank) : Y_(std::move(Y)), rank_(rank)
{
    if (Y_.rows() != Y_.cols()) throw std::invalid_argument("SymMatFactProblem: Y must be square");
    if (rank_ < 1 || rank_ > Y_.rows()) throw std::invalid_argument("SymMatFactProblem: need 1 <= r <= n");
    if (!Y_.isApprox(Y_.transpose(), 1e-12)) throw std::invalid_argument("SymMatFactProblem: Y must be symmetric");
    Y_ = 0.5 * (Y_ + Y_.transpose());
}

Matrix SymMatFactProblem::unflatten(const Vector& x) const
{
    check_point(x);
    return Eigen::Map<const Matrix>(x.data(), n(), rank_);
}

Vector SymMatFactProblem::flatten(const Matrix& X)
{
    return Eigen::Map<const Vector>(X.data(), X.size());
}

double SymMatFactProblem::value(const Vector& x) const
{
    const Matrix X = unflatten(x);
    return 0.25 * (X * X.transpose() - Y_).squaredNorm();
}

Vector SymMatFactProblem::gradient(const Vector& x) const
{
    const Matrix X = unflatten(x);
    return flatten((X * X.transpose() - Y_) * X);
}

Vector SymMatFactProblem::hess_vec(const Vector& x, const Vector& v) const
{
    const Matrix X = unflatten(x);
    const Matrix V = unflatten(v);
    const Matrix R = X * X.transpose() - Y_;
    return flatten((X * V.transpose() + V * X.transpose()) * X + R * V);
}

Matrix SymMatFactProblem::hessian(const Vector& x) const
{
    if (!has_dense_hessian()) throw std::logic_error("matfact: dense Hessian requested above the size limit");
    const Eigen::Index d = dim();
    Matrix H(d, d);
    Vector e = Vector::Zero(d);
    for (Eigen::Index j = 0; j < d; ++j) {
        e[j] = 1.0;
        H.col(j) = hess_vec(x, e);
        e[j] = 0.0;
    }
    return 0.5 * (H + H.transpose());
}

SymMatFactProblem matfact_generate(Eigen::Index n, Eigen::Index r, double cond, std::uint64_t seed)
{
    if (!(n >= r && r >= 1)) throw std::invalid_argument("matfact_generate: need n >= r >= 1");
    if (!(cond >= 1.0) || !std::isfinite(cond)) throw std::invalid_argument("matfact_generate: cond must be >= 1");
    if (r == 1 && cond != 1.0) throw std::invalid_argument("matfact_generate: rank 1 admits only cond = 1");
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> normal;
    Matrix G(n, n);
    for (Eigen::Index j = 0; j < n; ++j)
        for (Eigen::Index i = 0; i < n; ++i) G(i, j) = normal(rng);
    const Matrix U = Matrix(Eigen::HouseholderQR<Matrix>(G).householderQ()).leftCols(r);
    Vector d(r);
    for (Eigen::Index i = 0; i < r; ++i) {
        d[i] = r == 1 ? 1.0 : std::pow(cond, -static_cast<double>(i) / static_cast<double>(r - 1));
    }
    const Matrix P = U * d.asDiagonal() * U.transpose();
    Matrix Y = 0.5 * (P + P.transpose());
    return SymMatFactProblem(std::move(Y), r);
}

}  // namespace pnewton
