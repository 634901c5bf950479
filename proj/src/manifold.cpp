#include "plsr/manifold.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/QR>

#include <cmath>

namespace plsr {

bool is_orthonormal(const Matrix& m, double tol) {
  const int r = static_cast<int>(m.cols());
  return (m.transpose() * m - Matrix::Identity(r, r)).norm() <= tol;
}

GrassmannPoint GrassmannPoint::from(Matrix basis) {
  if (basis.cols() < 1 || basis.cols() > basis.rows())
    throw std::invalid_argument("GrassmannPoint: need 1 <= R <= N");
  if (!is_orthonormal(basis))
    throw std::invalid_argument("GrassmannPoint: basis is not orthonormal");
  return GrassmannPoint{std::move(basis)};
}

ProductPoint ProductPoint::from(Matrix u, Matrix v, Matrix s) {
  if (s.rows() != s.cols()) throw std::invalid_argument("core factor must be square");
  if (u.cols() != s.rows() || v.cols() != s.rows())
    throw std::invalid_argument("factor ranks disagree");
  return ProductPoint{GrassmannPoint::from(std::move(u)),
                      GrassmannPoint::from(std::move(v)), std::move(s)};
}

TangentTriple TangentTriple::zero(int n, int m, int r) {
  return TangentTriple{Matrix::Zero(n, r), Matrix::Zero(m, r), Matrix::Zero(r, r)};
}

SpdMetric SpdMetric::from(Matrix m) {
  Matrix sym = 0.5 * (m + m.transpose());
  Eigen::SelfAdjointEigenSolver<Matrix> eig(sym);
  if (eig.info() != Eigen::Success)
    throw NumericError("metric eigendecomposition failed");
  return SpdMetric{std::move(sym), eig.eigenvectors(), eig.eigenvalues()};
}

SpdMetric SpdMetric::identity(int r) {
  return SpdMetric{Matrix::Identity(r, r), Matrix::Identity(r, r), Vector::Ones(r)};
}

Matrix SpdMetric::apply_inverse(const Matrix& x) const {
  Matrix y = q.transpose() * x;
  y.array().colwise() /= lambda.array();
  return q * y;
}

Matrix SpdMetric::apply_inverse_right(const Matrix& x) const {
  Matrix y = x * q;
  y.array().rowwise() /= lambda.transpose().array();
  return y * q.transpose();
}

MetricState metric_state(const ProductPoint& point, MetricMode mode) {
  const int r = point.r();
  if (mode == MetricMode::identity)
    return MetricState{SpdMetric::identity(r), SpdMetric::identity(r), mode};
  if (!all_finite(point.s)) throw NumericError("invalid core factor");
  const double delta = 1e-12 * std::max(1.0, point.s.squaredNorm() / r);
  Matrix mu = point.s * point.s.transpose() + delta * Matrix::Identity(r, r);
  Matrix mv = point.s.transpose() * point.s + delta * Matrix::Identity(r, r);
  return MetricState{SpdMetric::from(std::move(mu)), SpdMetric::from(std::move(mv)), mode};
}

namespace {

void check_triple_shape(const ProductPoint& p, const TangentTriple& t,
                        const char* what) {
  if (t.xi_u.rows() != p.n() || t.xi_u.cols() != p.r() ||
      t.xi_v.rows() != p.m() || t.xi_v.cols() != p.r() ||
      t.xi_s.rows() != p.r() || t.xi_s.cols() != p.r())
    throw std::invalid_argument(std::string(what) + ": triple shape mismatch");
}

double weighted_trace(const Matrix& m, const Matrix& a, const Matrix& b) {
  // tr(m a^T b) without forming the full product
  return (m.cwiseProduct((a.transpose() * b).transpose())).sum();
}

}  // namespace

double inner(const ProductPoint& point, const MetricState& metric,
             const TangentTriple& a, const TangentTriple& b) {
  check_triple_shape(point, a, "inner");
  check_triple_shape(point, b, "inner");
  return weighted_trace(metric.mu.m, a.xi_u, b.xi_u) +
         weighted_trace(metric.mv.m, a.xi_v, b.xi_v) +
         a.xi_s.cwiseProduct(b.xi_s).sum();
}

double norm(const ProductPoint& point, const MetricState& metric,
            const TangentTriple& a) {
  return std::sqrt(std::max(0.0, inner(point, metric, a, a)));
}

Matrix solve_lyapunov(const SpdMetric& m, const Matrix& c) {
  if (c.rows() != m.m.rows() || c.cols() != m.m.cols())
    throw std::invalid_argument("solve_lyapunov: shape mismatch");
  const int r = static_cast<int>(c.rows());
  Matrix ct = m.q.transpose() * c * m.q;
  for (int i = 0; i < r; ++i) {
    for (int j = 0; j < r; ++j) {
      const double denom = m.lambda(i) + m.lambda(j);
      if (denom < 1e-300) throw NumericError("singular preconditioner");
      ct(i, j) /= denom;
    }
  }
  return m.q * ct * m.q.transpose();
}

Matrix project_to_tangent(const GrassmannPoint& u, const Matrix& a,
                          const SpdMetric& m) {
  if (a.rows() != u.n() || a.cols() != u.r())
    throw std::invalid_argument("project_to_tangent: shape mismatch");
  const Matrix h = u.basis.transpose() * a;
  const Matrix rhs = m.m * (h + h.transpose()) * m.m;
  const Matrix b = solve_lyapunov(m, rhs);
  return a - u.basis * m.apply_inverse_right(b);
}

Matrix project_to_horizontal(const GrassmannPoint& u, const Matrix& xi,
                             const SpdMetric& m) {
  if (xi.rows() != u.n() || xi.cols() != u.r())
    throw std::invalid_argument("project_to_horizontal: shape mismatch");
  const Matrix g = xi.transpose() * u.basis;
  const Matrix rhs = g.transpose() * m.m - m.m * g;
  const Matrix omega = solve_lyapunov(m, rhs);
  return xi - u.basis * omega;
}

TangentTriple egrad_to_rgrad(const ProductPoint& point,
                             const MetricState& metric,
                             const TangentTriple& eg) {
  check_triple_shape(point, eg, "egrad_to_rgrad");
  Matrix gu = metric.mu.apply_inverse_right(eg.xi_u);
  gu = project_to_tangent(point.u, gu, metric.mu);
  gu = project_to_horizontal(point.u, gu, metric.mu);
  Matrix gv = metric.mv.apply_inverse_right(eg.xi_v);
  gv = project_to_tangent(point.v, gv, metric.mv);
  gv = project_to_horizontal(point.v, gv, metric.mv);
  return TangentTriple{std::move(gu), std::move(gv), eg.xi_s};
}

namespace {

// Q factor of the thin QR with diag(R) > 0.
Matrix qf(const Matrix& a) {
  const int r = static_cast<int>(a.cols());
  Eigen::HouseholderQR<Matrix> qr(a);
  Matrix q = qr.householderQ() * Matrix::Identity(a.rows(), r);
  Matrix rr = qr.matrixQR().topRows(r).triangularView<Eigen::Upper>();
  const double scale = std::max(1.0, a.norm());
  for (int j = 0; j < r; ++j) {
    if (std::abs(rr(j, j)) <= 1e-13 * scale)
      throw NumericError("retraction breakdown");
    if (rr(j, j) < 0) q.col(j) = -q.col(j);
  }
  return q;
}

}  // namespace

ProductPoint retract(const ProductPoint& point, const TangentTriple& xi,
                     double t) {
  check_triple_shape(point, xi, "retract");
  if (t == 0.0) return point;
  return ProductPoint{GrassmannPoint{qf(point.u.basis + t * xi.xi_u)},
                      GrassmannPoint{qf(point.v.basis + t * xi.xi_v)},
                      point.s + t * xi.xi_s};
}

TangentTriple transport(const ProductPoint& from, const ProductPoint& to,
                        const MetricState& metric_at_to,
                        const TangentTriple& xi) {
  check_triple_shape(from, xi, "transport");
  Matrix tu = project_to_tangent(to.u, xi.xi_u, metric_at_to.mu);
  tu = project_to_horizontal(to.u, tu, metric_at_to.mu);
  Matrix tv = project_to_tangent(to.v, xi.xi_v, metric_at_to.mv);
  tv = project_to_horizontal(to.v, tv, metric_at_to.mv);
  return TangentTriple{std::move(tu), std::move(tv), xi.xi_s};
}

}  // namespace plsr
