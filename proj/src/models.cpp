#include "plsr/models.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/QR>
#include <Eigen/SVD>

#include <cmath>
#include <random>

namespace plsr {

DataMatrixPair DataMatrixPair::from(Matrix x, Matrix y) {
  if (x.rows() != y.rows()) throw std::invalid_argument("X and Y row counts differ");
  if (x.rows() < 2) throw std::invalid_argument("need at least 2 rows");
  if (x.cols() < 1 || y.cols() < 1) throw std::invalid_argument("empty matrix");
  if (!all_finite(x) || !all_finite(y)) throw DataError("non-finite data entries");
  return DataMatrixPair{std::move(x), std::move(y)};
}

CrossProduct cross_product(const DataMatrixPair& data, bool center) {
  const int n = static_cast<int>(data.x.cols());
  const int m = static_cast<int>(data.y.cols());
  if (center && data.rows() < 2)
    throw std::invalid_argument("centering needs at least 2 rows");
  CrossProduct out;
  out.mean_x = center ? Vector(data.x.colwise().mean()) : Vector(Vector::Zero(n));
  out.mean_y = center ? Vector(data.y.colwise().mean()) : Vector(Vector::Zero(m));
  const Matrix xc = data.x.rowwise() - out.mean_x.transpose();
  const Matrix yc = data.y.rowwise() - out.mean_y.transpose();
  out.z = xc.transpose() * yc;
  return out;
}

double cost(const ProductPoint& point, const Matrix& z) {
  if (z.rows() != point.n() || z.cols() != point.m())
    throw std::invalid_argument("cost: Z shape mismatch");
  return 0.5 * (point.u.basis * point.s * point.v.basis.transpose() - z).squaredNorm();
}

TangentTriple egrad(const ProductPoint& point, const Matrix& z) {
  if (z.rows() != point.n() || z.cols() != point.m())
    throw std::invalid_argument("egrad: Z shape mismatch");
  const Matrix w = point.u.basis * point.s * point.v.basis.transpose() - z;
  return TangentTriple{w * point.v.basis * point.s.transpose(),
                       w.transpose() * point.u.basis * point.s,
                       point.u.basis.transpose() * w * point.v.basis};
}

std::string to_string(Variant v) {
  switch (v) {
    case Variant::bigr_preconditioned: return "bigr_preconditioned";
    case Variant::bigr_identity: return "bigr_identity";
    case Variant::simpls: return "simpls";
  }
  return "unknown";
}

Variant variant_from_string(const std::string& s) {
  if (s == "bigr_preconditioned" || s == "bigr") return Variant::bigr_preconditioned;
  if (s == "bigr_identity" || s == "bigr-noprecond") return Variant::bigr_identity;
  if (s == "simpls") return Variant::simpls;
  throw std::invalid_argument("unknown variant: " + s);
}

Matrix random_orthonormal(int n, int r, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  Matrix g(n, r);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < r; ++j) g(i, j) = gauss(rng);
  Eigen::HouseholderQR<Matrix> qr(g);
  Matrix q = qr.householderQ() * Matrix::Identity(n, r);
  Matrix rr = qr.matrixQR().topRows(r).triangularView<Eigen::Upper>();
  for (int j = 0; j < r; ++j)
    if (rr(j, j) < 0) q.col(j) = -q.col(j);
  return q;
}

namespace {

// C = U (T^T T + lambda I)^{-1} T^T Y_c with T = X_c U; the ridge term
// guards rank-deficient scores.
Matrix regression_coeffs(const Matrix& u, const Matrix& xc, const Matrix& yc) {
  const int r = static_cast<int>(u.cols());
  const Matrix t = xc * u;
  Matrix gram = t.transpose() * t;
  const double lambda = 1e-10 * gram.trace() / r;
  gram.diagonal().array() += lambda;
  const Matrix g = gram.ldlt().solve(t.transpose() * yc);
  return u * g;
}

}  // namespace

PlsrModel fit_plsr_bigr(const DataMatrixPair& data, int rank,
                        const OptimConfig& config, MetricMode mode,
                        bool center, bool svd_warm_start) {
  const int n = static_cast<int>(data.x.cols());
  const int m = static_cast<int>(data.y.cols());
  if (rank < 1 || rank > std::min(n, m))
    throw std::invalid_argument("rank out of range: need 1 <= R <= min(N, M)");

  const CrossProduct cp = cross_product(data, center);

  Matrix u0, v0;
  if (svd_warm_start) {
    const TruncatedSvd svd = truncated_svd(cp.z, rank);
    u0 = svd.u;
    v0 = svd.v;
  } else {
    u0 = random_orthonormal(n, rank, config.seed);
    v0 = random_orthonormal(m, rank, config.seed + 0x9e3779b97f4a7c15ull);
  }
  Matrix s0 = u0.transpose() * cp.z * v0;  // optimal core for fixed (U, V)
  ProductPoint init = ProductPoint::from(std::move(u0), std::move(v0), std::move(s0));

  Problem problem;
  problem.n = n;
  problem.m = m;
  problem.r = rank;
  problem.mode = mode;
  const Matrix& z = cp.z;
  problem.cost = [&z](const ProductPoint& p) { return cost(p, z); };
  problem.egrad = [&z](const ProductPoint& p) { return egrad(p, z); };

  auto [point, trace] = minimize(problem, init, config);

  PlsrModel model;
  model.u = point.u.basis;
  model.v = point.v.basis;
  model.s = point.s;
  model.mean_x = cp.mean_x;
  model.mean_y = cp.mean_y;
  model.rank = rank;
  model.fit_trace = std::move(trace);
  model.variant = mode == MetricMode::preconditioned ? Variant::bigr_preconditioned
                                                     : Variant::bigr_identity;
  const Matrix xc = data.x.rowwise() - cp.mean_x.transpose();
  const Matrix yc = data.y.rowwise() - cp.mean_y.transpose();
  model.coeffs = regression_coeffs(model.u, xc, yc);
  return model;
}

PlsrModel fit_simpls(const DataMatrixPair& data, int rank, bool center) {
  const int i_rows = data.rows();
  const int n = static_cast<int>(data.x.cols());
  const int m = static_cast<int>(data.y.cols());
  if (rank < 1 || rank > std::min(n, i_rows - 1))
    throw std::invalid_argument("rank out of range: need 1 <= R <= min(N, I-1)");

  const CrossProduct cp = cross_product(data, center);
  const Matrix xc = data.x.rowwise() - cp.mean_x.transpose();
  const Matrix yc = data.y.rowwise() - cp.mean_y.transpose();

  Matrix s = cp.z;  // deflated cross-product
  const double z_scale = s.norm();
  if (z_scale <= 1e-14 * std::max(1.0, xc.norm() * yc.norm()) || z_scale == 0.0)
    throw DataError("degenerate data: cross-product has no variance");

  Matrix weights(n, rank);   // R: X-side weights
  Matrix scores(i_rows, rank);
  Matrix xload(n, rank);     // P
  Matrix yload(m, rank);     // Q
  Matrix vbasis(n, rank);    // orthonormal loading basis used for deflation

  for (int a = 0; a < rank; ++a) {
    // dominant right singular vector of the deflated S
    Eigen::SelfAdjointEigenSolver<Matrix> eig(s.transpose() * s);
    Vector q = eig.eigenvectors().col(m - 1);
    const double sigma = std::sqrt(std::max(0.0, eig.eigenvalues()(m - 1)));
    if (sigma <= 1e-12 * z_scale)
      throw DataError("degenerate data: cross-product exhausted before rank");
    Vector r_vec = s * q;
    Vector t = xc * r_vec;
    const double t_norm = t.norm();
    if (!(t_norm > 0)) throw DataError("degenerate data: vanishing score");
    t /= t_norm;
    r_vec /= t_norm;
    Vector p = xc.transpose() * t;
    Vector qy = yc.transpose() * t;

    Vector v = p;
    for (int pass = 0; pass < 2; ++pass)  // re-orthogonalize for stability
      for (int j = 0; j < a; ++j) v -= vbasis.col(j).dot(v) * vbasis.col(j);
    const double v_norm = v.norm();
    if (!(v_norm > 0)) throw DataError("degenerate data: dependent loadings");
    v /= v_norm;
    s -= v * (v.transpose() * s);

    weights.col(a) = r_vec;
    scores.col(a) = t;
    xload.col(a) = p;
    yload.col(a) = qy;
    vbasis.col(a) = v;
  }

  PlsrModel model;
  model.u = weights;
  model.v = yload;
  model.s = Matrix::Identity(rank, rank);
  model.coeffs = weights * yload.transpose();
  model.mean_x = cp.mean_x;
  model.mean_y = cp.mean_y;
  model.rank = rank;
  model.variant = Variant::simpls;
  return model;
}

TruncatedSvd truncated_svd(const Matrix& z, int rank) {
  if (rank < 1 || rank > std::min(z.rows(), z.cols()))
    throw std::invalid_argument("rank out of range");
  Eigen::JacobiSVD<Matrix> svd(z, Eigen::ComputeThinU | Eigen::ComputeThinV);
  return TruncatedSvd{svd.matrixU().leftCols(rank),
                      svd.singularValues().head(rank),
                      svd.matrixV().leftCols(rank)};
}

Matrix predict(const PlsrModel& model, const Matrix& x_new) {
  if (x_new.cols() != model.coeffs.rows())
    throw std::invalid_argument("predict: column count mismatch");
  return ((x_new.rowwise() - model.mean_x.transpose()) * model.coeffs).rowwise() +
         model.mean_y.transpose();
}

LoadingsResiduals loadings_and_residuals(const PlsrModel& model,
                                         const DataMatrixPair& data) {
  if (data.x.cols() != model.u.rows() || data.y.cols() != model.v.rows())
    throw std::invalid_argument("loadings: data does not match model dims");
  const Matrix xc = data.x.rowwise() - model.mean_x.transpose();
  const Matrix yc = data.y.rowwise() - model.mean_y.transpose();
  const Matrix t = xc * model.u;
  const Matrix b = yc * model.v;

  // tiny ridge keeps the normal equations solvable for rank-deficient scores
  const auto ls_loadings = [](const Matrix& scores, const Matrix& centered) {
    Matrix gram = scores.transpose() * scores;
    gram.diagonal().array() += 1e-12 * std::max(1.0, gram.trace() / gram.rows());
    Eigen::LDLT<Matrix> ldlt(gram);
    return Matrix(centered.transpose() * ldlt.solve(scores.transpose()).transpose());
  };

  LoadingsResiduals out;
  out.p = ls_loadings(t, xc);
  out.q = ls_loadings(b, yc);
  out.e = xc - t * out.p.transpose();
  out.f = yc - b * out.q.transpose();
  return out;
}

std::vector<int> classify(const Matrix& y_hat) {
  if (y_hat.cols() < 2) throw std::invalid_argument("classify: need M >= 2 columns");
  std::vector<int> labels(static_cast<std::size_t>(y_hat.rows()));
  for (Eigen::Index i = 0; i < y_hat.rows(); ++i) {
    int best = 0;
    for (Eigen::Index j = 1; j < y_hat.cols(); ++j)
      if (y_hat(i, j) > y_hat(i, best)) best = static_cast<int>(j);
    labels[static_cast<std::size_t>(i)] = best;
  }
  return labels;
}

}  // namespace plsr
