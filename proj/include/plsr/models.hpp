#pragma once

#include "plsr/optimizer.hpp"

#include <cstdint>
#include <vector>

namespace plsr {

/// Paired observation matrices: I rows of independent (X) and dependent (Y)
/// variables.
struct DataMatrixPair {
  Matrix x;  // I x N
  Matrix y;  // I x M

  int rows() const { return static_cast<int>(x.rows()); }
  static DataMatrixPair from(Matrix x, Matrix y);
};

/// Cross-product Z = X_c^T Y_c of the column-centered data, together with
/// the means used for centering (zero vectors when centering is off).
struct CrossProduct {
  Matrix z;  // N x M
  Vector mean_x;
  Vector mean_y;
};

CrossProduct cross_product(const DataMatrixPair& data, bool center = true);

/// f(U,V,S) = 1/2 ||U S V^T - Z||_F^2
double cost(const ProductPoint& point, const Matrix& z);

/// Euclidean partial derivatives of the cost. With W = U S V^T - Z:
///   g_u = W V S^T,  g_v = W^T U S,  g_s = U^T W V = S - U^T Z V.
TangentTriple egrad(const ProductPoint& point, const Matrix& z);

enum class Variant { bigr_preconditioned, bigr_identity, simpls };

std::string to_string(Variant v);
Variant variant_from_string(const std::string& s);

struct PlsrModel {
  Matrix u;        // N x R (orthonormal for bigr variants)
  Matrix v;        // M x R (orthonormal for bigr variants)
  Matrix s;        // R x R core (identity for simpls)
  Matrix coeffs;   // N x M regression coefficients
  Vector mean_x;   // length N
  Vector mean_y;   // length M
  int rank = 0;
  Trace fit_trace;  // empty for simpls
  Variant variant = Variant::bigr_preconditioned;
};

/// Fits the bi-Grassmann estimator: builds Z, starts from a seeded random
/// orthonormal (U, V) with S = U^T Z V (or from the truncated SVD when
/// svd_warm_start is set), and minimizes the SVD-type cost by Riemannian CG.
PlsrModel fit_plsr_bigr(const DataMatrixPair& data, int rank,
                        const OptimConfig& config,
                        MetricMode mode = MetricMode::preconditioned,
                        bool center = true, bool svd_warm_start = false);

/// Classical SIMPLS: dominant singular pair of the deflated cross-product,
/// score normalization, deflation against the orthonormalized loading basis.
PlsrModel fit_simpls(const DataMatrixPair& data, int rank, bool center = true);

struct TruncatedSvd {
  Matrix u;     // N x R
  Vector sing;  // R, descending
  Matrix v;     // M x R
};

/// Top-R singular triplets of z; the Eckart-Young optimum of the cost.
TruncatedSvd truncated_svd(const Matrix& z, int rank);

/// Y_hat = (X_new - mean_x) C + mean_y, one row per input row.
Matrix predict(const PlsrModel& model, const Matrix& x_new);

struct LoadingsResiduals {
  Matrix p;  // N x R
  Matrix q;  // M x R
  Matrix e;  // I x N
  Matrix f;  // I x M
};

/// Least-squares loadings of the centered data on the latent scores
/// T = X_c U, B = Y_c V, and the corresponding residuals.
LoadingsResiduals loadings_and_residuals(const PlsrModel& model,
                                         const DataMatrixPair& data);

/// Per-row argmax of predicted one-hot scores; ties break to the lowest
/// class index.
std::vector<int> classify(const Matrix& y_hat);

/// Seeded random orthonormal basis (Gaussian then thin QR).
Matrix random_orthonormal(int n, int r, std::uint64_t seed);

}  // namespace plsr
