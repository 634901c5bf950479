#pragma once

#include "plsr/types.hpp"

namespace plsr {

/// Orthonormal representative of an R-dimensional subspace of R^N.
/// Two bases U and UW with W orthogonal represent the same point.
struct GrassmannPoint {
  Matrix basis;  // N x R, basis^T basis = I_R

  int n() const { return static_cast<int>(basis.rows()); }
  int r() const { return static_cast<int>(basis.cols()); }

  /// Validates orthonormality (1e-10 Frobenius) and 1 <= R <= N.
  static GrassmannPoint from(Matrix basis);
};

bool is_orthonormal(const Matrix& m, double tol = 1e-10);

/// Point on Gr(N,R) x Gr(M,R) x R^{RxR}.
struct ProductPoint {
  GrassmannPoint u;  // N x R
  GrassmannPoint v;  // M x R
  Matrix s;          // R x R, unconstrained

  int n() const { return u.n(); }
  int m() const { return v.n(); }
  int r() const { return static_cast<int>(s.rows()); }

  /// Validates the per-factor invariants and that all ranks agree.
  static ProductPoint from(Matrix u, Matrix v, Matrix s);
};

/// Ambient triple of matrices shaped like a tangent vector at some
/// ProductPoint. Whether it is actually tangent/horizontal is a property of
/// how it was produced, not enforced by the type.
struct TangentTriple {
  Matrix xi_u;  // N x R
  Matrix xi_v;  // M x R
  Matrix xi_s;  // R x R

  static TangentTriple zero(int n, int m, int r);
};

/// SPD matrix with an eagerly built eigendecomposition cache.
struct SpdMetric {
  Matrix m;       // R x R, symmetric positive definite
  Matrix q;       // eigenvectors, m = q diag(lambda) q^T
  Vector lambda;  // eigenvalues, all > 0

  static SpdMetric from(Matrix m);
  static SpdMetric identity(int r);

  Matrix apply_inverse(const Matrix& x) const;        // m^{-1} x
  Matrix apply_inverse_right(const Matrix& x) const;  // x m^{-1}
};

enum class MetricMode { preconditioned, identity };

/// Preconditioner pair (SS^T, S^TS), regularized to stay SPD when S is
/// rank-deficient. Identity mode replaces both with I_R and is the
/// non-preconditioned ablation contrast.
struct MetricState {
  SpdMetric mu;  // acts on the U factor
  SpdMetric mv;  // acts on the V factor
  MetricMode mode = MetricMode::preconditioned;
};

/// Builds the metric at a point: SS^T + dI and S^TS + dI with
/// d = 1e-12 * max(1, tr(SS^T)/R). Throws NumericError("invalid core
/// factor") on non-finite S.
MetricState metric_state(const ProductPoint& point, MetricMode mode);

/// Riemannian inner product
///   g(a, b) = tr(mu a_u^T b_u) + tr(mv a_v^T b_v) + tr(a_s^T b_s).
double inner(const ProductPoint& point, const MetricState& metric,
             const TangentTriple& a, const TangentTriple& b);

double norm(const ProductPoint& point, const MetricState& metric,
            const TangentTriple& a);

/// Solves m B + B m = c through the cached eigendecomposition of m:
/// B = Q ((Q^T c Q)_{ij} / (l_i + l_j)) Q^T. Symmetric c gives symmetric B,
/// skew c gives skew B.
Matrix solve_lyapunov(const SpdMetric& m, const Matrix& c);

/// Projects an ambient N x R matrix onto the tangent space at u,
/// orthogonally with respect to <x, y> = tr(m x^T y). The removed normal
/// component has the form U B m^{-1} with B symmetric solving
///   m B + B m = m (U^T a + a^T U) m.
Matrix project_to_tangent(const GrassmannPoint& u, const Matrix& a,
                          const SpdMetric& m);

/// Removes the vertical component U W (W skew) of a tangent vector,
/// orthogonally in the same metric; W solves m W + W m = G^T m - m G with
/// G = xi^T U.
Matrix project_to_horizontal(const GrassmannPoint& u, const Matrix& xi,
                             const SpdMetric& m);

/// Converts a Euclidean gradient triple into the Riemannian gradient under
/// the metric: the U factor is scaled by mu^{-1} and pushed through the
/// tangent and horizontal projectors (V analogous, S passes through). The
/// result is the unique horizontal triple with
///   g(result, eta) = <eg, eta>_F  for every horizontal eta.
TangentTriple egrad_to_rgrad(const ProductPoint& point,
                             const MetricState& metric,
                             const TangentTriple& eg);

/// Thin-QR retraction with positive-diagonal sign convention on the
/// Grassmann factors; the core moves linearly. Throws
/// NumericError("retraction breakdown") on rank deficiency.
ProductPoint retract(const ProductPoint& point, const TangentTriple& xi,
                     double t);

/// Transports a horizontal vector from one point to another by projecting
/// onto the horizontal space at the destination under its metric. The core
/// component is copied unchanged.
TangentTriple transport(const ProductPoint& from, const ProductPoint& to,
                        const MetricState& metric_at_to,
                        const TangentTriple& xi);

}  // namespace plsr
