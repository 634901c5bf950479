#pragma once

#include "plsr/manifold.hpp"

#include <cstdint>
#include <functional>
#include <string>
#include <utility>
#include <vector>

namespace plsr {

/// Smooth minimization problem over Gr(N,R) x Gr(M,R) x R^{RxR}.
/// cost and egrad must be pure functions and mutually consistent.
struct Problem {
  std::function<double(const ProductPoint&)> cost;
  std::function<TangentTriple(const ProductPoint&)> egrad;
  int n = 0;
  int m = 0;
  int r = 0;
  MetricMode mode = MetricMode::preconditioned;
};

enum class CgVariant { polak_ribiere_plus };

struct OptimConfig {
  double grad_tol = 1e-6;  // relative to max(1, |f_0|)
  int max_iters = 500;
  double armijo_c1 = 1e-4;
  double backtrack_factor = 0.5;
  int max_backtracks = 30;
  double initial_step = 1.0;
  CgVariant cg_variant = CgVariant::polak_ribiere_plus;
  int restart_period = 0;  // 0 = auto (N*R)
  std::uint64_t seed = 0;
};

enum class TerminationReason { gradient_tolerance, max_iters, line_search_failure };

std::string to_string(TerminationReason reason);

struct IterationRecord {
  int iter = 0;
  double cost = 0;
  double grad_norm = 0;
  double step = 0;        // accepted step length (0 for the initial record)
  int backtracks = 0;
  double elapsed_s = 0;   // wall-clock since the start of minimize
};

/// Per-iteration history of a run. Accepted iterates never increase cost.
struct Trace {
  std::vector<IterationRecord> records;
  TerminationReason reason = TerminationReason::max_iters;

  double final_cost() const { return records.empty() ? 0.0 : records.back().cost; }
  int iterations() const { return records.empty() ? 0 : records.back().iter; }
};

/// Riemannian conjugate gradient (Polak-Ribiere+, projection transport) with
/// Armijo backtracking. The metric is rebuilt at every iterate from the
/// current core factor unless the problem asks for the identity metric.
std::pair<ProductPoint, Trace> minimize(const Problem& problem,
                                        const ProductPoint& init,
                                        const OptimConfig& config);

struct StepInfo {
  double cost_before = 0;
  double cost_after = 0;
  double grad_norm = 0;
  double step = 0;
  int backtracks = 0;
  bool moved = false;
};

/// Single Armijo-backtracked steepest-descent step. Returns the point
/// unchanged when the gradient is already below tolerance.
std::pair<ProductPoint, StepInfo> steepest_descent_step(const Problem& problem,
                                                        const ProductPoint& point,
                                                        const OptimConfig& config);

}  // namespace plsr
