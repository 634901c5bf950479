#include "plsr/optimizer.hpp"

#include <chrono>
#include <cmath>
#include <limits>

namespace plsr {

std::string to_string(TerminationReason reason) {
  switch (reason) {
    case TerminationReason::gradient_tolerance: return "gradient_tolerance";
    case TerminationReason::max_iters: return "max_iters";
    case TerminationReason::line_search_failure: return "line_search_failure";
  }
  return "unknown";
}

namespace {

struct LineSearchResult {
  ProductPoint point;
  double cost = 0;
  double step = 0;
  int backtracks = 0;
  bool accepted = false;
};

// Armijo backtracking along direction d from x. slope = g(rgrad, d) < 0.
LineSearchResult armijo(const Problem& problem, const ProductPoint& x,
                        double fx, const TangentTriple& d, double slope,
                        double t0, const OptimConfig& config) {
  LineSearchResult out;
  double t = t0;
  for (int k = 0; k <= config.max_backtracks; ++k) {
    bool ok = true;
    ProductPoint trial = x;
    double ft = std::numeric_limits<double>::infinity();
    try {
      trial = retract(x, d, t);
      ft = problem.cost(trial);
    } catch (const NumericError&) {
      ok = false;  // QR breakdown at a long step: shrink and retry
    }
    if (ok && std::isfinite(ft) && ft <= fx + config.armijo_c1 * t * slope) {
      out.point = std::move(trial);
      out.cost = ft;
      out.step = t;
      out.backtracks = k;
      out.accepted = true;
      return out;
    }
    t *= config.backtrack_factor;
  }
  out.backtracks = config.max_backtracks;
  return out;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

}  // namespace

std::pair<ProductPoint, Trace> minimize(const Problem& problem,
                                        const ProductPoint& init,
                                        const OptimConfig& config) {
  if (init.n() != problem.n || init.m() != problem.m || init.r() != problem.r)
    throw std::invalid_argument("minimize: init does not match problem dims");
  const auto t_start = std::chrono::steady_clock::now();

  ProductPoint x = init;
  double fx = problem.cost(x);
  if (!std::isfinite(fx)) throw NumericError("invalid start");
  const double f0 = fx;
  const double tol = config.grad_tol * std::max(1.0, std::abs(f0));
  const int restart = config.restart_period > 0 ? config.restart_period
                                                : problem.n * problem.r;

  MetricState metric = metric_state(x, problem.mode);
  TangentTriple g = egrad_to_rgrad(x, metric, problem.egrad(x));
  double gnorm = norm(x, metric, g);

  Trace trace;
  trace.records.push_back({0, fx, gnorm, 0.0, 0, seconds_since(t_start)});

  TangentTriple d{-g.xi_u, -g.xi_v, -g.xi_s};
  double prev_step = config.initial_step;

  for (int iter = 1; iter <= config.max_iters; ++iter) {
    if (gnorm <= tol) {
      trace.reason = TerminationReason::gradient_tolerance;
      return {std::move(x), std::move(trace)};
    }

    double slope = inner(x, metric, g, d);
    if (slope >= 0) {  // not a descent direction: restart with steepest descent
      d = TangentTriple{-g.xi_u, -g.xi_v, -g.xi_s};
      slope = -gnorm * gnorm;
    }

    const double t0 = iter == 1
                          ? config.initial_step
                          : std::min(1.0, prev_step / config.backtrack_factor);
    LineSearchResult ls = armijo(problem, x, fx, d, slope, t0, config);
    if (!ls.accepted) {
      trace.reason = TerminationReason::line_search_failure;
      return {std::move(x), std::move(trace)};
    }
    prev_step = ls.step;

    MetricState metric_new = metric_state(ls.point, problem.mode);
    TangentTriple g_new = egrad_to_rgrad(ls.point, metric_new, problem.egrad(ls.point));
    const double gnorm_new = norm(ls.point, metric_new, g_new);

    // Polak-Ribiere+ with every inner product taken in the new iterate's
    // metric; previous gradient and direction are transported first.
    double beta = 0.0;
    if (iter % restart != 0) {
      const TangentTriple g_prev = transport(x, ls.point, metric_new, g);
      const double denom = inner(ls.point, metric_new, g_prev, g_prev);
      if (denom > 0) {
        const TangentTriple diff{g_new.xi_u - g_prev.xi_u, g_new.xi_v - g_prev.xi_v,
                                 g_new.xi_s - g_prev.xi_s};
        beta = std::max(0.0, inner(ls.point, metric_new, g_new, diff) / denom);
      }
    }
    TangentTriple d_new{-g_new.xi_u, -g_new.xi_v, -g_new.xi_s};
    if (beta > 0) {
      const TangentTriple d_prev = transport(x, ls.point, metric_new, d);
      d_new.xi_u += beta * d_prev.xi_u;
      d_new.xi_v += beta * d_prev.xi_v;
      d_new.xi_s += beta * d_prev.xi_s;
    }

    x = std::move(ls.point);
    fx = ls.cost;
    metric = std::move(metric_new);
    g = std::move(g_new);
    gnorm = gnorm_new;
    d = std::move(d_new);
    trace.records.push_back({iter, fx, gnorm, ls.step, ls.backtracks,
                             seconds_since(t_start)});
  }
  trace.reason = gnorm <= tol ? TerminationReason::gradient_tolerance
                              : TerminationReason::max_iters;
  return {std::move(x), std::move(trace)};
}

std::pair<ProductPoint, StepInfo> steepest_descent_step(const Problem& problem,
                                                        const ProductPoint& point,
                                                        const OptimConfig& config) {
  const double fx = problem.cost(point);
  if (!std::isfinite(fx)) throw NumericError("invalid start");
  MetricState metric = metric_state(point, problem.mode);
  TangentTriple g = egrad_to_rgrad(point, metric, problem.egrad(point));
  const double gnorm = norm(point, metric, g);

  StepInfo info;
  info.cost_before = fx;
  info.grad_norm = gnorm;
  if (gnorm <= config.grad_tol * std::max(1.0, std::abs(fx))) {
    info.cost_after = fx;
    return {point, info};
  }
  TangentTriple d{-g.xi_u, -g.xi_v, -g.xi_s};
  LineSearchResult ls =
      armijo(problem, point, fx, d, -gnorm * gnorm, config.initial_step, config);
  if (!ls.accepted) {
    info.cost_after = fx;
    return {point, info};
  }
  info.cost_after = ls.cost;
  info.step = ls.step;
  info.backtracks = ls.backtracks;
  info.moved = true;
  return {std::move(ls.point), info};
}

}  // namespace plsr
