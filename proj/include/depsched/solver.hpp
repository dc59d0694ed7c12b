#pragma once

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstddef>
#include <span>
#include <utility>
#include <vector>

#include "depsched/closed_form.hpp"
#include "depsched/error.hpp"
#include "depsched/metrics.hpp"
#include "depsched/schedule.hpp"

namespace depsched {

// (T - 1) max(G, r_1 F) + max(X, G) + (r_2 - 1) Y + (r_1 - 1) F.
// Equals the makespan of the list schedule when r_2 = 1 and X >= Y. Elsewhere it
// drifts: G already holds the slice term, and max(G, r_1 F) can undercut the true
// layer period once the expert side is the bottleneck.
inline double objective_denominator(const StageFunctions& sf, const ModelSpec& model, int r1, int r2) {
  return (model.layers - 1) * std::max(sf.G, r1 * sf.F) + std::max(sf.X, sf.G) + (r2 - 1) * sf.Y +
         (r1 - 1) * sf.F;
}

struct SolverOptions {
  int r2_cap = 64;
};

// Largest r_2 keeping m_e >= 1, clamped to [1, r2_cap].
inline int r2_upper_bound(const ModelSpec& model, const ClusterSpec& cluster, int m_a, int r2_cap) {
  const long long tokens = static_cast<long long>(m_a) * cluster.ag * model.top_k * model.seq_len;
  const long long bound = std::max(1LL, tokens / std::max(1, model.experts));
  return static_cast<int>(std::clamp<long long>(bound, 1, std::max(1, r2_cap)));
}

struct AuditRow {
  int m_a = 0;
  int r1 = 0;
  Order order = Order::asas;
  int r2 = 0;
  double m_e = 0.0;
  double makespan_ms = 0.0;
  double throughput_tps = 0.0;
};

struct SolverResult {
  PipelineConfig best;
  double predicted_throughput_tps = 0.0;
  double best_makespan_ms = 0.0;
  std::size_t candidates_evaluated = 0;  // (m_a, r_1) pairs
  std::vector<AuditRow> audit;
  double solve_time_ms = 0.0;
};

// Candidate replacement rule shared with the oracle: strictly higher throughput
// wins, so the first candidate in iteration order keeps ties.
inline bool improves(double candidate_tps, double incumbent_tps) {
  return candidate_tps > incumbent_tps * (1.0 + 1e-12);
}

// Makespan of (m_a, r_1, r_2, order) from the analytic evaluator.
inline double predicted_makespan(const ModelSpec& model, const ClusterSpec& cluster,
                                 const LayerCostModels& lm, int m_a, int r1, int r2, Order order) {
  const PipelineConfig cfg = make_config(model, cluster, m_a, r1, r2, order);
  return critical_path_makespan(task_durations(lm, cfg), model.layers, r1, r2, order);
}

struct R2Choice {
  int r2 = 1;
  double makespan_ms = 0.0;
  double throughput_tps = 0.0;
};

// Best r_2 for fixed (m_a, r_1, order). ASAS: integer ternary search on the
// makespan, which is convex in 1/r_2, followed by a scan of the final bracket and
// its two neighbours. AASS: full scan. PPPIPE: r_2 = 1.
inline R2Choice solve_r2(const ModelSpec& model, const ClusterSpec& cluster, const LayerCostModels& lm,
                         int m_a, int r1, Order order, const SolverOptions& options = {}) {
  const int hi_bound = order == Order::pppipe ? 1 : r2_upper_bound(model, cluster, m_a, options.r2_cap);
  auto eval = [&](int r2) { return predicted_makespan(model, cluster, lm, m_a, r1, r2, order); };

  int lo = 1;
  int hi = hi_bound;
  if (order == Order::asas) {
    while (hi - lo > 2) {
      const int m1 = lo + (hi - lo) / 3;
      const int m2 = hi - (hi - lo) / 3;
      const double f1 = eval(m1);
      const double f2 = eval(m2);
      if (f1 < f2) {
        hi = m2 - 1;
      } else if (f1 > f2) {
        lo = m1 + 1;
      } else {
        lo = m1;
        hi = m2;
      }
    }
    lo = std::max(1, lo - 1);
    hi = std::min(hi_bound, hi + 1);
  }

  R2Choice best;
  best.makespan_ms = -1.0;
  for (int r2 = lo; r2 <= hi; ++r2) {
    const double span = eval(r2);
    if (best.makespan_ms < 0.0 || span < best.makespan_ms * (1.0 - 1e-12)) {
      best.r2 = r2;
      best.makespan_ms = span;
    }
  }
  best.throughput_tps =
      throughput(model, cluster, make_config(model, cluster, m_a, r1, best.r2, order), best.makespan_ms);
  return best;
}

// Maximal (m_a, r_1) pairs under r_1 * m_a <= cap, m_a descending.
inline std::vector<std::pair<int, int>> pareto_pairs(int mem_capacity) {
  std::vector<std::pair<int, int>> out;
  int prev_r1 = 0;
  for (int m_a = mem_capacity; m_a >= 1; --m_a) {
    const int r1 = mem_capacity / m_a;
    if (r1 == 0 || r1 == prev_r1) continue;
    out.emplace_back(m_a, r1);
    prev_r1 = r1;
  }
  return out;
}

// True when f sampled at r_2 = 1..n is convex as a function of u = 1/r_2,
// i.e. every interior point lies on or below the chord of its neighbours.
inline bool convex_in_inverse_r2(std::span<const double> f, double tolerance = 1e-9) {
  for (std::size_t k = 1; k + 1 < f.size(); ++k) {
    const double u0 = 1.0 / static_cast<double>(k + 2);
    const double u1 = 1.0 / static_cast<double>(k + 1);
    const double u2 = 1.0 / static_cast<double>(k);
    const double chord = ((u2 - u1) * f[k + 1] + (u1 - u0) * f[k - 1]) / (u2 - u0);
    if (f[k] > chord + tolerance * std::max(1.0, std::abs(f[k]))) return false;
  }
  return true;
}

// The ASAS makespan of every Pareto pair is convex in 1/r_2 over [1, r_2 bound].
// When this holds the ternary search is exact.
inline bool r2_convexity_holds(const ModelSpec& model, const ClusterSpec& cluster, const LayerCostModels& lm,
                               const SolverOptions& options = {}) {
  for (const auto& [m_a, r1] : pareto_pairs(cluster.mem_capacity)) {
    const int n = r2_upper_bound(model, cluster, m_a, options.r2_cap);
    std::vector<double> f;
    f.reserve(static_cast<std::size_t>(n));
    for (int r2 = 1; r2 <= n; ++r2) f.push_back(predicted_makespan(model, cluster, lm, m_a, r1, r2, Order::asas));
    if (!convex_in_inverse_r2(f)) return false;
  }
  return true;
}

namespace detail {

inline void require_instance(const ModelSpec& model, const ClusterSpec& cluster, const LayerCostModels& lm) {
  auto v = validate_model(model);
  auto c = validate_cluster(cluster);
  auto l = check_layer_models(lm);
  v.insert(v.end(), c.begin(), c.end());
  if (!v.empty()) throw ArgumentError("invalid instance: " + describe(v));
  if (!l.empty()) throw ArgumentError("invalid layer cost models: " + describe(l));
  if (cluster.mem_capacity < 1) {
    throw InfeasibleError(concat("no feasible (m_a, r_1): mem_capacity = ", cluster.mem_capacity));
  }
}

template <typename Orders>
SolverResult pareto_search(const ModelSpec& model, const ClusterSpec& cluster, const LayerCostModels& lm,
                           const Orders& orders, const SolverOptions& options) {
  const auto t0 = std::chrono::steady_clock::now();
  require_instance(model, cluster, lm);

  SolverResult result;
  bool have = false;
  for (const auto& [m_a, r1] : pareto_pairs(cluster.mem_capacity)) {
    ++result.candidates_evaluated;
    for (Order order : orders) {
      const R2Choice c = solve_r2(model, cluster, lm, m_a, r1, order, options);
      const double m_e = tokens_per_expert(model, cluster, m_a, c.r2);
      result.audit.push_back({m_a, r1, order, c.r2, m_e, c.makespan_ms, c.throughput_tps});
      if (!have || improves(c.throughput_tps, result.predicted_throughput_tps)) {
        have = true;
        result.best = PipelineConfig{r1, m_a, c.r2, m_e, order};
        result.predicted_throughput_tps = c.throughput_tps;
        result.best_makespan_ms = c.makespan_ms;
      }
    }
  }
  result.solve_time_ms =
      std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
  return result;
}

}  // namespace detail

// Pareto-pruned configuration search over (m_a, r_1), both orders, best r_2 each.
// Ties go to larger m_a, then larger r_1, then ASAS, then smaller r_2.
inline SolverResult search(const ModelSpec& model, const ClusterSpec& cluster, const LayerCostModels& lm,
                           const SolverOptions& options = {}) {
  static constexpr Order kOrders[] = {Order::asas, Order::aass};
  return detail::pareto_search(model, cluster, lm, kOrders, options);
}

// The ping-pong baseline: shared expert fused into attention, r_2 = 1.
inline SolverResult pppipe_best(const ModelSpec& model, const ClusterSpec& cluster,
                                const LayerCostModels& lm, const SolverOptions& options = {}) {
  static constexpr Order kOrders[] = {Order::pppipe};
  return detail::pareto_search(model, cluster, lm, kOrders, options);
}

}  // namespace depsched
