#pragma once

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <functional>
#include <random>
#include <string>
#include <vector>

#include "depsched/error.hpp"
#include "depsched/event_sim.hpp"
#include "depsched/metrics.hpp"
#include "depsched/solver.hpp"
#include "depsched/trace.hpp"

namespace depsched {

struct SearchBounds {
  int max_m_a = 1;
  int max_r1 = 1;
  int max_r2 = 1;
  std::vector<Order> orders{Order::asas, Order::aass};
};

inline constexpr std::size_t kMaxBruteForceConfigs = 1'000'000;

// Every feasible (m_a, r_1, r_2, order) inside `bounds`, simulated with event_sim.
// Feasible means r_1 * m_a <= mem_capacity and m_e >= 1 (or r_2 = 1). The audit
// holds the full table. `inspect`, when set, sees every simulated schedule.
inline SolverResult brute_force_search(const ModelSpec& model, const ClusterSpec& cluster,
                                       const LayerCostModels& lm, const SearchBounds& bounds,
                                       const std::function<void(const Schedule&)>& inspect = {}) {
  const auto t0 = std::chrono::steady_clock::now();
  if (bounds.max_m_a < 1 || bounds.max_r1 < 1 || bounds.max_r2 < 1 || bounds.orders.empty()) {
    throw ArgumentError("brute_force_search: every bound must be >= 1 and orders non-empty");
  }
  const double estimate = static_cast<double>(bounds.max_m_a) * bounds.max_r1 * bounds.max_r2 *
                          static_cast<double>(bounds.orders.size());
  if (estimate > static_cast<double>(kMaxBruteForceConfigs)) {
    throw BoundsError(detail::concat("brute_force_search: up to ", estimate, " configurations exceeds ",
                                     kMaxBruteForceConfigs),
                      static_cast<std::size_t>(std::min(estimate, 1e18)));
  }
  detail::require_instance(model, cluster, lm);

  SolverResult result;
  bool have = false;
  for (int m_a = bounds.max_m_a; m_a >= 1; --m_a) {
    for (int r1 = bounds.max_r1; r1 >= 1; --r1) {
      if (static_cast<long long>(r1) * m_a > cluster.mem_capacity) continue;
      ++result.candidates_evaluated;
      for (Order order : bounds.orders) {
        for (int r2 = 1; r2 <= bounds.max_r2; ++r2) {
          if (order == Order::pppipe && r2 > 1) break;
          const double m_e = static_cast<double>(m_a) * cluster.ag * model.top_k * model.seq_len /
                             (static_cast<double>(r2) * model.experts);
          if (r2 > 1 && m_e < 1.0) break;
          const PipelineConfig cfg{r1, m_a, r2, m_e, order};
          const Schedule s = event_sim(model, cluster, cfg, lm);
          if (inspect) inspect(s);
          const double tps = throughput(model, cluster, cfg, s.makespan);
          result.audit.push_back({m_a, r1, order, r2, m_e, s.makespan, tps});
          if (!have || improves(tps, result.predicted_throughput_tps)) {
            have = true;
            result.best = cfg;
            result.predicted_throughput_tps = tps;
            result.best_makespan_ms = s.makespan;
          }
        }
      }
    }
  }
  if (!have) throw InfeasibleError("brute_force_search: no feasible configuration inside the bounds");
  result.solve_time_ms =
      std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
  return result;
}

inline std::string audit_csv(const std::vector<AuditRow>& rows) {
  std::string out = "m_a,r_1,r_2,order,m_e,makespan_ms,throughput_tps\n";
  for (const auto& r : rows) {
    out += detail::concat(r.m_a, ",", r.r1, ",", r.r2, ",", to_string(r.order), ",", detail::exact(r.m_e), ",",
                          detail::exact(r.makespan_ms), ",", detail::exact(r.throughput_tps), "\n");
  }
  return out;
}

struct Instance {
  ModelSpec model;
  ClusterSpec cluster;
  LayerCostModels lm;
};

// Deterministic synthetic instance. Intercepts are uniform in [0.01, 1] ms; each
// slope is drawn so that its term at the reference workload (m_a = 1, or the m_e
// of m_a = 1, r_2 = 1) is log-uniform in [0.01, 100] ms.
inline Instance random_instance(std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  auto pick = [&](std::initializer_list<int> values) {
    std::uniform_int_distribution<std::size_t> d(0, values.size() - 1);
    return *(values.begin() + d(rng));
  };
  auto uniform_int = [&](int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng); };
  auto uniform = [&](double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(rng); };

  Instance inst;
  ModelSpec& m = inst.model;
  m.experts = pick({8, 16, 32, 64, 128, 160});
  m.layers = uniform_int(1, 6);
  m.embed_dim = pick({1024, 2048, 4096, 5120, 7168});
  m.expert_hidden = pick({512, 768, 1024, 1536, 2048});
  m.top_k = std::min(m.experts, pick({1, 2, 4, 6, 8}));
  m.shared_experts = pick({0, 1, 1, 2});
  m.seq_len = pick({256, 512, 1024, 2048, 4096});
  m.heads = pick({16, 32, 64, 128});
  m.key_dim = pick({64, 128, 192});
  m.value_dim = pick({64, 128});

  ClusterSpec& c = inst.cluster;
  c.gpus = uniform_int(2, 16);
  c.ag = uniform_int(1, c.gpus - 1);
  c.eg = c.gpus - c.ag;
  c.mem_capacity = uniform_int(1, 8);

  const double ref_me = tokens_per_expert(m, c, 1, 1);
  auto model_at = [&](double ref_workload) {
    const double alpha = uniform(0.01, 1.0);
    const double term = std::pow(10.0, uniform(-2.0, 2.0));
    return LinearCostModel{alpha, term / ref_workload};
  };
  inst.lm.attention = model_at(1.0);
  inst.lm.shared = model_at(1.0);
  inst.lm.expert = model_at(ref_me);
  inst.lm.a2e = model_at(ref_me);
  if (m.shared_experts == 0) inst.lm.shared = {};
  return inst;
}

}  // namespace depsched
