#pragma once

#include <algorithm>
#include <map>
#include <random>
#include <vector>

#include "depsched/depsched.hpp"

namespace testing_support {

using namespace depsched;

// A small valid shape; with beta = 0 cost models it only fixes m_e.
inline ModelSpec small_model(int layers, int shared = 1) {
  return ModelSpec{16, layers, 64, 32, 2, shared, 64, 4, 16, 16};
}

inline ClusterSpec small_cluster(int mem_capacity, int ag = 2, int eg = 2) {
  return ClusterSpec{ag + eg, ag, eg, mem_capacity};
}

// Fixed task durations regardless of m_a and m_e.
inline LayerCostModels constant_models(double t_a, double t_s, double t_e, double t_a2e) {
  return {{t_a, 0.0}, {t_s, 0.0}, {t_e, 0.0}, {t_a2e, 0.0}};
}

// Independent list scheduler: every resource walks its issue list in order and a
// task starts at max(resource free, predecessors done). Solved by sweeping the
// four lists until all are exhausted; no event queue, no shared graph code.
inline std::map<TaskKey, double> reference_starts(int layers, int r1, int r2, Order order,
                                                  const TaskDurations& d) {
  const bool shared = order != Order::pppipe && d.shared != 0.0;
  std::vector<TaskKey> lists[4];
  for (int t = 0; t < layers; ++t) {
    if (order == Order::aass) {
      for (int i = 0; i < r1; ++i) lists[0].push_back({TaskKind::attention, t, i, 0});
      if (shared) {
        for (int i = 0; i < r1; ++i) lists[0].push_back({TaskKind::shared_expert, t, i, 0});
      }
    } else {
      for (int i = 0; i < r1; ++i) {
        lists[0].push_back({TaskKind::attention, t, i, 0});
        if (shared) lists[0].push_back({TaskKind::shared_expert, t, i, 0});
      }
    }
    for (int i = 0; i < r1; ++i) {
      for (int j = 0; j < r2; ++j) {
        lists[1].push_back({TaskKind::a2e, t, i, j});
        lists[2].push_back({TaskKind::expert, t, i, j});
        lists[3].push_back({TaskKind::e2a, t, i, j});
      }
    }
  }
  auto duration = [&](TaskKind k) {
    switch (k) {
      case TaskKind::attention: return d.attention;
      case TaskKind::shared_expert: return d.shared;
      case TaskKind::a2e: return d.a2e;
      case TaskKind::expert: return d.expert;
      case TaskKind::e2a: return d.e2a;
    }
    return 0.0;
  };
  auto preds = [&](const TaskKey& k) {
    std::vector<TaskKey> p;
    switch (k.kind) {
      case TaskKind::attention:
        if (k.layer > 0) {
          for (int j = 0; j < r2; ++j) p.push_back({TaskKind::e2a, k.layer - 1, k.chunk, j});
          if (shared) p.push_back({TaskKind::shared_expert, k.layer - 1, k.chunk, 0});
        }
        break;
      case TaskKind::shared_expert:
      case TaskKind::a2e: p.push_back({TaskKind::attention, k.layer, k.chunk, 0}); break;
      case TaskKind::expert: p.push_back({TaskKind::a2e, k.layer, k.chunk, k.slice}); break;
      case TaskKind::e2a: p.push_back({TaskKind::expert, k.layer, k.chunk, k.slice}); break;
    }
    return p;
  };

  std::map<TaskKey, double> start;
  std::size_t pos[4] = {0, 0, 0, 0};
  double free_at[4] = {0, 0, 0, 0};
  bool progress = true;
  while (progress) {
    progress = false;
    for (int r = 0; r < 4; ++r) {
      while (pos[r] < lists[r].size()) {
        const TaskKey& k = lists[r][pos[r]];
        double ready = free_at[r];
        bool ok = true;
        for (const auto& p : preds(k)) {
          auto it = start.find(p);
          if (it == start.end()) {
            ok = false;
            break;
          }
          ready = std::max(ready, it->second + duration(p.kind));
        }
        if (!ok) break;
        start[k] = ready;
        free_at[r] = ready + duration(k.kind);
        ++pos[r];
        progress = true;
      }
    }
  }
  return start;
}

// Random feasible configuration for a random instance with r_1, r_2 <= 4.
struct RandomCase {
  Instance inst;
  PipelineConfig asas;
};

inline RandomCase random_case(std::uint64_t seed, int max_r1 = 4, int max_r2 = 4) {
  RandomCase rc{random_instance(seed), {}};
  std::mt19937_64 rng(seed ^ 0x9e3779b97f4a7c15ULL);
  const int r1 = 1 + static_cast<int>(rng() % static_cast<unsigned>(max_r1));
  const int r2 = 1 + static_cast<int>(rng() % static_cast<unsigned>(max_r2));
  const int m_a = 1 + static_cast<int>(rng() % 4);
  rc.inst.cluster.mem_capacity = std::max(rc.inst.cluster.mem_capacity, r1 * m_a);
  rc.asas = make_config(rc.inst.model, rc.inst.cluster, m_a, r1, r2, Order::asas);
  return rc;
}

inline double relative_gap(double a, double b) { return std::abs(a - b) / std::max({1.0, std::abs(a), std::abs(b)}); }

}  // namespace testing_support
