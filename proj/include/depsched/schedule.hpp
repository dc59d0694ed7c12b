#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <string_view>
#include <tuple>
#include <vector>

#include "depsched/perf_models.hpp"
#include "depsched/pipeline.hpp"

namespace depsched {

enum class TaskKind { attention, shared_expert, a2e, expert, e2a };

// Four mutually exclusive resources: the attention group, the expert group and
// one channel per transfer direction.
enum class Resource { ag, eg, a2e_link, e2a_link };

inline constexpr std::array<Resource, 4> kResources = {Resource::ag, Resource::eg,
                                                       Resource::a2e_link, Resource::e2a_link};

constexpr Resource resource_of(TaskKind kind) noexcept {
  switch (kind) {
    case TaskKind::attention:
    case TaskKind::shared_expert: return Resource::ag;
    case TaskKind::expert: return Resource::eg;
    case TaskKind::a2e: return Resource::a2e_link;
    case TaskKind::e2a: return Resource::e2a_link;
  }
  return Resource::ag;
}

inline std::string_view to_string(TaskKind kind) {
  switch (kind) {
    case TaskKind::attention: return "Attention";
    case TaskKind::shared_expert: return "SharedExpert";
    case TaskKind::a2e: return "A2E";
    case TaskKind::expert: return "Expert";
    case TaskKind::e2a: return "E2A";
  }
  return "?";
}

inline std::string_view to_string(Resource r) {
  switch (r) {
    case Resource::ag: return "AG";
    case Resource::eg: return "EG";
    case Resource::a2e_link: return "A2E";
    case Resource::e2a_link: return "E2A";
  }
  return "?";
}

// Identity of a task: (kind, layer t, chunk i, slice j). Attention and shared
// expert tasks always carry slice 0.
struct TaskKey {
  TaskKind kind = TaskKind::attention;
  int layer = 0;
  int chunk = 0;
  int slice = 0;

  auto operator<=>(const TaskKey&) const = default;
};

struct Task {
  TaskKind kind = TaskKind::attention;
  int layer = 0;
  int chunk = 0;
  int slice = 0;
  double start = 0.0;     // ms
  double duration = 0.0;  // ms

  double end() const noexcept { return start + duration; }
  TaskKey key() const noexcept { return {kind, layer, chunk, slice}; }
};

enum class Provenance { closed_form, event_sim };

struct Schedule {
  std::vector<Task> tasks;
  double makespan = 0.0;
  PipelineConfig config;
  ModelSpec model;
  ClusterSpec cluster;
  Provenance provenance = Provenance::event_sim;
  bool integer_me = false;  // durations use ceil(m_e); an approximation
};

inline double compute_makespan(const std::vector<Task>& tasks) {
  double m = 0.0;
  for (const auto& t : tasks) m = std::max(m, t.end());
  return m;
}

// Canonical task order shared by both generators.
inline void sort_canonical(std::vector<Task>& tasks) {
  std::sort(tasks.begin(), tasks.end(), [](const Task& a, const Task& b) {
    return std::tie(a.layer, a.chunk, a.kind, a.slice) < std::tie(b.layer, b.chunk, b.kind, b.slice);
  });
}

// Per-task durations for one configuration. For PPPIPE the attention task is the
// fused attention + shared expert block and `shared` is 0.
struct TaskDurations {
  double attention = 0.0;
  double shared = 0.0;
  double a2e = 0.0;
  double expert = 0.0;
  double e2a = 0.0;
};

inline double effective_m_e(const PipelineConfig& cfg, bool integer_me) {
  return integer_me ? std::ceil(cfg.m_e) : cfg.m_e;
}

inline TaskDurations task_durations(const LayerCostModels& lm, const PipelineConfig& cfg,
                                    bool integer_me = false) {
  const double m_a = cfg.m_a;
  const double m_e = effective_m_e(cfg, integer_me);
  TaskDurations d;
  d.attention = lm.attention(m_a);
  d.shared = lm.shared(m_a);
  d.a2e = lm.a2e(m_e);
  d.e2a = lm.e2a()(m_e);
  d.expert = lm.expert(m_e);
  if (cfg.order == Order::pppipe) {
    d.attention += d.shared;
    d.shared = 0.0;
  }
  return d;
}

// Aggregates driving the ASAS timing expressions:
//   X = t_a + t_s               AG time per chunk
//   Y = max(t_e, t_a2e)         period of one expert slice
//   F = max(X, r_2 * Y)         period of one chunk
//   G = t_a + 2 t_a2e + t_e + (r_2 - 1) Y   one chunk's attention-to-return latency
struct StageFunctions {
  double X = 0.0;
  double Y = 0.0;
  double F = 0.0;
  double G = 0.0;
};

inline StageFunctions stage_functions(const LayerCostModels& lm, int m_a, double m_e, int r2) {
  const double t_a = lm.attention(m_a);
  const double t_s = lm.shared(m_a);
  const double t_e = lm.expert(m_e);
  const double t_c = lm.a2e(m_e);
  StageFunctions sf;
  sf.X = t_a + t_s;
  sf.Y = std::max(t_e, t_c);
  sf.F = std::max(sf.X, r2 * sf.Y);
  sf.G = t_a + t_c + t_e + t_c + (r2 - 1) * sf.Y;
  return sf;
}

// Layer offset max(G, r_1 F) of the periodic ASAS form. It equals the true layer
// period only while attention bounds the pipeline (X >= r_2 * Y).
inline double periodic_layer_offset(const StageFunctions& sf, int r1) {
  return std::max(sf.G, r1 * sf.F);
}

}  // namespace depsched
