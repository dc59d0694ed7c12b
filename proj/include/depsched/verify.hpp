#pragma once

#include <algorithm>
#include <cmath>
#include <map>
#include <string>
#include <vector>

#include "depsched/schedule.hpp"

namespace depsched {

namespace detail {

inline std::string label(const Task& t) {
  return concat(to_string(t.kind), "[", t.layer, ",", t.chunk, ",", t.slice, "]");
}

inline std::string exclusivity_rule(const Task& holder) {
  switch (holder.kind) {
    case TaskKind::attention: return "rule1.attention_exclusive";
    case TaskKind::shared_expert: return "rule2.shared_exclusive";
    case TaskKind::a2e: return "rule3.a2e_exclusive";
    case TaskKind::e2a: return "rule4.e2a_exclusive";
    case TaskKind::expert: return "rule5.expert_exclusive";
  }
  return "exclusive";
}

}  // namespace detail

// Checks resource exclusivity, every precedence edge, task durations against the
// cost models, completeness of the task set and feasibility of the configuration.
// Times are compared with an absolute slack of 1e-9 * max(1, makespan) ms.
inline std::vector<Violation> verify_constraints(const Schedule& s, const LayerCostModels& lm) {
  using detail::concat;
  using detail::label;
  std::vector<Violation> out;

  for (auto& v : validate_config(s.config, s.model, s.cluster)) {
    if (v.rule == "token_conservation") v.rule = "rule10.token_conservation";
    out.push_back(std::move(v));
  }
  if (s.config.r1 < 1 || s.config.r2 < 1 || s.model.layers < 1) return out;

  const double eps = 1e-9 * std::max(1.0, s.makespan);
  const TaskDurations d = task_durations(lm, s.config, s.integer_me);
  const bool has_shared = d.shared != 0.0;

  auto expected_duration = [&](TaskKind k) {
    switch (k) {
      case TaskKind::attention: return d.attention;
      case TaskKind::shared_expert: return d.shared;
      case TaskKind::a2e: return d.a2e;
      case TaskKind::expert: return d.expert;
      case TaskKind::e2a: return d.e2a;
    }
    return 0.0;
  };

  std::map<TaskKey, const Task*> index;
  for (const auto& t : s.tasks) {
    const bool in_range = t.layer >= 0 && t.layer < s.model.layers && t.chunk >= 0 &&
                          t.chunk < s.config.r1 && t.slice >= 0 &&
                          ((t.kind == TaskKind::attention || t.kind == TaskKind::shared_expert)
                               ? t.slice == 0
                               : t.slice < s.config.r2) &&
                          (t.kind != TaskKind::shared_expert || has_shared);
    if (!in_range) {
      out.push_back({"task_set", concat("unexpected task ", label(t))});
      continue;
    }
    if (!index.emplace(t.key(), &t).second) {
      out.push_back({"task_set", concat("duplicate task ", label(t))});
    }
    if (!(t.start >= -eps) || !std::isfinite(t.start)) {
      out.push_back({"start", concat(label(t), " starts at ", t.start)});
    }
    const double want = expected_duration(t.kind);
    if (!(std::abs(t.duration - want) <= 1e-9 * std::max(1.0, want))) {
      out.push_back({"duration", concat(label(t), " lasts ", t.duration, " ms, model gives ", want)});
    }
  }

  auto find = [&](TaskKind k, int t, int i, int j) -> const Task* {
    auto it = index.find(TaskKey{k, t, i, j});
    if (it == index.end()) {
      out.push_back({"task_set", concat("missing task ", to_string(k), "[", t, ",", i, ",", j, "]")});
      return nullptr;
    }
    return it->second;
  };
  auto after = [&](const char* rule, const Task* later, const Task* earlier) {
    if (later && earlier && later->start < earlier->end() - eps) {
      out.push_back({rule, concat(label(*later), " starts at ", later->start, " before ",
                                  label(*earlier), " ends at ", earlier->end())});
    }
  };

  for (int t = 0; t < s.model.layers; ++t) {
    for (int i = 0; i < s.config.r1; ++i) {
      const Task* a = find(TaskKind::attention, t, i, 0);
      const Task* sh = has_shared ? find(TaskKind::shared_expert, t, i, 0) : nullptr;
      after("rule6.shared_after_attention", sh, a);
      const Task* next = t + 1 < s.model.layers ? find(TaskKind::attention, t + 1, i, 0) : nullptr;
      after("rule9.next_layer_after_shared", next, sh);
      for (int j = 0; j < s.config.r2; ++j) {
        const Task* c = find(TaskKind::a2e, t, i, j);
        const Task* e = find(TaskKind::expert, t, i, j);
        const Task* r = find(TaskKind::e2a, t, i, j);
        after("rule6.a2e_after_attention", c, a);
        after("rule7.expert_after_a2e", e, c);
        after("rule8.e2a_after_expert", r, e);
        after("rule9.next_layer_after_e2a", next, r);
      }
    }
  }

  for (Resource res : kResources) {
    std::vector<const Task*> on;
    for (const auto& t : s.tasks) {
      if (resource_of(t.kind) == res) on.push_back(&t);
    }
    std::sort(on.begin(), on.end(), [](const Task* x, const Task* y) {
      return x->start < y->start || (x->start == y->start && x->end() < y->end());
    });
    const Task* holder = nullptr;
    for (const Task* t : on) {
      if (holder && t->start < holder->end() - eps) {
        out.push_back({detail::exclusivity_rule(*holder),
                       concat(label(*t), " starts at ", t->start, " while ", label(*holder),
                              " occupies ", to_string(res), " until ", holder->end())});
      }
      if (!holder || t->end() > holder->end()) holder = t;
    }
  }

  const double span = compute_makespan(s.tasks);
  if (std::abs(span - s.makespan) > eps) {
    out.push_back({"makespan", concat("recorded makespan ", s.makespan, " != last task end ", span)});
  }
  return out;
}

}  // namespace depsched
