#pragma once

#include <array>
#include <cstddef>
#include <functional>
#include <queue>
#include <utility>
#include <vector>

#include "depsched/error.hpp"
#include "depsched/schedule.hpp"

namespace depsched {

namespace detail {

// Flat task graph for one configuration. Tasks of chunk (t, i) occupy a block of
// 1 + has_shared + 3 * r2 consecutive ids: attention, [shared], a2e[r2], expert[r2], e2a[r2].
class TaskGraph {
 public:
  TaskGraph(const ModelSpec& model, const PipelineConfig& cfg, const TaskDurations& d)
      : layers_(model.layers), r1_(cfg.r1), r2_(cfg.r2),
        has_shared_(cfg.order != Order::pppipe && d.shared != 0.0),
        block_(1 + (has_shared_ ? 1 : 0) + 3 * cfg.r2) {
    const std::size_t n = static_cast<std::size_t>(layers_) * r1_ * block_;
    tasks_.resize(n);
    pending_.assign(n, 0);
    succ_.resize(n);
    for (int t = 0; t < layers_; ++t) {
      for (int i = 0; i < r1_; ++i) {
        tasks_[attention(t, i)] = Task{TaskKind::attention, t, i, 0, 0.0, d.attention};
        if (has_shared_) {
          tasks_[shared(t, i)] = Task{TaskKind::shared_expert, t, i, 0, 0.0, d.shared};
          edge(attention(t, i), shared(t, i));
        }
        for (int j = 0; j < r2_; ++j) {
          tasks_[a2e(t, i, j)] = Task{TaskKind::a2e, t, i, j, 0.0, d.a2e};
          tasks_[expert(t, i, j)] = Task{TaskKind::expert, t, i, j, 0.0, d.expert};
          tasks_[e2a(t, i, j)] = Task{TaskKind::e2a, t, i, j, 0.0, d.e2a};
          edge(attention(t, i), a2e(t, i, j));
          edge(a2e(t, i, j), expert(t, i, j));
          edge(expert(t, i, j), e2a(t, i, j));
          if (t + 1 < layers_) edge(e2a(t, i, j), attention(t + 1, i));
        }
        if (has_shared_ && t + 1 < layers_) edge(shared(t, i), attention(t + 1, i));
      }
    }
  }

  std::size_t attention(int t, int i) const { return base(t, i); }
  std::size_t shared(int t, int i) const { return base(t, i) + 1; }
  std::size_t a2e(int t, int i, int j) const { return base(t, i) + head() + j; }
  std::size_t expert(int t, int i, int j) const { return base(t, i) + head() + r2_ + j; }
  std::size_t e2a(int t, int i, int j) const { return base(t, i) + head() + 2 * r2_ + j; }

  bool has_shared() const noexcept { return has_shared_; }
  int layers() const noexcept { return layers_; }
  int r1() const noexcept { return r1_; }
  int r2() const noexcept { return r2_; }

  std::vector<Task>& tasks() noexcept { return tasks_; }
  std::vector<int>& pending() noexcept { return pending_; }
  const std::vector<std::size_t>& successors(std::size_t id) const { return succ_[id]; }

 private:
  std::size_t base(int t, int i) const {
    return (static_cast<std::size_t>(t) * r1_ + i) * block_;
  }
  std::size_t head() const { return has_shared_ ? 2 : 1; }
  void edge(std::size_t from, std::size_t to) {
    succ_[from].push_back(to);
    ++pending_[to];
  }

  int layers_;
  int r1_;
  int r2_;
  bool has_shared_;
  std::size_t block_;
  std::vector<Task> tasks_;
  std::vector<int> pending_;
  std::vector<std::vector<std::size_t>> succ_;
};

// Issue sequence of every resource under the order policy.
inline std::array<std::vector<std::size_t>, 4> issue_sequences(const TaskGraph& g, Order order) {
  std::array<std::vector<std::size_t>, 4> seq;
  auto& ag = seq[static_cast<int>(Resource::ag)];
  for (int t = 0; t < g.layers(); ++t) {
    if (order == Order::aass) {
      for (int i = 0; i < g.r1(); ++i) ag.push_back(g.attention(t, i));
      if (g.has_shared()) {
        for (int i = 0; i < g.r1(); ++i) ag.push_back(g.shared(t, i));
      }
    } else {
      for (int i = 0; i < g.r1(); ++i) {
        ag.push_back(g.attention(t, i));
        if (g.has_shared()) ag.push_back(g.shared(t, i));
      }
    }
    for (int i = 0; i < g.r1(); ++i) {
      for (int j = 0; j < g.r2(); ++j) {
        seq[static_cast<int>(Resource::a2e_link)].push_back(g.a2e(t, i, j));
        seq[static_cast<int>(Resource::eg)].push_back(g.expert(t, i, j));
        seq[static_cast<int>(Resource::e2a_link)].push_back(g.e2a(t, i, j));
      }
    }
  }
  return seq;
}

}  // namespace detail

// Discrete-event list scheduling on the four resources. Each resource issues its
// tasks in policy order (ASAS: A,S per chunk; AASS: all A then all S per layer;
// links and EG by (layer, chunk, slice)); a task starts as soon as its resource
// is free and all its predecessors have completed.
inline Schedule event_sim(const ModelSpec& model, const ClusterSpec& cluster,
                          const PipelineConfig& cfg, const LayerCostModels& lm,
                          bool integer_me = false) {
  require_feasible(cfg, model, cluster);
  const TaskDurations d = task_durations(lm, cfg, integer_me);

  detail::TaskGraph graph(model, cfg, d);
  auto& tasks = graph.tasks();
  auto& pending = graph.pending();
  const auto seq = detail::issue_sequences(graph, cfg.order);

  using Completion = std::pair<double, std::size_t>;
  std::priority_queue<Completion, std::vector<Completion>, std::greater<>> events;
  std::array<std::size_t, 4> head{};
  std::array<bool, 4> busy{};

  auto try_issue = [&](Resource r, double now) {
    const auto k = static_cast<std::size_t>(r);
    if (busy[k] || head[k] == seq[k].size()) return;
    const std::size_t id = seq[k][head[k]];
    if (pending[id] != 0) return;
    tasks[id].start = now;
    busy[k] = true;
    ++head[k];
    events.emplace(now + tasks[id].duration, id);
  };

  for (Resource r : kResources) try_issue(r, 0.0);
  std::size_t completed = 0;
  while (!events.empty()) {
    const auto [now, id] = events.top();
    events.pop();
    ++completed;
    const Resource r = resource_of(tasks[id].kind);
    busy[static_cast<std::size_t>(r)] = false;
    for (std::size_t s : graph.successors(id)) {
      if (--pending[s] == 0) try_issue(resource_of(tasks[s].kind), now);
    }
    try_issue(r, now);
  }
  if (completed != tasks.size()) {
    throw Error("event_sim: issue order deadlocked with tasks outstanding");
  }

  Schedule s;
  s.tasks = std::move(tasks);
  sort_canonical(s.tasks);
  s.makespan = compute_makespan(s.tasks);
  s.config = cfg;
  s.model = model;
  s.cluster = cluster;
  s.provenance = Provenance::event_sim;
  s.integer_me = integer_me;
  return s;
}

}  // namespace depsched
