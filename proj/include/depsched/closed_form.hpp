#pragma once

#include <algorithm>
#include <cstddef>
#include <limits>
#include <vector>

#include "depsched/error.hpp"
#include "depsched/schedule.hpp"

// Analytic timestamps of the list schedule produced by event_sim.
//
// Chunk v = t * r_1 + i enters the transfer pipeline (A2E link -> EG -> E2A link)
// when its attention ends, rel_v = tau_a(v) + t_a, as r_2 consecutive jobs with
// global index n = v * r_2 + j. The pipeline is three FIFO servers in tandem with
// constant service times, so start times are longest lattice paths:
//
//   tau_a2e(n) = max_{u <= v} [ rel_u + (n - u r_2) t_a2e ]
//   tau_e(n)   = max_{u <= v} [ rel_u + t_a2e + (n - u r_2) max(t_a2e, t_e) ]
//   tau_e2a(n) = max_{u <= v} [ rel_u + t_a2e + t_e + (n - u r_2) max(t_a2e, t_e, t_e2a) ]
//
// and the attention group follows its issue chain plus the cross-layer edge
//
//   tau_a(v) = max( chain(v), tau_e2a(v - r_1, r_2 - 1) + t_e2a ).
//
// With chain(v) = tau_a(v-1) + X (ASAS) layer 0 reduces to tau_a = iX,
// tau_s = iX + t_a, tau_e = t_a + t_a2e + iF + jY, tau_e2a = tau_e + t_e and
// tau_a2e = t_a + i max(X, r_2 t_a2e) + j t_a2e.

namespace depsched {

namespace detail {

// Running argmax over chunks of rel_u - u * r_2 * period.
class TandemFront {
 public:
  explicit TandemFront(double period) : period_(period) {}

  void offer(double rel, long long first_job) {
    const double key = rel - static_cast<double>(first_job) * period_;
    if (key > best_) {
      best_ = key;
      rel_ = rel;
      first_job_ = first_job;
    }
  }

  double start(long long job, double lead) const {
    return rel_ + lead + static_cast<double>(job - first_job_) * period_;
  }

 private:
  double period_;
  double best_ = -std::numeric_limits<double>::infinity();
  double rel_ = 0.0;
  long long first_job_ = 0;
};

class AnalyticPipeline {
 public:
  AnalyticPipeline(const TaskDurations& d, int r1, int r2, Order order)
      : d_(d), r1_(r1), r2_(r2), order_(order),
        link_(d.a2e),
        compute_(std::max(d.a2e, d.expert)),
        back_(std::max({d.a2e, d.expert, d.e2a})),
        e2a_end_(static_cast<std::size_t>(r1), 0.0) {}

  // Advances to chunk v (called for v = 0, 1, ... in order) and returns tau_a(v).
  double advance(long long v) {
    const int i = static_cast<int>(v % r1_);
    double start = 0.0;
    if (v > 0) {
      start = prev_attention_ + d_.attention;
      if (order_ == Order::aass) {
        if (i == 0) start += r1_ * d_.shared;
      } else {
        start += d_.shared;
      }
    }
    if (v >= r1_) start = std::max(start, e2a_end_[static_cast<std::size_t>(i)]);
    prev_attention_ = start;

    const double rel = start + d_.attention;
    const long long first = v * r2_;
    link_.offer(rel, first);
    compute_.offer(rel, first);
    back_.offer(rel, first);
    e2a_end_[static_cast<std::size_t>(i)] = e2a_start(first + r2_ - 1) + d_.e2a;
    return start;
  }

  double a2e_start(long long job) const { return link_.start(job, 0.0); }
  double expert_start(long long job) const { return compute_.start(job, d_.a2e); }
  double e2a_start(long long job) const { return back_.start(job, d_.a2e + d_.expert); }

  // End of the attention group's work once chunk v (the last) is placed.
  double ag_end() const {
    return prev_attention_ + d_.attention + (order_ == Order::aass ? r1_ * d_.shared : d_.shared);
  }
  double last_e2a_end(int chunk) const { return e2a_end_[static_cast<std::size_t>(chunk)]; }

 private:
  TaskDurations d_;
  int r1_;
  int r2_;
  Order order_;
  TandemFront link_;
  TandemFront compute_;
  TandemFront back_;
  std::vector<double> e2a_end_;  // per chunk index, latest layer seen
  double prev_attention_ = 0.0;
};

}  // namespace detail

// Makespan of the event_sim schedule in O(T * r_1), independent of r_2.
inline double critical_path_makespan(const TaskDurations& d, int layers, int r1, int r2,
                                     Order order) {
  detail::AnalyticPipeline pipe(d, r1, r2, order);
  const long long chunks = static_cast<long long>(layers) * r1;
  for (long long v = 0; v < chunks; ++v) pipe.advance(v);
  return std::max(pipe.ag_end(), pipe.last_e2a_end(r1 - 1));
}

// ASAS schedule from the analytic expressions; task-for-task identical to
// event_sim(ASAS) up to rounding.
inline Schedule closed_form_asas(const ModelSpec& model, const ClusterSpec& cluster,
                                 const PipelineConfig& cfg, const LayerCostModels& lm,
                                 bool integer_me = false) {
  if (cfg.order != Order::asas) throw ArgumentError("closed_form_asas: order must be ASAS");
  require_feasible(cfg, model, cluster);
  const TaskDurations d = task_durations(lm, cfg, integer_me);
  const bool has_shared = d.shared != 0.0;

  Schedule s;
  s.tasks.reserve(static_cast<std::size_t>(model.layers) * cfg.r1 * (2 + 3 * cfg.r2));
  detail::AnalyticPipeline pipe(d, cfg.r1, cfg.r2, cfg.order);
  long long v = 0;
  for (int t = 0; t < model.layers; ++t) {
    for (int i = 0; i < cfg.r1; ++i, ++v) {
      const double a = pipe.advance(v);
      s.tasks.push_back({TaskKind::attention, t, i, 0, a, d.attention});
      if (has_shared) s.tasks.push_back({TaskKind::shared_expert, t, i, 0, a + d.attention, d.shared});
      for (int j = 0; j < cfg.r2; ++j) {
        const long long job = v * cfg.r2 + j;
        s.tasks.push_back({TaskKind::a2e, t, i, j, pipe.a2e_start(job), d.a2e});
        s.tasks.push_back({TaskKind::expert, t, i, j, pipe.expert_start(job), d.expert});
        s.tasks.push_back({TaskKind::e2a, t, i, j, pipe.e2a_start(job), d.e2a});
      }
    }
  }
  sort_canonical(s.tasks);
  s.makespan = compute_makespan(s.tasks);
  s.config = cfg;
  s.model = model;
  s.cluster = cluster;
  s.provenance = Provenance::closed_form;
  s.integer_me = integer_me;
  return s;
}

}  // namespace depsched
