#pragma once

#include <algorithm>
#include <array>
#include <utility>
#include <vector>

#include "depsched/error.hpp"
#include "depsched/schedule.hpp"

namespace depsched {

// Tokens per second: r_1 * m_a samples per AG GPU, ag GPUs, S tokens per sample.
inline double throughput(const ModelSpec& model, const ClusterSpec& cluster,
                         const PipelineConfig& cfg, double makespan_ms) {
  if (!(makespan_ms > 0.0)) {
    throw ArgumentError(detail::concat("throughput: makespan ", makespan_ms, " ms must be > 0"));
  }
  const double tokens = static_cast<double>(cfg.r1) * cfg.m_a * cluster.ag * model.seq_len;
  return tokens / (makespan_ms / 1000.0);
}

namespace detail {

using Interval = std::pair<double, double>;

inline std::vector<Interval> merge(std::vector<Interval> spans) {
  std::sort(spans.begin(), spans.end());
  std::vector<Interval> out;
  for (const auto& [lo, hi] : spans) {
    if (!(hi > lo)) continue;
    if (!out.empty() && lo <= out.back().second) {
      out.back().second = std::max(out.back().second, hi);
    } else {
      out.emplace_back(lo, hi);
    }
  }
  return out;
}

inline std::vector<Interval> busy_intervals(const Schedule& s, std::initializer_list<Resource> resources) {
  std::vector<Interval> spans;
  for (const auto& t : s.tasks) {
    if (std::find(resources.begin(), resources.end(), resource_of(t.kind)) != resources.end()) {
      spans.emplace_back(t.start, t.end());
    }
  }
  return merge(std::move(spans));
}

inline double total_length(const std::vector<Interval>& merged) {
  double sum = 0.0;
  for (const auto& [lo, hi] : merged) sum += hi - lo;
  return sum;
}

}  // namespace detail

// Time during which some transfer is in flight while neither AG nor EG computes.
inline double non_overlapped_comm(const Schedule& s) {
  const auto comm = detail::busy_intervals(s, {Resource::a2e_link, Resource::e2a_link});
  const auto compute = detail::busy_intervals(s, {Resource::ag, Resource::eg});
  double exposed = 0.0;
  std::size_t k = 0;
  for (const auto& [lo, hi] : comm) {
    double covered = 0.0;
    while (k < compute.size() && compute[k].second <= lo) ++k;
    for (std::size_t q = k; q < compute.size() && compute[q].first < hi; ++q) {
      covered += std::min(hi, compute[q].second) - std::max(lo, compute[q].first);
    }
    exposed += (hi - lo) - covered;
  }
  return exposed;
}

inline double comm_busy_time(const Schedule& s) {
  return detail::total_length(detail::busy_intervals(s, {Resource::a2e_link, Resource::e2a_link}));
}

// Busy fraction of each resource over the makespan, indexed like kResources.
inline std::array<double, 4> utilization(const Schedule& s) {
  std::array<double, 4> out{};
  if (!(s.makespan > 0.0)) return out;
  for (std::size_t k = 0; k < kResources.size(); ++k) {
    out[k] = detail::total_length(detail::busy_intervals(s, {kResources[k]})) / s.makespan;
  }
  return out;
}

}  // namespace depsched
