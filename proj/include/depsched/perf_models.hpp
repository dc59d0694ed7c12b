#pragma once

#include <algorithm>
#include <cmath>
#include <compare>
#include <cstddef>
#include <map>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "depsched/error.hpp"
#include "depsched/pipeline.hpp"

namespace depsched {

// time_ms = alpha + beta * workload.
struct LinearCostModel {
  double alpha = 0.0;  // ms
  double beta = 0.0;   // ms per workload unit

  constexpr double operator()(double workload) const noexcept { return alpha + beta * workload; }

  bool operator==(const LinearCostModel&) const = default;
};

inline double eval_linear(const LinearCostModel& model, double workload) {
  if (!std::isfinite(workload) || workload < 0.0) {
    throw ArgumentError(detail::concat("eval_linear: workload ", workload, " must be finite and >= 0"));
  }
  return model(workload);
}

inline std::vector<Violation> check_model(const LinearCostModel& m, const std::string& name) {
  std::vector<Violation> out;
  if (!std::isfinite(m.alpha) || m.alpha < 0.0) {
    out.push_back({"cost_model.alpha", detail::concat(name, ".alpha = ", m.alpha, " must be >= 0")});
  }
  if (!std::isfinite(m.beta) || m.beta < 0.0) {
    out.push_back({"cost_model.beta", detail::concat(name, ".beta = ", m.beta, " must be >= 0")});
  }
  return out;
}

struct GroupSplit {
  int ag = 0;
  int eg = 0;

  auto operator<=>(const GroupSplit&) const = default;
};

// Calibrated primitives. GEMM workload is FLOPs (m*k*n), attention workload is
// n_h*B*S^2*(d_k+d_v), communication workload is elements sent per device.
struct PrimitiveModels {
  LinearCostModel gemm;
  LinearCostModel attn;
  std::map<GroupSplit, LinearCostModel> comm;

  const LinearCostModel& comm_for(int ag, int eg) const {
    auto it = comm.find(GroupSplit{ag, eg});
    if (it == comm.end()) {
      throw LookupError(detail::concat("no communication calibration for (ag=", ag, ", eg=", eg, ")"));
    }
    return it->second;
  }
};

struct MeasurementSample {
  double workload = 0.0;
  double time_ms = 0.0;
};

struct FitReport {
  LinearCostModel model;
  double r_squared = 0.0;
  std::size_t sample_count = 0;
  bool clamped = false;  // a negative fitted coefficient was pinned to zero
};

// Ordinary least squares of time on workload. When the unconstrained fit has a
// negative coefficient it is pinned to 0 and the other one refitted, which is the
// nonnegative least-squares solution for a two-parameter line.
inline FitReport fit_linear(std::span<const MeasurementSample> samples) {
  for (std::size_t i = 0; i < samples.size(); ++i) {
    const auto& s = samples[i];
    if (!std::isfinite(s.workload) || s.workload < 0.0) {
      throw ArgumentError(detail::concat("sample ", i, ": workload ", s.workload, " must be finite and >= 0"));
    }
    if (!std::isfinite(s.time_ms) || s.time_ms <= 0.0) {
      throw ArgumentError(detail::concat("sample ", i, ": time ", s.time_ms, " must be finite and > 0"));
    }
  }
  const std::size_t n = samples.size();
  if (n < 2) throw DegenerateFitError("fit_linear: need at least 2 samples");

  double mean_x = 0.0;
  double mean_y = 0.0;
  for (const auto& s : samples) {
    mean_x += s.workload;
    mean_y += s.time_ms;
  }
  mean_x /= static_cast<double>(n);
  mean_y /= static_cast<double>(n);

  double sxx = 0.0;
  double sxy = 0.0;
  bool distinct = false;
  for (const auto& s : samples) {
    const double dx = s.workload - mean_x;
    sxx += dx * dx;
    sxy += dx * (s.time_ms - mean_y);
    distinct = distinct || s.workload != samples[0].workload;
  }
  if (!distinct || !(sxx > 0.0)) {
    throw DegenerateFitError("fit_linear: samples need at least 2 distinct workloads");
  }

  FitReport report;
  report.sample_count = n;
  double beta = sxy / sxx;
  double alpha = mean_y - beta * mean_x;
  if (beta < 0.0) {
    beta = 0.0;
    alpha = mean_y;
    report.clamped = true;
  } else if (alpha < 0.0) {
    double sx2 = 0.0;
    double sx_y = 0.0;
    for (const auto& s : samples) {
      sx2 += s.workload * s.workload;
      sx_y += s.workload * s.time_ms;
    }
    alpha = 0.0;
    beta = std::max(0.0, sx_y / sx2);
    report.clamped = true;
  }
  report.model = LinearCostModel{alpha, beta};

  double ss_res = 0.0;
  double ss_tot = 0.0;
  for (const auto& s : samples) {
    const double r = s.time_ms - report.model(s.workload);
    const double d = s.time_ms - mean_y;
    ss_res += r * r;
    ss_tot += d * d;
  }
  report.r_squared = ss_tot > 0.0 ? 1.0 - ss_res / ss_tot : (ss_res == 0.0 ? 1.0 : 0.0);
  return report;
}

// Per-layer linear models: attention and shared in m_a, expert and A2E in m_e.
// E2A reuses the A2E model (the link is symmetric).
struct LayerCostModels {
  LinearCostModel attention;
  LinearCostModel shared;
  LinearCostModel expert;
  LinearCostModel a2e;

  const LinearCostModel& e2a() const noexcept { return a2e; }

  bool operator==(const LayerCostModels&) const = default;
};

inline std::vector<Violation> check_layer_models(const LayerCostModels& lm) {
  std::vector<Violation> out;
  for (auto&& [m, name] : {std::pair{&lm.attention, "t_a"}, std::pair{&lm.shared, "t_s"},
                           std::pair{&lm.expert, "t_e"}, std::pair{&lm.a2e, "t_a2e"}}) {
    auto v = check_model(*m, name);
    out.insert(out.end(), v.begin(), v.end());
  }
  return out;
}

inline LayerCostModels derive_layer_models(const ModelSpec& arch, const ClusterSpec& cluster,
                                           const PrimitiveModels& prim) {
  const LinearCostModel& comm = prim.comm_for(cluster.ag, cluster.eg);
  const double S = arch.seq_len;
  const double M = arch.embed_dim;
  const double H = arch.expert_hidden;
  const double heads = arch.heads;
  const double dk = arch.key_dim;
  const double dv = arch.value_dim;
  const double experts_per_gpu = static_cast<double>(arch.experts) / cluster.eg;

  LayerCostModels lm;
  // Q/K projections, V/O projections, then scores and weighted values.
  lm.attention.alpha = 4.0 * prim.gemm.alpha + prim.attn.alpha;
  lm.attention.beta = prim.gemm.beta * (2.0 * S * M * heads * dk + 2.0 * S * M * heads * dv) +
                      prim.attn.beta * S * S * heads * (dk + dv);
  if (arch.shared_experts > 0) {
    const double gemms = 3.0 * arch.shared_experts;
    lm.shared = {gemms * prim.gemm.alpha, gemms * prim.gemm.beta * S * M * H};
  }
  lm.expert = {experts_per_gpu * prim.gemm.alpha, experts_per_gpu * prim.gemm.beta * M * H};
  lm.a2e = {comm.alpha, comm.beta * arch.experts * M / cluster.eg};
  return lm;
}

}  // namespace depsched
