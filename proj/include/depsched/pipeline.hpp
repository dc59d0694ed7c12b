#pragma once

#include <algorithm>
#include <cmath>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "depsched/error.hpp"

namespace depsched {

// GPU partition: `ag` GPUs run attention and shared experts, `eg` GPUs run routed
// experts. Memory is abstracted as the largest r_1 * m_a product an AG GPU holds.
struct ClusterSpec {
  int gpus = 0;
  int ag = 0;
  int eg = 0;
  int mem_capacity = 0;

  bool operator==(const ClusterSpec&) const = default;
};

// Architecture shape of one MoE transformer.
struct ModelSpec {
  int experts = 0;         // E, routed experts in total
  int layers = 0;          // T
  int embed_dim = 0;       // M
  int expert_hidden = 0;   // H
  int top_k = 0;
  int shared_experts = 0;  // N_shared, may be 0
  int seq_len = 0;         // S
  int heads = 0;           // n_h
  int key_dim = 0;         // d_k
  int value_dim = 0;       // d_v

  bool operator==(const ModelSpec&) const = default;
};

// Issue policy on the attention group. `pppipe` is the ping-pong baseline: the
// shared expert is fused into attention and expert work is not sliced (r_2 = 1).
enum class Order { asas, aass, pppipe };

inline std::string_view to_string(Order order) {
  switch (order) {
    case Order::asas: return "ASAS";
    case Order::aass: return "AASS";
    case Order::pppipe: return "PPPIPE";
  }
  return "?";
}

inline Order order_from_string(std::string_view name) {
  if (name == "ASAS" || name == "asas") return Order::asas;
  if (name == "AASS" || name == "aass") return Order::aass;
  if (name == "PPPIPE" || name == "pppipe") return Order::pppipe;
  throw ParseError("unknown order '" + std::string(name) + "' (expected ASAS, AASS or PPPIPE)");
}

// Decision variables of one pipeline configuration.
//   r1  : chunks per layer on the attention group
//   m_a : samples per chunk per AG GPU
//   r2  : expert slices per chunk
//   m_e : tokens per slice per expert (real valued)
struct PipelineConfig {
  int r1 = 1;
  int m_a = 1;
  int r2 = 1;
  double m_e = 0.0;
  Order order = Order::asas;

  bool operator==(const PipelineConfig&) const = default;
};

struct Violation {
  std::string rule;
  std::string detail;
};

inline constexpr double kConservationTolerance = 1e-9;

// m_e from token conservation: m_e * r_2 * E = m_a * ag * top_k * S.
inline double tokens_per_expert(const ModelSpec& model, const ClusterSpec& cluster, int m_a,
                                int r2) {
  if (m_a < 1 || r2 < 1) throw ArgumentError("tokens_per_expert: m_a and r_2 must be >= 1");
  return static_cast<double>(m_a) * cluster.ag * model.top_k * model.seq_len /
         (static_cast<double>(r2) * model.experts);
}

// Largest r_1 such that r_1 * m_a <= mem_capacity; 0 means m_a alone does not fit.
inline int get_max_r1(int m_a, const ClusterSpec& cluster) {
  if (m_a < 1) throw ArgumentError("get_max_r1: m_a must be >= 1");
  if (cluster.mem_capacity < 1) return 0;
  return cluster.mem_capacity / m_a;
}

inline PipelineConfig make_config(const ModelSpec& model, const ClusterSpec& cluster, int m_a,
                                  int r1, int r2, Order order) {
  return PipelineConfig{r1, m_a, r2, tokens_per_expert(model, cluster, m_a, r2), order};
}

namespace detail {

template <typename... Args>
std::string concat(const Args&... args) {
  std::ostringstream os;
  os.precision(17);
  (os << ... << args);
  return os.str();
}

}  // namespace detail

inline std::vector<Violation> validate_model(const ModelSpec& m) {
  std::vector<Violation> out;
  auto positive = [&](int v, const char* name) {
    if (v < 1) out.push_back({"model.positive", detail::concat(name, " = ", v, " must be >= 1")});
  };
  positive(m.experts, "E");
  positive(m.layers, "T");
  positive(m.embed_dim, "M");
  positive(m.expert_hidden, "H");
  positive(m.top_k, "top_k");
  positive(m.seq_len, "S");
  positive(m.heads, "n_h");
  positive(m.key_dim, "d_k");
  positive(m.value_dim, "d_v");
  if (m.shared_experts < 0) {
    out.push_back({"model.shared", detail::concat("N_shared = ", m.shared_experts, " must be >= 0")});
  }
  if (m.top_k > m.experts) {
    out.push_back({"model.top_k", detail::concat("top_k = ", m.top_k, " exceeds E = ", m.experts)});
  }
  return out;
}

inline std::vector<Violation> validate_cluster(const ClusterSpec& c) {
  std::vector<Violation> out;
  if (c.ag < 1 || c.eg < 1) {
    out.push_back({"cluster.groups", detail::concat("ag = ", c.ag, ", eg = ", c.eg, " must both be >= 1")});
  }
  if (c.ag + c.eg != c.gpus) {
    out.push_back({"cluster.split", detail::concat("ag + eg = ", c.ag + c.eg, " != P = ", c.gpus)});
  }
  if (c.mem_capacity < 0) {
    out.push_back({"cluster.memory", detail::concat("mem_capacity = ", c.mem_capacity, " must be >= 0")});
  }
  return out;
}

// Every violated feasibility rule of `cfg`; empty means feasible.
inline std::vector<Violation> validate_config(const PipelineConfig& cfg, const ModelSpec& model,
                                              const ClusterSpec& cluster) {
  std::vector<Violation> out;
  if (cfg.r1 < 1) out.push_back({"config.r_1", detail::concat("r_1 = ", cfg.r1, " must be >= 1")});
  if (cfg.m_a < 1) out.push_back({"config.m_a", detail::concat("m_a = ", cfg.m_a, " must be >= 1")});
  if (cfg.r2 < 1) out.push_back({"config.r_2", detail::concat("r_2 = ", cfg.r2, " must be >= 1")});
  if (!(cfg.m_e > 0.0) || !std::isfinite(cfg.m_e)) {
    out.push_back({"config.m_e", detail::concat("m_e = ", cfg.m_e, " must be positive and finite")});
  }
  if (cfg.order == Order::pppipe && cfg.r2 != 1) {
    out.push_back({"config.pppipe", detail::concat("PPPIPE order requires r_2 = 1, got ", cfg.r2)});
  }
  if (static_cast<long long>(cfg.r1) * cfg.m_a > cluster.mem_capacity) {
    out.push_back({"memory", detail::concat("r_1 * m_a = ", static_cast<long long>(cfg.r1) * cfg.m_a,
                                            " exceeds mem_capacity = ", cluster.mem_capacity)});
  }
  if (cfg.r2 >= 1 && model.experts >= 1) {
    const double lhs = cfg.m_e * cfg.r2 * model.experts;
    const double rhs = static_cast<double>(cfg.m_a) * cluster.ag * model.top_k * model.seq_len;
    const double scale = std::max(std::abs(lhs), std::abs(rhs));
    if (!(std::abs(lhs - rhs) <= kConservationTolerance * scale)) {
      out.push_back({"token_conservation",
                     detail::concat("m_e * r_2 * E = ", lhs, " but m_a * ag * top_k * S = ", rhs)});
    }
  }
  return out;
}

inline std::string describe(const std::vector<Violation>& violations) {
  std::string out;
  for (const auto& v : violations) {
    if (!out.empty()) out += "; ";
    out += v.rule + ": " + v.detail;
  }
  return out;
}

// Throws InfeasibleError listing every violation.
inline void require_feasible(const PipelineConfig& cfg, const ModelSpec& model,
                             const ClusterSpec& cluster) {
  auto v = validate_model(model);
  auto c = validate_cluster(cluster);
  auto p = validate_config(cfg, model, cluster);
  v.insert(v.end(), c.begin(), c.end());
  v.insert(v.end(), p.begin(), p.end());
  if (!v.empty()) throw InfeasibleError("infeasible configuration: " + describe(v));
}

}  // namespace depsched
