#pragma once

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <initializer_list>
#include <limits>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <unistd.h>

#include "depsched/depsched.hpp"
#include "json.hpp"

namespace depsched::io {

using nlohmann::json;
using nlohmann::ordered_json;

inline std::string read_text(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError(path + ": cannot open file");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// Writes to a sibling temporary file, then renames over the target.
inline void write_atomic(const std::string& path, const std::string& content) {
  const std::filesystem::path target(path);
  if (target.has_parent_path()) std::filesystem::create_directories(target.parent_path());
  const std::string tmp = path + ".tmp." + std::to_string(::getpid());
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(tmp + ": cannot open for writing");
    out << content;
    out.flush();
    if (!out) {
      std::remove(tmp.c_str());
      throw Error(tmp + ": write failed");
    }
  }
  std::error_code ec;
  std::filesystem::rename(tmp, target, ec);
  if (ec) {
    std::remove(tmp.c_str());
    throw Error(path + ": rename failed: " + ec.message());
  }
}

inline json parse_json(const std::string& text, const std::string& origin) {
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    const std::size_t upto = std::min(e.byte, text.size());
    std::size_t line = 1;
    for (std::size_t k = 0; k + 1 < upto; ++k) line += text[k] == '\n';
    throw ParseError(detail::concat(origin, ":", line, ": invalid JSON (", e.what(), ")"));
  }
}

inline json read_json_file(const std::string& path) { return parse_json(read_text(path), path); }

namespace detail {

inline const json* find_key(const json& obj, std::initializer_list<const char*> names) {
  for (const char* n : names) {
    auto it = obj.find(n);
    if (it != obj.end()) return &*it;
  }
  return nullptr;
}

inline const json& require_object(const json& doc, const char* key, const std::string& origin) {
  auto it = doc.find(key);
  if (it == doc.end() || !it->is_object()) {
    throw ParseError(origin + ": missing object '" + key + "'");
  }
  return *it;
}

inline int get_int(const json& obj, std::initializer_list<const char*> names, const std::string& where) {
  const json* v = find_key(obj, names);
  if (!v) throw ParseError(where + "." + *names.begin() + ": missing");
  if (!v->is_number_integer()) throw ParseError(where + "." + *names.begin() + ": expected an integer");
  const auto x = v->get<long long>();
  if (x < std::numeric_limits<int>::min() || x > std::numeric_limits<int>::max()) {
    throw ParseError(where + "." + *names.begin() + ": out of range");
  }
  return static_cast<int>(x);
}

inline double get_number(const json& obj, const char* name, const std::string& where) {
  auto it = obj.find(name);
  if (it == obj.end()) throw ParseError(where + "." + name + ": missing");
  if (!it->is_number()) throw ParseError(where + "." + name + ": expected a number");
  return it->get<double>();
}

inline LinearCostModel get_linear(const json& obj, const char* name, const std::string& where) {
  auto it = obj.find(name);
  if (it == obj.end() || !it->is_object()) throw ParseError(where + "." + name + ": missing object");
  const std::string at = where + "." + name;
  return {get_number(*it, "alpha", at), get_number(*it, "beta", at)};
}

}  // namespace detail

struct ConfigDocument {
  ModelSpec model;
  ClusterSpec cluster;
  std::optional<PipelineConfig> pipeline;
  bool explicit_m_e = false;
};

// {"cluster": {...}, "model": {...}, "pipeline": {...}?}. A missing pipeline.m_e
// is filled in from token conservation.
inline ConfigDocument config_from_json(const json& doc, const std::string& origin) {
  using detail::get_int;
  if (!doc.is_object()) throw ParseError(origin + ": expected a JSON object");
  ConfigDocument out;
  const json& c = detail::require_object(doc, "cluster", origin);
  const std::string cw = origin + ": cluster";
  out.cluster = {get_int(c, {"p", "P"}, cw), get_int(c, {"ag"}, cw), get_int(c, {"eg"}, cw),
                 get_int(c, {"mem_capacity"}, cw)};
  const json& m = detail::require_object(doc, "model", origin);
  const std::string mw = origin + ": model";
  out.model = {get_int(m, {"e", "E"}, mw),         get_int(m, {"t", "T"}, mw),
               get_int(m, {"m", "M"}, mw),         get_int(m, {"h", "H"}, mw),
               get_int(m, {"top_k"}, mw),          get_int(m, {"n_shared", "N_shared"}, mw),
               get_int(m, {"s", "S"}, mw),         get_int(m, {"n_h"}, mw),
               get_int(m, {"d_k"}, mw),            get_int(m, {"d_v"}, mw)};
  if (auto it = doc.find("pipeline"); it != doc.end() && !it->is_null()) {
    const std::string pw = origin + ": pipeline";
    if (!it->is_object()) throw ParseError(pw + ": expected an object");
    PipelineConfig p;
    p.r1 = get_int(*it, {"r_1"}, pw);
    p.m_a = get_int(*it, {"m_a"}, pw);
    p.r2 = get_int(*it, {"r_2"}, pw);
    auto order = it->find("order");
    if (order == it->end() || !order->is_string()) throw ParseError(pw + ".order: missing string");
    try {
      p.order = order_from_string(order->get<std::string>());
    } catch (const ParseError& e) {
      throw ParseError(pw + ".order: " + e.what());
    }
    if (it->contains("m_e")) {
      p.m_e = detail::get_number(*it, "m_e", pw);
      out.explicit_m_e = true;
    } else if (p.m_a >= 1 && p.r2 >= 1 && out.model.experts >= 1) {
      p.m_e = tokens_per_expert(out.model, out.cluster, p.m_a, p.r2);
    }
    out.pipeline = p;
  }
  return out;
}

inline ConfigDocument read_config(const std::string& path) {
  return config_from_json(read_json_file(path), path);
}

inline ordered_json to_json(const LinearCostModel& m) { return {{"alpha", m.alpha}, {"beta", m.beta}}; }

inline ordered_json to_json(const FitReport& r) {
  return {{"alpha", r.model.alpha}, {"beta", r.model.beta}, {"r_squared", r.r_squared},
          {"sample_count", r.sample_count}, {"clamped", r.clamped}};
}

inline ordered_json to_json(const PrimitiveModels& p) {
  ordered_json comm = ordered_json::array();
  for (const auto& [split, m] : p.comm) {
    comm.push_back({{"ag", split.ag}, {"eg", split.eg}, {"alpha", m.alpha}, {"beta", m.beta}});
  }
  return {{"gemm", to_json(p.gemm)}, {"attn", to_json(p.attn)}, {"comm", comm}};
}

inline ordered_json to_json(const LayerCostModels& lm) {
  return {{"t_a", to_json(lm.attention)}, {"t_s", to_json(lm.shared)}, {"t_e", to_json(lm.expert)},
          {"t_a2e", to_json(lm.a2e)}};
}

inline PrimitiveModels primitives_from_json(const json& doc, const std::string& origin) {
  PrimitiveModels p;
  p.gemm = detail::get_linear(doc, "gemm", origin);
  p.attn = detail::get_linear(doc, "attn", origin);
  auto it = doc.find("comm");
  if (it != doc.end()) {
    if (!it->is_array()) throw ParseError(origin + ".comm: expected an array");
    for (std::size_t k = 0; k < it->size(); ++k) {
      const std::string at = depsched::detail::concat(origin, ".comm[", k, "]");
      const json& e = (*it)[k];
      if (!e.is_object()) throw ParseError(at + ": expected an object");
      const GroupSplit split{detail::get_int(e, {"ag"}, at), detail::get_int(e, {"eg"}, at)};
      if (!p.comm.emplace(split, LinearCostModel{detail::get_number(e, "alpha", at),
                                                 detail::get_number(e, "beta", at)})
               .second) {
        throw ParseError(at + ": duplicate (ag, eg) entry");
      }
    }
  }
  return p;
}

inline LayerCostModels layer_models_from_json(const json& doc, const std::string& origin) {
  return {detail::get_linear(doc, "t_a", origin), detail::get_linear(doc, "t_s", origin),
          detail::get_linear(doc, "t_e", origin), detail::get_linear(doc, "t_a2e", origin)};
}

// A models file is either a LayerCostModels document (t_a, t_s, t_e, t_a2e) or a
// PrimitiveModels document (gemm, attn, comm) composed for the given instance.
inline LayerCostModels read_models(const std::string& path, const ModelSpec& model, const ClusterSpec& cluster) {
  const json doc = read_json_file(path);
  if (!doc.is_object()) throw ParseError(path + ": expected a JSON object");
  if (doc.contains("t_a")) return layer_models_from_json(doc, path);
  if (doc.contains("gemm")) return derive_layer_models(model, cluster, primitives_from_json(doc, path));
  throw ParseError(path + ": expected layer models (t_a, ...) or primitive models (gemm, attn, comm)");
}

inline ordered_json to_json(const PipelineConfig& c) {
  return {{"r_1", c.r1}, {"m_a", c.m_a}, {"r_2", c.r2}, {"m_e", c.m_e}, {"order", std::string(to_string(c.order))}};
}

inline ordered_json to_json(const SolverResult& r, bool reproducible) {
  ordered_json audit = ordered_json::array();
  for (const auto& a : r.audit) {
    audit.push_back({{"m_a", a.m_a}, {"r_1", a.r1}, {"order", std::string(to_string(a.order))}, {"r_2", a.r2},
                     {"m_e", a.m_e}, {"makespan_ms", a.makespan_ms}, {"throughput_tps", a.throughput_tps}});
  }
  ordered_json out = {{"best", to_json(r.best)},
                      {"predicted_throughput_tps", r.predicted_throughput_tps},
                      {"makespan_ms", r.best_makespan_ms},
                      {"candidates_evaluated", r.candidates_evaluated}};
  out["solve_time_ms"] = reproducible ? ordered_json(nullptr) : ordered_json(r.solve_time_ms);
  out["audit"] = std::move(audit);
  return out;
}

// CSV with header `workload,time_ms`; errors carry file and line number.
inline std::vector<MeasurementSample> read_samples_csv(const std::string& path) {
  std::istringstream in(read_text(path));
  std::string line;
  std::size_t number = 0;
  bool header = false;
  std::vector<MeasurementSample> out;
  auto trim = [](std::string s) {
    const auto b = s.find_first_not_of(" \t\r");
    const auto e = s.find_last_not_of(" \t\r");
    return b == std::string::npos ? std::string() : s.substr(b, e - b + 1);
  };
  while (std::getline(in, line)) {
    ++number;
    line = trim(line);
    if (line.empty() || line[0] == '#') continue;
    const auto comma = line.find(',');
    const std::string where = depsched::detail::concat(path, ":", number, ": ");
    if (comma == std::string::npos || line.find(',', comma + 1) != std::string::npos) {
      throw ParseError(where + "expected two comma-separated fields");
    }
    const std::string a = trim(line.substr(0, comma));
    const std::string b = trim(line.substr(comma + 1));
    if (!header) {
      if (a != "workload" || b != "time_ms") throw ParseError(where + "expected header 'workload,time_ms'");
      header = true;
      continue;
    }
    auto number_of = [&](const std::string& field, const char* name) {
      std::size_t used = 0;
      double v = 0.0;
      try {
        v = std::stod(field, &used);
      } catch (const std::exception&) {
        used = 0;
      }
      if (used == 0 || used != field.size()) throw ParseError(where + name + " '" + field + "' is not a number");
      return v;
    };
    const MeasurementSample s{number_of(a, "workload"), number_of(b, "time_ms")};
    if (!std::isfinite(s.workload) || s.workload < 0.0) throw ParseError(where + "workload must be finite and >= 0");
    if (!std::isfinite(s.time_ms) || s.time_ms <= 0.0) throw ParseError(where + "time_ms must be finite and > 0");
    out.push_back(s);
  }
  if (!header) throw ParseError(path + ": empty file, expected header 'workload,time_ms'");
  if (out.empty()) throw ParseError(path + ": no samples after the header");
  return out;
}

}  // namespace depsched::io
