#pragma once

#include <algorithm>
#include <cstdio>
#include <cstdlib>
#include <string>
#include <vector>

#include "depsched/schedule.hpp"

namespace depsched {

namespace detail {

// Shortest decimal text that parses back to the same double.
inline std::string exact(double v) {
  char buf[32];
  for (int precision = 15; precision <= 17; ++precision) {
    std::snprintf(buf, sizeof buf, "%.*g", precision, v);
    if (std::strtod(buf, nullptr) == v) break;
  }
  return buf;
}

inline std::vector<const Task*> by_start(const Schedule& s) {
  std::vector<const Task*> order;
  order.reserve(s.tasks.size());
  for (const auto& t : s.tasks) order.push_back(&t);
  std::stable_sort(order.begin(), order.end(),
                   [](const Task* a, const Task* b) { return a->start < b->start; });
  return order;
}

}  // namespace detail

// Chrome trace-event array: one complete ("X") event per task, microseconds,
// pid = resource, tid = chunk, sorted by start time.
inline std::string export_trace(const Schedule& s) {
  std::string out = "[";
  bool first = true;
  for (const Task* t : detail::by_start(s)) {
    out += first ? "\n" : ",\n";
    first = false;
    out += "{\"name\":\"";
    out += to_string(t->kind);
    out += detail::concat("[", t->layer, ",", t->chunk, ",", t->slice, "]\",\"ph\":\"X\",\"pid\":\"");
    out += to_string(resource_of(t->kind));
    out += detail::concat("\",\"tid\":", t->chunk, ",\"ts\":", detail::exact(t->start * 1000.0),
                          ",\"dur\":", detail::exact(t->duration * 1000.0), "}");
  }
  out += first ? "]\n" : "\n]\n";
  return out;
}

inline std::string trace_csv(const Schedule& s) {
  std::string out = "kind,layer,chunk,slice,start_ms,dur_ms\n";
  for (const Task* t : detail::by_start(s)) {
    out += to_string(t->kind);
    out += detail::concat(",", t->layer, ",", t->chunk, ",", t->slice, ",", detail::exact(t->start),
                          ",", detail::exact(t->duration), "\n");
  }
  return out;
}

}  // namespace depsched
