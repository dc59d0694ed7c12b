#pragma once

#include <cstdarg>
#include <cstdio>
#include <map>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "depsched/depsched.hpp"
#include "serialization.hpp"

namespace depsched::cli {

enum ExitCode : int { kOk = 0, kInvalidInput = 2, kInfeasible = 3, kValidationFailure = 4 };

inline std::string format(const char* fmt, ...) {
  va_list args;
  va_start(args, fmt);
  char buf[512];
  std::vsnprintf(buf, sizeof buf, fmt, args);
  va_end(args);
  return buf;
}

struct Overrides {
  std::optional<int> seq_len;
  std::optional<int> mem_cap;
};

struct LoadedInstance {
  io::ConfigDocument doc;
  LayerCostModels lm;
};

// Reads config and models, applies flag overrides and rejects malformed shapes.
inline LoadedInstance load_instance(const std::string& config_path, const std::string& models_path,
                                    const Overrides& ov) {
  LoadedInstance in;
  in.doc = io::read_config(config_path);
  if (ov.seq_len) in.doc.model.seq_len = *ov.seq_len;
  if (ov.mem_cap) in.doc.cluster.mem_capacity = *ov.mem_cap;
  auto v = validate_model(in.doc.model);
  auto c = validate_cluster(in.doc.cluster);
  v.insert(v.end(), c.begin(), c.end());
  if (!v.empty()) throw ArgumentError(config_path + ": " + describe(v));
  if (in.doc.pipeline && (ov.seq_len || !in.doc.explicit_m_e) && in.doc.pipeline->m_a >= 1 &&
      in.doc.pipeline->r2 >= 1) {
    in.doc.pipeline->m_e = tokens_per_expert(in.doc.model, in.doc.cluster, in.doc.pipeline->m_a,
                                             in.doc.pipeline->r2);
  }
  in.lm = io::read_models(models_path, in.doc.model, in.doc.cluster);
  return in;
}

inline std::vector<std::string> split_list(const std::string& text) {
  std::vector<std::string> out;
  std::string item;
  std::istringstream in(text);
  while (std::getline(in, item, ',')) {
    const auto b = item.find_first_not_of(' ');
    const auto e = item.find_last_not_of(' ');
    if (b != std::string::npos) out.push_back(item.substr(b, e - b + 1));
  }
  return out;
}

inline std::vector<int> parse_int_list(const std::string& text, const char* flag) {
  std::vector<int> out;
  for (const auto& item : split_list(text)) {
    std::size_t used = 0;
    int v = 0;
    try {
      v = std::stoi(item, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used == 0 || used != item.size() || v < 1) {
      throw ArgumentError(std::string(flag) + ": '" + item + "' is not a positive integer");
    }
    out.push_back(v);
  }
  return out;
}

// ---------------------------------------------------------------- calibrate

struct CalibrateOptions {
  std::string gemm;
  std::string attn;
  std::vector<std::string> comm;  // "AG,EG=path"
  std::string out_dir;
};

inline int cmd_calibrate(const CalibrateOptions& o, std::ostream& out) {
  if (o.gemm.empty() && o.attn.empty() && o.comm.empty()) {
    throw ArgumentError("calibrate: give at least one of --gemm, --attn, --comm");
  }
  struct Fitted {
    std::string name;
    std::string file;
    FitReport report;
  };
  std::vector<Fitted> fits;
  PrimitiveModels prim;
  auto fit_file = [](const std::string& path) {
    const auto samples = io::read_samples_csv(path);
    try {
      return fit_linear(samples);
    } catch (const DegenerateFitError& e) {
      throw DegenerateFitError(path + ": " + e.what());
    }
  };
  if (!o.gemm.empty()) {
    fits.push_back({"gemm", "fit_gemm.json", fit_file(o.gemm)});
    prim.gemm = fits.back().report.model;
  }
  if (!o.attn.empty()) {
    fits.push_back({"attn", "fit_attn.json", fit_file(o.attn)});
    prim.attn = fits.back().report.model;
  }
  for (const auto& spec : o.comm) {
    const auto eq = spec.find('=');
    const auto parts = eq == std::string::npos ? std::vector<std::string>{} : split_list(spec.substr(0, eq));
    if (parts.size() != 2) throw ArgumentError("--comm '" + spec + "': expected AG,EG=path");
    const auto split = parse_int_list(spec.substr(0, eq), "--comm");
    const GroupSplit key{split[0], split[1]};
    if (prim.comm.count(key)) throw ArgumentError("--comm '" + spec + "': split given twice");
    const std::string tag = format("%dx%d", key.ag, key.eg);
    fits.push_back({"comm " + tag, "fit_comm_" + tag + ".json", fit_file(spec.substr(eq + 1))});
    prim.comm[key] = fits.back().report.model;
  }

  io::ordered_json doc = io::to_json(prim);
  if (o.gemm.empty()) doc.erase("gemm");
  if (o.attn.empty()) doc.erase("attn");
  const std::string dir = o.out_dir.empty() ? std::string(".") : o.out_dir;
  for (const auto& f : fits) io::write_atomic(dir + "/" + f.file, io::to_json(f.report).dump(2) + "\n");
  io::write_atomic(dir + "/primitives.json", doc.dump(2) + "\n");

  out << format("%-12s %14s %14s %10s %8s %s\n", "primitive", "alpha_ms", "beta_ms", "r_squared", "samples", "");
  for (const auto& f : fits) {
    out << format("%-12s %14.6g %14.6g %10.6f %8zu %s\n", f.name.c_str(), f.report.model.alpha,
                  f.report.model.beta, f.report.r_squared, f.report.sample_count,
                  f.report.clamped ? "clamped" : "");
  }
  return kOk;
}

// ---------------------------------------------------------------- solve

struct SolveOptions {
  std::string config;
  std::string models;
  std::string out;
  Overrides overrides;
  int r2_cap = 64;
  bool reproducible = false;
};

inline int cmd_solve(const SolveOptions& o, std::ostream& out) {
  const LoadedInstance in = load_instance(o.config, o.models, o.overrides);
  if (o.r2_cap < 1) throw ArgumentError("--r2-cap must be >= 1");
  const SolverOptions options{o.r2_cap};
  const SolverResult fine = search(in.doc.model, in.doc.cluster, in.lm, options);
  const SolverResult base = pppipe_best(in.doc.model, in.doc.cluster, in.lm, options);
  const double speedup = fine.predicted_throughput_tps / base.predicted_throughput_tps;

  io::ordered_json doc;
  doc["fine_grained"] = io::to_json(fine, o.reproducible);
  doc["pppipe"] = io::to_json(base, o.reproducible);
  doc["speedup"] = speedup;
  io::write_atomic(o.out, doc.dump(2) + "\n");

  auto row = [&](const char* name, const SolverResult& r) {
    out << format("%-13s %6d %6d %6d %12.4f %-7s %14.2f %11.3f\n", name, r.best.m_a, r.best.r1, r.best.r2,
                  r.best.m_e, std::string(to_string(r.best.order)).c_str(), r.predicted_throughput_tps,
                  r.best_makespan_ms);
  };
  out << format("%-13s %6s %6s %6s %12s %-7s %14s %11s\n", "schedule", "m_a", "r_1", "r_2", "m_e", "order",
                "tokens/s", "makespan_ms");
  row("fine_grained", fine);
  row("pppipe", base);
  out << format("speedup %.4fx, %zu (m_a, r_1) candidates\n", speedup, fine.candidates_evaluated);
  if (!o.reproducible) out << format("solve time %.2f ms\n", fine.solve_time_ms + base.solve_time_ms);
  return kOk;
}

// ---------------------------------------------------------------- simulate

struct SimulateOptions {
  std::string config;
  std::string models;
  std::string trace;
  std::string csv;
  Overrides overrides;
  bool integer_me = false;
  bool closed_form = false;
};

inline int cmd_simulate(const SimulateOptions& o, std::ostream& out) {
  const LoadedInstance in = load_instance(o.config, o.models, o.overrides);
  if (!in.doc.pipeline) throw ArgumentError(o.config + ": simulate needs a 'pipeline' section");
  const auto l = check_layer_models(in.lm);
  if (!l.empty()) throw ArgumentError(o.models + ": " + describe(l));
  const PipelineConfig& cfg = *in.doc.pipeline;
  require_feasible(cfg, in.doc.model, in.doc.cluster);
  const Schedule s = o.closed_form ? closed_form_asas(in.doc.model, in.doc.cluster, cfg, in.lm, o.integer_me)
                                   : event_sim(in.doc.model, in.doc.cluster, cfg, in.lm, o.integer_me);
  const auto violations = verify_constraints(s, in.lm);

  if (!o.trace.empty()) io::write_atomic(o.trace, export_trace(s));
  if (!o.csv.empty()) io::write_atomic(o.csv, trace_csv(s));

  out << format("config      m_a=%d r_1=%d r_2=%d m_e=%.6g order=%s%s\n", cfg.m_a, cfg.r1, cfg.r2,
                effective_m_e(cfg, o.integer_me), std::string(to_string(cfg.order)).c_str(),
                o.integer_me ? " (integer m_e approximation)" : "");
  out << format("generator   %s, %zu tasks\n", o.closed_form ? "closed form" : "event simulation", s.tasks.size());
  out << format("makespan    %.6f ms\n", s.makespan);
  out << format("throughput  %.4f tokens/s\n", throughput(in.doc.model, in.doc.cluster, cfg, s.makespan));
  out << format("exposed communication  %.6f ms of %.6f ms busy\n", non_overlapped_comm(s), comm_busy_time(s));
  const auto util = utilization(s);
  for (std::size_t k = 0; k < kResources.size(); ++k) {
    out << format("utilization %-4s %.4f\n", std::string(to_string(kResources[k])).c_str(), util[k]);
  }
  if (violations.empty()) {
    out << "constraints OK\n";
    return kOk;
  }
  out << format("constraints FAILED (%zu)\n", violations.size());
  for (const auto& v : violations) out << "  " << v.rule << ": " << v.detail << "\n";
  return kValidationFailure;
}

// ---------------------------------------------------------------- sweep

struct SweepOptions {
  std::string config;
  std::string models;
  std::string out;
  std::optional<std::string> m_a;
  std::optional<std::string> r1;
  std::optional<std::string> r2;
  std::optional<std::string> orders;
  Overrides overrides;
  int r2_cap = 64;
};

inline constexpr double kMaxSweepPoints = 1e6;

// Full factorial grid. Unlisted m_a spans 1..mem_capacity, unlisted r_1 spans
// 1..floor(mem_capacity / m_a); unlisted r_2 and order are optimized per row.
inline int cmd_sweep(const SweepOptions& o, std::ostream& out) {
  const LoadedInstance in = load_instance(o.config, o.models, o.overrides);
  const auto l = check_layer_models(in.lm);
  if (!l.empty()) throw ArgumentError(o.models + ": " + describe(l));
  const ModelSpec& model = in.doc.model;
  const ClusterSpec& cluster = in.doc.cluster;
  if (o.r2_cap < 1) throw ArgumentError("--r2-cap must be >= 1");
  const int cap = cluster.mem_capacity;

  std::vector<int> m_as;
  if (o.m_a) {
    m_as = parse_int_list(*o.m_a, "--m-a");
  } else {
    for (int m = 1; m <= cap; ++m) m_as.push_back(m);
  }
  const std::optional<std::vector<int>> r1s =
      o.r1 ? std::optional(parse_int_list(*o.r1, "--r1")) : std::nullopt;
  const std::optional<std::vector<int>> r2s =
      o.r2 ? std::optional(parse_int_list(*o.r2, "--r2")) : std::nullopt;
  std::vector<Order> orders{Order::asas, Order::aass};
  const bool fixed_order = o.orders.has_value();
  if (fixed_order) {
    orders.clear();
    for (const auto& name : split_list(*o.orders)) orders.push_back(order_from_string(name));
  }

  double estimate = 0.0;
  for (int m : m_as) {
    estimate += (r1s ? static_cast<double>(r1s->size()) : static_cast<double>(cap / m)) *
                (r2s ? static_cast<double>(r2s->size()) : 1.0) * (fixed_order ? orders.size() : 1.0);
  }
  if (estimate > kMaxSweepPoints) {
    throw BoundsError(format("sweep: grid of about %.0f points exceeds the limit of %.0f", estimate, kMaxSweepPoints),
                      static_cast<std::size_t>(estimate));
  }

  const SolverOptions options{o.r2_cap};
  std::vector<AuditRow> rows;
  std::size_t skipped = 0;
  for (int m_a : m_as) {
    std::vector<int> r1_values;
    if (r1s) {
      r1_values = *r1s;
    } else {
      for (int r = 1; r <= cap / m_a; ++r) r1_values.push_back(r);
    }
    for (int r1 : r1_values) {
      if (static_cast<long long>(r1) * m_a > cap) {
        ++skipped;
        continue;
      }
      std::optional<AuditRow> best;
      for (Order order : orders) {
        auto consider = [&](const AuditRow& row) {
          if (fixed_order) {
            rows.push_back(row);
          } else if (!best || improves(row.throughput_tps, best->throughput_tps)) {
            best = row;
          }
        };
        if (r2s) {
          for (int r2 : *r2s) {
            const PipelineConfig cfg = make_config(model, cluster, m_a, r1, r2, order);
            if (!validate_config(cfg, model, cluster).empty()) {
              ++skipped;
              continue;
            }
            const Schedule s = event_sim(model, cluster, cfg, in.lm);
            consider({m_a, r1, order, r2, cfg.m_e, s.makespan, throughput(model, cluster, cfg, s.makespan)});
          }
        } else {
          const R2Choice c = solve_r2(model, cluster, in.lm, m_a, r1, order, options);
          consider({m_a, r1, order, c.r2, tokens_per_expert(model, cluster, m_a, c.r2), c.makespan_ms,
                    c.throughput_tps});
        }
      }
      if (best) rows.push_back(*best);
    }
  }

  io::write_atomic(o.out, audit_csv(rows));
  out << format("%-6s %-6s %-6s %-7s %14s\n", "m_a", "r_1", "r_2", "order", "tokens/s");
  for (const auto& r : rows) {
    out << format("%-6d %-6d %-6d %-7s %14.4f\n", r.m_a, r.r1, r.r2, std::string(to_string(r.order)).c_str(),
                  r.throughput_tps);
  }
  out << format("%zu rows, %zu infeasible grid points skipped\n", rows.size(), skipped);
  return kOk;
}

// ---------------------------------------------------------------- validate

struct ValidateOptions {
  std::string config;
  std::string models;
  Overrides overrides;
  int instances = 25;
  std::uint64_t seed = 0;
  int max_m_a = 16;
  int max_r1 = 8;
  int max_r2 = 16;
};

struct PropertyTally {
  std::string name;
  std::size_t checked = 0;
  std::size_t failed = 0;
  double worst = 0.0;
  std::string worst_label;
  std::string first_failure;

  void record(bool ok, double deviation, const std::string& what) {
    ++checked;
    if (!ok) {
      ++failed;
      if (first_failure.empty()) first_failure = what;
    }
    if (deviation > worst || checked == 1) {
      worst = deviation;
      worst_label = what;
    }
  }
};

struct ValidationReport {
  PropertyTally cost_models{"layer_cost_models"};
  PropertyTally equivalence{"closed_form_equivalence"};
  PropertyTally constraints{"constraint_check"};
  PropertyTally optimality{"solver_vs_brute_force"};
  PropertyTally dominance{"fine_grained_vs_pppipe"};
  std::size_t candidates = 0;
  double solve_ms = 0.0;
};

inline void validate_instance(const std::string& label, const ModelSpec& model, ClusterSpec cluster,
                              const LayerCostModels& lm, const ValidateOptions& o, ValidationReport& rep,
                              std::ostream& out) {
  const auto bad_models = check_layer_models(lm);
  rep.cost_models.record(bad_models.empty(), static_cast<double>(bad_models.size()),
                         bad_models.empty() ? label : label + ": " + describe(bad_models));
  if (!bad_models.empty()) return;
  const int limit = std::min(o.max_m_a, o.max_r1);
  if (cluster.mem_capacity > limit) {
    out << format("%s: mem_capacity %d clamped to %d to fit the brute-force bounds\n", label.c_str(),
                  cluster.mem_capacity, limit);
    cluster.mem_capacity = limit;
  }
  if (cluster.mem_capacity < 1) throw InfeasibleError(label + ": mem_capacity must be >= 1");

  for (const auto& [m_a, r1] : pareto_pairs(cluster.mem_capacity)) {
    const int r2_hi = std::min(4, r2_upper_bound(model, cluster, m_a, o.max_r2));
    for (int r2 = 1; r2 <= r2_hi; ++r2) {
      const auto cfg = make_config(model, cluster, m_a, r1, r2, Order::asas);
      const Schedule ev = event_sim(model, cluster, cfg, lm);
      const Schedule cf = closed_form_asas(model, cluster, cfg, lm);
      double dev = 0.0;
      for (std::size_t k = 0; k < ev.tasks.size(); ++k) dev = std::max(dev, std::abs(ev.tasks[k].start - cf.tasks[k].start));
      const bool same = ev.tasks.size() == cf.tasks.size() && dev <= 1e-9 * std::max(1.0, ev.makespan);
      rep.equivalence.record(same, dev, format("%s m_a=%d r_1=%d r_2=%d", label.c_str(), m_a, r1, r2));
      const auto v = verify_constraints(cf, lm);
      rep.constraints.record(v.empty(), static_cast<double>(v.size()),
                             v.empty() ? label : label + " closed form: " + describe(v));
    }
  }

  const SearchBounds bounds{o.max_m_a, o.max_r1, o.max_r2, {Order::asas, Order::aass, Order::pppipe}};
  const SolverOptions options{o.max_r2};
  const SolverResult oracle = brute_force_search(model, cluster, lm, bounds, [&](const Schedule& s) {
    const auto v = verify_constraints(s, lm);
    rep.constraints.record(v.empty(), static_cast<double>(v.size()),
                           v.empty() ? label : label + ": " + describe(v));
  });
  const SolverResult fine = search(model, cluster, lm, options);
  const SolverResult base = pppipe_best(model, cluster, lm, options);
  rep.candidates += fine.candidates_evaluated;
  rep.solve_ms += fine.solve_time_ms;

  const double best_oracle = [&] {
    double b = 0.0;
    for (const auto& r : oracle.audit) {
      if (r.order != Order::pppipe) b = std::max(b, r.throughput_tps);
    }
    return b;
  }();
  const double ratio = fine.predicted_throughput_tps / best_oracle;
  const bool convex = r2_convexity_holds(model, cluster, lm, options);
  const bool ok = convex ? std::abs(ratio - 1.0) <= 1e-9 : ratio >= 0.99;
  rep.optimality.record(ok, std::abs(1.0 - ratio),
                        format("%s ratio=%.12f%s", label.c_str(), ratio, convex ? " (convex, exact)" : ""));
  const double speedup = fine.predicted_throughput_tps / base.predicted_throughput_tps;
  rep.dominance.record(speedup >= 1.0 - 1e-12, std::max(0.0, 1.0 - speedup),
                       format("%s speedup=%.6f", label.c_str(), speedup));
}

inline int cmd_validate(const ValidateOptions& o, std::ostream& out) {
  if (o.max_m_a < 1 || o.max_r1 < 1 || o.max_r2 < 1) throw ArgumentError("validate: bounds must be >= 1");
  if (o.instances < 0) throw ArgumentError("validate: --instances must be >= 0");
  ValidationReport rep;
  if (!o.config.empty()) {
    if (o.models.empty()) throw ArgumentError("validate: --config requires --models");
    const LoadedInstance in = load_instance(o.config, o.models, o.overrides);
    validate_instance(o.config, in.doc.model, in.doc.cluster, in.lm, o, rep, out);
  } else {
    for (int k = 0; k < o.instances; ++k) {
      const std::uint64_t seed = o.seed + static_cast<std::uint64_t>(k);
      const Instance inst = random_instance(seed);
      validate_instance(format("seed %llu", static_cast<unsigned long long>(seed)), inst.model, inst.cluster,
                        inst.lm, o, rep, out);
    }
  }

  bool all = true;
  out << format("%-26s %-5s %8s %8s %14s\n", "property", "", "checked", "failed", "worst");
  for (const PropertyTally* t : {&rep.cost_models, &rep.equivalence, &rep.constraints, &rep.optimality, &rep.dominance}) {
    const bool pass = t->failed == 0;
    all = all && pass;
    out << format("%-26s %-5s %8zu %8zu %14.6g\n", t->name.c_str(), pass ? "PASS" : "FAIL", t->checked, t->failed,
                  t->worst);
    if (!pass) out << "  first failure: " << t->first_failure << "\n";
  }
  out << format("candidates_evaluated %zu\nsolve_time_ms %.3f\n", rep.candidates, rep.solve_ms);
  out << (all ? "validation PASSED\n" : "validation FAILED\n");
  return all ? kOk : kValidationFailure;
}

// ---------------------------------------------------------------- entry point

inline int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Pipeline scheduling, simulation and configuration search for disaggregated MoE inference"};
  app.require_subcommand(1);
  app.set_help_all_flag("--help-all", "Show help for every command");

  Overrides ov;
  auto add_overrides = [&](CLI::App* sub) {
    sub->add_option("--seq-len", ov.seq_len, "Override model sequence length S")->check(CLI::PositiveNumber);
    sub->add_option("--mem-cap", ov.mem_cap, "Override cluster mem_capacity")->check(CLI::NonNegativeNumber);
  };

  CalibrateOptions cal;
  auto* c_cal = app.add_subcommand("calibrate", "Fit linear cost models to micro-benchmark samples");
  c_cal->add_option("--gemm", cal.gemm, "GEMM samples CSV (workload,time_ms)")->check(CLI::ExistingFile);
  c_cal->add_option("--attn", cal.attn, "Attention samples CSV")->check(CLI::ExistingFile);
  c_cal->add_option("--comm", cal.comm, "Communication samples as AG,EG=path (repeatable)");
  c_cal->add_option("--out-dir", cal.out_dir, "Directory for primitives.json and fit reports")->required();

  SolveOptions sol;
  auto* c_sol = app.add_subcommand("solve", "Search the best pipeline configuration and the PPPipe baseline");
  c_sol->add_option("--config", sol.config, "Cluster/model JSON")->required()->check(CLI::ExistingFile);
  c_sol->add_option("--models", sol.models, "Primitive or layer cost models JSON")->required()->check(CLI::ExistingFile);
  c_sol->add_option("--out", sol.out, "Result JSON")->required();
  c_sol->add_option("--r2-cap", sol.r2_cap, "Upper bound on r_2")->capture_default_str();
  c_sol->add_flag("--reproducible", sol.reproducible, "Omit wall-clock timing for byte-stable output");
  add_overrides(c_sol);

  SimulateOptions sim;
  auto* c_sim = app.add_subcommand("simulate", "Simulate one pipeline configuration");
  c_sim->add_option("--config", sim.config, "Cluster/model/pipeline JSON")->required()->check(CLI::ExistingFile);
  c_sim->add_option("--models", sim.models, "Primitive or layer cost models JSON")->required()->check(CLI::ExistingFile);
  c_sim->add_option("--trace", sim.trace, "Chrome trace JSON output");
  c_sim->add_option("--csv", sim.csv, "Task table CSV output");
  c_sim->add_flag("--integer-me", sim.integer_me, "Round m_e up to an integer (approximation)");
  c_sim->add_flag("--closed-form", sim.closed_form, "Use the analytic ASAS schedule instead of simulation");
  add_overrides(c_sim);

  SweepOptions swp;
  auto* c_swp = app.add_subcommand("sweep", "Evaluate a grid of configurations");
  c_swp->add_option("--config", swp.config, "Cluster/model JSON")->required()->check(CLI::ExistingFile);
  c_swp->add_option("--models", swp.models, "Primitive or layer cost models JSON")->required()->check(CLI::ExistingFile);
  c_swp->add_option("--out", swp.out, "Table CSV output")->required();
  c_swp->add_option("--m-a", swp.m_a, "Comma-separated m_a values (default 1..mem_capacity)");
  c_swp->add_option("--r1", swp.r1, "Comma-separated r_1 values (default all feasible)");
  c_swp->add_option("--r2", swp.r2, "Comma-separated r_2 values (default optimized)");
  c_swp->add_option("--orders", swp.orders, "Comma-separated orders (default best of ASAS and AASS)");
  c_swp->add_option("--r2-cap", swp.r2_cap, "Upper bound on optimized r_2")->capture_default_str();
  add_overrides(c_swp);

  ValidateOptions val;
  auto* c_val = app.add_subcommand("validate", "Cross-check generators, constraints and solver against brute force");
  c_val->add_option("--config", val.config, "Cluster/model JSON (default: random instance suite)")->check(CLI::ExistingFile);
  c_val->add_option("--models", val.models, "Cost models JSON for --config")->check(CLI::ExistingFile);
  c_val->add_option("--instances", val.instances, "Random instances to check")->capture_default_str();
  c_val->add_option("--seed", val.seed, "First random seed")->capture_default_str();
  c_val->add_option("--max-m-a", val.max_m_a, "Brute-force bound on m_a")->capture_default_str();
  c_val->add_option("--max-r1", val.max_r1, "Brute-force bound on r_1")->capture_default_str();
  c_val->add_option("--max-r2", val.max_r2, "Brute-force bound on r_2")->capture_default_str();
  add_overrides(c_val);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kOk : kInvalidInput;
  }

  try {
    sol.overrides = sim.overrides = swp.overrides = val.overrides = ov;
    if (c_cal->parsed()) return cmd_calibrate(cal, out);
    if (c_sol->parsed()) return cmd_solve(sol, out);
    if (c_sim->parsed()) return cmd_simulate(sim, out);
    if (c_swp->parsed()) return cmd_sweep(swp, out);
    if (c_val->parsed()) return cmd_validate(val, out);
  } catch (const InfeasibleError& e) {
    err << "infeasible: " << e.what() << "\n";
    return kInfeasible;
  } catch (const BoundsError& e) {
    err << "error: " << e.what() << " (estimate " << e.estimate() << ")\n";
    return kInvalidInput;
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return kInvalidInput;
  }
  return kInvalidInput;
}

}  // namespace depsched::cli
