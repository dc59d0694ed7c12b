#include <gtest/gtest.h>

#include <set>

#include "support.hpp"

using namespace depsched;
using namespace testing_support;

namespace {

struct Family {
  ModelSpec model;
  ClusterSpec cluster;
  LayerCostModels lm;
};

PrimitiveModels reference_primitives(double comm_scale = 1.0) {
  PrimitiveModels p;
  p.gemm = {0.17, 8.59e-11};
  p.attn = {0.15, 1.54e-11};
  p.comm[{1, 7}] = {0.10, 9.61e-7 * comm_scale};
  p.comm[{2, 6}] = {0.01, 1.28e-6 * comm_scale};
  p.comm[{4, 4}] = {0.37, 2.55e-6 * comm_scale};
  return p;
}

Family deepseek_family(int ag, int seq_len, int layers, int mem_cap, double comm_scale = 1.0) {
  Family f;
  f.model = ModelSpec{160, layers, 5120, 1536, 6, 2, seq_len, 128, 192, 128};
  f.cluster = ClusterSpec{8, ag, 8 - ag, mem_cap};
  f.lm = derive_layer_models(f.model, f.cluster, reference_primitives(comm_scale));
  return f;
}

double scan_best_makespan(const Instance& in, int m_a, int r1, Order order, int cap) {
  double best = -1.0;
  for (int r2 = 1; r2 <= r2_upper_bound(in.model, in.cluster, m_a, cap); ++r2) {
    const double v = predicted_makespan(in.model, in.cluster, in.lm, m_a, r1, r2, order);
    if (best < 0.0 || v < best) best = v;
  }
  return best;
}

}  // namespace

TEST(ObjectiveDenominator, SingleEverything) {
  const StageFunctions sf{3.0, 3.0, 6.0, 10.0};
  EXPECT_DOUBLE_EQ(objective_denominator(sf, small_model(1), 1, 1), 10.0);
  const StageFunctions wide{12.0, 3.0, 12.0, 10.0};
  EXPECT_DOUBLE_EQ(objective_denominator(wide, small_model(1), 1, 1), 12.0);
}

TEST(ObjectiveDenominator, HandEvaluated) {
  const StageFunctions sf{3.0, 3.0, 6.0, 10.0};
  EXPECT_DOUBLE_EQ(objective_denominator(sf, small_model(2), 2, 2), 31.0);
}

TEST(ObjectiveDenominator, EqualsScheduleMakespanWithoutSlicing) {
  for (int seed = 0; seed < 300; ++seed) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> u(0.1, 3.0);
    const double t_e = u(rng), t_c = u(rng);
    const double t_a = std::max(t_e, t_c) + u(rng);
    const LayerCostModels lm = constant_models(t_a, u(rng), t_e, t_c);
    const int layers = 1 + seed % 5;
    const int r1 = 1 + (seed / 5) % 4;
    const ModelSpec m = small_model(layers);
    const ClusterSpec c = small_cluster(r1);
    const Schedule s = closed_form_asas(m, c, make_config(m, c, 1, r1, 1, Order::asas), lm);
    const double formula = objective_denominator(stage_functions(lm, 1, 1.0, 1), m, r1, 1);
    EXPECT_NEAR(formula, s.makespan, 1e-9 * s.makespan) << "seed " << seed;
  }
}

TEST(ObjectiveDenominator, CountsSliceTermTwiceWhenSliced) {
  const LayerCostModels lm = constant_models(4, 1, 1, 0.5);
  const ModelSpec m = small_model(1);
  const ClusterSpec c = small_cluster(1);
  const Schedule s = closed_form_asas(m, c, make_config(m, c, 1, 1, 2, Order::asas), lm);
  const StageFunctions sf = stage_functions(lm, 1, 1.0, 2);
  EXPECT_DOUBLE_EQ(objective_denominator(sf, m, 1, 2), s.makespan + sf.Y);
}

TEST(R2UpperBound, KeepsOneTokenPerExpert) {
  const ModelSpec m{64, 2, 64, 64, 2, 0, 100, 1, 1, 1};
  const ClusterSpec c{4, 1, 3, 8};
  EXPECT_EQ(r2_upper_bound(m, c, 1, 64), 3);    // floor(200 / 64)
  EXPECT_EQ(r2_upper_bound(m, c, 8, 64), 25);   // floor(1600 / 64)
  EXPECT_EQ(r2_upper_bound(m, c, 8, 10), 10);
  const ModelSpec tiny{64, 2, 64, 64, 1, 0, 8, 1, 1, 1};
  EXPECT_EQ(r2_upper_bound(tiny, c, 1, 64), 1);
}

TEST(SolveR2, StartupDominatedPrefersOneSlice) {
  const ModelSpec m{16, 3, 64, 64, 2, 1, 512, 4, 16, 16};
  const ClusterSpec c{4, 2, 2, 4};
  const LayerCostModels lm{{1.0, 0.01}, {0.5, 0.01}, {0.2, 1e-5}, {20.0, 1e-5}};
  for (Order order : {Order::asas, Order::aass}) {
    const R2Choice best = solve_r2(m, c, lm, 2, 2, order);
    EXPECT_EQ(best.r2, 1);
    const Instance in{m, c, lm};
    EXPECT_DOUBLE_EQ(best.makespan_ms, scan_best_makespan(in, 2, 2, order, 64));
  }
}

TEST(SolveR2, BandwidthDominatedPrefersSlicing) {
  const ModelSpec m{16, 3, 64, 64, 2, 1, 512, 4, 16, 16};
  const ClusterSpec c{4, 2, 2, 4};
  const LayerCostModels lm{{1.0, 0.01}, {0.5, 0.01}, {0.001, 0.02}, {0.001, 0.03}};
  for (Order order : {Order::asas, Order::aass}) {
    const R2Choice best = solve_r2(m, c, lm, 2, 2, order);
    EXPECT_GT(best.r2, 1);
    const Instance in{m, c, lm};
    EXPECT_DOUBLE_EQ(best.makespan_ms, scan_best_makespan(in, 2, 2, order, 64));
    EXPECT_LT(best.makespan_ms, predicted_makespan(m, c, lm, 2, 2, 1, order));
  }
}

TEST(SolveR2, TernarySearchMatchesExhaustiveScan) {
  int checked = 0;
  for (int seed = 0; seed < 200; ++seed) {
    Instance in = random_instance(seed);
    in.model.layers = 1 + seed % 12;
    for (const auto& [m_a, r1] : pareto_pairs(in.cluster.mem_capacity)) {
      const R2Choice t = solve_r2(in.model, in.cluster, in.lm, m_a, r1, Order::asas);
      const double scan = scan_best_makespan(in, m_a, r1, Order::asas, 64);
      EXPECT_NEAR(t.makespan_ms, scan, 1e-12 * scan) << "seed " << seed << " m_a " << m_a;
      ++checked;
    }
  }
  EXPECT_GT(checked, 200);
}

TEST(SolveR2, PppipeNeverSlices) {
  const Instance in = random_instance(3);
  EXPECT_EQ(solve_r2(in.model, in.cluster, in.lm, 1, 1, Order::pppipe).r2, 1);
}

TEST(ParetoPairs, CapacitySixteen) {
  const std::vector<std::pair<int, int>> want{{16, 1}, {8, 2}, {5, 3}, {4, 4}, {3, 5}, {2, 8}, {1, 16}};
  EXPECT_EQ(pareto_pairs(16), want);
  EXPECT_TRUE(pareto_pairs(0).empty());
  EXPECT_EQ(pareto_pairs(1), (std::vector<std::pair<int, int>>{{1, 1}}));
}

TEST(ParetoPairs, SizeGrowsLikeSquareRoot) {
  for (int cap : {16, 100, 1000, 4096}) {
    const auto pairs = pareto_pairs(cap);
    EXPECT_LE(pairs.size(), static_cast<std::size_t>(2 * std::sqrt(cap) + 1));
    for (const auto& [m_a, r1] : pairs) EXPECT_LE(static_cast<long long>(m_a) * r1, cap);
  }
}

TEST(Search, ResultIsConsistentWithAudit) {
  for (int seed = 0; seed < 100; ++seed) {
    const Instance in = random_instance(seed);
    const SolverResult r = search(in.model, in.cluster, in.lm);
    double best = 0.0;
    bool found = false;
    for (const auto& row : r.audit) {
      best = std::max(best, row.throughput_tps);
      found = found || (row.m_a == r.best.m_a && row.r1 == r.best.r1 && row.r2 == r.best.r2 && row.order == r.best.order);
    }
    EXPECT_TRUE(found);
    EXPECT_NEAR(r.predicted_throughput_tps, best, 1e-12 * best);
    EXPECT_EQ(r.candidates_evaluated, pareto_pairs(in.cluster.mem_capacity).size());
    EXPECT_TRUE(validate_config(r.best, in.model, in.cluster).empty());
  }
}

TEST(Search, InfeasibleWithoutMemory) {
  Instance in = random_instance(1);
  in.cluster.mem_capacity = 0;
  EXPECT_THROW(search(in.model, in.cluster, in.lm), InfeasibleError);
  EXPECT_THROW(pppipe_best(in.model, in.cluster, in.lm), InfeasibleError);
}

TEST(Search, RejectsNegativeCostModels) {
  Instance in = random_instance(1);
  in.lm.expert.beta = -1e-3;
  EXPECT_THROW(search(in.model, in.cluster, in.lm), ArgumentError);
}

TEST(Search, PruningIsSound) {
  for (int seed = 0; seed < 100; ++seed) {
    Instance in = random_instance(seed);
    in.cluster.mem_capacity = 1 + seed % 24;
    const SolverResult r = search(in.model, in.cluster, in.lm);
    double all = 0.0;
    for (int m_a = 1; m_a <= in.cluster.mem_capacity; ++m_a) {
      for (int r1 = 1; r1 * m_a <= in.cluster.mem_capacity; ++r1) {
        for (Order order : {Order::asas, Order::aass}) {
          all = std::max(all, solve_r2(in.model, in.cluster, in.lm, m_a, r1, order).throughput_tps);
        }
      }
    }
    EXPECT_NEAR(r.predicted_throughput_tps, all, 1e-9 * all) << "seed " << seed;
  }
}

TEST(Search, OrderTieGoesToAsas) {
  // Without a shared expert both orders give the same schedule.
  const ModelSpec m = small_model(1, 0);
  const ClusterSpec c = small_cluster(4);
  const LayerCostModels lm = constant_models(1.0, 0.0, 1e-6, 1e-6);
  const SolverResult r = search(m, c, lm);
  EXPECT_EQ(r.best.m_a, 4);
  EXPECT_EQ(r.best.r1, 1);
  EXPECT_EQ(r.best.order, Order::asas);
  EXPECT_EQ(r.best.r2, 1);
}

TEST(PppipeBest, NeverBeatsFineGrained) {
  for (int seed = 0; seed < 200; ++seed) {
    const Instance in = random_instance(seed);
    const double fine = search(in.model, in.cluster, in.lm).predicted_throughput_tps;
    const SolverResult base = pppipe_best(in.model, in.cluster, in.lm);
    EXPECT_GE(fine, base.predicted_throughput_tps * (1.0 - 1e-12)) << "seed " << seed;
    EXPECT_EQ(base.best.r2, 1);
    EXPECT_EQ(base.best.order, Order::pppipe);
  }
}

TEST(PppipeBest, CoincidesWithoutSharedExpertOrSlicing) {
  const ModelSpec m{16, 4, 64, 64, 2, 0, 512, 4, 16, 16};
  const ClusterSpec c{4, 2, 2, 8};
  const LayerCostModels lm{{1.0, 0.01}, {0.0, 0.0}, {0.2, 1e-5}, {20.0, 1e-5}};
  const SolverResult fine = search(m, c, lm);
  ASSERT_EQ(fine.best.r2, 1);
  EXPECT_DOUBLE_EQ(fine.predicted_throughput_tps, pppipe_best(m, c, lm).predicted_throughput_tps);
}

TEST(PppipeBest, CommunicationBoundSpeedup) {
  for (int ag : {1, 2, 4}) {
    for (int seq : {2048, 4096, 8192}) {
      const Family f = deepseek_family(ag, seq, 4, 1, 10.0);
      const double speedup = search(f.model, f.cluster, f.lm).predicted_throughput_tps /
                             pppipe_best(f.model, f.cluster, f.lm).predicted_throughput_tps;
      EXPECT_GT(speedup, 1.1) << "ag " << ag << " S " << seq;
    }
  }
}

TEST(Monotonicity, ThroughputRisesWithMa) {
  for (int seed = 0; seed < 60; ++seed) {
    Instance in = random_instance(seed);
    in.cluster.mem_capacity = 12;
    for (int r1 = 1; r1 <= 12; ++r1) {
      double prev = 0.0;
      for (int m_a = 1; m_a * r1 <= 12; ++m_a) {
        double best = 0.0;
        for (Order o : {Order::asas, Order::aass}) best = std::max(best, solve_r2(in.model, in.cluster, in.lm, m_a, r1, o).throughput_tps);
        EXPECT_GE(best, prev * (1.0 - 1e-9)) << "seed " << seed << " r1 " << r1 << " m_a " << m_a;
        prev = best;
      }
    }
  }
}

TEST(Monotonicity, ThroughputRisesWithR1) {
  for (int seed = 0; seed < 60; ++seed) {
    Instance in = random_instance(seed);
    in.cluster.mem_capacity = 12;
    for (int m_a = 1; m_a <= 4; ++m_a) {
      for (int r2 = 1; r2 <= std::min(6, r2_upper_bound(in.model, in.cluster, m_a, 64)); ++r2) {
        double prev = 0.0;
        for (int r1 = 1; r1 * m_a <= 12; ++r1) {
          const auto cfg = make_config(in.model, in.cluster, m_a, r1, r2, Order::asas);
          const double tps = throughput(in.model, in.cluster, cfg, event_sim(in.model, in.cluster, cfg, in.lm).makespan);
          EXPECT_GE(tps, prev * (1.0 - 1e-9)) << "seed " << seed;
          prev = tps;
        }
      }
    }
  }
}

TEST(Convexity, DenominatorConvexInInverseR2) {
  for (int seed = 0; seed < 100; ++seed) {
    const Instance in = random_instance(seed);
    for (const auto& [m_a, r1] : pareto_pairs(in.cluster.mem_capacity)) {
      std::vector<double> f;
      for (int r2 = 1; r2 <= r2_upper_bound(in.model, in.cluster, m_a, 64); ++r2) {
        const double m_e = tokens_per_expert(in.model, in.cluster, m_a, r2);
        f.push_back(objective_denominator(stage_functions(in.lm, m_a, m_e, r2), in.model, r1, r2));
      }
      EXPECT_TRUE(convex_in_inverse_r2(f)) << "seed " << seed;
    }
  }
}

TEST(Convexity, CheckerRejectsConcaveSequence) {
  const std::vector<double> convex{1.0, 0.5, 1.0 / 3.0, 0.25};   // linear in 1/r_2
  EXPECT_TRUE(convex_in_inverse_r2(convex));
  const std::vector<double> bump{1.0, 2.0, 1.0};
  EXPECT_FALSE(convex_in_inverse_r2(bump));
  EXPECT_TRUE(convex_in_inverse_r2(std::vector<double>{}));
}

TEST(Search, LargeInstanceIsFast) {
  const Family f = deepseek_family(2, 2048, 64, 4096);
  const SolverResult r = search(f.model, f.cluster, f.lm);
  EXPECT_LT(r.solve_time_ms, 1000.0);
  EXPECT_EQ(r.candidates_evaluated, pareto_pairs(4096).size());
}
