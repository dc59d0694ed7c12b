#include <gtest/gtest.h>

#include "support.hpp"

using namespace depsched;
using namespace testing_support;

TEST(BruteForce, SingleSequentialConfiguration) {
  const Instance in = random_instance(4);
  const SolverResult r = brute_force_search(in.model, in.cluster, in.lm, {1, 1, 1, {Order::asas}});
  ASSERT_EQ(r.audit.size(), 1u);
  EXPECT_EQ(r.best.m_a, 1);
  EXPECT_EQ(r.best.r1, 1);
  EXPECT_EQ(r.best.r2, 1);
  EXPECT_EQ(r.best.order, Order::asas);
  const auto cfg = make_config(in.model, in.cluster, 1, 1, 1, Order::asas);
  EXPECT_DOUBLE_EQ(r.best_makespan_ms, event_sim(in.model, in.cluster, cfg, in.lm).makespan);
}

TEST(BruteForce, RefusesHugeBounds) {
  const Instance in = random_instance(4);
  try {
    brute_force_search(in.model, in.cluster, in.lm, {1000, 1000, 1000, {Order::asas}});
    FAIL() << "expected BoundsError";
  } catch (const BoundsError& e) {
    EXPECT_EQ(e.estimate(), 1'000'000'000u);
  }
  EXPECT_THROW(brute_force_search(in.model, in.cluster, in.lm, {0, 1, 1, {Order::asas}}), ArgumentError);
  EXPECT_THROW(brute_force_search(in.model, in.cluster, in.lm, {1, 1, 1, {}}), ArgumentError);
}

TEST(BruteForce, TableCoversEveryFeasibleConfiguration) {
  Instance in = random_instance(9);
  in.cluster.mem_capacity = 6;
  const SearchBounds b{4, 4, 3, {Order::asas, Order::aass}};
  const SolverResult r = brute_force_search(in.model, in.cluster, in.lm, b);
  std::size_t expected = 0;
  for (int m_a = 1; m_a <= 4; ++m_a) {
    for (int r1 = 1; r1 <= 4 && r1 * m_a <= 6; ++r1) {
      expected += 2 * static_cast<std::size_t>(std::min(3, r2_upper_bound(in.model, in.cluster, m_a, 3)));
    }
  }
  EXPECT_EQ(r.audit.size(), expected);
}

TEST(BruteForce, MonotoneInBounds) {
  for (int seed = 0; seed < 30; ++seed) {
    const Instance in = random_instance(seed);
    const SearchBounds small{2, 2, 2, {Order::asas}};
    const SearchBounds large{8, 8, 6, {Order::asas, Order::aass}};
    const double a = brute_force_search(in.model, in.cluster, in.lm, small).predicted_throughput_tps;
    const double b = brute_force_search(in.model, in.cluster, in.lm, large).predicted_throughput_tps;
    EXPECT_LE(a, b * (1.0 + 1e-12));
  }
}

TEST(BruteForce, EverySimulatedScheduleIsValid) {
  std::size_t seen = 0;
  for (int seed = 0; seed < 20; ++seed) {
    const Instance in = random_instance(seed);
    brute_force_search(in.model, in.cluster, in.lm, {8, 8, 4, {Order::asas, Order::aass, Order::pppipe}},
                       [&](const Schedule& s) {
                         ++seen;
                         EXPECT_TRUE(verify_constraints(s, in.lm).empty());
                       });
  }
  EXPECT_GT(seen, 100u);
}

TEST(BruteForce, SolverAgreesOnSmallInstances) {
  for (int seed = 0; seed < 40; ++seed) {
    const Instance in = random_instance(seed);
    const SolverResult oracle = brute_force_search(in.model, in.cluster, in.lm, {16, 8, 16, {Order::asas, Order::aass}});
    const SolverResult solver = search(in.model, in.cluster, in.lm, {16});
    EXPECT_LE(solver.predicted_throughput_tps, oracle.predicted_throughput_tps * (1.0 + 1e-9));
    EXPECT_GE(solver.predicted_throughput_tps, 0.99 * oracle.predicted_throughput_tps);
  }
}

TEST(AuditCsv, Format) {
  const std::vector<AuditRow> rows{{4, 2, Order::aass, 3, 1.5, 10.25, 800.0}};
  EXPECT_EQ(audit_csv(rows), "m_a,r_1,r_2,order,m_e,makespan_ms,throughput_tps\n4,2,3,AASS,1.5,10.25,800\n");
  EXPECT_EQ(audit_csv({}), "m_a,r_1,r_2,order,m_e,makespan_ms,throughput_tps\n");
}

TEST(RandomInstance, Deterministic) {
  const Instance a = random_instance(0);
  const Instance b = random_instance(0);
  EXPECT_EQ(a.model, b.model);
  EXPECT_EQ(a.cluster, b.cluster);
  EXPECT_EQ(a.lm, b.lm);
  EXPECT_FALSE(random_instance(1).lm == a.lm);
}

TEST(RandomInstance, AlwaysFeasible) {
  for (int seed = 0; seed < 1000; ++seed) {
    const Instance in = random_instance(seed);
    EXPECT_TRUE(validate_model(in.model).empty());
    EXPECT_TRUE(validate_cluster(in.cluster).empty());
    EXPECT_TRUE(check_layer_models(in.lm).empty());
    EXPECT_GE(in.model.layers, 1);
    EXPECT_LE(in.model.layers, 6);
    const auto cfg = make_config(in.model, in.cluster, 1, 1, 1, Order::asas);
    EXPECT_TRUE(validate_config(cfg, in.model, in.cluster).empty()) << "seed " << seed;
    for (const auto* m : {&in.lm.attention, &in.lm.expert, &in.lm.a2e}) {
      EXPECT_GE(m->alpha, 0.01);
      EXPECT_LE(m->alpha, 1.0);
    }
  }
}

TEST(RandomInstance, CoversBothRegimes) {
  int comm_bound = 0;
  int compute_bound = 0;
  double lo = 1e300, hi = 0.0;
  for (int seed = 0; seed < 1000; ++seed) {
    const Instance in = random_instance(seed);
    const double ratio = in.lm.a2e.beta / in.lm.expert.beta;
    (ratio > 1.0 ? comm_bound : compute_bound)++;
    lo = std::min(lo, ratio);
    hi = std::max(hi, ratio);
  }
  EXPECT_GT(comm_bound, 300);
  EXPECT_GT(compute_bound, 300);
  EXPECT_GT(hi / lo, 1e6);
}
