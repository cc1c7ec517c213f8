#include <gtest/gtest.h>

#include <vector>

#include "brute_force.hpp"
#include "fixtures.hpp"
#include "ksvc/oracle.hpp"

using namespace ksvc;

TEST(Oracle, MedianOnLine) {
  const auto inst = fx::line({0, 1, 2}, {0, 1, 2}, {0, 1, 2});
  const auto r = oracle_unconstrained(inst, 1);
  EXPECT_EQ(r.centers.facilities(), (std::vector<std::size_t>{1}));
  EXPECT_DOUBLE_EQ(r.cost, 2.0);
}

TEST(Oracle, MeansOnLineEvaluatesEveryCandidate) {
  const auto inst = fx::line({0, 1, 2}, {0, 1, 2}, {0, 1, 2}, 2.0);
  const std::vector<double> expected{5.0, 2.0, 5.0};
  for (std::size_t f = 0; f < 3; ++f) EXPECT_DOUBLE_EQ(phi(inst, CenterSet({f})), expected[f]);
  const auto r = oracle_unconstrained(inst, 1);
  EXPECT_EQ(r.centers[0], 1u);
  EXPECT_DOUBLE_EQ(r.cost, 2.0);
}

TEST(Oracle, CoLocatedPairsCostZero) {
  const auto inst = fx::line({0, 5, 9}, {0, 1, 2}, {0, 1, 2});
  EXPECT_DOUBLE_EQ(oracle_unconstrained(inst, 3).cost, 0.0);
  EXPECT_DOUBLE_EQ(oracle_constrained(inst, 3, ConstraintSpec::unconstrained()).cost, 0.0);
}

TEST(Oracle, OutlierExample) {
  const auto inst = fx::line({0, 1, 100}, {0, 1, 2}, {0});
  const auto r = oracle_constrained(inst, 1, ConstraintSpec::outlier(1));
  EXPECT_DOUBLE_EQ(r.cost, 1.0);
  EXPECT_TRUE(r.clustering.is_excluded(2));
}

TEST(Oracle, ConstrainedUnconstrainedAgree) {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const auto inst = fx::random(6, 5, seed % 2 ? 2.0 : 1.0, 300 + seed);
    const std::size_t k = 2 + seed % 2;
    EXPECT_TRUE(bf::rel_eq(oracle_constrained(inst, k, ConstraintSpec::unconstrained()).cost,
                           oracle_unconstrained(inst, k).cost));
  }
}

TEST(Oracle, UnitGatherEqualsUnconstrainedWhenVoronoiCoversAll) {
  int compared = 0;
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const auto inst = fx::random(6, 5, 1.0, 400 + seed);
    const auto free = oracle_unconstrained(inst, 2);
    const auto sizes = voronoi_partition(inst, free.centers).sizes();
    if (sizes[0] == 0 || sizes[1] == 0) continue;
    ++compared;
    EXPECT_TRUE(bf::rel_eq(oracle_constrained(inst, 2, ConstraintSpec::r_gather_uniform(1)).cost, free.cost));
  }
  EXPECT_GT(compared, 0);
}

TEST(Oracle, MatchesIndependentEnumeration) {
  Rng rng(8);
  for (int trial = 0; trial < 40; ++trial) {
    const std::size_t n = 3 + rng.index(4);
    const std::size_t k = 2;
    const auto inst = fx::random(n, 3 + rng.index(3), trial % 2 ? 2.0 : 1.0, 600 + trial);
    const std::vector<std::size_t> lower{1 + rng.index(n / 2), 1};
    const std::vector<std::size_t> upper{n - 1, 1 + rng.index(n)};
    const std::size_t m = 1 + rng.index(n - 1);
    EXPECT_TRUE(bf::rel_eq(oracle_constrained(inst, k, ConstraintSpec::r_gather(lower)).cost,
                           bf::constrained_opt(inst, k, {bf::SizeRule::lower, lower}, 0)));
    EXPECT_TRUE(bf::rel_eq(oracle_constrained(inst, k, ConstraintSpec::r_capacity(upper)).cost,
                           bf::constrained_opt(inst, k, {bf::SizeRule::upper, upper}, 0)));
    EXPECT_TRUE(bf::rel_eq(oracle_constrained(inst, k, ConstraintSpec::outlier(m)).cost,
                           bf::constrained_opt(inst, k, {}, m)));
  }
}

TEST(Oracle, ParallelMatchesSerial) {
  const auto inst = fx::random(8, 5, 1.0, 77);
  const auto spec = ConstraintSpec::r_capacity({3, 6});
  const auto a = oracle_constrained(inst, 2, spec, {}, 1);
  const auto b = oracle_constrained(inst, 2, spec, {}, 4);
  EXPECT_EQ(a.cost, b.cost);
  EXPECT_EQ(a.clustering, b.clustering);
}

TEST(Oracle, BudgetRefusals) {
  const auto big = fx::random(9, 3, 1.0, 1);
  EXPECT_THROW(oracle_constrained(big, 2, ConstraintSpec::unconstrained()), BudgetError);
  const auto wide = fx::random(5, 8, 1.0, 1);
  EXPECT_THROW(oracle_unconstrained(wide, 2), BudgetError);
  const auto ok = fx::random(5, 5, 1.0, 1);
  EXPECT_THROW(oracle_unconstrained(ok, 4), BudgetError);
  OracleBudget tiny;
  tiny.max_states = 10;
  EXPECT_THROW(oracle_constrained(ok, 2, ConstraintSpec::unconstrained(), tiny), BudgetError);
}
