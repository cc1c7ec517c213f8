#include <gtest/gtest.h>

#include <cmath>
#include <utility>
#include <vector>

#include <boost/math/distributions/chi_squared.hpp>

#include "fixtures.hpp"
#include "ksvc/oracle.hpp"
#include "ksvc/sampling.hpp"

using namespace ksvc;

namespace {

double total_variation(const std::vector<double>& counts, const std::vector<double>& probs, double trials) {
  double tv = 0.0;
  for (std::size_t i = 0; i < probs.size(); ++i) tv += std::abs(counts[i] / trials - probs[i]);
  return tv / 2.0;
}

// Upper-tail p-value of Pearson's statistic over cells with positive probability.
double chi_square_p(const std::vector<double>& counts, const std::vector<double>& probs, double trials) {
  double stat = 0.0;
  int cells = 0;
  for (std::size_t i = 0; i < probs.size(); ++i) {
    if (probs[i] <= 0.0) continue;
    const double expected = probs[i] * trials;
    stat += (counts[i] - expected) * (counts[i] - expected) / expected;
    ++cells;
  }
  boost::math::chi_squared dist(cells - 1);
  return boost::math::cdf(boost::math::complement(dist, stat));
}

}  // namespace

TEST(DlDistribution, SquaredWeights) {
  const auto inst = fx::line({0, 1, 3}, {0, 1, 2}, {0}, 2.0);
  const std::vector<std::size_t> centers{0};
  const auto d = dl_distribution(inst, centers);
  EXPECT_DOUBLE_EQ(d.probability(0), 0.0);
  EXPECT_DOUBLE_EQ(d.probability(1), 0.1);
  EXPECT_DOUBLE_EQ(d.probability(2), 0.9);
}

TEST(DlDistribution, UniformWhenEmpty) {
  const auto inst = fx::line({0, 1, 2, 3, 4}, {0, 1, 2, 3, 4}, {0});
  const auto d = dl_distribution(inst, std::vector<std::size_t>{});
  for (std::size_t x = 0; x < 5; ++x) EXPECT_DOUBLE_EQ(d.probability(x), 0.2);
}

TEST(DlSample, FrequenciesMatchDistribution) {
  const auto inst = fx::line({0, 1, 3}, {0, 1, 2}, {0}, 2.0);
  const std::vector<std::size_t> centers{0};
  const DlSampler sampler(dl_distribution(inst, centers));
  std::vector<double> counts(3, 0.0);
  Rng rng(5);
  const double trials = 1e5;
  for (int t = 0; t < 100000; ++t) ++counts[sampler.draw(rng)];
  EXPECT_EQ(counts[0], 0.0);
  const std::vector<double> probs{0.0, 0.1, 0.9};
  EXPECT_LT(total_variation(counts, probs, trials), 0.02);
  EXPECT_GT(chi_square_p(counts, probs, trials), 1e-4);
}

TEST(DlSample, NeverPicksZeroWeight) {
  const auto inst = fx::random(12, 3, 1.0, 17);
  const std::vector<std::size_t> centers{0, 4, 7};
  Rng rng(3);
  for (int t = 0; t < 2000; ++t) {
    const auto x = dl_sample(inst, centers, rng);
    EXPECT_NE(x, 0u);
    EXPECT_NE(x, 4u);
    EXPECT_NE(x, 7u);
  }
}

TEST(Reservoir, SinglePositiveItemAlwaysWins) {
  Rng rng(1);
  for (int t = 0; t < 1000; ++t) {
    const std::vector<std::pair<std::size_t, double>> items{{0, 0.0}, {1, 3.0}, {2, 0.0}};
    EXPECT_EQ(weighted_reservoir(items, rng), 1u);
  }
}

TEST(Reservoir, EqualWeightsAreFair) {
  Rng rng(2);
  std::vector<double> counts(2, 0.0);
  const std::vector<std::pair<std::size_t, double>> items{{0, 1.0}, {1, 1.0}};
  for (int t = 0; t < 100000; ++t) ++counts[weighted_reservoir(items, rng)];
  EXPECT_NEAR(counts[0] / 1e5, 0.5, 0.02);
}

TEST(Reservoir, WeightedFrequencies) {
  Rng rng(3);
  std::vector<double> counts(3, 0.0);
  const std::vector<std::pair<std::size_t, double>> items{{0, 0.0}, {1, 1.0}, {2, 9.0}};
  for (int t = 0; t < 100000; ++t) ++counts[weighted_reservoir(items, rng)];
  const std::vector<double> probs{0.0, 0.1, 0.9};
  EXPECT_EQ(counts[0], 0.0);
  EXPECT_LT(total_variation(counts, probs, 1e5), 0.02);
  EXPECT_GT(chi_square_p(counts, probs, 1e5), 1e-4);
}

TEST(Reservoir, AllZeroFallsBackToUniform) {
  Rng rng(4);
  std::vector<double> counts(4, 0.0);
  const std::vector<std::pair<std::size_t, double>> items{{0, 0.0}, {1, 0.0}, {2, 0.0}, {3, 0.0}};
  for (int t = 0; t < 40000; ++t) ++counts[weighted_reservoir(items, rng)];
  EXPECT_LT(total_variation(counts, {0.25, 0.25, 0.25, 0.25}, 4e4), 0.02);
}

TEST(Reservoir, RejectsNegativeAndEmpty) {
  Rng rng(5);
  WeightedReservoir slot;
  EXPECT_THROW(slot.offer(0, -1.0, rng), DomainError);
  EXPECT_THROW(weighted_reservoir(std::vector<std::pair<std::size_t, double>>{}, rng), DomainError);
}

TEST(Seeding, FullExhaustionPicksEveryClient) {
  const auto inst = fx::line({0, 3, 7, 12}, {0, 1, 2, 3}, {0});
  Rng rng(9);
  auto s = seed_kmeanspp(inst, 4, rng);
  std::sort(s.centers.begin(), s.centers.end());
  EXPECT_EQ(s.centers, (std::vector<std::size_t>{0, 1, 2, 3}));
  EXPECT_DOUBLE_EQ(s.cost, 0.0);
}

TEST(Seeding, SeparatedGroupsGetOnePickEach) {
  const auto inst = fx::line({0, 0, 0, 50, 50}, {0, 1, 2, 3, 4}, {0});
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    Rng rng(seed);
    EXPECT_DOUBLE_EQ(seed_kmeanspp(inst, 2, rng).cost, 0.0);
  }
}

TEST(Seeding, MeanCostWithinClassicalBound) {
  const auto inst = fx::random(8, 1, 2.0, 33);
  const double opt = oracle_unconstrained(inst, 2, {}, true).cost;
  double sum = 0.0;
  for (std::uint64_t seed = 0; seed < 200; ++seed) {
    Rng rng(seed);
    sum += seed_kmeanspp(inst, 2, rng).cost;
  }
  EXPECT_LE(sum / 200.0, 16.0 * (std::log(2.0) + 2.0) * opt);
}

TEST(Seeding, RejectsBadK) {
  const auto inst = fx::line({0, 1}, {0, 1}, {0});
  Rng rng(0);
  EXPECT_THROW(seed_kmeanspp(inst, 0, rng), DomainError);
  EXPECT_THROW(seed_kmeanspp(inst, 3, rng), InfeasibleError);
}

TEST(Rng, SubstreamsAreReproducibleAndDistinct) {
  Rng a = Rng::substream(42, 3, 7), b = Rng::substream(42, 3, 7), c = Rng::substream(42, 3, 8);
  const auto va = a(), vb = b(), vc = c();
  EXPECT_EQ(va, vb);
  EXPECT_NE(va, vc);
}
