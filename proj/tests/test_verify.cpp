#include <gtest/gtest.h>

#include "fixtures.hpp"
#include "ksvc/instances.hpp"
#include "ksvc/verify.hpp"

using namespace ksvc;

TEST(Verify, InvariantsHoldOnRandomInstances) {
  for (std::uint64_t seed = 0; seed < 6; ++seed) {
    const auto inst = fx::random(6, 5, seed % 2 ? 2.0 : 1.0, seed);
    Rng rng(seed);
    EXPECT_TRUE(check_metric_axioms(inst, rng, 2000).passed);
    EXPECT_TRUE(check_power_triangle(inst, rng, 2000).passed);
    EXPECT_TRUE(check_nearest_facility_average(inst, rng, 50).passed);
    EXPECT_TRUE(check_client_average(inst, rng, 50).passed);
    EXPECT_TRUE(check_client_centers_bound(inst, 2).passed);
  }
}

TEST(Verify, PowerTriangleCatchesNonMetric) {
  // A "metric" violating the triangle inequality, loaded without validation.
  auto metric = std::make_shared<const Metric>(Metric::from_matrix({{0, 10, 1}, {10, 0, 1}, {1, 1, 0}}, false));
  const MetricInstance inst(metric, {0, 1}, {2}, 1.0);
  Rng rng(1);
  EXPECT_FALSE(check_metric_axioms(inst, rng, 2000).passed);
  EXPECT_FALSE(check_power_triangle(inst, rng, 2000).passed);
}

TEST(Verify, BadInstanceRegression) {
  BadInstanceParams p;
  p.k = 2;
  p.cluster_size = 3;
  p.delta = 0.1;
  const auto checks = check_bad_instance(gen_bad_instance(p), {}, 3);
  ASSERT_EQ(checks.size(), 4u);
  for (const auto& c : checks) EXPECT_TRUE(c.passed) << c.name << ": " << c.detail;
}

TEST(Verify, GadgetSlack) {
  BadInstanceParams p;
  p.k = 2;
  p.cluster_size = 5;
  p.delta = 0.1;
  EXPECT_NEAR(gadget_slack(p), 0.7, 1e-12);
}
