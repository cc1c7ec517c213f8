#include <gtest/gtest.h>

#include <cstdio>
#include <filesystem>
#include <string>

#include "brute_force.hpp"
#include "fixtures.hpp"
#include "ksvc/instances.hpp"
#include "ksvc/io.hpp"

using namespace ksvc;

namespace {

std::string temp_path(const std::string& name) {
  return (std::filesystem::temp_directory_path() / ("ksvc_io_" + name)).string();
}

std::string parse_error_of(const std::string& text) {
  try {
    instance_from_json(parse_json_text(text, "inline"));
  } catch (const ParseError& e) {
    return e.what();
  }
  return "";
}

}  // namespace

TEST(Io, EuclideanRoundTrip) {
  const auto inst = fx::random(3, 2, 2.0, 4);
  const auto path = temp_path("euclid.json");
  save_instance(path, inst, ConstraintSpec::r_gather({1, 2}));
  const auto back = load_instance(path);
  ASSERT_EQ(back.instance.metric().size(), 5u);
  for (std::size_t a = 0; a < 5; ++a) {
    for (std::size_t b = 0; b < 5; ++b) EXPECT_NEAR(back.instance.distance(a, b), inst.distance(a, b), 1e-12);
  }
  EXPECT_EQ(back.instance.ell(), 2.0);
  ASSERT_TRUE(back.constraint);
  EXPECT_EQ(*back.constraint, ConstraintSpec::r_gather({1, 2}));
  std::filesystem::remove(path);
}

TEST(Io, GraphRoundTripPreservesShortestPaths) {
  BadInstanceParams p;
  const auto bundle = gen_bad_instance(p);
  const auto j = instance_to_json(bundle.instance);
  const auto back = instance_from_json(parse_json_text(j.dump(), "inline")).instance;
  const auto& metric = back.metric();
  const auto ref = bf::apsp(metric.size(), bundle.instance.metric().edges());
  for (std::size_t a = 0; a < metric.size(); ++a) {
    for (std::size_t c = 0; c < metric.size(); ++c) EXPECT_NEAR(metric(a, c), ref[a][c], 1e-12);
  }
  EXPECT_EQ(back.clients(), bundle.instance.clients());
  EXPECT_EQ(back.facilities(), bundle.instance.facilities());
}

TEST(Io, MatrixAndCoordObjects) {
  const auto m = instance_from_json(parse_json_text(
      R"({"ell":1,"mode":"matrix","clients":[0],"facilities":[1],"matrix":[[0,2],[2,0]]})", "inline"));
  EXPECT_DOUBLE_EQ(m.instance.distance(0, 1), 2.0);
  const auto c = instance_from_json(parse_json_text(
      R"({"ell":1,"mode":"euclidean","clients":[0],"facilities":[1],"coords":{"0":[0,0],"1":[3,4]}})", "inline"));
  EXPECT_DOUBLE_EQ(c.instance.distance(0, 1), 5.0);
}

TEST(Io, SchemaErrorsNameTheField) {
  EXPECT_NE(parse_error_of(R"({"mode":"matrix","clients":[0],"facilities":[1],"matrix":[[0,1],[1,0]]})")
                .find("ell"),
            std::string::npos);
  EXPECT_NE(parse_error_of(R"({"ell":1,"mode":"matrix","clients":[-1],"facilities":[1],"matrix":[[0,1],[1,0]]})")
                .find("/clients/0"),
            std::string::npos);
  EXPECT_NE(parse_error_of(R"({"ell":1,"mode":"matrix","clients":[0],"facilities":[1],"matrix":[[0,1],[2,0]]})")
                .find("symmetric"),
            std::string::npos);
  EXPECT_NE(parse_error_of(R"({"ell":1,"mode":"cube","clients":[0],"facilities":[1]})").find("mode"),
            std::string::npos);
  EXPECT_NE(parse_error_of("{\"ell\":1,").find("byte"), std::string::npos);
}

TEST(Io, ConstraintParsing) {
  EXPECT_EQ(parse_constraint(R"({"kind":"r_gather","r":2})"), ConstraintSpec::r_gather_uniform(2));
  EXPECT_EQ(parse_constraint(R"({"kind":"r_capacity","r":[1,4]})"), ConstraintSpec::r_capacity({1, 4}));
  EXPECT_EQ(parse_constraint(R"({"kind":"outlier","m":3})"), ConstraintSpec::outlier(3));
  EXPECT_EQ(parse_constraint(R"({"kind":"unconstrained"})"), ConstraintSpec::unconstrained());
  EXPECT_THROW(parse_constraint(R"({"kind":"weird"})"), ParseError);
  for (const auto& spec : {ConstraintSpec::r_gather({1, 2}), ConstraintSpec::outlier(2),
                           ConstraintSpec::r_capacity_uniform(5)}) {
    EXPECT_EQ(constraint_from_json(to_json(spec)), spec);
  }
}

TEST(Io, SolutionRoundTrip) {
  const auto inst = fx::line({0, 1, 100, 0}, {0, 1, 2}, {3});
  const Clustering c(1, {0, 0, Clustering::excluded});
  const auto j = clustering_to_json(inst, CenterSet({0}), c, 1.0, Json::object());
  const auto back = solution_from_json(parse_json_text(j.dump(), "inline"));
  EXPECT_EQ(back.cost, 1.0);
  EXPECT_EQ(back.centers, (std::vector<std::size_t>{3}));
  EXPECT_EQ(back.excluded, (std::vector<std::size_t>{2}));
}

TEST(Io, GeneratorParamsRoundTrip) {
  BadInstanceParams p;
  p.k = 3;
  p.cluster_size = 2;
  p.delta = 0.2;
  const auto q = bad_params_from_json(to_json(p));
  EXPECT_EQ(q.k, 3u);
  EXPECT_EQ(q.cluster_size, 2u);
  EXPECT_DOUBLE_EQ(q.delta, 0.2);
  EXPECT_DOUBLE_EQ(q.resolved_big_delta(), p.resolved_big_delta());
  RandomParams r;
  r.n_clients = 5;
  r.mode = MetricMode::matrix;
  const auto s = random_params_from_json(to_json(r));
  EXPECT_EQ(s.n_clients, 5u);
  EXPECT_EQ(s.mode, MetricMode::matrix);
}

TEST(Io, MissingFileIsParseError) { EXPECT_THROW(load_instance("/nonexistent/file.json"), ParseError); }
