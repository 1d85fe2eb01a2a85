#include <gtest/gtest.h>

#include "strata/config.hpp"
#include "support.hpp"

using namespace strata;

namespace {

std::string error_of(const std::string& text) {
  try {
    parse_config(text);
  } catch (const ConfigError& e) {
    return e.what();
  }
  return "";
}

}  // namespace

TEST(Config, EmptyObjectGivesDefaults) {
  const RunConfig c = parse_config("{}");
  EXPECT_EQ(c.schedule.knot_counts, (std::vector<int>{1, 4, 8}));
  EXPECT_EQ(c.x0.values(), reference_initial_design().values());
  EXPECT_EQ(c.objective.S1, -10);
  EXPECT_EQ(c.objective.gamma2, 500);
  EXPECT_EQ(c.tr.delta0, 1);
  EXPECT_EQ(c.tr.epsilon, 1e-2);
  EXPECT_EQ(c.grid.n, 101);
  EXPECT_EQ(c.mock.d0, 14);
}

TEST(Config, ShippedFilesParse) {
  const RunConfig d = load_config(std::string(STRATA_CONFIGS) + "/default.json");
  EXPECT_EQ(d.schedule.knot_counts, (std::vector<int>{1, 4, 8}));
  const RunConfig p = load_config(std::string(STRATA_CONFIGS) + "/paper.json");
  EXPECT_EQ(p.schedule.knot_counts, (std::vector<int>{1, 8, 16, 24, 32}));
}

TEST(Config, Overrides) {
  const RunConfig c = parse_config(R"({"schedule":[2,5], "x0":[12,6,16,0.8,1,0,0.3,0.4,0.5,0.6],
      "objective":{"S1":-12,"S2":-11,"footprint_convention":"paper_sy"}, "tr":{"max_true_evals":99},
      "mock":{"k_max":2}, "seed":7, "output_dir":"out"})");
  EXPECT_EQ(c.x0.knots(), 2);
  EXPECT_EQ(c.objective.footprint, FootprintConvention::RadiatorHeight);
  EXPECT_EQ(c.tr.max_true_evals, 99u);
  EXPECT_EQ(c.mock.k_max, 2);
  EXPECT_EQ(c.stratified().tr.seed, 7u);
  EXPECT_EQ(c.output_dir, "out");
}

TEST(Config, SyntaxErrorReportsLineAndColumn) {
  const std::string msg = error_of("{\n  \"seed\": 1,\n  oops\n}");
  EXPECT_NE(msg.find("line 3"), std::string::npos) << msg;
  EXPECT_NE(msg.find("column"), std::string::npos) << msg;
}

TEST(Config, SchemaErrorsNameTheField) {
  EXPECT_NE(error_of(R"({"tr":{"delta0":"big"}})").find("tr.delta0"), std::string::npos);
  EXPECT_NE(error_of(R"({"mock":{"unknown":1}})").find("mock.unknown"), std::string::npos);
  EXPECT_NE(error_of(R"({"schedule":[1,1]})").find("schedule"), std::string::npos);
  EXPECT_NE(error_of(R"({"x0":[1,2,3]})").find("x0"), std::string::npos);
  EXPECT_NE(error_of(R"({"schedule":[4]})").find("x0"), std::string::npos);
  EXPECT_NE(error_of(R"({"objective":{"S2":-20}})").find("objective"), std::string::npos);
  EXPECT_NE(error_of(R"({"objective":{"footprint_convention":"disc"}})").find("footprint_convention"),
            std::string::npos);
  EXPECT_NE(error_of(R"({"seed":-1})").find("seed"), std::string::npos);
  EXPECT_NE(error_of(R"({"grid":{"n":1}})").find("grid"), std::string::npos);
  EXPECT_NE(error_of("[1,2]").find("top level"), std::string::npos);
}

TEST(Config, SnapshotRoundTrips) {
  const RunConfig a = parse_config(R"({"schedule":[1,3],"seed":3,"tr":{"fd_step":0.04},"output_dir":"x"})");
  const RunConfig b = parse_config(to_json(a).dump());
  EXPECT_EQ(to_json(a), to_json(b));
  EXPECT_EQ(b.tr.fd_step, 0.04);
  EXPECT_EQ(b.schedule.knot_counts, a.schedule.knot_counts);
}

TEST(Config, MissingFile) {
  EXPECT_THROW(load_config("/nonexistent/strata.json"), ConfigError);
}
