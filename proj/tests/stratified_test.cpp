#include <algorithm>
#include <cmath>
#include <map>
#include <set>

#include <gtest/gtest.h>

#include "strata/config.hpp"
#include "strata/evaluation.hpp"
#include "strata/stratified.hpp"
#include "support.hpp"

using namespace strata;

namespace {

const DesignVector kX0({10, 6, 16, 0.8, 1, 0, 0.35, 0.6}, 1);

StratifiedConfig config(std::vector<int> schedule) {
  StratifiedConfig c;
  c.schedule.knot_counts = std::move(schedule);
  return c;
}

// Max distance from each point of `a` to the polyline `b`.
double outline_distance(const Outline& a, const Outline& b) {
  auto seg = [](Point2 p, Point2 s, Point2 t) {
    const double vx = t.x - s.x, vy = t.y - s.y;
    const double len2 = vx * vx + vy * vy;
    double w = len2 > 0 ? ((p.x - s.x) * vx + (p.y - s.y) * vy) / len2 : 0;
    w = std::clamp(w, 0.0, 1.0);
    return std::hypot(p.x - s.x - w * vx, p.y - s.y - w * vy);
  };
  double worst = 0;
  const std::size_t n = b.points.size();
  for (const auto& p : a.points) {
    double d = 1e300;
    for (std::size_t i = 0; i + 1 < n + (b.closed ? 1 : 0); ++i) d = std::min(d, seg(p, b.points[i], b.points[(i + 1) % n]));
    worst = std::max(worst, d);
  }
  return worst;
}

}  // namespace

TEST(Schedule, Validation) {
  EXPECT_NO_THROW(MetaSchedule{}.validate());
  EXPECT_EQ(MetaSchedule{}.knot_counts, (std::vector<int>{1, 8, 16, 24, 32}));
  EXPECT_THROW((MetaSchedule{{}}.validate()), ArgumentError);
  EXPECT_THROW((MetaSchedule{{1, 4, 4}}.validate()), ArgumentError);
  EXPECT_THROW((MetaSchedule{{0, 4}}.validate()), ArgumentError);
}

TEST(Lift, ConstantKnots) {
  const DesignVector x({11, 5, 15, 0.5, 1.2, 0.1, 0.4, 0.7}, 1);
  const auto y = lift_design(x, 8);
  EXPECT_EQ(y.knots(), 8);
  const auto parts = split_vector(y);
  EXPECT_EQ(parts.core, split_vector(x).core);
  EXPECT_TRUE((parts.ground.array() == 0.4).all());
  EXPECT_TRUE((parts.radiator.array() == 0.7).all());
  EXPECT_THROW(lift_design(y, 8), ArgumentError);
  EXPECT_THROW(lift_design(y, 4), ArgumentError);
}

TEST(Lift, TwoKnotGroundIsLinear) {
  const DesignVector x({11, 5, 15, 0.5, 1.2, 0.1, 0.2, 0.8, 0.5, 0.5}, 2);
  const auto parts = split_vector(lift_design(x, 3));
  EXPECT_NEAR(parts.ground(0), 0.2, 1e-15);
  EXPECT_NEAR(parts.ground(1), 0.5, 1e-15);
  EXPECT_NEAR(parts.ground(2), 0.8, 1e-15);
}

TEST(Lift, OutputWithinBounds) {
  prop::Gen gen(41);
  for (int rep = 0; rep < 200; ++rep) {
    const int L = gen.integer(1, 20);
    const auto x = gen.design(L);
    const auto y = lift_design(x, L + gen.integer(1, 12));
    EXPECT_TRUE(bound_violations(y.values(), default_bounds(y.knots())).empty());
  }
}

TEST(Lift, GeometryDeviationBelowHundredthMillimetre) {
  // Constant knots lift exactly; smooth knot vectors move the outline by far
  // less than 0.01 mm.
  prop::Gen gen(42);
  for (int rep = 0; rep < 20; ++rep) {
    const int L = rep < 5 ? 1 : 8;
    DesignVector x = gen.design(L);
    if (L > 1) {
      auto parts = split_vector(x);
      parts.radiator = gen.smooth_knots(L, 0.3, 0.9);
      for (int l = 0; l < L; ++l) parts.ground(l) = 0.4 + 0.05 * std::sin(l * 0.4);
      x = join_vector(parts.core, parts.ground, parts.radiator);
    }
    const auto a = build_geometry(x, 512);
    const auto b = build_geometry(lift_design(x, L == 1 ? 8 : 16), 512);
    EXPECT_LE(outline_distance(a.radiator, b.radiator), 1e-2);
    EXPECT_LE(outline_distance(b.radiator, a.radiator), 1e-2);
    EXPECT_LE(outline_distance(a.ground_profile, b.ground_profile), 1e-2);
  }
}

TEST(CompareMeta, Examples) {
  EXPECT_TRUE(compare_meta(100, 90));
  EXPECT_FALSE(compare_meta(100, 100));
  EXPECT_FALSE(compare_meta(100, 99.9999999));
  EXPECT_TRUE(compare_meta(100, 99.9));
  EXPECT_FALSE(compare_meta(100, 120));
}

TEST(Canonical, IsTheShrinkForm) {
  const ObjectiveConfig cfg;
  EXPECT_EQ(canonical_objective(-11, 200, cfg), 200);
  EXPECT_NEAR(canonical_objective(-9.9, 200, cfg), 210, 1e-9);
}

TEST(Stratified, SingleStepSchedule) {
  EvaluationService s(mock_simulator({}, {}));
  const auto r = stratified_optimize(config({1}), kX0, s);
  ASSERT_EQ(r.steps.size(), 1u);
  EXPECT_EQ(r.stop_reason, StopReason::ScheduleEnd);
  EXPECT_EQ(r.total_cost, s.total());
  EXPECT_EQ(r.final_x.knots(), 1);
}

TEST(Stratified, BookkeepingAcrossSteps) {
  EvaluationService s(mock_simulator({}, {}));
  std::map<std::string, std::set<Eigen::Index>> lengths;
  s.set_listener([&](const TraceRecord& t, const EvalOutcome&) { lengths[t.phase].insert(t.x.size()); });
  MetaObserver obs;
  std::vector<std::pair<std::size_t, int>> begun;
  obs.on_step_begin = [&](std::size_t j, int L) { begun.emplace_back(j, L); };
  const auto r = stratified_optimize(config({1, 4, 8}), kX0, s, obs);

  std::size_t sum = 0;
  for (const auto& st : r.steps) sum += st.cost;
  EXPECT_EQ(sum, r.total_cost);
  EXPECT_EQ(r.total_cost, s.total());
  for (std::size_t j = 0; j < r.steps.size(); ++j) {
    const int L = r.steps[j].knots;
    const auto& seen = lengths.at("meta" + std::to_string(j) + "_L" + std::to_string(L));
    EXPECT_EQ(seen, (std::set<Eigen::Index>{design_length(L)}));
    EXPECT_EQ(r.steps[j].cost, s.ledger().per_phase.at("meta" + std::to_string(j) + "_L" + std::to_string(L)));
    if (j > 0) EXPECT_EQ(r.steps[j].x_start.values(), lift_design(r.steps[j - 1].x_opt, L).values());
  }
  EXPECT_EQ(begun.size(), r.steps.size());
  EXPECT_TRUE(transitions_valid(r.state.transition_log));
  // Mode 0 is left once and never re-entered, including across steps.
  for (const auto& t : r.state.transition_log) EXPECT_NE(t.to, 0);
  EXPECT_LE(std::count_if(r.state.transition_log.begin(), r.state.transition_log.end(),
                          [](const ModeTransition& t) { return t.from == 0; }),
            1);
}

TEST(Stratified, StopsWhenNotImprovedAndReturnsPrevious) {
  EvaluationService s(mock_simulator({}, {}));
  const auto r = stratified_optimize(config({1, 4, 8, 16}), kX0, s);
  if (r.stop_reason == StopReason::NoImprovement) {
    const auto& last = r.steps.back();
    const auto& prev = r.steps[r.steps.size() - 2];
    EXPECT_FALSE(compare_meta(prev.comparator, last.comparator));
    EXPECT_NE(r.best_step, r.steps.size() - 1);
  }
  for (std::size_t j = 0; j < r.steps.size(); ++j) {
    EXPECT_LE(r.steps[r.best_step].comparator, r.steps[j].comparator * (1 + 1e-6));
  }
  EXPECT_EQ(r.final_x.values(), r.steps[r.best_step].x_opt.values());
}

TEST(Stratified, Reproducible) {
  auto run = [] {
    EvaluationService s(mock_simulator({}, {}));
    return stratified_optimize(config({1, 4, 8}), kX0, s);
  };
  const auto a = run(), b = run();
  ASSERT_EQ(a.steps.size(), b.steps.size());
  for (std::size_t j = 0; j < a.steps.size(); ++j) {
    EXPECT_EQ(a.steps[j].cost, b.steps[j].cost);
    EXPECT_EQ(a.steps[j].x_opt.values(), b.steps[j].x_opt.values());
  }
}

TEST(Stratified, BudgetExhaustionKeepsPartialResults) {
  EvaluationService s(mock_simulator({}, {}));
  auto c = config({1, 4, 8});
  c.tr.max_true_evals = 60;
  const auto r = stratified_optimize(c, kX0, s);
  EXPECT_EQ(r.stop_reason, StopReason::EvalBudget);
  EXPECT_FALSE(r.steps.empty());
  EXPECT_LE(s.total(), 60u);
  c.tr.max_true_evals = 0;
  EvaluationService s2(mock_simulator({}, {}));
  EXPECT_THROW(stratified_optimize(c, kX0, s2), EvaluationError);
}

TEST(Stratified, RejectsMismatchedStart) {
  EvaluationService s(mock_simulator({}, {}));
  EXPECT_THROW(stratified_optimize(config({4, 8}), kX0, s), StructuralError);
  DesignVector bad({50, 6, 16, 0.8, 1, 0, 0.35, 0.6}, 1);
  EXPECT_THROW(stratified_optimize(config({1}), bad, s), OutOfBounds);
}

TEST(Direct, FixedShrinkMode) {
  EvaluationService s(mock_simulator({}, {}));
  const auto x = lift_design(kX0, 4);
  const auto step = direct_optimize(ObjectiveConfig{}, TrConfig{}, x, s);
  EXPECT_EQ(step.knots, 4);
  EXPECT_EQ(step.cost, s.total());
  EXPECT_EQ(step.x_start.values(), x.values());
  for (const auto& it : step.result.history) EXPECT_EQ(it.alpha, 1);
  EXPECT_EQ(s.ledger().per_phase.count("direct_L4"), 1u);
}
