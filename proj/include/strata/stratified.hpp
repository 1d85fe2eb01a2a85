#pragma once

// Stratified optimization: a sequence of trust-region runs over designs
// with an increasing number of spline knots. Each optimum is lifted to the
// next knot count by re-interpolating its ground and radiator knots; the
// loop stops at the end of the schedule or as soon as a step fails to
// improve on its predecessor.

#include <cmath>
#include <cstddef>
#include <functional>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "strata/design_space.hpp"
#include "strata/errors.hpp"
#include "strata/evaluation.hpp"
#include "strata/objective.hpp"
#include "strata/trust_region.hpp"

namespace strata {

struct MetaSchedule {
  std::vector<int> knot_counts{1, 8, 16, 24, 32};

  void validate() const {
    if (knot_counts.empty()) throw ArgumentError("schedule must not be empty");
    for (std::size_t j = 0; j < knot_counts.size(); ++j) {
      if (knot_counts[j] < 1) throw ArgumentError("schedule knot counts must be >= 1");
      if (j > 0 && knot_counts[j] <= knot_counts[j - 1]) {
        throw ArgumentError("schedule knot counts must be strictly increasing");
      }
    }
  }
};

/// Lift an optimum to `target` knots: topology parameters are copied, ground
/// knots re-interpolated as an open profile, radiator knots periodically.
inline DesignVector lift_design(const DesignVector& x, int target) {
  if (target <= x.knots()) {
    throw ArgumentError("lift target " + std::to_string(target) + " must exceed current knot count " +
                        std::to_string(x.knots()));
  }
  const DesignParts parts = split_vector(x);
  return join_vector(parts.core, interpolate_knots(parts.ground, target, KnotKind::Open),
                     interpolate_knots(parts.radiator, target, KnotKind::Periodic));
}

inline constexpr double kMetaRelativeTolerance = 1e-6;

inline bool compare_meta(double previous, double current) {
  return current < previous - kMetaRelativeTolerance * std::abs(previous);
}

/// The antenna design problem in normalized coordinates for one knot count.
/// The objective state is shared with the caller so that it persists across
/// meta-steps.
class AntennaProblem {
 public:
  using SwitchHook = std::function<void(const ModeTransition&)>;

  AntennaProblem(EvaluationService& service, int knots, const ObjectiveConfig& cfg, ObjectiveState& state,
                 bool fixed_mode = false, SwitchHook on_switch = {})
      : service_(&service), knots_(knots), bounds_(default_bounds(knots)), cfg_(cfg), state_(&state),
        fixed_mode_(fixed_mode), on_switch_(std::move(on_switch)) {
    cfg_.validate();
    state_->validate();
  }

  Eigen::Index dimension() const { return design_length(knots_); }
  const DesignBounds& bounds() const { return bounds_; }

  DesignVector design(const Vector& u) const { return DesignVector(denormalize(u, bounds_), knots_); }

  double area(const Vector& u) const { return footprint(design(u), cfg_.footprint); }

  EvalOutcome evaluate(const Vector& u) { return service_->evaluate(denormalize(u, bounds_)); }

  std::vector<EvalOutcome> evaluate_batch(const std::vector<Vector>& us) {
    std::vector<Vector> xs;
    xs.reserve(us.size());
    for (const auto& u : us) xs.push_back(denormalize(u, bounds_));
    return service_->evaluate_batch(xs);
  }

  double objective(const Response& r, const Vector& u) const {
    return composite_objective(max_in_band(r, cfg_), area(u), *state_, cfg_);
  }

  bool accept(const Response& r, const Vector& u, std::size_t eval_index) {
    if (fixed_mode_) return false;
    const int before = state_->alpha;
    *state_ = update_mode(std::move(*state_), max_in_band(r, cfg_), area(u), cfg_, eval_index);
    const bool changed = state_->alpha != before;
    if (changed && on_switch_) on_switch_(state_->transition_log.back());
    return changed;
  }

  std::size_t evaluations() const { return service_->total(); }
  int mode() const { return state_->alpha; }

 private:
  EvaluationService* service_;
  int knots_;
  DesignBounds bounds_;
  ObjectiveConfig cfg_;
  ObjectiveState* state_;
  bool fixed_mode_;
  SwitchHook on_switch_;
};

static_assert(TrProblem<AntennaProblem>);
static_assert(TrProblem<ScalarizedProblem>);

/// Cross-step metric: the shrink-with-penalty form, independent of the mode
/// a step ended in.
inline double canonical_objective(double max_db, double area, const ObjectiveConfig& cfg) {
  ObjectiveState st;
  st.alpha = 1;
  st.A1 = area;
  return composite_objective(max_db, area, st, cfg);
}

enum class StopReason { ScheduleEnd, NoImprovement, EvalBudget };

inline const char* to_string(StopReason s) {
  switch (s) {
    case StopReason::ScheduleEnd: return "schedule_end";
    case StopReason::NoImprovement: return "no_improvement";
    case StopReason::EvalBudget: return "eval_budget";
  }
  return "unknown";
}

struct MetaStep {
  int knots = 0;
  OptResult result;
  std::size_t cost = 0;
  DesignVector x_start;
  DesignVector x_opt;
  Response response;  // at x_opt
  double max_db = 0;
  double footprint = 0;
  double comparator = 0;
};

struct MetaResult {
  std::vector<MetaStep> steps;
  std::size_t best_step = 0;
  DesignVector final_x;
  Response final_response;
  std::size_t total_cost = 0;
  StopReason stop_reason = StopReason::ScheduleEnd;
  ObjectiveState state;
};

struct MetaObserver {
  std::function<void(std::size_t step, int knots)> on_step_begin;
  std::function<void(const MetaStep&)> on_step_end;
  std::function<void(const ModeTransition&)> on_mode_switch;
  TrObserver tr;
};

struct StratifiedConfig {
  MetaSchedule schedule;
  ObjectiveConfig objective;
  TrConfig tr;
  int initial_alpha = 0;
};

inline MetaResult stratified_optimize(const StratifiedConfig& cfg, const DesignVector& x0, EvaluationService& service,
                                      const MetaObserver& observer = {}) {
  cfg.schedule.validate();
  cfg.objective.validate();
  cfg.tr.validate();
  const auto& L = cfg.schedule.knot_counts;
  if (x0.knots() != L.front()) {
    throw StructuralError("initial design has " + std::to_string(x0.knots()) + " knots, schedule starts at " +
                          std::to_string(L.front()));
  }
  require_in_bounds(x0.values(), default_bounds(x0.knots()));

  MetaResult out;
  out.state.alpha = cfg.initial_alpha;
  if (out.state.alpha != 0) out.state.A1 = footprint(x0, cfg.objective.footprint);
  out.state.validate();

  const std::size_t start_total = service.total();
  DesignVector x = x0;
  for (std::size_t j = 0; j < L.size(); ++j) {
    if (observer.on_step_begin) observer.on_step_begin(j, L[j]);
    service.set_phase("meta" + std::to_string(j) + "_L" + std::to_string(L[j]));
    const std::size_t before = service.total();
    const std::size_t spent = before - start_total;

    TrConfig tr = cfg.tr;
    tr.max_true_evals = cfg.tr.max_true_evals > spent ? cfg.tr.max_true_evals - spent : 0;
    tr.seed = cfg.tr.seed + j;

    AntennaProblem problem(service, L[j], cfg.objective, out.state, false, observer.on_mode_switch);
    MetaStep step;
    step.knots = L[j];
    step.x_start = x;
    step.result = tr_optimize(problem, normalize(x, problem.bounds()), tr, observer.tr);
    step.cost = service.total() - before;

    if (step.result.best_u.size() == 0) {
      // Budget ran out before the step could evaluate anything.
      out.stop_reason = StopReason::EvalBudget;
      break;
    }
    step.x_opt = problem.design(step.result.best_u);
    step.response = step.result.best_response;
    step.max_db = max_in_band(step.response, cfg.objective);
    step.footprint = footprint(step.x_opt, cfg.objective.footprint);
    step.comparator = canonical_objective(step.max_db, step.footprint, cfg.objective);
    out.steps.push_back(step);
    if (observer.on_step_end) observer.on_step_end(out.steps.back());

    if (j > 0 && !compare_meta(out.steps[j - 1].comparator, step.comparator)) {
      out.stop_reason = StopReason::NoImprovement;
      break;
    }
    if (step.result.termination_reason == Termination::EvalBudget) {
      out.stop_reason = StopReason::EvalBudget;
      break;
    }
    if (j + 1 == L.size()) {
      out.stop_reason = StopReason::ScheduleEnd;
      break;
    }
    x = lift_design(step.x_opt, L[j + 1]);
  }

  if (out.steps.empty()) throw EvaluationError("evaluation budget too small for the first meta-step");
  std::size_t best = 0;
  for (std::size_t j = 1; j < out.steps.size(); ++j) {
    if (compare_meta(out.steps[best].comparator, out.steps[j].comparator)) best = j;
  }
  out.best_step = best;
  out.final_x = out.steps[best].x_opt;
  out.final_response = out.steps[best].response;
  out.total_cost = 0;
  for (const auto& s : out.steps) out.total_cost += s.cost;
  return out;
}

/// Direct trust-region run at a fixed knot count with the shrink-with-penalty
/// objective held fixed (no mode switching); the comparison baseline.
inline MetaStep direct_optimize(const ObjectiveConfig& objective, const TrConfig& tr, const DesignVector& x0,
                                EvaluationService& service, const TrObserver& observer = {}) {
  ObjectiveState st;
  st.alpha = 1;
  st.A1 = footprint(x0, objective.footprint);
  service.set_phase("direct_L" + std::to_string(x0.knots()));
  const std::size_t before = service.total();
  AntennaProblem problem(service, x0.knots(), objective, st, /*fixed_mode=*/true);
  MetaStep step;
  step.knots = x0.knots();
  step.x_start = x0;
  step.result = tr_optimize(problem, normalize(x0, problem.bounds()), tr, observer);
  step.cost = service.total() - before;
  step.x_opt = problem.design(step.result.best_u);
  step.response = step.result.best_response;
  step.max_db = max_in_band(step.response, objective);
  step.footprint = footprint(step.x_opt, objective.footprint);
  step.comparator = canonical_objective(step.max_db, step.footprint, objective);
  return step;
}

}  // namespace strata
