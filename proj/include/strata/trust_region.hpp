#pragma once

// Trust-region minimization of U(R(u)) for an expensive vector response R.
//
// Each iteration linearizes the response around the current centre with
// forward finite differences, G(u) = R(c) + J (u - c), minimizes U(G(u))
// over the box [0,1]^D intersected with the ball |u - c| <= delta, and
// compares the true with the predicted change of U:
//
//   rho = (U(R(u+)) - U(R(c))) / (U(G(u+)) - U(G(c)))
//
// A step is accepted when rho > rho_accept; delta doubles when rho > 0.75
// and is divided by three when rho < 0.75. The loop stops once the proposed
// step or the radius drops to epsilon, or the evaluation budget runs out.
//
// Cost: one evaluation for the initial centre, D per Jacobian (the centre is
// reused), one per candidate. With a rebuild after each accepted step the
// total is (1 + D) + sum_accepted (D + 1) + sum_rejected 1.

#include <algorithm>
#include <cmath>
#include <concepts>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <limits>
#include <numeric>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "strata/design_space.hpp"
#include "strata/errors.hpp"
#include "strata/evaluation.hpp"

namespace strata {

struct TrConfig {
  double delta0 = 1.0;
  double epsilon = 1e-2;
  double rho_accept = 0.0;
  double rho_expand = 0.75;
  double expand_factor = 2.0;
  double shrink_divisor = 3.0;
  double fd_step = 0.05;  // normalized units
  std::size_t max_true_evals = 5000;
  std::size_t subproblem_budget = 5000;  // surrogate probes per subproblem
  std::uint64_t seed = 0;

  void validate() const {
    if (!(0.0 <= rho_accept && rho_accept < rho_expand && rho_expand < 1.0)) {
      throw ArgumentError("trust region needs 0 <= rho_accept < rho_expand < 1");
    }
    if (!(delta0 > epsilon && epsilon > 0.0)) throw ArgumentError("trust region needs delta0 > epsilon > 0");
    if (!(expand_factor > 1.0) || !(shrink_divisor > 1.0)) {
      throw ArgumentError("trust region needs expand_factor > 1 and shrink_divisor > 1");
    }
    if (!(fd_step > 0.0 && fd_step <= 0.5)) throw ArgumentError("finite-difference step must be in (0, 0.5]");
    if (subproblem_budget < 1) throw ArgumentError("subproblem budget must be >= 1");
  }
};

enum class Termination { StepTolerance, RadiusTolerance, EvalBudget };

inline const char* to_string(Termination t) {
  switch (t) {
    case Termination::StepTolerance: return "step_tol";
    case Termination::RadiusTolerance: return "radius_tol";
    case Termination::EvalBudget: return "eval_budget";
  }
  return "unknown";
}

/// First-order model of the response around a centre.
struct LinearSurrogate {
  Vector center_u;
  Response center_response;
  Matrix jacobian;  // response units per normalized coordinate

  Response predict(const Vector& u) const {
    Response r = center_response;
    r.values.noalias() += jacobian * (u - center_u);
    return r;
  }
};

inline Response surrogate_predict(const LinearSurrogate& s, const Vector& u) { return s.predict(u); }

/// Optimization problem in normalized coordinates.
///
/// `objective` is evaluated under the current mode and must be pure; `accept`
/// is called with every accepted iterate (and the starting point) and
/// returns true when it changed the objective.
template <class P>
concept TrProblem = requires(P& p, const P& cp, const Vector& u, const std::vector<Vector>& us,
                             const Response& r, std::size_t idx) {
  { cp.dimension() } -> std::convertible_to<Eigen::Index>;
  { p.evaluate(u) } -> std::same_as<EvalOutcome>;
  { p.evaluate_batch(us) } -> std::same_as<std::vector<EvalOutcome>>;
  { cp.objective(r, u) } -> std::convertible_to<double>;
  { p.accept(r, u, idx) } -> std::same_as<bool>;
  { cp.evaluations() } -> std::convertible_to<std::size_t>;
  { cp.mode() } -> std::convertible_to<int>;
};

struct IterationRecord {
  int i = 0;
  Vector u;              // candidate
  double delta = 0;      // radius the candidate was drawn from
  double rho = 0;
  bool accepted = false;
  double objective = 0;  // true objective of the candidate, mode at evaluation
  double predicted = 0;  // surrogate objective of the candidate
  int alpha = 0;
  std::size_t evals_total = 0;  // evaluator ledger total after the iteration
  std::size_t evals_used = 0;   // evaluations spent in this iteration
};

struct AcceptedPoint {
  Vector u;
  Response response;
};

struct OptResult {
  Vector best_u;
  Response best_response;
  double best_objective = std::numeric_limits<double>::infinity();
  Termination termination_reason = Termination::StepTolerance;
  std::size_t evaluations = 0;  // true evaluations spent by this run
  std::size_t jacobian_builds = 0;
  std::size_t accepted = 0;
  std::size_t rejected = 0;
  Eigen::Index dimension = 0;
  double final_delta = 0;
  std::vector<IterationRecord> history;
  std::vector<AcceptedPoint> accepted_points;  // starting point first
};

struct TrObserver {
  std::function<void(const IterationRecord&)> on_iteration;
  /// Radius, incumbent objective and mode in effect for the next evaluations.
  std::function<void(double delta, double incumbent, int alpha)> on_progress;
};

// ---------------------------------------------------------------------------

inline double gain_ratio(double true_new, double true_old, double model_new, double model_old) {
  const double predicted = model_new - model_old;
  if (std::abs(predicted) < 1e-14) return -1.0;
  return (true_new - true_old) / predicted;
}

inline double update_radius(double delta, double rho, const TrConfig& cfg) {
  if (rho > cfg.rho_expand) return delta * cfg.expand_factor;
  if (rho < cfg.rho_expand) return delta / cfg.shrink_divisor;
  return delta;
}

/// Forward-difference Jacobian at `center` (backward where the forward point
/// would leave the unit box). Costs exactly D evaluations unless a column
/// fails, in which case it is retried once with half the step.
template <TrProblem P>
Matrix fd_jacobian(P& problem, const Vector& center, const Response& center_response, double h) {
  const Eigen::Index D = center.size();
  auto column_points = [&](double step, const std::vector<Eigen::Index>& cols, std::vector<double>& signed_steps) {
    std::vector<Vector> pts;
    signed_steps.clear();
    for (auto k : cols) {
      Vector p = center;
      const double s = center(k) + step > 1.0 ? -step : step;
      p(k) += s;
      signed_steps.push_back(s);
      pts.push_back(std::move(p));
    }
    return pts;
  };

  Matrix J(center_response.values.size(), D);
  std::vector<Eigen::Index> cols(static_cast<std::size_t>(D));
  std::iota(cols.begin(), cols.end(), Eigen::Index{0});
  std::vector<double> steps;
  auto outcomes = problem.evaluate_batch(column_points(h, cols, steps));

  std::vector<Eigen::Index> failed;
  for (std::size_t c = 0; c < cols.size(); ++c) {
    if (!outcomes[c].ok()) {
      failed.push_back(cols[c]);
      continue;
    }
    J.col(cols[c]) = (outcomes[c].response->values - center_response.values) / steps[c];
  }
  if (!failed.empty()) {
    auto retry = problem.evaluate_batch(column_points(h / 2, failed, steps));
    for (std::size_t c = 0; c < failed.size(); ++c) {
      if (!retry[c].ok()) {
        throw EvaluationError("finite-difference column " + std::to_string(failed[c]) +
                              " failed at steps h and h/2: " + retry[c].error);
      }
      J.col(failed[c]) = (retry[c].response->values - center_response.values) / steps[c];
    }
  }
  return J;
}

// ---------------------------------------------------------------------------
// Subproblem: minimize a cheap model objective over box ∩ ball.

namespace detail {

/// Clamp into [0,1]^D, then pull back onto the ball around `center`. The
/// result stays in the box since the box is convex and contains `center`.
inline Vector project_feasible(const Vector& u, const Vector& center, double delta) {
  Vector p = u.cwiseMax(0.0).cwiseMin(1.0);
  const double r = (p - center).norm();
  if (r > delta) p = center + (p - center) * (delta / r);
  return p;
}

}  // namespace detail

/// Multi-start pattern search on the model objective. Starts are the centre
/// and the 2D axis points at distance delta; each start (best first) is
/// refined by polling the coordinate directions plus a seeded random
/// orthonormal frame, halving the step from delta/4 down to delta*1e-6.
/// Returns the centre itself when nothing strictly better is found.
template <class F>
Vector solve_subproblem(F&& model, const Vector& center, double delta, std::size_t budget,
                        std::uint64_t seed = 0) {
  const Eigen::Index D = center.size();
  if (!(delta > 0.0)) return center;

  std::size_t probes = 0;
  auto probe = [&](const Vector& u) {
    ++probes;
    const double v = model(u);
    return std::isnan(v) ? std::numeric_limits<double>::infinity() : v;
  };

  const double f_center = probe(center);
  Vector best = center;
  double f_best = f_center;

  struct Start {
    Vector u;
    double f;
  };
  std::vector<Start> starts;
  starts.push_back({center, f_center});
  for (Eigen::Index k = 0; k < D && probes + 2 <= budget; ++k) {
    for (double s : {delta, -delta}) {
      Vector u = center;
      u(k) += s;
      u = detail::project_feasible(u, center, delta);
      const double f = probe(u);
      starts.push_back({u, f});
    }
  }
  std::stable_sort(starts.begin(), starts.end(), [](const Start& a, const Start& b) { return a.f < b.f; });

  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal;
  auto random_frame = [&]() {
    Matrix g(D, D);
    for (Eigen::Index i = 0; i < D; ++i)
      for (Eigen::Index j = 0; j < D; ++j) g(i, j) = normal(rng);
    Eigen::HouseholderQR<Matrix> qr(g);
    return Matrix(qr.householderQ());
  };

  const double min_step = delta * 1e-6;
  for (const auto& start : starts) {
    if (probes >= budget) break;
    Vector x = start.u;
    double fx = start.f;
    double step = delta / 4;
    Matrix frame = random_frame();
    while (step >= min_step && probes < budget) {
      Vector best_trial = x;
      double f_trial = fx;
      auto poll = [&](const Vector& dir) {
        for (double sgn : {1.0, -1.0}) {
          if (probes >= budget) return;
          Vector u = detail::project_feasible(x + sgn * step * dir, center, delta);
          const double f = probe(u);
          if (f < f_trial) {
            f_trial = f;
            best_trial = std::move(u);
          }
        }
      };
      for (Eigen::Index k = 0; k < D; ++k) poll(Vector::Unit(D, k));
      for (Eigen::Index k = 0; k < D; ++k) poll(frame.col(k));
      if (f_trial < fx) {
        x = std::move(best_trial);
        fx = f_trial;
      } else {
        step /= 2;
        frame = random_frame();
      }
    }
    if (fx < f_best) {
      f_best = fx;
      best = x;
    }
  }
  return f_best < f_center ? best : center;
}

// ---------------------------------------------------------------------------

template <TrProblem P>
OptResult tr_optimize(P& problem, const Vector& u0, const TrConfig& cfg, const TrObserver& observer = {}) {
  cfg.validate();
  const Eigen::Index D = problem.dimension();
  if (u0.size() != D) throw StructuralError("starting point has the wrong dimension");
  if ((u0.array() < 0.0).any() || (u0.array() > 1.0).any()) {
    throw OutOfBounds("starting point must lie in the unit box");
  }

  OptResult res;
  res.dimension = D;
  const std::size_t start_evals = problem.evaluations();
  auto used = [&] { return problem.evaluations() - start_evals; };
  auto remaining = [&] { return cfg.max_true_evals > used() ? cfg.max_true_evals - used() : std::size_t{0}; };
  auto progress = [&](double delta, double incumbent) {
    if (observer.on_progress) observer.on_progress(delta, incumbent, problem.mode());
  };

  double delta = cfg.delta0;
  const double nan = std::numeric_limits<double>::quiet_NaN();

  auto finish = [&](Termination why) {
    res.termination_reason = why;
    res.evaluations = used();
    res.final_delta = delta;
    // Best accepted point under the final mode.
    for (const auto& a : res.accepted_points) {
      const double f = problem.objective(a.response, a.u);
      if (f < res.best_objective || res.best_u.size() == 0) {
        res.best_objective = f;
        res.best_u = a.u;
        res.best_response = a.response;
      }
    }
    return res;
  };

  if (remaining() < 1) return finish(Termination::EvalBudget);
  progress(delta, nan);
  EvalOutcome first = problem.evaluate(u0);
  if (!first.ok()) throw EvaluationError("starting point could not be evaluated: " + first.error);

  Vector center = u0;
  Response center_response = *first.response;
  problem.accept(center_response, center, problem.evaluations());
  res.accepted_points.push_back({center, center_response});
  double incumbent = problem.objective(center_response, center);

  if (remaining() < static_cast<std::size_t>(D)) return finish(Termination::EvalBudget);
  progress(delta, incumbent);
  LinearSurrogate model{center, center_response, fd_jacobian(problem, center, center_response, cfg.fd_step)};
  ++res.jacobian_builds;

  for (int i = 1;; ++i) {
    const std::size_t evals_before = problem.evaluations();
    auto model_objective = [&](const Vector& u) { return problem.objective(model.predict(u), u); };
    const double model_center = model_objective(center);
    const Vector candidate = solve_subproblem(model_objective, center, delta, cfg.subproblem_budget,
                                              cfg.seed ^ (0x9e3779b97f4a7c15ULL * static_cast<std::uint64_t>(i)));
    const double step = (candidate - center).norm();
    if (step <= cfg.epsilon) return finish(Termination::StepTolerance);
    if (remaining() < 1) return finish(Termination::EvalBudget);

    progress(delta, incumbent);
    const EvalOutcome out = problem.evaluate(candidate);
    const double inf = std::numeric_limits<double>::infinity();
    const double true_new = out.ok() ? problem.objective(*out.response, candidate) : inf;
    const double model_new = model_objective(candidate);
    double rho = gain_ratio(true_new, incumbent, model_new, model_center);
    if (std::isnan(rho)) rho = -1.0;

    IterationRecord rec;
    rec.i = i;
    rec.u = candidate;
    rec.delta = delta;
    rec.rho = rho;
    rec.accepted = rho > cfg.rho_accept;
    rec.objective = true_new;
    rec.predicted = model_new;
    rec.alpha = problem.mode();

    delta = update_radius(delta, rho, cfg);

    if (rec.accepted) {
      ++res.accepted;
      center = candidate;
      center_response = *out.response;
      problem.accept(center_response, center, problem.evaluations());
      res.accepted_points.push_back({center, center_response});
      incumbent = problem.objective(center_response, center);
      bool rebuilt = false;
      if (remaining() >= static_cast<std::size_t>(D)) {
        progress(delta, incumbent);
        try {
          model = LinearSurrogate{center, center_response, fd_jacobian(problem, center, center_response, cfg.fd_step)};
          ++res.jacobian_builds;
          rebuilt = true;
        } catch (const EvaluationError&) {
          // The neighbourhood of this point cannot be linearized; fall back to
          // the previous centre and treat the step as rejected.
          res.accepted_points.pop_back();
          center = model.center_u;
          center_response = model.center_response;
          incumbent = problem.objective(center_response, center);
          rec.accepted = false;
          --res.accepted;
          ++res.rejected;
          delta = std::min(delta, rec.delta / cfg.shrink_divisor);
          rebuilt = true;
        }
      }
      rec.evals_total = problem.evaluations();
      rec.evals_used = problem.evaluations() - evals_before;
      res.history.push_back(rec);
      if (observer.on_iteration) observer.on_iteration(rec);
      if (!rebuilt) return finish(Termination::EvalBudget);
    } else {
      ++res.rejected;
      rec.evals_total = problem.evaluations();
      rec.evals_used = problem.evaluations() - evals_before;
      res.history.push_back(rec);
      if (observer.on_iteration) observer.on_iteration(rec);
    }
    progress(delta, incumbent);
    if (delta <= cfg.epsilon) return finish(Termination::RadiusTolerance);
  }
}

// ---------------------------------------------------------------------------

/// Problem over the unit box with a fixed scalarization of the response and
/// no mode switching; convenient for synthetic responses.
class ScalarizedProblem {
 public:
  using Scalarizer = std::function<double(const Response&, const Vector&)>;

  ScalarizedProblem(EvaluationService& service, Eigen::Index dimension, Scalarizer f)
      : service_(&service), dim_(dimension), f_(std::move(f)) {}

  Eigen::Index dimension() const { return dim_; }
  EvalOutcome evaluate(const Vector& u) { return service_->evaluate(u); }
  std::vector<EvalOutcome> evaluate_batch(const std::vector<Vector>& us) { return service_->evaluate_batch(us); }
  double objective(const Response& r, const Vector& u) const { return f_(r, u); }
  bool accept(const Response&, const Vector&, std::size_t) { return false; }
  std::size_t evaluations() const { return service_->total(); }
  int mode() const { return 0; }

 private:
  EvaluationService* service_;
  Eigen::Index dim_;
  Scalarizer f_;
};

/// (1 + D) + sum_accepted (D + 1) + sum_rejected 1, the expected cost of a
/// run that rebuilt its model after every accepted step.
inline std::size_t expected_cost(const OptResult& r) {
  const auto D = static_cast<std::size_t>(r.dimension);
  return (1 + D) + r.accepted * (D + 1) + r.rejected;
}

}  // namespace strata
