#pragma once

// Expensive-evaluator contract and its bookkeeping.
//
// An evaluator maps a raw design vector to a vector-valued response (here a
// reflection coefficient in dB over a frequency sweep). Calls go through an
// EvaluationService that memoizes responses on a quantized key, counts every
// true evaluation per phase, and can fan batches out to worker threads while
// committing results in call order, so that ledgers and traces do not depend
// on scheduling.

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <map>
#include <mutex>
#include <optional>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "strata/design_space.hpp"
#include "strata/errors.hpp"

namespace strata {

struct FrequencyGrid {
  double f_lo = 3.1;  // GHz
  double f_hi = 10.6;  // GHz
  int n = 101;

  void validate() const {
    if (!(f_lo < f_hi)) throw ArgumentError("frequency grid needs f_lo < f_hi");
    if (n < 2) throw ArgumentError("frequency grid needs at least 2 points");
  }

  double operator[](int i) const { return f_lo + i * (f_hi - f_lo) / (n - 1); }

  Vector frequencies() const {
    Vector f(n);
    for (int i = 0; i < n; ++i) f(i) = (*this)[i];
    return f;
  }

  bool operator==(const FrequencyGrid&) const = default;
};

/// Response values (dB for reflection models). Synthetic test responses
/// carry no frequency grid.
struct Response {
  Vector values;
  std::optional<FrequencyGrid> grid;
};

struct EvaluationLedger {
  std::size_t total = 0;
  std::size_t cache_hits = 0;
  std::size_t failures = 0;  // included in total
  std::map<std::string, std::size_t> per_phase;
};

using ResponseFn = std::function<Response(const Vector& x)>;

struct EvalOutcome {
  std::optional<Response> response;  // empty when the evaluator failed
  bool cached = false;
  std::string error;
  std::size_t eval_index = 0;  // ledger total right after this call

  bool ok() const noexcept { return response.has_value(); }
};

struct TraceRecord {
  std::string phase;
  Vector x;
  bool cached = false;
  bool failed = false;
  std::size_t eval_index = 0;
};

class EvaluationService {
 public:
  struct Options {
    double quantum = 1e-9;
    unsigned threads = 1;
    bool serial = false;  // evaluator is not thread-safe; never call it concurrently
  };

  using Listener = std::function<void(const TraceRecord&, const EvalOutcome&)>;

  explicit EvaluationService(ResponseFn fn) : EvaluationService(std::move(fn), Options{}) {}
  EvaluationService(ResponseFn fn, Options options) : fn_(std::move(fn)), opt_(options) {
    if (!(opt_.quantum > 0)) throw ArgumentError("cache quantum must be positive");
    if (opt_.threads == 0) opt_.threads = 1;
  }

  void set_phase(std::string phase) {
    std::lock_guard lock(mu_);
    phase_ = std::move(phase);
  }

  std::string phase() const {
    std::lock_guard lock(mu_);
    return phase_;
  }

  /// Called once per evaluate call (cached or not), in commit order.
  void set_listener(Listener l) {
    std::lock_guard lock(mu_);
    listener_ = std::move(l);
  }

  EvalOutcome evaluate(const Vector& x) { return evaluate_batch({x}).front(); }

  std::vector<EvalOutcome> evaluate_batch(const std::vector<Vector>& xs) {
    std::vector<Key> keys;
    keys.reserve(xs.size());
    for (const auto& x : xs) keys.push_back(quantize(x));

    // Decide which calls need the evaluator; later duplicates within the
    // batch become cache hits of the first occurrence.
    std::vector<std::size_t> pending;
    {
      std::lock_guard lock(mu_);
      std::map<Key, std::size_t> first;
      for (std::size_t i = 0; i < xs.size(); ++i) {
        if (cache_.count(keys[i])) continue;
        if (first.emplace(keys[i], i).second) pending.push_back(i);
      }
    }

    std::vector<std::optional<Response>> computed(xs.size());
    std::vector<std::string> errors(xs.size());
    auto work = [&](std::size_t slot) {
      const std::size_t i = pending[slot];
      try {
        computed[i] = fn_(xs[i]);
      } catch (const std::exception& e) {
        errors[i] = e.what();
      }
    };
    const unsigned workers =
        opt_.serial ? 1u : std::min<unsigned>(opt_.threads, static_cast<unsigned>(pending.size()));
    if (workers <= 1) {
      for (std::size_t s = 0; s < pending.size(); ++s) work(s);
    } else {
      std::atomic<std::size_t> next{0};
      std::vector<std::thread> pool;
      for (unsigned t = 0; t < workers; ++t) {
        pool.emplace_back([&] {
          for (std::size_t s; (s = next.fetch_add(1)) < pending.size();) work(s);
        });
      }
      for (auto& th : pool) th.join();
    }

    std::vector<EvalOutcome> out(xs.size());
    std::lock_guard lock(mu_);
    std::vector<bool> is_pending(xs.size(), false);
    for (auto i : pending) is_pending[i] = true;
    for (std::size_t i = 0; i < xs.size(); ++i) {
      EvalOutcome& o = out[i];
      auto hit = cache_.find(keys[i]);
      if (hit != cache_.end()) {
        o.response = hit->second;
        o.cached = true;
        ++ledger_.cache_hits;
      } else if (is_pending[i]) {
        ++ledger_.total;
        ++ledger_.per_phase[phase_];
        if (computed[i]) {
          o.response = std::move(computed[i]);
          cache_.emplace(keys[i], *o.response);
        } else {
          o.error = errors[i].empty() ? "evaluation failed" : errors[i];
          ++ledger_.failures;
        }
      } else {
        // Duplicate of a failed call earlier in this batch.
        o.error = "evaluation failed";
        ++ledger_.cache_hits;
        o.cached = true;
      }
      o.eval_index = ledger_.total;
      TraceRecord rec{phase_, xs[i], o.cached, !o.ok(), o.eval_index};
      if (listener_) listener_(rec, o);
    }
    return out;
  }

  EvaluationLedger ledger() const {
    std::lock_guard lock(mu_);
    return ledger_;
  }

  std::size_t total() const {
    std::lock_guard lock(mu_);
    return ledger_.total;
  }

 private:
  using Key = std::vector<std::int64_t>;

  Key quantize(const Vector& x) const {
    Key k(static_cast<std::size_t>(x.size()) + 1);
    k[0] = x.size();
    for (Eigen::Index i = 0; i < x.size(); ++i) {
      k[static_cast<std::size_t>(i) + 1] = std::llround(x(i) / opt_.quantum);
    }
    return k;
  }

  ResponseFn fn_;
  Options opt_;
  mutable std::mutex mu_;
  std::map<Key, Response> cache_;
  EvaluationLedger ledger_;
  std::string phase_ = "default";
  Listener listener_;
};

// ---------------------------------------------------------------------------
// Analytic stand-in for the full-wave antenna simulation.

struct MockParams {
  double d0 = 14.0;          // dB, peak resonance depth
  double g_star = 1.5;       // mm, feed-to-ground gap of strongest coupling
  double g0 = 2.0;           // mm, coupling decay length
  double c_half = 150.0;     // mm*GHz, half-wave resonance constant
  double base0 = -1.5;       // dB
  double base_gain = -10.0;  // dB per A_ref of footprint
  double A_ref = 450.0;      // mm^2
  int k_max = 4;
  double sigma_base = 0.35;   // GHz
  double sigma_slope = 0.15;  // GHz per harmonic

  void validate() const {
    if (!(d0 > 0)) throw ArgumentError("mock d0 must be positive");
    if (!(g0 > 0)) throw ArgumentError("mock g0 must be positive");
    if (!(c_half > 0)) throw ArgumentError("mock c_half must be positive");
    if (!(A_ref > 0)) throw ArgumentError("mock A_ref must be positive");
    if (k_max < 1) throw ArgumentError("mock k_max must be >= 1");
  }
};

/// S11(f) = base - sum_k d_k exp(-(f - f_k)^2 / (2 sigma_k^2)), with harmonics
/// f_k = k c_half / P of the radiator perimeter P, a depth set by the
/// feed-to-ground gap, and a floor that deepens with the bounding footprint.
inline Response mock_reflection(const GeometryFeatures& g, const FrequencyGrid& grid, const MockParams& p) {
  if (!(g.perimeter > 0) || !std::isfinite(g.perimeter)) {
    throw EvaluationError("mock reflection needs a finite positive perimeter");
  }
  const double base = p.base0 + p.base_gain * (g.bounding_area / p.A_ref);
  const double gap = std::max(g.feed_length - g.mean_ground_height, 0.1);
  const double depth = p.d0 * std::exp(-std::abs(gap - p.g_star) / p.g0);
  Response r{Vector(grid.n), grid};
  for (int i = 0; i < grid.n; ++i) {
    const double f = grid[i];
    double s = base;
    for (int k = 1; k <= p.k_max; ++k) {
      const double fk = k * p.c_half / g.perimeter;
      const double sk = p.sigma_base + p.sigma_slope * k;
      s -= depth * std::exp(-(f - fk) * (f - fk) / (2 * sk * sk));
    }
    r.values(i) = s;
  }
  return r;
}

/// Evaluator over raw design vectors (length 2L+6) backed by the mock model.
inline ResponseFn mock_simulator(FrequencyGrid grid, MockParams params,
                                 std::size_t samples = kDefaultOutlineSamples) {
  grid.validate();
  params.validate();
  return [grid, params, samples](const Vector& x) {
    if (x.size() < design_length(1) || (x.size() - kCoreSize) % 2 != 0) {
      throw StructuralError("mock simulator got a vector of length " + std::to_string(x.size()));
    }
    const auto L = static_cast<int>((x.size() - kCoreSize) / 2);
    const GeometryModel g = build_geometry(DesignVector(x, L), samples);
    return mock_reflection(g.features, grid, params);
  };
}

// ---------------------------------------------------------------------------
// Synthetic responses with known structure, used to check the optimizer.

/// u -> A u + b.
inline ResponseFn linear_test_response(Matrix A, Vector b) {
  if (A.rows() != b.size()) throw ArgumentError("linear test response: rows(A) != size(b)");
  return [A = std::move(A), b = std::move(b)](const Vector& u) {
    if (u.size() != A.cols()) throw ArgumentError("linear test response: input has wrong dimension");
    return Response{A * u + b, std::nullopt};
  };
}

/// u -> u - c.
inline ResponseFn quadratic_test_response(Vector c) {
  if (c.size() < 1) throw ArgumentError("quadratic test response needs D >= 1");
  return [c = std::move(c)](const Vector& u) {
    if (u.size() != c.size()) throw ArgumentError("quadratic test response: input has wrong dimension");
    return Response{u - c, std::nullopt};
  };
}

}  // namespace strata
