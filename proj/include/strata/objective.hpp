#pragma once

// Composite size/performance objective with a three-state mode selector.
//
//   alpha = 0 : U1                                   (reach the reflection spec)
//   alpha = 1 : A + gamma1 * max(U1 / |S1|, 0)         (shrink, penalize violation)
//   alpha = 2 : max(S) + gamma2 * max((A - A1)/A1, 0)  (recover reflection, penalize growth)
//
// with U1 = max(S) - S1 and max(S) the worst in-band reflection. Transitions:
// 0 -> 1 once U1 < 0, 1 -> 2 once max(S) > S2, 2 -> 1 once max(S) < S1; A1
// is recorded on entering 1 from 0 and on entering 2.

#include <cmath>
#include <cstddef>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "strata/design_space.hpp"
#include "strata/errors.hpp"
#include "strata/evaluation.hpp"

namespace strata {

struct ObjectiveConfig {
  double S1 = -10.0;  // dB
  double S2 = -9.5;   // dB
  double gamma1 = 1000.0;
  double gamma2 = 500.0;
  FootprintConvention footprint = FootprintConvention::BoundingBox;
  double band_lo = 3.1;   // GHz
  double band_hi = 10.6;  // GHz

  void validate() const {
    if (!(S2 > S1)) throw ArgumentError("objective needs S2 > S1");
    if (!(gamma1 > 0) || !(gamma2 > 0)) throw ArgumentError("objective needs positive gamma1 and gamma2");
    if (!(band_lo < band_hi)) throw ArgumentError("objective band needs band_lo < band_hi");
  }
};

struct ModeTransition {
  std::size_t eval_index = 0;
  int from = 0;
  int to = 0;
  std::optional<double> A1;
};

struct ObjectiveState {
  int alpha = 0;
  std::optional<double> A1;
  std::vector<ModeTransition> transition_log;

  void validate() const {
    if (alpha < 0 || alpha > 2) throw StateError("objective mode must be 0, 1 or 2");
    if (alpha != 0 && !A1) throw StateError("objective mode " + std::to_string(alpha) + " requires a recorded A1");
  }
};

/// Worst (largest) response value over the grid points inside [lo, hi].
/// Responses without a grid are treated as entirely in band.
inline double max_in_band(const Response& r, double lo = 3.1, double hi = 10.6) {
  if (!r.grid) {
    if (r.values.size() == 0) throw ArgumentError("empty response");
    return r.values.maxCoeff();
  }
  constexpr double slack = 1e-9;
  double worst = -std::numeric_limits<double>::infinity();
  bool any = false;
  for (int i = 0; i < r.grid->n; ++i) {
    const double f = (*r.grid)[i];
    if (f >= lo - slack && f <= hi + slack) {
      worst = std::max(worst, r.values(i));
      any = true;
    }
  }
  if (!any) throw ArgumentError("no grid points inside the band");
  return worst;
}

inline double max_in_band(const Response& r, const ObjectiveConfig& cfg) {
  return max_in_band(r, cfg.band_lo, cfg.band_hi);
}

inline double u1(double max_db, const ObjectiveConfig& cfg) { return max_db - cfg.S1; }

inline double u1(const Response& r, const ObjectiveConfig& cfg) { return u1(max_in_band(r, cfg), cfg); }

/// Value of the objective for a given worst in-band reflection and footprint.
/// Pure; does not touch the state.
inline double composite_objective(double max_db, double area, const ObjectiveState& st, const ObjectiveConfig& cfg) {
  switch (st.alpha) {
    case 0:
      return u1(max_db, cfg);
    case 1:
      if (!st.A1) throw StateError("mode 1 requires a recorded A1");
      // Normalized by |S1| so that the penalty is active on violation.
      return area + cfg.gamma1 * std::max(u1(max_db, cfg) / std::abs(cfg.S1), 0.0);
    case 2:
      if (!st.A1) throw StateError("mode 2 requires a recorded A1");
      return max_db + cfg.gamma2 * std::max((area - *st.A1) / *st.A1, 0.0);
    default:
      throw StateError("objective mode must be 0, 1 or 2");
  }
}

inline double composite_objective(const Response& r, double area, const ObjectiveState& st,
                                  const ObjectiveConfig& cfg) {
  return composite_objective(max_in_band(r, cfg), area, st, cfg);
}

/// Advance the mode selector after an accepted iterate.
inline ObjectiveState update_mode(ObjectiveState st, double max_db, double area, const ObjectiveConfig& cfg,
                                  std::size_t eval_index = 0) {
  const int from = st.alpha;
  if (st.alpha == 0 && u1(max_db, cfg) < 0) {
    st.alpha = 1;
    st.A1 = area;
  } else if (st.alpha == 1 && max_db > cfg.S2) {
    st.alpha = 2;
    st.A1 = area;
  } else if (st.alpha == 2 && max_db < cfg.S1) {
    st.alpha = 1;
  }
  if (st.alpha != from) st.transition_log.push_back({eval_index, from, st.alpha, st.A1});
  return st;
}

inline ObjectiveState update_mode(ObjectiveState st, const Response& r, double area, const ObjectiveConfig& cfg,
                                  std::size_t eval_index = 0) {
  return update_mode(std::move(st), max_in_band(r, cfg), area, cfg, eval_index);
}

/// True if every recorded transition is one of 0->1, 1->2, 2->1.
inline bool transitions_valid(const std::vector<ModeTransition>& log) {
  for (const auto& t : log) {
    const bool ok = (t.from == 0 && t.to == 1) || (t.from == 1 && t.to == 2) || (t.from == 2 && t.to == 1);
    if (!ok) return false;
  }
  return true;
}

}  // namespace strata
