#pragma once

// Cubic interpolating splines used for the knot-parameterized outlines.
//
// Both splines are stored in second-derivative form: on the interval
// [x_i, x_{i+1}] of width h the interpolant is
//
//   s(t) = M_i (x_{i+1}-t)^3/(6h) + M_{i+1} (t-x_i)^3/(6h)
//        + (y_i - M_i h^2/6) (x_{i+1}-t)/h + (y_{i+1} - M_{i+1} h^2/6) (t-x_i)/h

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "strata/errors.hpp"

namespace strata {

namespace detail {

inline double cubic_segment(double t, double x0, double h, double y0, double y1, double m0,
                            double m1) {
  const double a = (x0 + h - t) / h;
  const double b = (t - x0) / h;
  return a * y0 + b * y1 + ((a * a * a - a) * m0 + (b * b * b - b) * m1) * (h * h) / 6.0;
}

}  // namespace detail

/// Natural cubic spline (zero curvature at both ends) through points with
/// strictly increasing abscissae. One point gives a constant, two a line.
class NaturalCubicSpline {
 public:
  NaturalCubicSpline(std::span<const double> xs, std::span<const double> ys)
      : x_(xs.begin(), xs.end()), y_(ys.begin(), ys.end()), m_(xs.size(), 0.0) {
    if (x_.empty() || x_.size() != y_.size()) {
      throw ArgumentError("natural spline needs matching, non-empty abscissae and ordinates");
    }
    for (std::size_t i = 1; i < x_.size(); ++i) {
      if (!(x_[i] > x_[i - 1])) throw ArgumentError("spline abscissae must be strictly increasing");
    }
    const std::size_t n = x_.size();
    if (n < 3) return;

    // Thomas algorithm on the interior unknowns M_1..M_{n-2}.
    const std::size_t k = n - 2;
    std::vector<double> diag(k), upper(k), rhs(k);
    for (std::size_t j = 0; j < k; ++j) {
      const std::size_t i = j + 1;
      const double h0 = x_[i] - x_[i - 1];
      const double h1 = x_[i + 1] - x_[i];
      diag[j] = 2.0 * (h0 + h1);
      upper[j] = h1;
      rhs[j] = 6.0 * ((y_[i + 1] - y_[i]) / h1 - (y_[i] - y_[i - 1]) / h0);
    }
    for (std::size_t j = 1; j < k; ++j) {
      const double lower = x_[j + 1] - x_[j];
      const double w = lower / diag[j - 1];
      diag[j] -= w * upper[j - 1];
      rhs[j] -= w * rhs[j - 1];
    }
    m_[k] = rhs[k - 1] / diag[k - 1];
    for (std::size_t j = k - 1; j-- > 0;) {
      m_[j + 1] = (rhs[j] - upper[j] * m_[j + 2]) / diag[j];
    }
  }

  double operator()(double t) const {
    if (x_.size() == 1) return y_[0];
    const auto it = std::upper_bound(x_.begin(), x_.end(), t);
    std::size_t i = it == x_.begin() ? 0 : static_cast<std::size_t>(it - x_.begin()) - 1;
    i = std::min(i, x_.size() - 2);
    return detail::cubic_segment(t, x_[i], x_[i + 1] - x_[i], y_[i], y_[i + 1], m_[i], m_[i + 1]);
  }

  std::size_t size() const noexcept { return x_.size(); }

 private:
  std::vector<double> x_, y_, m_;
};

/// Periodic cubic spline through values at the equidistant sites
/// t_l = period * l / n, l = 0..n-1 (C2 continuous across the wrap).
class PeriodicCubicSpline {
 public:
  PeriodicCubicSpline(std::span<const double> ys, double period)
      : y_(ys.begin(), ys.end()), m_(ys.size(), 0.0), period_(period) {
    if (y_.empty()) throw ArgumentError("periodic spline needs at least one value");
    if (!(period > 0.0)) throw ArgumentError("periodic spline needs a positive period");
    const std::size_t n = y_.size();
    h_ = period_ / static_cast<double>(n);
    if (n == 1) return;

    // Cyclic system M_{i-1} + 4 M_i + M_{i+1} = 6/h^2 (y_{i+1} - 2 y_i + y_{i-1}).
    // Assembled with += so that n = 2 (both neighbours coincide) is handled.
    Eigen::MatrixXd a = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
    Eigen::VectorXd b(static_cast<Eigen::Index>(n));
    for (std::size_t i = 0; i < n; ++i) {
      const std::size_t prev = (i + n - 1) % n;
      const std::size_t next = (i + 1) % n;
      const auto ii = static_cast<Eigen::Index>(i);
      a(ii, ii) += 4.0;
      a(ii, static_cast<Eigen::Index>(prev)) += 1.0;
      a(ii, static_cast<Eigen::Index>(next)) += 1.0;
      b(ii) = 6.0 / (h_ * h_) * (y_[next] - 2.0 * y_[i] + y_[prev]);
    }
    const Eigen::VectorXd m = a.llt().solve(b);
    for (std::size_t i = 0; i < n; ++i) m_[i] = m(static_cast<Eigen::Index>(i));
  }

  double operator()(double t) const {
    const std::size_t n = y_.size();
    if (n == 1) return y_[0];
    double w = std::fmod(t, period_);
    if (w < 0.0) w += period_;
    auto i = static_cast<std::size_t>(std::floor(w / h_));
    if (i >= n) i = n - 1;
    const std::size_t j = (i + 1) % n;
    return detail::cubic_segment(w, static_cast<double>(i) * h_, h_, y_[i], y_[j], m_[i], m_[j]);
  }

  std::size_t size() const noexcept { return y_.size(); }
  double period() const noexcept { return period_; }

 private:
  std::vector<double> y_, m_;
  double period_;
  double h_ = 0.0;
};

}  // namespace strata
