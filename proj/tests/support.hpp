#pragma once

// Hand-rolled generators and filesystem helpers shared by the test suites.

#include <atomic>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>
#include <string>
#include <unistd.h>

#include "strata/design_space.hpp"

namespace strata::prop {

class Gen {
 public:
  explicit Gen(std::uint64_t seed) : rng_(seed) {}

  double uniform(double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(rng_); }
  int integer(int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng_); }

  Vector unit(Eigen::Index n) {
    Vector u(n);
    for (Eigen::Index i = 0; i < n; ++i) u(i) = uniform(0.0, 1.0);
    return u;
  }

  Vector box(const Vector& lo, const Vector& hi) {
    Vector v(lo.size());
    for (Eigen::Index i = 0; i < lo.size(); ++i) v(i) = uniform(lo(i), hi(i));
    return v;
  }

  /// Uniform in-bounds design with Y > l_f (the only in-bounds way to be
  /// infeasible), obtained by rejection.
  DesignVector design(int L, double margin = 1e-3) {
    const DesignBounds b = default_bounds(L);
    for (;;) {
      Vector v = box(b.lower, b.upper);
      if (v(kArmLength) + v(kArmWidth) > v(kFeedLength) + margin) return DesignVector(std::move(v), L);
    }
  }

  /// Knot vector sampled from a low-frequency periodic function, clipped to
  /// [lo, hi].
  Vector smooth_knots(int L, double lo, double hi) {
    const double a = uniform(0.0, 0.15), ph = uniform(0.0, 6.283185307179586);
    const double mid = 0.5 * (lo + hi);
    Vector k(L);
    for (int l = 0; l < L; ++l) {
      k(l) = std::clamp(mid + a * std::sin(6.283185307179586 * l / L + ph), lo, hi);
    }
    return k;
  }

  std::mt19937_64& engine() { return rng_; }

 private:
  std::mt19937_64 rng_;
};

/// Fresh directory under the system temp dir, removed on destruction.
class TempDir {
 public:
  explicit TempDir(const std::string& tag) {
    static std::atomic<int> counter{0};
    path_ = std::filesystem::temp_directory_path() /
            ("strata_" + tag + "_" + std::to_string(::getpid()) + "_" + std::to_string(counter++));
    std::filesystem::remove_all(path_);
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  const std::filesystem::path& path() const { return path_; }
  std::string str() const { return path_.string(); }

 private:
  std::filesystem::path path_;
};

inline std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace strata::prop
