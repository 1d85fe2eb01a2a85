#pragma once

// Run configuration: a single JSON document whose every field is optional
// and defaults to the reference setup. Unknown fields and type mismatches
// are reported with their dotted path; syntax errors with line and column.

#include <cstdint>
#include <fstream>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "strata/design_space.hpp"
#include "strata/errors.hpp"
#include "strata/evaluation.hpp"
#include "strata/objective.hpp"
#include "strata/stratified.hpp"
#include "strata/trust_region.hpp"

namespace strata {

/// Malformed or schema-violating configuration input.
class ConfigError : public Error {
 public:
  using Error::Error;
};

inline DesignVector reference_initial_design() { return DesignVector({10, 6, 16, 0.8, 1, 0, 0.35, 0.6}, 1); }

struct RunConfig {
  MetaSchedule schedule{{1, 4, 8}};
  DesignVector x0 = reference_initial_design();
  FrequencyGrid grid;
  ObjectiveConfig objective;
  TrConfig tr;
  MockParams mock;
  std::uint64_t seed = 0;
  std::string output_dir;
  std::size_t geometry_samples = kDefaultOutlineSamples;
  int initial_alpha = 0;

  StratifiedConfig stratified() const {
    StratifiedConfig s;
    s.schedule = schedule;
    s.objective = objective;
    s.tr = tr;
    s.tr.seed = seed;
    s.initial_alpha = initial_alpha;
    return s;
  }
};

namespace detail {

using nlohmann::json;

class Reader {
 public:
  Reader(const json& j, std::string path) : j_(j), path_(std::move(path)) {
    if (!j_.is_object()) fail(path_.empty() ? "top level" : path_, "expected an object");
  }

  template <class T>
  void number(const char* key, T& out) {
    seen_.insert(key);
    if (!j_.contains(key)) return;
    const json& v = j_.at(key);
    if constexpr (std::is_integral_v<T>) {
      if (!v.is_number_integer()) fail(field(key), "expected an integer");
      if constexpr (std::is_unsigned_v<T>) {
        if (v.is_number_integer() && v.get<long long>() < 0) fail(field(key), "expected a non-negative integer");
      }
      out = v.get<T>();
    } else {
      if (!v.is_number()) fail(field(key), "expected a number");
      out = v.get<T>();
    }
  }

  void string(const char* key, std::string& out) {
    seen_.insert(key);
    if (!j_.contains(key)) return;
    if (!j_.at(key).is_string()) fail(field(key), "expected a string");
    out = j_.at(key).get<std::string>();
  }

  std::optional<std::vector<double>> numbers(const char* key) {
    seen_.insert(key);
    if (!j_.contains(key)) return std::nullopt;
    const json& v = j_.at(key);
    if (!v.is_array()) fail(field(key), "expected an array of numbers");
    std::vector<double> out;
    for (std::size_t i = 0; i < v.size(); ++i) {
      if (!v[i].is_number()) fail(field(key) + "[" + std::to_string(i) + "]", "expected a number");
      out.push_back(v[i].get<double>());
    }
    return out;
  }

  std::optional<std::vector<int>> integers(const char* key) {
    seen_.insert(key);
    if (!j_.contains(key)) return std::nullopt;
    const json& v = j_.at(key);
    if (!v.is_array()) fail(field(key), "expected an array of integers");
    std::vector<int> out;
    for (std::size_t i = 0; i < v.size(); ++i) {
      if (!v[i].is_number_integer()) fail(field(key) + "[" + std::to_string(i) + "]", "expected an integer");
      out.push_back(v[i].get<int>());
    }
    return out;
  }

  std::optional<Reader> object(const char* key) {
    seen_.insert(key);
    if (!j_.contains(key)) return std::nullopt;
    return Reader(j_.at(key), field(key));
  }

  void finish() const {
    for (auto it = j_.begin(); it != j_.end(); ++it) {
      if (!seen_.count(it.key())) fail(field(it.key().c_str()), "unknown field");
    }
  }

  std::string field(const std::string& key) const { return path_.empty() ? key : path_ + "." + key; }

  [[noreturn]] static void fail(const std::string& where, const std::string& what) {
    throw ConfigError("config field '" + where + "': " + what);
  }

 private:
  const json& j_;
  std::string path_;
  std::set<std::string> seen_;
};

inline std::string line_col(const std::string& text, std::size_t byte) {
  std::size_t line = 1, col = 1;
  for (std::size_t i = 0; i < byte && i < text.size(); ++i) {
    if (text[i] == '\n') {
      ++line;
      col = 1;
    } else {
      ++col;
    }
  }
  return "line " + std::to_string(line) + ", column " + std::to_string(col);
}

template <class F>
void checked(const std::string& where, F&& f) {
  try {
    f();
  } catch (const ArgumentError& e) {
    Reader::fail(where, e.what());
  }
}

}  // namespace detail

inline const char* to_string(FootprintConvention c) {
  return c == FootprintConvention::BoundingBox ? "bounding_box" : "paper_sy";
}

/// Parse and validate a configuration document. The initial design is only
/// checked structurally here; bounds and geometry are checked by the caller.
inline RunConfig parse_config(const std::string& text) {
  using nlohmann::json;
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError("config is not valid JSON at " + detail::line_col(text, e.byte > 0 ? e.byte - 1 : 0) + ": " +
                      e.what());
  }

  RunConfig c;
  detail::Reader top(j, "");
  if (auto s = top.integers("schedule")) c.schedule.knot_counts = *s;
  detail::checked("schedule", [&] { c.schedule.validate(); });

  if (auto x = top.numbers("x0")) {
    const int L = c.schedule.knot_counts.front();
    if (static_cast<int>(x->size()) != design_length(L)) {
      detail::Reader::fail("x0", "expected " + std::to_string(design_length(L)) + " entries (2L+6 with L=" +
                                     std::to_string(L) + " from schedule[0]), got " + std::to_string(x->size()));
    }
    c.x0 = DesignVector(Eigen::Map<const Vector>(x->data(), static_cast<Eigen::Index>(x->size())), L);
  } else if (c.schedule.knot_counts.front() != 1) {
    detail::Reader::fail("x0", "required when schedule[0] != 1");
  }

  if (auto g = top.object("grid")) {
    g->number("f_lo", c.grid.f_lo);
    g->number("f_hi", c.grid.f_hi);
    g->number("n", c.grid.n);
    g->finish();
  }
  detail::checked("grid", [&] { c.grid.validate(); });

  if (auto o = top.object("objective")) {
    o->number("S1", c.objective.S1);
    o->number("S2", c.objective.S2);
    o->number("gamma1", c.objective.gamma1);
    o->number("gamma2", c.objective.gamma2);
    o->number("band_lo", c.objective.band_lo);
    o->number("band_hi", c.objective.band_hi);
    std::string conv = to_string(c.objective.footprint);
    o->string("footprint_convention", conv);
    if (conv == "bounding_box") {
      c.objective.footprint = FootprintConvention::BoundingBox;
    } else if (conv == "paper_sy") {
      c.objective.footprint = FootprintConvention::RadiatorHeight;
    } else {
      detail::Reader::fail("objective.footprint_convention", "expected \"bounding_box\" or \"paper_sy\"");
    }
    o->finish();
  }
  detail::checked("objective", [&] { c.objective.validate(); });

  if (auto t = top.object("tr")) {
    t->number("delta0", c.tr.delta0);
    t->number("epsilon", c.tr.epsilon);
    t->number("rho_accept", c.tr.rho_accept);
    t->number("rho_expand", c.tr.rho_expand);
    t->number("expand_factor", c.tr.expand_factor);
    t->number("shrink_divisor", c.tr.shrink_divisor);
    t->number("fd_step", c.tr.fd_step);
    t->number("max_true_evals", c.tr.max_true_evals);
    t->number("subproblem_budget", c.tr.subproblem_budget);
    t->finish();
  }
  detail::checked("tr", [&] { c.tr.validate(); });

  if (auto m = top.object("mock")) {
    m->number("d0", c.mock.d0);
    m->number("g_star", c.mock.g_star);
    m->number("g0", c.mock.g0);
    m->number("c_half", c.mock.c_half);
    m->number("base0", c.mock.base0);
    m->number("base_gain", c.mock.base_gain);
    m->number("A_ref", c.mock.A_ref);
    m->number("k_max", c.mock.k_max);
    m->number("sigma_base", c.mock.sigma_base);
    m->number("sigma_slope", c.mock.sigma_slope);
    m->finish();
  }
  detail::checked("mock", [&] { c.mock.validate(); });

  top.number("seed", c.seed);
  top.string("output_dir", c.output_dir);
  top.number("geometry_samples", c.geometry_samples);
  top.number("initial_alpha", c.initial_alpha);
  top.finish();
  if (c.geometry_samples < 16) detail::Reader::fail("geometry_samples", "must be >= 16");
  if (c.initial_alpha < 0 || c.initial_alpha > 1) detail::Reader::fail("initial_alpha", "must be 0 or 1");
  return c;
}

inline RunConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config file '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

inline nlohmann::json to_json(const RunConfig& c) {
  using nlohmann::json;
  return {
      {"schedule", c.schedule.knot_counts},
      {"x0", std::vector<double>(c.x0.values().data(), c.x0.values().data() + c.x0.size())},
      {"grid", {{"f_lo", c.grid.f_lo}, {"f_hi", c.grid.f_hi}, {"n", c.grid.n}}},
      {"objective",
       {{"S1", c.objective.S1},
        {"S2", c.objective.S2},
        {"gamma1", c.objective.gamma1},
        {"gamma2", c.objective.gamma2},
        {"band_lo", c.objective.band_lo},
        {"band_hi", c.objective.band_hi},
        {"footprint_convention", to_string(c.objective.footprint)}}},
      {"tr",
       {{"delta0", c.tr.delta0},
        {"epsilon", c.tr.epsilon},
        {"rho_accept", c.tr.rho_accept},
        {"rho_expand", c.tr.rho_expand},
        {"expand_factor", c.tr.expand_factor},
        {"shrink_divisor", c.tr.shrink_divisor},
        {"fd_step", c.tr.fd_step},
        {"max_true_evals", c.tr.max_true_evals},
        {"subproblem_budget", c.tr.subproblem_budget}}},
      {"mock",
       {{"d0", c.mock.d0},
        {"g_star", c.mock.g_star},
        {"g0", c.mock.g0},
        {"c_half", c.mock.c_half},
        {"base0", c.mock.base0},
        {"base_gain", c.mock.base_gain},
        {"A_ref", c.mock.A_ref},
        {"k_max", c.mock.k_max},
        {"sigma_base", c.mock.sigma_base},
        {"sigma_slope", c.mock.sigma_slope}}},
      {"seed", c.seed},
      {"output_dir", c.output_dir},
      {"geometry_samples", c.geometry_samples},
      {"initial_alpha", c.initial_alpha},
  };
}

}  // namespace strata
