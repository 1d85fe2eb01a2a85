#pragma once

// Batch commands behind the command-line tool. Each returns a process exit
// code: 0 success, 2 input/schema error, 3 infeasible design, 1 anything else.

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "strata/config.hpp"
#include "strata/design_space.hpp"
#include "strata/evaluation.hpp"
#include "strata/geometry_io.hpp"
#include "strata/objective.hpp"
#include "strata/stratified.hpp"
#include "strata/trust_region.hpp"

namespace strata {

namespace fs = std::filesystem;

enum ExitCode : int { kExitOk = 0, kExitFailure = 1, kExitInput = 2, kExitInfeasible = 3 };

/// Number formatting shared by all text artifacts; fixed so that reruns are
/// byte-identical.
inline std::string format_number(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.12g", v);
  return buf;
}

inline std::string format_fixed(double v, int digits) {
  if (!std::isfinite(v)) return format_number(v);
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", digits, v);
  return buf;
}

inline nlohmann::json vector_json(const Vector& v) {
  return std::vector<double>(v.data(), v.data() + v.size());
}

/// Max concurrent evaluator calls from STRATA_TR_THREADS (default 1).
inline unsigned threads_from_env() {
  const char* s = std::getenv("STRATA_TR_THREADS");
  if (!s || !*s) return 1;
  char* end = nullptr;
  const long n = std::strtol(s, &end, 10);
  if (*end != '\0' || n < 1) throw ConfigError("STRATA_TR_THREADS must be a positive integer, got '" + std::string(s) + "'");
  return static_cast<unsigned>(n);
}

/// Exclusive lock file inside an output directory, removed on destruction.
class DirectoryLock {
 public:
  explicit DirectoryLock(const fs::path& dir) : path_(dir / ".strata.lock") {
    std::FILE* f = std::fopen(path_.c_str(), "wx");
    if (!f) throw ConfigError("output directory '" + dir.string() + "' is in use (lock file " + path_.string() + ")");
    std::fclose(f);
  }
  ~DirectoryLock() {
    std::error_code ec;
    fs::remove(path_, ec);
  }
  DirectoryLock(const DirectoryLock&) = delete;
  DirectoryLock& operator=(const DirectoryLock&) = delete;

 private:
  fs::path path_;
};

// ---------------------------------------------------------------------------
// Run recording

inline constexpr const char* kConvergenceHeader = "eval_index,best_objective,max_in_band_db,footprint_mm2,alpha,delta";

/// Collects run.jsonl events and convergence.csv rows while a run executes.
class RunRecorder {
 public:
  RunRecorder(const ObjectiveConfig& objective, std::string label = "")
      : objective_(objective), label_(std::move(label)) {}

  void attach(EvaluationService& service) {
    service.set_listener([this](const TraceRecord& rec, const EvalOutcome& out) { on_eval(rec, out); });
  }

  MetaObserver observer() {
    MetaObserver obs;
    obs.on_step_begin = [this](std::size_t j, int L) {
      step_ = j;
      knots_ = L;
      incumbent_ = std::numeric_limits<double>::quiet_NaN();
      event({{"event", "step_begin"}, {"step", j}, {"L", L}});
    };
    obs.on_step_end = [this](const MetaStep& s) {
      event({{"event", "step_end"},
             {"step", step_},
             {"L", s.knots},
             {"cost", s.cost},
             {"termination", to_string(s.result.termination_reason)},
             {"evals_total", last_index_}});
    };
    obs.on_mode_switch = [this](const ModeTransition& t) {
      nlohmann::json e{{"event", "mode_switch"}, {"from", t.from}, {"to", t.to}, {"eval_index", t.eval_index}};
      e["A1"] = t.A1 ? nlohmann::json(*t.A1) : nlohmann::json(nullptr);
      event(e);
    };
    obs.tr = tr_observer();
    return obs;
  }

  TrObserver tr_observer() {
    TrObserver tr;
    tr.on_progress = [this](double delta, double incumbent, int alpha) {
      delta_ = delta;
      incumbent_ = incumbent;
      alpha_ = alpha;
    };
    tr.on_iteration = [this](const IterationRecord& r) {
      event({{"event", "iteration"},
             {"step", step_},
             {"L", knots_},
             {"i", r.i},
             {"delta", r.delta},
             {"rho", std::isfinite(r.rho) ? nlohmann::json(r.rho) : nlohmann::json(nullptr)},
             {"accepted", r.accepted},
             {"objective", std::isfinite(r.objective) ? nlohmann::json(r.objective) : nlohmann::json(nullptr)},
             {"alpha", r.alpha},
             {"evals_total", r.evals_total}});
    };
    return tr;
  }

  void finish(std::size_t total) {
    event({{"event", "run_end"}, {"evals_total", total}});
  }

  void write(const fs::path& dir) const {
    std::ofstream jl(dir / "run.jsonl");
    for (const auto& line : lines_) jl << line << '\n';
    std::ofstream csv(dir / "convergence.csv");
    csv << kConvergenceHeader << '\n';
    for (const auto& row : rows_) csv << row << '\n';
  }

  const std::vector<std::string>& csv_rows() const { return rows_; }
  const std::vector<std::string>& jsonl_lines() const { return lines_; }

 private:
  void event(nlohmann::json e) {
    if (!label_.empty()) e["run"] = label_;
    lines_.push_back(e.dump());
  }

  void on_eval(const TraceRecord& rec, const EvalOutcome& out) {
    double max_db = std::numeric_limits<double>::quiet_NaN();
    if (out.ok()) max_db = max_in_band(*out.response, objective_);
    nlohmann::json e{{"event", "eval"},
                     {"phase", rec.phase},
                     {"x", vector_json(rec.x)},
                     {"max_db", std::isfinite(max_db) ? nlohmann::json(max_db) : nlohmann::json(nullptr)},
                     {"cached", rec.cached},
                     {"eval_index", rec.eval_index}};
    if (!out.ok()) e["error"] = out.error;
    event(e);
    if (rec.cached) return;
    last_index_ = rec.eval_index;
    double area = std::numeric_limits<double>::quiet_NaN();
    if (rec.x.size() >= design_length(1) && (rec.x.size() - kCoreSize) % 2 == 0) {
      area = footprint(DesignVector(rec.x, static_cast<int>((rec.x.size() - kCoreSize) / 2)), objective_.footprint);
    }
    rows_.push_back(std::to_string(rec.eval_index) + "," + format_number(incumbent_) + "," + format_number(max_db) +
                    "," + format_number(area) + "," + std::to_string(alpha_) + "," + format_number(delta_));
  }

  ObjectiveConfig objective_;
  std::string label_;
  std::vector<std::string> lines_;
  std::vector<std::string> rows_;
  std::size_t step_ = 0;
  int knots_ = 0;
  double delta_ = 0;
  double incumbent_ = std::numeric_limits<double>::quiet_NaN();
  int alpha_ = 0;
  std::size_t last_index_ = 0;
};

// ---------------------------------------------------------------------------

inline nlohmann::json ledger_json(const EvaluationLedger& l) {
  return {{"total", l.total}, {"cache_hits", l.cache_hits}, {"failures", l.failures}, {"per_phase", l.per_phase}};
}

inline nlohmann::json meta_json(const MetaResult& r, const RunConfig& cfg, const EvaluationLedger& ledger) {
  nlohmann::json steps = nlohmann::json::array();
  for (const auto& s : r.steps) {
    steps.push_back({{"L", s.knots},
                     {"cost", s.cost},
                     {"best_objective", s.result.best_objective},
                     {"comparator", s.comparator},
                     {"max_db", s.max_db},
                     {"footprint", s.footprint},
                     {"termination", to_string(s.result.termination_reason)},
                     {"accepted", s.result.accepted},
                     {"rejected", s.result.rejected},
                     {"x_opt", vector_json(s.x_opt.values())}});
  }
  nlohmann::json transitions = nlohmann::json::array();
  for (const auto& t : r.state.transition_log) {
    transitions.push_back({{"from", t.from}, {"to", t.to}, {"A1", t.A1 ? nlohmann::json(*t.A1) : nlohmann::json(nullptr)},
                           {"eval_index", t.eval_index}});
  }
  const auto& fr = r.final_response;
  nlohmann::json final_json{{"step", r.best_step},
                            {"L", r.final_x.knots()},
                            {"x", vector_json(r.final_x.values())},
                            {"max_db", r.steps[r.best_step].max_db},
                            {"footprint", r.steps[r.best_step].footprint},
                            {"feasible", r.steps[r.best_step].max_db <= cfg.objective.S1},
                            {"response_db", vector_json(fr.values)}};
  if (fr.grid) final_json["grid"] = {{"f_lo", fr.grid->f_lo}, {"f_hi", fr.grid->f_hi}, {"n", fr.grid->n}};
  return {{"steps", steps},
          {"total_cost", r.total_cost},
          {"stop_reason", to_string(r.stop_reason)},
          {"final", final_json},
          {"alpha", r.state.alpha},
          {"A1", r.state.A1 ? nlohmann::json(*r.state.A1) : nlohmann::json(nullptr)},
          {"transitions", transitions},
          {"ledger", ledger_json(ledger)},
          {"config", to_json(cfg)}};
}

inline void write_text(const fs::path& p, const std::string& text) {
  std::ofstream out(p);
  if (!out) throw std::runtime_error("cannot write " + p.string());
  out << text;
}

/// Throws OutOfBounds / InfeasibleGeometry for designs that cannot be built.
inline GeometryModel checked_geometry(const DesignVector& x, std::size_t samples) {
  require_in_bounds(x.values(), default_bounds(x.knots()));
  return build_geometry(x, samples);
}

// The design itself goes into the JSON too so the file can be fed back to render.
inline void write_geometry(const GeometryModel& g, const DesignVector& x, const fs::path& svg_path,
                           const fs::path& json_path) {
  write_text(svg_path, geometry_to_svg(g));
  nlohmann::json j = geometry_to_json(g);
  j["x"] = vector_json(x.values());
  j["knots"] = x.knots();
  write_text(json_path, j.dump(2) + "\n");
}

template <class F>
int guarded(std::ostream& err, F&& body) {
  try {
    return body();
  } catch (const ConfigError& e) {
    err << "error: " << e.what() << '\n';
    return kExitInput;
  } catch (const StructuralError& e) {
    err << "error: " << e.what() << '\n';
    return kExitInput;
  } catch (const OutOfBounds& e) {
    err << "infeasible design: " << e.what() << '\n';
    return kExitInfeasible;
  } catch (const InfeasibleGeometry& e) {
    err << "infeasible design: " << e.what() << '\n';
    return kExitInfeasible;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitFailure;
  }
}

struct RunArtifacts {
  MetaResult result;
  EvaluationLedger ledger;
};

/// Run the stratified optimization of `cfg` and write all run artifacts.
inline RunArtifacts execute_run(const RunConfig& cfg, const fs::path& out_dir, unsigned threads) {
  fs::create_directories(out_dir);
  DirectoryLock lock(out_dir);
  checked_geometry(cfg.x0, cfg.geometry_samples);

  EvaluationService service(mock_simulator(cfg.grid, cfg.mock, cfg.geometry_samples),
                            EvaluationService::Options{1e-9, threads, false});
  RunRecorder recorder(cfg.objective);
  recorder.attach(service);
  RunArtifacts art;
  art.result = stratified_optimize(cfg.stratified(), cfg.x0, service, recorder.observer());
  art.ledger = service.ledger();
  recorder.finish(art.ledger.total);
  recorder.write(out_dir);

  RunConfig snapshot = cfg;
  snapshot.output_dir = out_dir.string();
  write_text(out_dir / "meta.json", meta_json(art.result, snapshot, art.ledger).dump(2) + "\n");
  write_geometry(build_geometry(art.result.final_x, cfg.geometry_samples), art.result.final_x,
                 out_dir / "final_geometry.svg",
                 out_dir / "final_geometry.json");
  return art;
}

inline int cmd_run(const std::string& config_path, const std::string& out_override, std::ostream& log = std::cout,
                   std::ostream& err = std::cerr) {
  return guarded(err, [&] {
    RunConfig cfg = load_config(config_path);
    const std::string out = out_override.empty() ? cfg.output_dir : out_override;
    if (out.empty()) throw ConfigError("no output directory (use --out or output_dir)");
    const auto art = execute_run(cfg, out, threads_from_env());
    const auto& best = art.result.steps[art.result.best_step];
    log << "steps: " << art.result.steps.size() << ", total cost: " << art.result.total_cost
        << ", stop: " << to_string(art.result.stop_reason) << "\n"
        << "final L=" << best.knots << ", max in-band " << format_fixed(best.max_db, 3) << " dB, footprint "
        << format_fixed(best.footprint, 2) << " mm^2\n";
    return kExitOk;
  });
}

// ---------------------------------------------------------------------------
// Benchmark

struct BenchmarkRow {
  std::string method;
  std::vector<std::size_t> step_costs;
  std::size_t total = 0;
  double size = 0;
  double max_db = 0;
};

inline std::string benchmark_markdown(const std::vector<BenchmarkRow>& rows, const RunConfig& cfg,
                                      const DesignVector& lifted_x0) {
  std::size_t columns = 1;
  for (const auto& r : rows) columns = std::max(columns, r.step_costs.size());
  bool violated = false;
  for (const auto& r : rows) violated = violated || r.max_db > cfg.objective.S1;

  auto vec = [](const Vector& v) {
    std::string s = "[";
    for (Eigen::Index i = 0; i < v.size(); ++i) s += (i ? " " : "") + format_number(v(i));
    return s + "]";
  };

  std::ostringstream md;
  md << "# Benchmark: stratified vs. direct trust-region optimization\n\n"
     << "Shared initial design x0 (L=" << cfg.x0.knots() << "): `" << vec(cfg.x0.values()) << "`\n\n"
     << "The direct run starts from the same x0 lifted to L=" << lifted_x0.knots() << ": `" << vec(lifted_x0.values())
     << "`\n\n";
  md << "| Method |";
  for (std::size_t c = 0; c < columns; ++c) md << " Meta-step " << c + 1 << " cost [R] |";
  md << " Total cost [R] | Size [mm^2] | max(S(x)) [dB] |\n|---|";
  for (std::size_t c = 0; c < columns; ++c) md << "---|";
  md << "---|---|---|\n";
  for (const auto& r : rows) {
    md << "| " << r.method << " |";
    for (std::size_t c = 0; c < columns; ++c) {
      md << ' ' << (c < r.step_costs.size() ? std::to_string(r.step_costs[c]) : "–") << " |";
    }
    md << ' ' << r.total << " | " << format_fixed(r.size, 1) << " | " << format_fixed(r.max_db, 2)
       << (r.max_db > cfg.objective.S1 ? "*" : "") << " |\n";
  }
  if (violated) {
    md << "\n\\* The design does not meet the reflection requirement max(S(x)) <= S1 = "
       << format_number(cfg.objective.S1) << " dB.\n";
  }
  return md.str();
}

inline int cmd_benchmark(const std::string& config_path, const std::string& out_override,
                         std::ostream& log = std::cout, std::ostream& err = std::cerr) {
  return guarded(err, [&] {
    RunConfig cfg = load_config(config_path);
    const std::string out = out_override.empty() ? cfg.output_dir : out_override;
    if (out.empty()) throw ConfigError("no output directory (use --out or output_dir)");
    const unsigned threads = threads_from_env();
    const fs::path dir(out);

    const auto strat = execute_run(cfg, dir, threads);

    const int L_full = cfg.schedule.knot_counts.back();
    const DesignVector x_full = L_full > cfg.x0.knots() ? lift_design(cfg.x0, L_full) : cfg.x0;
    EvaluationService direct_service(mock_simulator(cfg.grid, cfg.mock, cfg.geometry_samples),
                                     EvaluationService::Options{1e-9, threads, false});
    RunRecorder recorder(cfg.objective, "direct");
    recorder.attach(direct_service);
    TrConfig tr = cfg.tr;
    tr.seed = cfg.seed;
    const MetaStep direct = direct_optimize(cfg.objective, tr, x_full, direct_service, recorder.tr_observer());
    recorder.finish(direct_service.total());

    std::vector<BenchmarkRow> rows;
    rows.push_back({"TR with α = 1", {direct.cost}, direct.cost, direct.footprint, direct.max_db});
    BenchmarkRow ours{"This work", {}, strat.result.total_cost, 0, 0};
    for (const auto& s : strat.result.steps) ours.step_costs.push_back(s.cost);
    const auto& best = strat.result.steps[strat.result.best_step];
    ours.size = best.footprint;
    ours.max_db = best.max_db;
    rows.push_back(ours);

    write_text(dir / "benchmark.md", benchmark_markdown(rows, cfg, x_full));
    nlohmann::json bj{{"x0", vector_json(cfg.x0.values())},
                      {"direct",
                       {{"x0", vector_json(direct.x_start.values())},
                        {"L", direct.knots},
                        {"cost", direct.cost},
                        {"footprint", direct.footprint},
                        {"max_db", direct.max_db},
                        {"x_opt", vector_json(direct.x_opt.values())}}},
                      {"stratified",
                       {{"x0", vector_json(strat.result.steps.front().x_start.values())},
                        {"step_costs", ours.step_costs},
                        {"total_cost", ours.total},
                        {"footprint", ours.size},
                        {"max_db", ours.max_db}}}};
    write_text(dir / "benchmark.json", bj.dump(2) + "\n");
    std::ofstream(dir / "benchmark_direct.jsonl") << [&] {
      std::string s;
      for (const auto& l : recorder.jsonl_lines()) s += l + "\n";
      return s;
    }();
    log << "direct: cost " << direct.cost << ", " << format_fixed(direct.footprint, 1) << " mm^2, "
        << format_fixed(direct.max_db, 2) << " dB\n"
        << "stratified: cost " << ours.total << ", " << format_fixed(ours.size, 1) << " mm^2, "
        << format_fixed(ours.max_db, 2) << " dB\n";
    return kExitOk;
  });
}

// ---------------------------------------------------------------------------
// Render

/// Numbers from a file (JSON array, or whitespace/comma separated text) or
/// from an inline list such as "10,6,16,0.8,1,0,0.35,0.6".
inline std::vector<double> read_design_numbers(const std::string& spec) {
  std::string text = spec;
  if (fs::exists(spec)) {
    std::ifstream in(spec);
    std::stringstream ss;
    ss << in.rdbuf();
    text = ss.str();
  }
  const auto first = text.find_first_not_of(" \t\r\n");
  if (first != std::string::npos && (text[first] == '[' || text[first] == '{')) {
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
      throw ConfigError(std::string("design is not valid JSON: ") + e.what());
    }
    if (j.is_object()) {
      if (!j.contains("x")) throw ConfigError("design object needs an \"x\" array");
      j = j.at("x");
    }
    if (!j.is_array()) throw ConfigError("design must be an array of numbers");
    std::vector<double> v;
    for (const auto& e : j) {
      if (!e.is_number()) throw ConfigError("design entries must be numbers");
      v.push_back(e.get<double>());
    }
    return v;
  }
  for (char& c : text) {
    if (c == ',' || c == ';') c = ' ';
  }
  std::istringstream is(text);
  std::vector<double> v;
  std::string tok;
  while (is >> tok) {
    try {
      std::size_t pos = 0;
      v.push_back(std::stod(tok, &pos));
      if (pos != tok.size()) throw std::invalid_argument(tok);
    } catch (const std::exception&) {
      throw ConfigError("cannot parse design entry '" + tok + "'");
    }
  }
  if (v.empty()) throw ConfigError("design is empty");
  return v;
}

inline int cmd_render(const std::string& design, int knots, const std::string& out_svg, std::ostream& log = std::cout,
                      std::ostream& err = std::cerr, std::size_t samples = kDefaultOutlineSamples) {
  return guarded(err, [&] {
    const auto v = read_design_numbers(design);
    if (knots < 1) throw ConfigError("--knots must be >= 1");
    if (static_cast<int>(v.size()) != design_length(knots)) {
      throw ConfigError("design has " + std::to_string(v.size()) + " entries, L=" + std::to_string(knots) +
                        " needs " + std::to_string(design_length(knots)));
    }
    const DesignVector x(Eigen::Map<const Vector>(v.data(), static_cast<Eigen::Index>(v.size())), knots);
    const GeometryModel g = checked_geometry(x, samples);
    fs::path svg(out_svg);
    if (svg.has_parent_path()) fs::create_directories(svg.parent_path());
    fs::path json = svg;
    json.replace_extension(".json");
    write_geometry(g, x, svg, json);
    log << "wrote " << svg.string() << " and " << json.string() << " (perimeter " << format_fixed(g.features.perimeter, 3)
        << " mm, footprint " << format_fixed(footprint(g.params), 2) << " mm^2, simple radiator: "
        << (is_simple(g.radiator) ? "yes" : "no") << ")\n";
    return kExitOk;
  });
}

// ---------------------------------------------------------------------------
// Report

inline std::string report_markdown(const nlohmann::json& meta, const std::vector<std::vector<std::string>>& rows,
                                   const std::vector<nlohmann::json>& switches) {
  std::ostringstream md;
  md << "# Run report\n\n";
  md << "Stop reason: " << meta.at("stop_reason").get<std::string>()
     << ", total cost: " << meta.at("total_cost").get<std::size_t>() << " evaluations.\n\n";

  md << "## Meta-steps\n\n| Step | L | Cost [R] | Best objective | max(S(x)) [dB] | Footprint [mm^2] | Termination |\n"
        "|---|---|---|---|---|---|---|\n";
  std::size_t j = 0;
  for (const auto& s : meta.at("steps")) {
    md << "| " << j++ << " | " << s.at("L").get<int>() << " | " << s.at("cost").get<std::size_t>() << " | "
       << format_fixed(s.at("best_objective").get<double>(), 4) << " | " << format_fixed(s.at("max_db").get<double>(), 3)
       << " | " << format_fixed(s.at("footprint").get<double>(), 2) << " | "
       << s.at("termination").get<std::string>() << " |\n";
  }

  const auto& fin = meta.at("final");
  md << "\nFinal design (step " << fin.at("step").get<std::size_t>() << ", L=" << fin.at("L").get<int>()
     << "): max in-band " << format_fixed(fin.at("max_db").get<double>(), 3) << " dB, footprint "
     << format_fixed(fin.at("footprint").get<double>(), 2) << " mm^2"
     << (fin.at("feasible").get<bool>() ? "" : " (violates the reflection threshold)") << ".\n";

  md << "\n## Mode switches\n\n";
  if (switches.empty()) {
    md << "No mode switches.\n";
  } else {
    md << "| Eval index | From | To | A1 [mm^2] |\n|---|---|---|---|\n";
    for (const auto& s : switches) {
      md << "| " << s.at("eval_index").get<std::size_t>() << " | " << s.at("from").get<int>() << " | "
         << s.at("to").get<int>() << " | "
         << (s.at("A1").is_null() ? std::string("–") : format_fixed(s.at("A1").get<double>(), 2)) << " |\n";
    }
  }

  md << "\n## Convergence (per 10 evaluations)\n\n| Evaluations | Best objective | Lowest max(S(x)) [dB] | alpha | delta |\n"
        "|---|---|---|---|---|\n";
  // Bucket b holds eval indices (10b, 10b + 10].
  std::map<std::size_t, std::vector<const std::vector<std::string>*>> buckets;
  for (const auto& r : rows) buckets[(std::stoul(r[0]) - 1) / 10].push_back(&r);
  for (const auto& [b, rs] : buckets) {
    double best = std::numeric_limits<double>::infinity();
    double low_db = std::numeric_limits<double>::infinity();
    for (const auto* r : rs) {
      const double f = std::stod((*r)[1]);
      if (!std::isnan(f)) best = std::min(best, f);
      const double m = std::stod((*r)[2]);
      if (!std::isnan(m)) low_db = std::min(low_db, m);
    }
    const auto& last = *rs.back();
    md << "| " << b * 10 + 1 << "–" << std::stoul(last[0]) << " | " << (std::isinf(best) ? "–" : format_fixed(best, 4))
       << " | " << (std::isinf(low_db) ? "–" : format_fixed(low_db, 3)) << " | " << last[4] << " | "
       << format_fixed(std::stod(last[5]), 4) << " |\n";
  }
  md << "\nThe reflection of the final design is in reflection.csv (frequency_ghz, s11_db).\n";
  return md.str();
}

inline int cmd_report(const std::string& dir_name, std::ostream& log = std::cout, std::ostream& err = std::cerr) {
  const fs::path dir(dir_name);
  try {
    auto read = [&](const char* name) {
      std::ifstream in(dir / name);
      if (!in) throw ConfigError(std::string("missing ") + name + " in " + dir.string());
      std::stringstream ss;
      ss << in.rdbuf();
      return ss.str();
    };
    const nlohmann::json meta = nlohmann::json::parse(read("meta.json"));

    std::vector<std::vector<std::string>> rows;
    {
      std::istringstream csv(read("convergence.csv"));
      std::string line;
      std::getline(csv, line);
      if (line != kConvergenceHeader) throw ConfigError("convergence.csv has an unexpected header");
      while (std::getline(csv, line)) {
        if (line.empty()) continue;
        std::vector<std::string> cells;
        std::stringstream ls(line);
        for (std::string c; std::getline(ls, c, ',');) cells.push_back(c);
        if (cells.size() != 6) throw ConfigError("convergence.csv row has " + std::to_string(cells.size()) + " cells");
        rows.push_back(std::move(cells));
      }
    }

    std::vector<nlohmann::json> switches;
    {
      std::istringstream jl(read("run.jsonl"));
      for (std::string line; std::getline(jl, line);) {
        if (line.empty()) continue;
        auto e = nlohmann::json::parse(line);
        if (e.value("event", "") == "mode_switch") switches.push_back(e);
      }
    }

    const auto& fin = meta.at("final");
    const auto& g = fin.at("grid");
    FrequencyGrid grid{g.at("f_lo").get<double>(), g.at("f_hi").get<double>(), g.at("n").get<int>()};
    grid.validate();
    const auto resp = fin.at("response_db").get<std::vector<double>>();
    if (static_cast<int>(resp.size()) != grid.n) throw ConfigError("final response does not match its grid");
    std::string refl = "frequency_ghz,s11_db\n";
    for (int i = 0; i < grid.n; ++i) refl += format_number(grid[i]) + "," + format_number(resp[static_cast<std::size_t>(i)]) + "\n";

    write_text(dir / "report.md", report_markdown(meta, rows, switches));
    write_text(dir / "reflection.csv", refl);
    log << "wrote " << (dir / "report.md").string() << " and " << (dir / "reflection.csv").string() << '\n';
    return kExitOk;
  } catch (const ConfigError& e) {
    err << "error: " << e.what() << '\n';
    return kExitInput;
  } catch (const nlohmann::json::exception& e) {
    err << "error: corrupt run record: " << e.what() << '\n';
    return kExitInput;
  } catch (const std::invalid_argument& e) {
    err << "error: corrupt run record: " << e.what() << '\n';
    return kExitInput;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitFailure;
  }
}

}  // namespace strata
