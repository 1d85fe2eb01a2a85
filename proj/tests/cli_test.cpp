// Drives the command-line tool as a subprocess and inspects its artifacts.

#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <gtest/gtest.h>
#include <json.hpp>

#include "strata/commands.hpp"
#include "support.hpp"

namespace fs = std::filesystem;
using strata::prop::slurp;
using strata::prop::TempDir;

namespace {

int cli(const std::string& args, const std::string& env = "") {
  const std::string cmd = env + (env.empty() ? "" : " ") + "'" + STRATA_CLI + "' " + args + " >/dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

void write(const fs::path& p, const std::string& text) { std::ofstream(p) << text; }

std::string config_path() { return std::string(STRATA_CONFIGS) + "/default.json"; }

std::vector<std::string> lines(const std::string& text) {
  std::vector<std::string> out;
  std::istringstream is(text);
  for (std::string l; std::getline(is, l);) out.push_back(l);
  return out;
}

}  // namespace

TEST(Cli, RunWritesConsistentArtifacts) {
  TempDir dir("run");
  const fs::path out = dir.path() / "r";
  ASSERT_EQ(cli("run --config " + config_path() + " --out " + out.string()), 0);
  for (const char* f : {"run.jsonl", "convergence.csv", "meta.json", "final_geometry.svg", "final_geometry.json"}) {
    EXPECT_TRUE(fs::exists(out / f)) << f;
  }
  EXPECT_FALSE(fs::exists(out / ".strata.lock"));

  const auto meta = nlohmann::json::parse(slurp(out / "meta.json"));
  const auto csv = lines(slurp(out / "convergence.csv"));
  ASSERT_GE(csv.size(), 2u);
  EXPECT_EQ(csv.front(), strata::kConvergenceHeader);
  const std::size_t last_index = std::stoul(csv.back().substr(0, csv.back().find(',')));
  const std::size_t total = meta.at("total_cost").get<std::size_t>();
  EXPECT_EQ(total, last_index);
  EXPECT_EQ(csv.size() - 1, total);
  EXPECT_EQ(meta.at("ledger").at("total").get<std::size_t>(), total);

  std::size_t sum = 0;
  for (const auto& s : meta.at("steps")) sum += s.at("cost").get<std::size_t>();
  EXPECT_EQ(sum, total);

  const auto jl = lines(slurp(out / "run.jsonl"));
  const auto end = nlohmann::json::parse(jl.back());
  EXPECT_EQ(end.at("event"), "run_end");
  EXPECT_EQ(end.at("evals_total").get<std::size_t>(), total);
  std::size_t evals = 0, iterations = 0;
  for (const auto& l : jl) {
    const auto e = nlohmann::json::parse(l);
    const std::string kind = e.at("event");
    if (kind == "eval") {
      ++evals;
      EXPECT_TRUE(e.contains("phase") && e.contains("x") && e.contains("max_db") && e.contains("cached"));
    } else if (kind == "iteration") {
      ++iterations;
      for (const char* k : {"i", "delta", "rho", "accepted", "objective", "alpha", "evals_total"}) {
        EXPECT_TRUE(e.contains(k)) << k;
      }
    } else if (kind == "mode_switch") {
      EXPECT_TRUE(e.contains("from") && e.contains("to") && e.contains("A1") && e.contains("eval_index"));
    }
  }
  EXPECT_GE(evals, total);
  EXPECT_GT(iterations, 0u);

  // The embedded config snapshot re-parses to the same configuration.
  const auto again = strata::parse_config(meta.at("config").dump());
  EXPECT_EQ(strata::to_json(again), meta.at("config"));

  const auto geo = nlohmann::json::parse(slurp(out / "final_geometry.json"));
  EXPECT_EQ(geo.at("units"), "mm");
  EXPECT_TRUE(geo.contains("radiator") && geo.contains("ground") && geo.contains("feed") && geo.contains("extension"));
  EXPECT_EQ(geo.at("x"), meta.at("final").at("x"));
  EXPECT_EQ(geo.at("knots"), meta.at("final").at("L"));
}

TEST(Cli, SingleStepSchedule) {
  TempDir dir("single");
  write(dir.path() / "c.json", R"({"schedule":[1]})");
  ASSERT_EQ(cli("run --config " + (dir.path() / "c.json").string() + " --out " + (dir.path() / "o").string()), 0);
  const auto meta = nlohmann::json::parse(slurp(dir.path() / "o" / "meta.json"));
  EXPECT_EQ(meta.at("steps").size(), 1u);
  EXPECT_EQ(meta.at("stop_reason"), "schedule_end");
}

TEST(Cli, RerunIsByteIdentical) {
  TempDir dir("rerun");
  ASSERT_EQ(cli("run --config " + config_path() + " --out " + (dir.path() / "a").string()), 0);
  ASSERT_EQ(cli("run --config " + config_path() + " --out " + (dir.path() / "b").string(), "STRATA_TR_THREADS=3"), 0);
  EXPECT_EQ(slurp(dir.path() / "a" / "convergence.csv"), slurp(dir.path() / "b" / "convergence.csv"));
  EXPECT_EQ(slurp(dir.path() / "a" / "run.jsonl"), slurp(dir.path() / "b" / "run.jsonl"));
}

TEST(Cli, InputErrorsExitTwo) {
  TempDir dir("bad");
  write(dir.path() / "syntax.json", "{ \"seed\": ");
  write(dir.path() / "schema.json", R"({"tr":{"epsilon":"small"}})");
  EXPECT_EQ(cli("run --config " + (dir.path() / "syntax.json").string() + " --out " + dir.str()), 2);
  EXPECT_EQ(cli("run --config " + (dir.path() / "schema.json").string() + " --out " + dir.str()), 2);
  EXPECT_EQ(cli("run --config " + (dir.path() / "missing.json").string() + " --out " + dir.str()), 2);
  EXPECT_EQ(cli("run --out " + dir.str()), 2);
  EXPECT_EQ(cli("frobnicate"), 2);
  EXPECT_EQ(cli("run --config " + config_path() + " --out " + dir.str(), "STRATA_TR_THREADS=zero"), 2);
}

TEST(Cli, InfeasibleStartExitsThree) {
  TempDir dir("infeasible");
  write(dir.path() / "oob.json", R"({"x0":[50,6,16,0.8,1,0,0.35,0.6]})");
  write(dir.path() / "geom.json", R"({"x0":[10,15,10,0.8,1,0,0.35,0.6]})");
  EXPECT_EQ(cli("run --config " + (dir.path() / "oob.json").string() + " --out " + (dir.path() / "o1").string()), 3);
  EXPECT_EQ(cli("run --config " + (dir.path() / "geom.json").string() + " --out " + (dir.path() / "o2").string()), 3);
}

TEST(Cli, LockedOutputDirectoryIsRefused) {
  TempDir dir("locked");
  write(dir.path() / ".strata.lock", "");
  EXPECT_NE(cli("run --config " + config_path() + " --out " + dir.str()), 0);
  EXPECT_FALSE(fs::exists(dir.path() / "meta.json"));
}

TEST(Cli, RenderInitialDesign) {
  TempDir dir("render");
  const fs::path svg = dir.path() / "x0.svg";
  ASSERT_EQ(cli("render --design 10,6,16,0.8,1,0,0.35,0.6 --knots 1 --out " + svg.string()), 0);
  const std::string text = slurp(svg);
  for (const char* layer : {"radiator", "feed", "ground", "extension"}) {
    EXPECT_NE(text.find("id=\"" + std::string(layer) + "\""), std::string::npos) << layer;
  }
  const auto geo = nlohmann::json::parse(slurp(dir.path() / "x0.json"));
  double cx = 0, cy = 0;
  const auto& pts = geo.at("radiator");
  for (const auto& p : pts) {
    cx += p[0].get<double>();
    cy += p[1].get<double>();
  }
  cx /= pts.size();
  cy /= pts.size();
  for (const auto& p : pts) EXPECT_NEAR(std::hypot(p[0].get<double>() - cx, p[1].get<double>() - cy), 3.0, 1e-9);
  EXPECT_NEAR(geo.at("features").at("perimeter").get<double>(), 6 * M_PI, 2e-3);
}

TEST(Cli, RenderFinalDesignFromFile) {
  TempDir dir("render8");
  write(dir.path() / "x.json",
        "[10.99, 4.87, 15.37, 1, 1.53, -0.31, 0.26, 0.21, 0.25, 0.39, 0.54, 0.44, 0.2, 0.21,"
        " 0.52, 0.49, 0.78, 0.39, 0.89, 0.68, 0.59, 0.6]");
  const fs::path svg = dir.path() / "final.svg";
  ASSERT_EQ(cli("render --design " + (dir.path() / "x.json").string() + " --knots 8 --out " + svg.string()), 0);
  EXPECT_TRUE(fs::exists(svg));
  const auto geo = nlohmann::json::parse(slurp(dir.path() / "final.json"));
  strata::Outline o;
  o.closed = true;
  for (const auto& p : geo.at("radiator")) o.points.push_back({p[0].get<double>(), p[1].get<double>()});
  EXPECT_TRUE(strata::is_simple(o));
}

TEST(Cli, RenderRejections) {
  TempDir dir("render_bad");
  const std::string out = " --out " + (dir.path() / "x.svg").string();
  EXPECT_EQ(cli("render --design 50,6,16,0.8,1,0,0.35,0.6 --knots 1" + out), 3);
  EXPECT_EQ(cli("render --design 10,15,10,0.8,1,0,0.35,0.6 --knots 1" + out), 3);
  EXPECT_EQ(cli("render --design 10,6,16,0.8,1,0,0.35 --knots 1" + out), 2);
  EXPECT_EQ(cli("render --design 10,6,abc --knots 1" + out), 2);
}

TEST(Cli, ReportOnCompletedRun) {
  TempDir dir("report");
  const fs::path out = dir.path() / "r";
  ASSERT_EQ(cli("run --config " + config_path() + " --out " + out.string()), 0);
  ASSERT_EQ(cli("report --dir " + out.string()), 0);
  const std::string md = slurp(out / "report.md");
  const auto meta = nlohmann::json::parse(slurp(out / "meta.json"));
  EXPECT_NE(md.find("## Meta-steps"), std::string::npos);
  EXPECT_NE(md.find("## Mode switches"), std::string::npos);
  EXPECT_NE(md.find("## Convergence"), std::string::npos);
  std::size_t step_rows = 0;
  for (const auto& l : lines(md)) {
    if (l.rfind("| ", 0) == 0 && l.find(" | radius_tol |") != std::string::npos) ++step_rows;
    if (l.rfind("| ", 0) == 0 && l.find(" | step_tol |") != std::string::npos) ++step_rows;
    if (l.rfind("| ", 0) == 0 && l.find(" | eval_budget |") != std::string::npos) ++step_rows;
  }
  EXPECT_EQ(step_rows, meta.at("steps").size());
  const auto refl = lines(slurp(out / "reflection.csv"));
  EXPECT_EQ(refl.front(), "frequency_ghz,s11_db");
  EXPECT_EQ(refl.size(), 102u);
}

TEST(Cli, ReportOnBadDirectories) {
  TempDir dir("report_bad");
  EXPECT_EQ(cli("report --dir " + dir.str()), 2);
  write(dir.path() / "meta.json", "{ not json");
  write(dir.path() / "convergence.csv", std::string(strata::kConvergenceHeader) + "\n");
  write(dir.path() / "run.jsonl", "");
  EXPECT_EQ(cli("report --dir " + dir.str()), 2);
}

TEST(Cli, Benchmark) {
  TempDir dir("bench");
  const fs::path out = dir.path() / "b";
  ASSERT_EQ(cli("benchmark --config " + config_path() + " --out " + out.string()), 0);
  const std::string md = slurp(out / "benchmark.md");
  EXPECT_NE(md.find("| TR with α = 1 |"), std::string::npos);
  EXPECT_NE(md.find("| This work |"), std::string::npos);
  EXPECT_NE(md.find("Total cost [R]"), std::string::npos);
  EXPECT_NE(md.find("10 6 16 0.8 1 0 0.35 0.6"), std::string::npos);
  const auto bj = nlohmann::json::parse(slurp(out / "benchmark.json"));
  const auto meta = nlohmann::json::parse(slurp(out / "meta.json"));
  EXPECT_EQ(bj.at("stratified").at("x0"), bj.at("x0"));
  EXPECT_EQ(bj.at("stratified").at("total_cost"), meta.at("total_cost"));
}
