#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "strata/commands.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Stratified trust-region optimization of spline-parameterized monopole antennas"};
  app.require_subcommand(1);

  std::string config, out;
  auto* run = app.add_subcommand("run", "optimize with the stratified schedule from a config file");
  run->add_option("--config", config, "run configuration (JSON)")->required();
  run->add_option("--out", out, "output directory (overrides output_dir)");

  auto* bench = app.add_subcommand("benchmark", "compare the stratified run with a direct trust-region run");
  bench->add_option("--config", config, "run configuration (JSON)")->required();
  bench->add_option("--out", out, "output directory (overrides output_dir)");

  std::string design, svg;
  int knots = 1;
  std::size_t samples = strata::kDefaultOutlineSamples;
  auto* render = app.add_subcommand("render", "draw a design vector as SVG plus polygon JSON");
  render->add_option("--design", design, "file (JSON array or text) or inline comma-separated numbers")->required();
  render->add_option("--knots", knots, "number of spline knots L")->required();
  render->add_option("--out", svg, "output .svg path")->required();
  render->add_option("--samples", samples, "outline samples");

  std::string dir;
  auto* report = app.add_subcommand("report", "summarize a finished run directory");
  report->add_option("--dir", dir, "run directory")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : strata::kExitInput;
  }

  if (*run) return strata::cmd_run(config, out);
  if (*bench) return strata::cmd_benchmark(config, out);
  if (*render) return strata::cmd_render(design, knots, svg, std::cout, std::cerr, samples);
  return strata::cmd_report(dir);
}
