#include <cstdio>
#include <exception>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "starreg/cli/bundle.hpp"
#include "starreg/cli/runner.hpp"
#include "starreg/error.hpp"

namespace {

using namespace starreg::cli;

int run_mode(const std::string& config, const RunOptions& opts, std::optional<Mode> expect) {
  if (expect) {
    const ExperimentConfig cfg = load_config(config);
    if (cfg.mode != *expect) {
      throw ConfigError(std::string("this command needs mode ") + to_string(*expect) + ", config has " +
                        to_string(cfg.mode));
    }
  }
  const RunReport report = run_config_file(config, opts);
  if (!opts.quiet) {
    for (const std::string& line : report.summary) std::printf("%s\n", line.c_str());
    std::printf("config %s, %.3f s\n", report.config_hash.c_str(), report.wall_seconds);
  }
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"starreg: optimal and robust star-body regularizers"};
  app.require_subcommand(1);
  app.fallthrough();

  RunOptions opts;
  std::string out_dir = ".";
  std::uint64_t seed = 0;
  double tol = 0.0;
  long max_iters = 0;
  app.add_option("--out-dir", out_dir, "directory for result files");
  auto* seed_opt = app.add_option("--seed", seed, "seed for random data specs");
  auto* tol_opt = app.add_option("--tol", tol, "certificate gap tolerance")->check(CLI::PositiveNumber);
  auto* iters_opt = app.add_option("--max-iters", max_iters, "iteration cap")->check(CLI::PositiveNumber);
  app.add_flag("--quiet", opts.quiet, "suppress the summary");

  std::string config;
  auto* run = app.add_subcommand("run", "solve a config and write CSV, JSON and SVG");
  run->add_option("config", config, "experiment config (JSON)")->required();
  auto* exp = app.add_subcommand("export", "solve a config and write CSV and JSON only");
  exp->add_option("config", config, "experiment config (JSON)")->required();
  auto* sweep = app.add_subcommand("sweep", "run a sweep config");
  sweep->add_option("config", config, "experiment config (JSON)")->required();
  auto* bench = app.add_subcommand("bench", "run a shift-bench config");
  bench->add_option("config", config, "experiment config (JSON)")->required();
  std::string csv, svg;
  auto* render = app.add_subcommand("render", "draw a bundle CSV as SVG");
  render->add_option("bundle", csv, "bundle CSV written by run or export")->required();
  render->add_option("-o,--output", svg, "output SVG (default: next to the CSV)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitConfig;
  }

  opts.out_dir = out_dir;
  if (*seed_opt) opts.seed = seed;
  if (*tol_opt) opts.tol = tol;
  if (*iters_opt) opts.max_iters = max_iters;

  try {
    if (*run) return run_mode(config, opts, std::nullopt);
    if (*exp) {
      opts.write_svg = false;
      return run_mode(config, opts, std::nullopt);
    }
    if (*sweep) return run_mode(config, opts, Mode::Sweep);
    if (*bench) return run_mode(config, opts, Mode::ShiftBench);
    if (*render) {
      const ResultBundle b = read_bundle(csv);
      std::filesystem::path out = svg.empty() ? std::filesystem::path(csv).replace_extension(".svg") : std::filesystem::path(svg);
      render_svg(b, out);
      if (!opts.quiet) std::printf("wrote %s\n", out.string().c_str());
      return kExitOk;
    }
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    if (const auto* f = dynamic_cast<const starreg::SolverFailure*>(&e)) {
      for (const std::string& line : f->log) std::fprintf(stderr, "  %s\n", line.c_str());
      if (!f->best_iterate.empty()) std::fprintf(stderr, "  best gap %.3e\n", f->best_gap);
    }
    return exit_code_for(e);
  }
  return kExitOther;
}
