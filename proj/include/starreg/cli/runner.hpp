#pragma once

// Dispatches an experiment configuration to the solvers and writes results.

#include <cstdint>
#include <exception>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "json.hpp"
#include "starreg/cli/bundle.hpp"
#include "starreg/cli/config.hpp"
#include "starreg/convexreg.hpp"

namespace starreg::cli {

// Process exit codes.
enum ExitCode : int {
  kExitOk = 0,
  kExitOther = 1,
  kExitConfig = 2,
  kExitNonexistence = 3,
  kExitSolver = 4,
};

int exit_code_for(const std::exception& e);

struct RunOptions {
  std::filesystem::path out_dir = ".";
  std::optional<std::uint64_t> seed;
  std::optional<double> tol;
  std::optional<long> max_iters;
  bool quiet = false;
  bool write_svg = true;
};

struct RunReport {
  std::string config_hash;
  std::vector<ResultBundle> bundles;
  std::vector<std::filesystem::path> files;
  std::vector<std::string> summary;
  double wall_seconds = 0.0;
};

// Folds command-line overrides into the document's solver block, so the hash
// covers them.
nlohmann::json apply_overrides(nlohmann::json doc, const RunOptions& opts);

RunReport run_config(const ExperimentConfig& cfg, const RunOptions& opts);
RunReport run_config_file(const std::filesystem::path& path, const RunOptions& opts);

struct ShiftBenchRow {
  double shift = 0.0;
  double gauge_diff = 0.0;
  double w1 = 0.0;
  double lhs = 0.0;
  double rhs = 0.0;
  bool holds = false;
};

// Rotates one atom of P by each shift and compares the convex regularizers.
std::vector<ShiftBenchRow> shift_bench(const AtomicDistribution& p, std::size_t atom, std::span<const double> shifts,
                                       const SphereGrid& grid, const ConvexOptions& opts = {});

}  // namespace starreg::cli
