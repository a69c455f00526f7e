#pragma once

// Experiment configuration files (JSON, schema 1).

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "starreg/error.hpp"
#include "starreg/measures.hpp"

namespace starreg::cli {

class ConfigError : public InvalidArgument {
 public:
  using InvalidArgument::InvalidArgument;
};

enum class Mode { Star0, Dro, Convex, Critic, DroCritic, Sweep, ShiftBench, Convergence };

const char* to_string(Mode mode);

struct DistributionSpec {
  enum class Kind { Atoms, Random, LaplaceL1, Gaussian, UniformDisk, UniformCircle };
  Kind kind = Kind::Atoms;
  std::vector<Atom> atoms;
  int count = 0;                 // Random
  double radius_min = 1.0;       // Random
  double radius_max = 1.0;       // Random
  double scale = 1.0;            // LaplaceL1
  double sx = 1.0, sy = 1.0, rotation = 0.0;  // Gaussian
  double radius = 1.0;           // UniformDisk, UniformCircle

  bool atomic() const { return kind == Kind::Atoms || kind == Kind::Random; }
};

struct SolverSettings {
  std::string engine = "barrier";
  double gap_tol = 1e-4;
  long max_iters = 50000;
  std::uint64_t seed = 0;
};

struct ShiftSpec {
  std::size_t atom = 0;
  std::vector<double> angles;  // rotation of the atom, radians
};

struct ExperimentConfig {
  Mode mode = Mode::Star0;
  std::string name = "result";
  int n = 0;
  int dim = 2;
  DistributionSpec data;
  std::optional<DistributionSpec> data_q;
  CostKind cost = CostKind::Euclid;
  double eps = 0.0;
  double eps_p = 0.0;
  double eps_q = 0.0;
  double eps_ball = 0.1;
  std::vector<double> eps_list;
  std::vector<int> n_list;
  ShiftSpec shift;
  SolverSettings solver;
  nlohmann::json source;  // the validated document the hash is taken over
  std::string hash;
};

// Validates and converts a parsed document. Unknown keys are errors.
ExperimentConfig parse_config(const nlohmann::json& doc);
ExperimentConfig load_config(const std::filesystem::path& path);

// FNV-1a 64 of the compact, key-sorted serialization, as 16 hex digits.
std::string config_hash(const nlohmann::json& doc);

// Atomic data of a spec; Random specs draw from the given seed.
AtomicDistribution materialize(const DistributionSpec& spec, std::uint64_t seed);

}  // namespace starreg::cli
