#include "starreg/cli/config.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <initializer_list>
#include <random>
#include <set>

namespace starreg::cli {

namespace {

using nlohmann::json;

void allow_keys(const json& obj, const std::string& where, std::initializer_list<const char*> keys) {
  if (!obj.is_object()) throw ConfigError(where + " must be an object");
  const std::set<std::string> allowed(keys.begin(), keys.end());
  for (auto it = obj.begin(); it != obj.end(); ++it) {
    if (!allowed.count(it.key())) throw ConfigError("unknown key '" + it.key() + "' in " + where);
  }
}

double number(const json& obj, const char* key, const std::string& where) {
  const json& v = obj.at(key);
  if (!v.is_number()) throw ConfigError(where + "." + key + " must be a number");
  const double x = v.get<double>();
  if (!std::isfinite(x)) throw ConfigError(where + "." + key + " must be finite");
  return x;
}

double number_or(const json& obj, const char* key, double fallback, const std::string& where) {
  return obj.contains(key) ? number(obj, key, where) : fallback;
}

long integer(const json& obj, const char* key, const std::string& where) {
  const json& v = obj.at(key);
  if (!v.is_number_integer()) throw ConfigError(where + "." + key + " must be an integer");
  return v.get<long>();
}

double nonnegative(const json& obj, const char* key) {
  const double x = number(obj, key, "config");
  if (x < 0.0) throw ConfigError(std::string(key) + " must be nonnegative");
  return x;
}

std::vector<double> number_list(const json& v, const std::string& where) {
  if (!v.is_array() || v.empty()) throw ConfigError(where + " must be a nonempty array");
  std::vector<double> out;
  for (const json& e : v) {
    if (!e.is_number() || !std::isfinite(e.get<double>())) throw ConfigError(where + " must hold finite numbers");
    out.push_back(e.get<double>());
  }
  return out;
}

DistributionSpec parse_distribution(const json& obj, const std::string& where) {
  DistributionSpec d;
  if (!obj.is_object()) throw ConfigError(where + " must be an object");
  if (obj.contains("atoms")) {
    allow_keys(obj, where, {"atoms", "normalize"});
    const json& atoms = obj.at("atoms");
    if (!atoms.is_array() || atoms.empty()) throw ConfigError(where + ".atoms must be a nonempty array");
    for (std::size_t i = 0; i < atoms.size(); ++i) {
      const json& a = atoms[i];
      const std::string at = where + ".atoms[" + std::to_string(i) + "]";
      allow_keys(a, at, {"angle", "radius", "point", "mass"});
      Atom atom;
      atom.mass = number(a, "mass", at);
      if (a.contains("point") == a.contains("angle")) throw ConfigError(at + " needs exactly one of point, angle");
      if (a.contains("point")) {
        const std::vector<double> p = number_list(a.at("point"), at + ".point");
        if (p.size() != 2 || a.contains("radius")) throw ConfigError(at + ".point must be [x, y] without radius");
        atom.point = {p[0], p[1]};
      } else {
        atom.point = unit_vector(number(a, "angle", at)) * number_or(a, "radius", 1.0, at);
      }
      d.atoms.push_back(atom);
    }
    if (obj.contains("normalize")) {
      if (!obj.at("normalize").is_boolean()) throw ConfigError(where + ".normalize must be a boolean");
      if (obj.at("normalize").get<bool>()) {
        double total = 0.0;
        for (const Atom& a : d.atoms) total += a.mass;
        if (!(total > 0.0)) throw ConfigError(where + " masses must be positive");
        for (Atom& a : d.atoms) a.mass /= total;
      }
    }
    d.kind = DistributionSpec::Kind::Atoms;
  } else if (obj.contains("random")) {
    allow_keys(obj, where, {"random"});
    const json& r = obj.at("random");
    allow_keys(r, where + ".random", {"count", "radius"});
    d.kind = DistributionSpec::Kind::Random;
    d.count = static_cast<int>(integer(r, "count", where + ".random"));
    if (d.count < 1) throw ConfigError(where + ".random.count must be positive");
    if (r.contains("radius")) {
      const std::vector<double> range = number_list(r.at("radius"), where + ".random.radius");
      if (range.size() != 2 || !(range[0] > 0.0) || range[1] < range[0]) {
        throw ConfigError(where + ".random.radius must be [lo, hi] with 0 < lo <= hi");
      }
      d.radius_min = range[0];
      d.radius_max = range[1];
    }
  } else if (obj.contains("density")) {
    const json& kind = obj.at("density");
    if (!kind.is_string()) throw ConfigError(where + ".density must be a string");
    const std::string k = kind.get<std::string>();
    if (k == "laplace-l1") {
      allow_keys(obj, where, {"density", "scale"});
      d.kind = DistributionSpec::Kind::LaplaceL1;
      d.scale = number_or(obj, "scale", 1.0, where);
    } else if (k == "gaussian") {
      allow_keys(obj, where, {"density", "sx", "sy", "rotation"});
      d.kind = DistributionSpec::Kind::Gaussian;
      d.sx = number_or(obj, "sx", 1.0, where);
      d.sy = number_or(obj, "sy", 1.0, where);
      d.rotation = number_or(obj, "rotation", 0.0, where);
      if (!(d.sx > 0.0) || !(d.sy > 0.0)) throw ConfigError(where + " standard deviations must be positive");
    } else if (k == "uniform-disk" || k == "uniform-circle") {
      allow_keys(obj, where, {"density", "radius"});
      d.kind = k == "uniform-disk" ? DistributionSpec::Kind::UniformDisk : DistributionSpec::Kind::UniformCircle;
      d.radius = number_or(obj, "radius", 1.0, where);
    } else {
      throw ConfigError(where + ".density '" + k + "' is not one of laplace-l1, gaussian, uniform-disk, uniform-circle");
    }
    if (!(d.scale > 0.0) || !(d.radius > 0.0)) throw ConfigError(where + " scale and radius must be positive");
  } else {
    throw ConfigError(where + " needs one of atoms, random, density");
  }
  return d;
}

Mode parse_mode(const std::string& s) {
  static const std::pair<const char*, Mode> table[] = {
      {"star0", Mode::Star0},   {"dro", Mode::Dro},     {"convex", Mode::Convex},
      {"critic", Mode::Critic}, {"dro-critic", Mode::DroCritic}, {"sweep", Mode::Sweep},
      {"shift-bench", Mode::ShiftBench}, {"convergence", Mode::Convergence}};
  for (const auto& [name, mode] : table) {
    if (s == name) return mode;
  }
  throw ConfigError("unknown mode '" + s + "'");
}

void require(const json& doc, const char* key, Mode mode) {
  if (!doc.contains(key)) throw ConfigError(std::string("mode ") + to_string(mode) + " requires '" + key + "'");
}

void require_atomic(const DistributionSpec& d, const char* what, Mode mode) {
  if (!d.atomic()) throw ConfigError(std::string("mode ") + to_string(mode) + " needs atomic " + what);
}

}  // namespace

const char* to_string(Mode mode) {
  switch (mode) {
    case Mode::Star0: return "star0";
    case Mode::Dro: return "dro";
    case Mode::Convex: return "convex";
    case Mode::Critic: return "critic";
    case Mode::DroCritic: return "dro-critic";
    case Mode::Sweep: return "sweep";
    case Mode::ShiftBench: return "shift-bench";
    case Mode::Convergence: return "convergence";
  }
  return "?";
}

ExperimentConfig parse_config(const json& doc) {
  allow_keys(doc, "config",
             {"schema", "name", "mode", "grid", "data", "data_q", "cost", "eps", "eps_p", "eps_q", "eps_ball",
              "eps_list", "n_list", "shift", "solver"});
  if (!doc.contains("schema") || doc.at("schema") != 1) throw ConfigError("config.schema must be 1");
  if (!doc.contains("mode") || !doc.at("mode").is_string()) throw ConfigError("config.mode must be a string");

  ExperimentConfig cfg;
  cfg.mode = parse_mode(doc.at("mode").get<std::string>());
  if (doc.contains("name")) {
    if (!doc.at("name").is_string()) throw ConfigError("config.name must be a string");
    cfg.name = doc.at("name").get<std::string>();
    if (cfg.name.empty() || cfg.name.find_first_of("/\\") != std::string::npos) {
      throw ConfigError("config.name must be a nonempty file stem");
    }
  }
  if (doc.contains("grid")) {
    const json& g = doc.at("grid");
    allow_keys(g, "grid", {"n", "dim"});
    if (g.contains("n")) cfg.n = static_cast<int>(integer(g, "n", "grid"));
    if (g.contains("dim")) cfg.dim = static_cast<int>(integer(g, "dim", "grid"));
  }
  if (cfg.dim != 2) throw ConfigError("grid.dim must be 2");
  if (cfg.mode != Mode::Convergence && cfg.n < 3) throw ConfigError("grid.n must be at least 3");

  require(doc, "data", cfg.mode);
  cfg.data = parse_distribution(doc.at("data"), "data");
  if (doc.contains("data_q")) cfg.data_q = parse_distribution(doc.at("data_q"), "data_q");
  if (doc.contains("cost")) {
    if (!doc.at("cost").is_string()) throw ConfigError("config.cost must be a string");
    try {
      cfg.cost = parse_cost_kind(doc.at("cost").get<std::string>());
    } catch (const InvalidArgument& e) {
      throw ConfigError(e.what());
    }
  }
  for (const char* key : {"eps", "eps_p", "eps_q", "eps_ball"}) {
    if (doc.contains(key)) nonnegative(doc, key);
  }
  if (doc.contains("eps")) cfg.eps = number(doc, "eps", "config");
  if (doc.contains("eps_p")) cfg.eps_p = number(doc, "eps_p", "config");
  if (doc.contains("eps_q")) cfg.eps_q = number(doc, "eps_q", "config");
  if (doc.contains("eps_ball")) {
    cfg.eps_ball = number(doc, "eps_ball", "config");
    if (!(cfg.eps_ball > 0.0)) throw ConfigError("eps_ball must be positive");
  }
  if (doc.contains("eps_list")) {
    cfg.eps_list = number_list(doc.at("eps_list"), "eps_list");
    for (std::size_t i = 0; i < cfg.eps_list.size(); ++i) {
      if (cfg.eps_list[i] < 0.0 || (i > 0 && cfg.eps_list[i] < cfg.eps_list[i - 1])) {
        throw ConfigError("eps_list must be nonnegative and ascending");
      }
    }
  }
  if (doc.contains("n_list")) {
    for (double v : number_list(doc.at("n_list"), "n_list")) {
      if (v != std::floor(v) || v < 3) throw ConfigError("n_list entries must be integers >= 3");
      if (!cfg.n_list.empty() && v <= cfg.n_list.back()) throw ConfigError("n_list must be strictly ascending");
      cfg.n_list.push_back(static_cast<int>(v));
    }
  }
  if (doc.contains("shift")) {
    const json& s = doc.at("shift");
    allow_keys(s, "shift", {"atom", "angles"});
    if (s.contains("atom")) {
      const long a = integer(s, "atom", "shift");
      if (a < 0) throw ConfigError("shift.atom must be nonnegative");
      cfg.shift.atom = static_cast<std::size_t>(a);
    }
    if (s.contains("angles")) cfg.shift.angles = number_list(s.at("angles"), "shift.angles");
  }
  if (doc.contains("solver")) {
    const json& s = doc.at("solver");
    allow_keys(s, "solver", {"engine", "gap_tol", "max_iters", "seed"});
    if (s.contains("engine")) {
      if (!s.at("engine").is_string()) throw ConfigError("solver.engine must be a string");
      cfg.solver.engine = s.at("engine").get<std::string>();
      if (cfg.solver.engine != "barrier" && cfg.solver.engine != "subgradient") {
        throw ConfigError("solver.engine must be barrier or subgradient");
      }
    }
    if (s.contains("gap_tol")) {
      cfg.solver.gap_tol = number(s, "gap_tol", "solver");
      if (!(cfg.solver.gap_tol > 0.0)) throw ConfigError("solver.gap_tol must be positive");
    }
    if (s.contains("max_iters")) {
      cfg.solver.max_iters = integer(s, "max_iters", "solver");
      if (cfg.solver.max_iters < 1) throw ConfigError("solver.max_iters must be positive");
    }
    if (s.contains("seed")) {
      const json& seed = s.at("seed");
      if (!seed.is_number_integer() || (!seed.is_number_unsigned() && seed.get<std::int64_t>() < 0)) throw ConfigError("solver.seed must be a nonnegative integer");
      cfg.solver.seed = s.at("seed").get<std::uint64_t>();
    }
  }

  switch (cfg.mode) {
    case Mode::Star0:
      break;
    case Mode::Dro:
      require(doc, "eps", cfg.mode);
      require_atomic(cfg.data, "data", cfg.mode);
      break;
    case Mode::Sweep:
      require(doc, "eps_list", cfg.mode);
      require_atomic(cfg.data, "data", cfg.mode);
      break;
    case Mode::Convex:
      require_atomic(cfg.data, "data", cfg.mode);
      break;
    case Mode::Critic:
      require(doc, "data_q", cfg.mode);
      break;
    case Mode::DroCritic:
      require(doc, "data_q", cfg.mode);
      require_atomic(cfg.data, "data", cfg.mode);
      require_atomic(*cfg.data_q, "data_q", cfg.mode);
      break;
    case Mode::ShiftBench:
      require(doc, "shift", cfg.mode);
      require_atomic(cfg.data, "data", cfg.mode);
      if (cfg.shift.angles.empty()) throw ConfigError("shift.angles must be given");
      {
        const std::size_t count =
            cfg.data.kind == DistributionSpec::Kind::Atoms ? cfg.data.atoms.size() : static_cast<std::size_t>(cfg.data.count);
        if (cfg.shift.atom >= count) throw ConfigError("shift.atom is out of range");
      }
      break;
    case Mode::Convergence:
      require(doc, "n_list", cfg.mode);
      if (cfg.data.atomic() || cfg.data.kind == DistributionSpec::Kind::UniformCircle) {
        throw ConfigError("mode convergence needs a density (laplace-l1, gaussian, uniform-disk)");
      }
      break;
  }
  cfg.source = doc;
  cfg.hash = config_hash(doc);
  return cfg;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config " + path.string());
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::parse_error& e) {
    throw ConfigError("config " + path.string() + " is not valid JSON: " + e.what());
  }
  return parse_config(doc);
}

std::string config_hash(const json& doc) {
  const std::string text = doc.dump();
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : text) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

AtomicDistribution materialize(const DistributionSpec& spec, std::uint64_t seed) {
  if (spec.kind == DistributionSpec::Kind::Atoms) {
    try {
      return AtomicDistribution(spec.atoms);
    } catch (const InvalidArgument& e) {
      throw ConfigError(std::string("data: ") + e.what());
    }
  }
  if (spec.kind != DistributionSpec::Kind::Random) throw ConfigError("distribution is not atomic");
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> angle(0.0, kTwoPi);
  std::uniform_real_distribution<double> radius(spec.radius_min, spec.radius_max);
  std::uniform_real_distribution<double> mass(0.1, 1.0);
  std::vector<Atom> atoms;
  for (int i = 0; i < spec.count; ++i) {
    const double a = angle(rng);
    const double r = radius(rng);
    atoms.push_back({unit_vector(a) * r, mass(rng)});
  }
  return AtomicDistribution::normalized(std::move(atoms));
}

}  // namespace starreg::cli
