#include "starreg/cli/runner.hpp"

#include <chrono>
#include <cstdio>
#include <fstream>

#include "starreg/closedform.hpp"
#include "starreg/dro.hpp"
#include "starreg/error.hpp"

namespace starreg::cli {

namespace {

using nlohmann::json;
namespace fs = std::filesystem;

std::string fmt(const char* pattern, double v) {
  char buf[96];
  std::snprintf(buf, sizeof buf, pattern, v);
  return buf;
}

DensityOracle make_oracle(const DistributionSpec& d) {
  switch (d.kind) {
    case DistributionSpec::Kind::LaplaceL1: return laplace_l1_density(d.scale);
    case DistributionSpec::Kind::Gaussian: return gaussian_density(d.sx, d.sy, d.rotation);
    case DistributionSpec::Kind::UniformDisk: return uniform_disk_density(d.radius);
    default: throw ConfigError("distribution has no density");
  }
}

SectorSummary summarize(const DistributionSpec& d, const SphereGrid& grid, std::uint64_t seed) {
  if (d.atomic()) return sector_summary_atomic(materialize(d, seed), grid);
  if (d.kind == DistributionSpec::Kind::UniformCircle) return sector_summary_uniform_circle(d.radius, grid);
  return sector_summary_density(make_oracle(d), grid);
}

DroOptions dro_options(const ExperimentConfig& cfg) {
  DroOptions o;
  o.engine = cfg.solver.engine == "subgradient" ? DroEngine::Subgradient : DroEngine::Barrier;
  o.gap_tol = cfg.solver.gap_tol;
  o.max_iters = cfg.solver.max_iters;
  return o;
}

ConvexOptions convex_options(const ExperimentConfig& cfg) {
  ConvexOptions o;
  o.max_iters = cfg.solver.max_iters;
  return o;
}

double dot(const std::vector<double>& a, std::span<const double> t) {
  double v = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) v += a[i] * t[i];
  return v;
}

class Writer {
 public:
  Writer(const ExperimentConfig& cfg, const RunOptions& opts, RunReport& report)
      : cfg_(cfg), opts_(opts), report_(report) {
    fs::create_directories(opts.out_dir);
  }

  void bundle(ResultBundle b, const std::string& stem) {
    b.config_hash = cfg_.hash;
    const fs::path csv = opts_.out_dir / (stem + ".csv");
    export_csv(b, csv);
    report_.files.push_back(csv);
    report_.files.push_back(sidecar_path(csv));
    if (opts_.write_svg) {
      const fs::path svg = opts_.out_dir / (stem + ".svg");
      render_svg(b, svg);
      report_.files.push_back(svg);
    }
    std::string line = stem + ":";
    if (b.objective) line += fmt(" objective=%.10g", *b.objective);
    if (b.s) line += fmt(" s=%.10g", *b.s);
    if (b.gap) line += fmt(" gap=%.3e", *b.gap);
    if (b.volume) line += fmt(" volume=%.12g", *b.volume);
    report_.summary.push_back(line);
    report_.bundles.push_back(std::move(b));
  }

  void text(const std::string& name, const std::string& content) {
    const fs::path p = opts_.out_dir / name;
    write_file(p, content);
    report_.files.push_back(p);
  }

 private:
  const ExperimentConfig& cfg_;
  const RunOptions& opts_;
  RunReport& report_;
};

ResultBundle dro_bundle(const DroSolution& sol, double eps) {
  ResultBundle b = make_bundle("dro", sol.body);
  b.objective = sol.objective;
  b.s = sol.s;
  b.gap = sol.certificate_gap;
  b.iterations = sol.iterations;
  b.eps = eps;
  b.extra["inner_value"] = sol.inner_value;
  b.extra["anisotropy"] = sol.anisotropy();
  b.extra["optimality_gap"] = sol.optimality_gap;
  return b;
}

}  // namespace

int exit_code_for(const std::exception& e) {
  if (dynamic_cast<const NonexistenceError*>(&e) || dynamic_cast<const InfeasibleError*>(&e)) return kExitNonexistence;
  if (dynamic_cast<const SolverFailure*>(&e)) return kExitSolver;
  if (dynamic_cast<const InvalidArgument*>(&e)) return kExitConfig;
  return kExitOther;
}

json apply_overrides(json doc, const RunOptions& opts) {
  if (!doc.is_object()) return doc;
  if (!opts.seed && !opts.tol && !opts.max_iters) return doc;
  json& solver = doc["solver"];
  if (solver.is_null()) solver = json::object();
  if (opts.seed) solver["seed"] = *opts.seed;
  if (opts.tol) solver["gap_tol"] = *opts.tol;
  if (opts.max_iters) solver["max_iters"] = *opts.max_iters;
  return doc;
}

std::vector<ShiftBenchRow> shift_bench(const AtomicDistribution& p, std::size_t atom, std::span<const double> shifts,
                                       const SphereGrid& grid, const ConvexOptions& opts) {
  if (atom >= p.size()) throw InvalidArgument("shift atom index out of range");
  std::vector<ShiftBenchRow> rows;
  for (double shift : shifts) {
    std::vector<Atom> atoms = p.atoms();
    const Point2 x = atoms[atom].point;
    atoms[atom].point = unit_vector(x.angle() + shift) * x.norm();
    const AtomicDistribution q(std::move(atoms));
    const RobustnessReport r = robustness_bound_check(p, q, grid, opts);
    rows.push_back({shift, r.gauge_diff, r.w1, r.lhs, r.rhs, r.holds});
  }
  return rows;
}

RunReport run_config(const ExperimentConfig& cfg, const RunOptions& opts) {
  const auto start = std::chrono::steady_clock::now();
  RunReport report;
  report.config_hash = cfg.hash;
  Writer out(cfg, opts, report);
  const std::uint64_t seed = cfg.solver.seed;
  std::optional<SphereGrid> grid;
  if (cfg.n >= 3) grid = make_uniform_grid(cfg.n);
  long iterations = 0;

  switch (cfg.mode) {
    case Mode::Star0: {
      const SectorSummary summary = summarize(cfg.data, *grid, seed);
      const StarBody body = optimal_star_eps0(summary);
      ResultBundle b = make_bundle("star0", body);
      b.objective = dot(summary.alpha, body.t());
      b.eps = 0.0;
      if (summary.error > 0.0) b.extra["quadrature_error"] = summary.error;
      out.bundle(std::move(b), cfg.name);
      break;
    }
    case Mode::Dro: {
      const DroSolution sol = solve_dro({*grid, materialize(cfg.data, seed), cfg.cost, cfg.eps}, dro_options(cfg));
      iterations = sol.iterations;
      out.bundle(dro_bundle(sol, cfg.eps), cfg.name);
      break;
    }
    case Mode::Sweep: {
      const DroProblem problem{*grid, materialize(cfg.data, seed), cfg.cost, 0.0};
      const std::vector<DroSolution> sols = epsilon_sweep(problem, cfg.eps_list, dro_options(cfg));
      json index;
      index["config_hash"] = cfg.hash;
      index["entries"] = json::array();
      for (std::size_t i = 0; i < sols.size(); ++i) {
        const std::string stem = cfg.name + "_eps" + std::to_string(i);
        out.bundle(dro_bundle(sols[i], cfg.eps_list[i]), stem);
        iterations += sols[i].iterations;
        index["entries"].push_back({{"eps", cfg.eps_list[i]},
                                    {"csv", stem + ".csv"},
                                    {"objective", sols[i].objective},
                                    {"anisotropy", sols[i].anisotropy()}});
      }
      out.text(cfg.name + "_index.json", index.dump(2) + "\n");
      break;
    }
    case Mode::Convex: {
      const std::vector<double> a = convex_weights(materialize(cfg.data, seed), *grid);
      const ConvexSolution sol = solve_convex_regularizer(a, *grid, convex_options(cfg));
      iterations = sol.iterations;
      ResultBundle b = make_bundle("convex", sol.body);
      b.objective = sol.objective;
      b.gap = sol.kkt_residual;
      b.iterations = sol.iterations;
      b.extra["volume_dual"] = sol.volume_dual;
      out.bundle(std::move(b), cfg.name);
      break;
    }
    case Mode::Critic: {
      const SignedSummary sigma = signed_summary(summarize(cfg.data, *grid, seed), summarize(*cfg.data_q, *grid, seed + 1));
      const CriticSolution sol = optimal_critic(sigma, cfg.eps_ball);
      ResultBundle b = make_bundle("critic", sol.body);
      b.objective = dot(sigma.sigma, sol.body.t());
      b.eps = cfg.eps_ball;
      b.extra["lambda_star"] = sol.lambda_star;
      b.extra["clamped"] = static_cast<double>(std::count(sol.clamped.begin(), sol.clamped.end(), true));
      out.bundle(std::move(b), cfg.name);
      break;
    }
    case Mode::DroCritic: {
      const CriticDroProblem problem{*grid,     materialize(cfg.data, seed), materialize(*cfg.data_q, seed + 1),
                                     cfg.cost,  cfg.eps_p,                   cfg.eps_q,
                                     cfg.eps_ball};
      const CriticDroSolution sol = solve_dro_critic(problem, dro_options(cfg));
      iterations = sol.iterations;
      ResultBundle b = make_bundle("dro-critic", sol.body);
      b.objective = sol.objective;
      b.s = sol.s_p;
      b.gap = sol.certificate_gap;
      b.iterations = sol.iterations;
      b.eps = cfg.eps_ball;
      b.extra["s_q"] = sol.s_q;
      b.extra["inner_value"] = sol.inner_value;
      b.extra["eps_p"] = cfg.eps_p;
      b.extra["eps_q"] = cfg.eps_q;
      out.bundle(std::move(b), cfg.name);
      break;
    }
    case Mode::ShiftBench: {
      const std::vector<ShiftBenchRow> rows =
          shift_bench(materialize(cfg.data, seed), cfg.shift.atom, cfg.shift.angles, *grid, convex_options(cfg));
      std::string csv = "shift_rad,gauge_diff,w1,lhs,rhs,margin,holds\n";
      char line[256];
      bool all = true;
      for (const ShiftBenchRow& r : rows) {
        std::snprintf(line, sizeof line, "%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%d\n", r.shift, r.gauge_diff, r.w1,
                      r.lhs, r.rhs, r.rhs - r.lhs, r.holds ? 1 : 0);
        csv += line;
        all = all && r.holds;
        report.summary.push_back(fmt("shift %.6g:", r.shift) + fmt(" gauge_diff=%.6g", r.gauge_diff) +
                                 fmt(" w1=%.6g", r.w1) + fmt(" margin=%.6g", r.rhs - r.lhs));
      }
      out.text(cfg.name + "_shift.csv", csv);
      report.summary.push_back(all ? "robustness bound holds for every shift" : "robustness bound VIOLATED");
      break;
    }
    case Mode::Convergence: {
      const std::vector<ConvergenceRow> rows = convergence_study(make_oracle(cfg.data), cfg.n_list);
      std::string csv = "n,sup_error,relative_error,quadrature_error\n";
      char line[160];
      for (const ConvergenceRow& r : rows) {
        std::snprintf(line, sizeof line, "%d,%.17g,%.17g,%.17g\n", r.n, r.sup_error, r.relative_error,
                      r.quadrature_error);
        csv += line;
        report.summary.push_back(fmt("n=%.0f:", r.n) + fmt(" sup_error=%.6g", r.sup_error));
      }
      out.text(cfg.name + "_convergence.csv", csv);
      break;
    }
  }

  report.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  json prov;
  prov["config_hash"] = cfg.hash;
  prov["mode"] = to_string(cfg.mode);
  prov["iterations"] = iterations;
  prov["wall_seconds"] = report.wall_seconds;
  out.text(cfg.name + ".provenance.json", prov.dump(2) + "\n");
  return report;
}

RunReport run_config_file(const fs::path& path, const RunOptions& opts) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config " + path.string());
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::parse_error& e) {
    throw ConfigError("config " + path.string() + " is not valid JSON: " + e.what());
  }
  return run_config(parse_config(apply_overrides(std::move(doc), opts)), opts);
}

}  // namespace starreg::cli
