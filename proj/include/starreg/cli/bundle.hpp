#pragma once

// Result bundles: per-sector table, scalar sidecar, SVG level-set plot.

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "starreg/geometry.hpp"

namespace starreg::cli {

struct ResultBundle {
  std::string mode;
  BodyKind kind = BodyKind::PiecewiseConstant;
  std::vector<double> angle;
  std::vector<double> t;
  std::vector<double> rho;

  std::optional<double> objective;
  std::optional<double> s;
  std::optional<double> gap;
  std::optional<double> volume;
  std::optional<double> lipschitz;
  long iterations = 0;
  std::optional<double> eps;
  std::map<std::string, double> extra;
  std::string config_hash;
};

ResultBundle make_bundle(const std::string& mode, const StarBody& body);

// Header `angle_rad,t,rho`, 17 significant digits. The scalars go to the
// sibling file with extension .json.
void export_csv(const ResultBundle& bundle, const std::filesystem::path& csv_path);
std::filesystem::path sidecar_path(const std::filesystem::path& csv_path);

// Reads a CSV written by export_csv, plus its sidecar when present.
ResultBundle read_bundle(const std::filesystem::path& csv_path);

// 800x800 viewport; the body is scaled so its largest radius spans 80% of
// the half-width.
std::string svg_text(const ResultBundle& bundle);
void render_svg(const ResultBundle& bundle, const std::filesystem::path& path);

// Writes `text` to `path`, throwing on failure.
void write_file(const std::filesystem::path& path, const std::string& text);

}  // namespace starreg::cli
