#include "starreg/cli/bundle.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include "json.hpp"
#include "starreg/error.hpp"

namespace starreg::cli {

namespace {

using nlohmann::json;

std::string fmt(const char* pattern, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, pattern, v);
  return buf;
}

json optional_number(const std::optional<double>& v) { return v ? json(*v) : json(nullptr); }

std::optional<double> read_optional(const json& doc, const char* key) {
  if (!doc.contains(key) || doc.at(key).is_null()) return std::nullopt;
  return doc.at(key).get<double>();
}

constexpr double kSize = 800.0;
constexpr double kHalf = kSize / 2.0;

void append_point(std::string& out, double x, double y, double scale) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.4f,%.4f ", kHalf + scale * x, kHalf - scale * y);
  out += buf;
}

}  // namespace

ResultBundle make_bundle(const std::string& mode, const StarBody& body) {
  ResultBundle b;
  b.mode = mode;
  b.kind = body.kind();
  b.angle.assign(body.grid().angles().begin(), body.grid().angles().end());
  b.t.assign(body.t().begin(), body.t().end());
  b.rho = body.radial();
  b.volume = volume(body);
  b.lipschitz = lipschitz(body);
  return b;
}

std::filesystem::path sidecar_path(const std::filesystem::path& csv_path) {
  std::filesystem::path p = csv_path;
  p.replace_extension(".json");
  return p;
}

void write_file(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write " + path.string());
  out << text;
  out.close();
  if (!out) throw Error("failed writing " + path.string());
}

void export_csv(const ResultBundle& bundle, const std::filesystem::path& csv_path) {
  std::string text = "angle_rad,t,rho\n";
  char line[128];
  for (std::size_t i = 0; i < bundle.t.size(); ++i) {
    std::snprintf(line, sizeof line, "%.17g,%.17g,%.17g\n", bundle.angle[i], bundle.t[i], bundle.rho[i]);
    text += line;
  }
  write_file(csv_path, text);

  json side;
  side["mode"] = bundle.mode;
  side["body"] = bundle.kind == BodyKind::HullPolytope ? "hull" : "star";
  side["objective"] = optional_number(bundle.objective);
  side["s"] = optional_number(bundle.s);
  side["gap"] = optional_number(bundle.gap);
  side["volume"] = optional_number(bundle.volume);
  side["lipschitz"] = optional_number(bundle.lipschitz);
  side["iterations"] = bundle.iterations;
  side["eps"] = optional_number(bundle.eps);
  side["config_hash"] = bundle.config_hash;
  json extra = json::object();
  for (const auto& [k, v] : bundle.extra) extra[k] = v;
  side["extra"] = extra;
  write_file(sidecar_path(csv_path), side.dump(2) + "\n");
}

ResultBundle read_bundle(const std::filesystem::path& csv_path) {
  std::ifstream in(csv_path);
  if (!in) throw InvalidArgument("cannot open " + csv_path.string());
  std::string line;
  if (!std::getline(in, line) || line != "angle_rad,t,rho") {
    throw InvalidArgument(csv_path.string() + ": missing header angle_rad,t,rho");
  }
  ResultBundle b;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    double v[3];
    const char* p = line.c_str();
    for (int k = 0; k < 3; ++k) {
      char* end = nullptr;
      v[k] = std::strtod(p, &end);
      if (end == p || (k < 2 && *end != ',') || (k == 2 && *end != '\0')) {
        throw InvalidArgument(csv_path.string() + ": malformed row '" + line + "'");
      }
      p = end + 1;
    }
    b.angle.push_back(v[0]);
    b.t.push_back(v[1]);
    b.rho.push_back(v[2]);
  }
  const std::filesystem::path side = sidecar_path(csv_path);
  if (std::filesystem::exists(side)) {
    std::ifstream sin(side);
    const json doc = json::parse(sin);
    b.mode = doc.value("mode", "");
    b.kind = doc.value("body", "star") == "hull" ? BodyKind::HullPolytope : BodyKind::PiecewiseConstant;
    b.objective = read_optional(doc, "objective");
    b.s = read_optional(doc, "s");
    b.gap = read_optional(doc, "gap");
    b.volume = read_optional(doc, "volume");
    b.lipschitz = read_optional(doc, "lipschitz");
    b.iterations = doc.value("iterations", 0L);
    b.eps = read_optional(doc, "eps");
    b.config_hash = doc.value("config_hash", "");
    if (doc.contains("extra")) {
      for (auto it = doc.at("extra").begin(); it != doc.at("extra").end(); ++it) b.extra[it.key()] = it.value();
    }
  }
  return b;
}

std::string svg_text(const ResultBundle& bundle) {
  const std::size_t n = bundle.t.size();
  if (n < 3) throw InvalidArgument("bundle has fewer than 3 sectors");
  const double rmax = *std::max_element(bundle.rho.begin(), bundle.rho.end());
  if (!(rmax > 0.0) || !std::isfinite(rmax)) throw InvalidArgument("bundle radii must be positive and finite");
  const double scale = 0.8 * kHalf / rmax;

  std::string pts;
  if (bundle.kind == BodyKind::HullPolytope) {
    for (std::size_t i = 0; i < n; ++i) {
      append_point(pts, bundle.rho[i] * std::cos(bundle.angle[i]), bundle.rho[i] * std::sin(bundle.angle[i]), scale);
    }
  } else {
    constexpr int kArcSteps = 8;
    for (std::size_t i = 0; i < n; ++i) {
      const double prev = bundle.angle[(i + n - 1) % n] - (i == 0 ? kTwoPi : 0.0);
      const double next = bundle.angle[(i + 1) % n] + (i + 1 == n ? kTwoPi : 0.0);
      const double lo = 0.5 * (prev + bundle.angle[i]);
      const double hi = 0.5 * (bundle.angle[i] + next);
      for (int k = 0; k <= kArcSteps; ++k) {
        const double a = lo + (hi - lo) * k / kArcSteps;
        append_point(pts, bundle.rho[i] * std::cos(a), bundle.rho[i] * std::sin(a), scale);
      }
    }
  }
  if (!pts.empty()) pts.pop_back();

  std::ostringstream out;
  out << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n"
      << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"800\" height=\"800\" viewBox=\"0 0 800 800\">\n"
      << "<rect width=\"800\" height=\"800\" fill=\"white\"/>\n"
      << "<line x1=\"0\" y1=\"400\" x2=\"800\" y2=\"400\" stroke=\"#999\" stroke-width=\"1\"/>\n"
      << "<line x1=\"400\" y1=\"0\" x2=\"400\" y2=\"800\" stroke=\"#999\" stroke-width=\"1\"/>\n"
      << "<polygon points=\"" << pts << "\" fill=\"#4a7fb5\" fill-opacity=\"0.25\" stroke=\"#1f4e79\" stroke-width=\"2\"/>\n";
  std::string label = bundle.mode.empty() ? "unit ball" : bundle.mode;
  if (bundle.eps) label += fmt(", eps = %.6g", *bundle.eps);
  label += fmt(", max radius %.6g", rmax);
  out << "<text x=\"16\" y=\"28\" font-family=\"monospace\" font-size=\"16\">" << label << "</text>\n"
      << "</svg>\n";
  return out.str();
}

void render_svg(const ResultBundle& bundle, const std::filesystem::path& path) { write_file(path, svg_text(bundle)); }

}  // namespace starreg::cli
