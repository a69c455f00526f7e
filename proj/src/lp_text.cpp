#include <cmath>
#include <cstdio>
#include <istream>
#include <limits>
#include <ostream>
#include <sstream>
#include <string>

#include "starreg/error.hpp"
#include "starreg/lp.hpp"

namespace starreg {

namespace {

std::string num(double v) {
  if (v == std::numeric_limits<double>::infinity()) return "inf";
  if (v == -std::numeric_limits<double>::infinity()) return "-inf";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

double parse_num(const std::string& s) {
  if (s == "inf") return std::numeric_limits<double>::infinity();
  if (s == "-inf") return -std::numeric_limits<double>::infinity();
  std::size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(s, &used);
  } catch (const std::exception&) {
    throw InvalidArgument("lp text: bad number '" + s + "'");
  }
  if (used != s.size()) throw InvalidArgument("lp text: bad number '" + s + "'");
  return v;
}

const char* sense_token(Sense s) {
  switch (s) {
    case Sense::LessEqual: return "<=";
    case Sense::Equal: return "=";
    case Sense::GreaterEqual: return ">=";
  }
  return "?";
}

Sense parse_sense(const std::string& s) {
  if (s == "<=") return Sense::LessEqual;
  if (s == "=") return Sense::Equal;
  if (s == ">=") return Sense::GreaterEqual;
  throw InvalidArgument("lp text: bad sense '" + s + "'");
}

std::string expect_word(std::istream& in, const char* want) {
  std::string w;
  if (!(in >> w) || w != want) {
    throw InvalidArgument(std::string("lp text: expected '") + want + "', got '" + w + "'");
  }
  return w;
}

double read_num(std::istream& in) {
  std::string w;
  if (!(in >> w)) throw InvalidArgument("lp text: unexpected end of input");
  return parse_num(w);
}

}  // namespace

void write_lp_text(const LinearProgram& lp, std::ostream& out) {
  lp.validate();
  const int n = lp.num_vars();
  const int m = lp.num_rows();
  out << "starreg-lp 1\n";
  out << (lp.direction == Direction::Maximize ? "max" : "min") << "\n";
  out << "vars " << n << "\nrows " << m << "\n";
  out << "c";
  for (int j = 0; j < n; ++j) out << ' ' << num(lp.c[j]);
  out << "\nlower";
  for (int j = 0; j < n; ++j) out << ' ' << num(lp.lower[j]);
  out << "\nupper";
  for (int j = 0; j < n; ++j) out << ' ' << num(lp.upper[j]);
  out << "\n";
  for (int i = 0; i < m; ++i) {
    out << "row";
    for (int j = 0; j < n; ++j) out << ' ' << num(lp.a(i, j));
    out << ' ' << sense_token(lp.senses[i]) << ' ' << num(lp.b[i]) << "\n";
  }
  out << "end\n";
}

LinearProgram read_lp_text(std::istream& in) {
  expect_word(in, "starreg-lp");
  if (read_num(in) != 1.0) throw InvalidArgument("lp text: unsupported version");
  std::string dir;
  in >> dir;
  if (dir != "min" && dir != "max") throw InvalidArgument("lp text: bad direction '" + dir + "'");
  expect_word(in, "vars");
  const double nv = read_num(in);
  expect_word(in, "rows");
  const double mv = read_num(in);
  if (nv < 1 || mv < 0 || nv != std::floor(nv) || mv != std::floor(mv)) {
    throw InvalidArgument("lp text: bad dimensions");
  }
  const int n = static_cast<int>(nv);
  const int m = static_cast<int>(mv);
  LinearProgram lp(n, m);
  lp.direction = dir == "max" ? Direction::Maximize : Direction::Minimize;
  expect_word(in, "c");
  for (int j = 0; j < n; ++j) lp.c[j] = read_num(in);
  expect_word(in, "lower");
  for (int j = 0; j < n; ++j) lp.lower[j] = read_num(in);
  expect_word(in, "upper");
  for (int j = 0; j < n; ++j) lp.upper[j] = read_num(in);
  for (int i = 0; i < m; ++i) {
    expect_word(in, "row");
    for (int j = 0; j < n; ++j) lp.a(i, j) = read_num(in);
    std::string s;
    in >> s;
    lp.senses[i] = parse_sense(s);
    lp.b[i] = read_num(in);
  }
  expect_word(in, "end");
  lp.validate();
  return lp;
}

}  // namespace starreg
