#pragma once

#include <vector>

namespace starreg::detail {

struct GaussRule {
  std::vector<double> nodes;    // on [-1, 1]
  std::vector<double> weights;
};

GaussRule gauss_legendre(int n);

// Composite Gauss-Legendre rule on [0, r_max] with `panels` equal panels.
struct RadialRule {
  std::vector<double> r;
  std::vector<double> w;
};

RadialRule composite_radial_rule(double r_max, int panels, const GaussRule& base);

}  // namespace starreg::detail
