#include "starreg/lp.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <deque>
#include <limits>
#include <string>

#include "starreg/error.hpp"

namespace starreg {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
using RowMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

enum class VarKind { Shift, Flip, Free };

struct VarMap {
  VarKind kind;
  int col;
  int col2;  // negative part of a free variable
};

// min c^T z  s.t.  A z (sense) b,  b >= 0,  z >= 0, with slack/surplus columns
// already appended. Rows whose basis starts at an artificial have basis -1.
struct StandardForm {
  Eigen::MatrixXd a;
  Eigen::VectorXd b;
  Eigen::VectorXd c;
  double c0 = 0.0;
  std::vector<int> basis;
  std::vector<VarMap> vars;
  std::vector<double> row_sign;
  int num_struct = 0;
  int num_orig_rows = 0;
};

StandardForm to_standard(const LinearProgram& lp, const Eigen::VectorXd& cost) {
  StandardForm sf;
  const int n = lp.num_vars();
  const int m0 = lp.num_rows();
  int ncol = 0;
  int bound_rows = 0;
  sf.vars.resize(n);
  for (int j = 0; j < n; ++j) {
    const bool lo = std::isfinite(lp.lower[j]);
    const bool hi = std::isfinite(lp.upper[j]);
    if (lo) {
      sf.vars[j] = {VarKind::Shift, ncol++, -1};
      if (hi) ++bound_rows;
    } else if (hi) {
      sf.vars[j] = {VarKind::Flip, ncol++, -1};
    } else {
      sf.vars[j] = {VarKind::Free, ncol, ncol + 1};
      ncol += 2;
    }
  }
  sf.num_struct = ncol;
  sf.num_orig_rows = m0;
  const int m = m0 + bound_rows;

  Eigen::MatrixXd a = Eigen::MatrixXd::Zero(m, ncol);
  Eigen::VectorXd b(m);
  std::vector<Sense> senses(m);
  sf.c = Eigen::VectorXd::Zero(ncol);
  for (int j = 0; j < n; ++j) {
    const VarMap& v = sf.vars[j];
    switch (v.kind) {
      case VarKind::Shift:
        sf.c[v.col] = cost[j];
        sf.c0 += cost[j] * lp.lower[j];
        break;
      case VarKind::Flip:
        sf.c[v.col] = -cost[j];
        sf.c0 += cost[j] * lp.upper[j];
        break;
      case VarKind::Free:
        sf.c[v.col] = cost[j];
        sf.c[v.col2] = -cost[j];
        break;
    }
  }
  for (int i = 0; i < m0; ++i) {
    double rhs = lp.b[i];
    for (int j = 0; j < n; ++j) {
      const double aij = lp.a(i, j);
      if (aij == 0.0) continue;
      const VarMap& v = sf.vars[j];
      switch (v.kind) {
        case VarKind::Shift:
          a(i, v.col) = aij;
          rhs -= aij * lp.lower[j];
          break;
        case VarKind::Flip:
          a(i, v.col) = -aij;
          rhs -= aij * lp.upper[j];
          break;
        case VarKind::Free:
          a(i, v.col) = aij;
          a(i, v.col2) = -aij;
          break;
      }
    }
    b[i] = rhs;
    senses[i] = lp.senses[i];
  }
  int r = m0;
  for (int j = 0; j < n; ++j) {
    if (sf.vars[j].kind == VarKind::Shift && std::isfinite(lp.upper[j])) {
      a(r, sf.vars[j].col) = 1.0;
      b[r] = lp.upper[j] - lp.lower[j];
      senses[r] = Sense::LessEqual;
      ++r;
    }
  }

  sf.row_sign.assign(m, 1.0);
  int nslack = 0;
  for (int i = 0; i < m; ++i) {
    if (b[i] < 0.0 || (b[i] == 0.0 && senses[i] == Sense::GreaterEqual)) {
      a.row(i) *= -1.0;
      b[i] = -b[i];
      sf.row_sign[i] = -1.0;
      if (senses[i] == Sense::LessEqual) {
        senses[i] = Sense::GreaterEqual;
      } else if (senses[i] == Sense::GreaterEqual) {
        senses[i] = Sense::LessEqual;
      }
    }
    if (senses[i] != Sense::Equal) ++nslack;
  }

  sf.a = Eigen::MatrixXd::Zero(m, ncol + nslack);
  sf.a.leftCols(ncol) = a;
  sf.b = b;
  sf.c.conservativeResize(ncol + nslack);
  sf.c.tail(nslack).setZero();
  sf.basis.assign(m, -1);
  int s = ncol;
  for (int i = 0; i < m; ++i) {
    if (senses[i] == Sense::LessEqual) {
      sf.a(i, s) = 1.0;
      sf.basis[i] = s;
      ++s;
    } else if (senses[i] == Sense::GreaterEqual) {
      sf.a(i, s) = -1.0;
      ++s;
    }
  }
  return sf;
}

class Tableau {
 public:
  Tableau(const StandardForm& sf, const LpOptions& opts)
      : opts_(opts), n_(static_cast<int>(sf.a.cols())) {
    const int m = static_cast<int>(sf.a.rows());
    t_.resize(m, n_ + 1);
    t_.leftCols(n_) = sf.a;
    t_.col(n_) = sf.b;
    basis_.resize(m);
    for (int i = 0; i < m; ++i) basis_[i] = sf.basis[i] >= 0 ? sf.basis[i] : n_ + i;
    rows_.resize(m);
    for (int i = 0; i < m; ++i) rows_[i] = i;
  }

  int rows() const { return static_cast<int>(t_.rows()); }
  bool artificial(int k) const { return k >= n_; }
  const std::vector<int>& basis() const { return basis_; }
  const std::vector<int>& row_ids() const { return rows_; }
  long iterations() const { return iters_; }
  const std::deque<std::string>& log() const { return log_; }

  // Phase one minimizes the sum of artificials. Returns that minimum.
  double phase_one() {
    obj_ = Eigen::RowVectorXd::Zero(n_ + 1);
    for (int i = 0; i < rows(); ++i) {
      if (artificial(basis_[i])) obj_ -= t_.row(i);
    }
    run(1);
    return -obj_[n_];
  }

  // Pivot remaining zero-level artificials out of the basis or drop their
  // rows as linearly dependent.
  void purge_artificials() {
    for (int i = 0; i < rows();) {
      if (!artificial(basis_[i])) {
        ++i;
        continue;
      }
      int enter = -1;
      for (int j = 0; j < n_; ++j) {
        if (std::abs(t_(i, j)) > 1e-7) {
          enter = j;
          break;
        }
      }
      if (enter >= 0) {
        pivot(i, enter);
        ++i;
        continue;
      }
      const int last = rows() - 1;
      if (i != last) {
        t_.row(i) = t_.row(last);
        basis_[i] = basis_[last];
        rows_[i] = rows_[last];
      }
      t_.conservativeResize(last, Eigen::NoChange);
      basis_.pop_back();
      rows_.pop_back();
    }
  }

  // Returns false when the problem is unbounded.
  bool phase_two(const Eigen::VectorXd& c) {
    obj_ = Eigen::RowVectorXd::Zero(n_ + 1);
    obj_.head(n_) = c.transpose();
    for (int i = 0; i < rows(); ++i) {
      const double cb = c[basis_[i]];
      if (cb != 0.0) obj_ -= cb * t_.row(i);
    }
    return run(2);
  }

  double value(int i) const { return t_(i, n_); }

 private:
  bool run(int phase) {
    bool bland = false;
    int degenerate = 0;
    for (;;) {
      int enter = -1;
      double best = -opts_.tol;
      for (int j = 0; j < n_; ++j) {
        if (obj_[j] < best) {
          enter = j;
          if (bland) break;
          best = obj_[j];
        }
      }
      if (enter < 0) return true;

      int leave = -1;
      double ratio = kInf;
      for (int i = 0; i < rows(); ++i) {
        const double v = t_(i, enter);
        if (v <= opts_.tol) continue;
        const double r = t_(i, n_) / v;
        const bool take = leave < 0 || r < ratio - 1e-12 ||
                          (r <= ratio + 1e-12 && basis_[i] < basis_[leave]);
        if (take) {
          ratio = std::min(ratio, r);
          leave = i;
        }
      }
      if (leave < 0) return false;

      if (ratio <= opts_.tol) {
        if (++degenerate >= opts_.degenerate_switch) bland = true;
      } else {
        degenerate = 0;
      }
      if (++iters_ > opts_.max_iters) {
        throw SolverFailure("simplex iteration cap reached", {log_.begin(), log_.end()});
      }
      char line[160];
      std::snprintf(line, sizeof line, "phase %d iter %ld enter %d leave row %d ratio %.6g obj %.12g%s",
                    phase, iters_, enter, leave, ratio, -obj_[n_], bland ? " bland" : "");
      log_.emplace_back(line);
      if (log_.size() > 32) log_.pop_front();
      pivot(leave, enter);
    }
  }

  void pivot(int r, int j) {
    t_.row(r) /= t_(r, j);
    for (int i = 0; i < rows(); ++i) {
      if (i == r) continue;
      const double f = t_(i, j);
      if (f != 0.0) t_.row(i) -= f * t_.row(r);
      t_(i, j) = 0.0;
    }
    const double f = obj_[j];
    if (f != 0.0) obj_ -= f * t_.row(r);
    obj_[j] = 0.0;
    t_(r, j) = 1.0;
    basis_[r] = j;
  }

  LpOptions opts_;
  int n_;
  RowMatrix t_;
  Eigen::RowVectorXd obj_;
  std::vector<int> basis_;
  std::vector<int> rows_;
  long iters_ = 0;
  std::deque<std::string> log_;
};

void certify(const LinearProgram& lp, const Eigen::VectorXd& cmin, const Eigen::VectorXd& ymin,
             LpSolution& sol) {
  const Eigen::VectorXd& x = sol.x;
  const Eigen::VectorXd row = lp.a * x - lp.b;
  const Eigen::VectorXd d = cmin - lp.a.transpose() * ymin;
  double pres = 0.0, dres = 0.0, cs = 0.0;
  double dual = lp.b.dot(ymin);
  for (int i = 0; i < lp.num_rows(); ++i) {
    switch (lp.senses[i]) {
      case Sense::LessEqual:
        pres = std::max(pres, row[i]);
        dres = std::max(dres, ymin[i]);
        break;
      case Sense::GreaterEqual:
        pres = std::max(pres, -row[i]);
        dres = std::max(dres, -ymin[i]);
        break;
      case Sense::Equal:
        pres = std::max(pres, std::abs(row[i]));
        break;
    }
    cs = std::max(cs, std::abs(ymin[i] * row[i]));
  }
  for (int j = 0; j < lp.num_vars(); ++j) {
    const double lo = lp.lower[j], hi = lp.upper[j];
    pres = std::max({pres, lo - x[j], x[j] - hi});
    if (d[j] > 0.0) {
      if (std::isfinite(lo)) {
        dual += lo * d[j];
        cs = std::max(cs, d[j] * (x[j] - lo));
      } else {
        dres = std::max(dres, d[j]);
      }
    } else if (d[j] < 0.0) {
      if (std::isfinite(hi)) {
        dual += hi * d[j];
        cs = std::max(cs, -d[j] * (hi - x[j]));
      } else {
        dres = std::max(dres, -d[j]);
      }
    }
  }
  const bool maximize = lp.direction == Direction::Maximize;
  sol.primal_residual = std::max(0.0, pres);
  sol.dual_residual = dres;
  sol.complementary_slackness = cs;
  sol.y = maximize ? Eigen::VectorXd(-ymin) : ymin;
  sol.reduced_costs = maximize ? Eigen::VectorXd(-d) : d;
  sol.dual_objective = maximize ? -dual : dual;
  sol.objective = lp.c.dot(x);
}

}  // namespace

const char* to_string(LpStatus status) {
  switch (status) {
    case LpStatus::Optimal: return "optimal";
    case LpStatus::Infeasible: return "infeasible";
    case LpStatus::Unbounded: return "unbounded";
  }
  return "unknown";
}

LinearProgram::LinearProgram(int num_vars, int num_rows)
    : c(Eigen::VectorXd::Zero(num_vars)),
      a(Eigen::MatrixXd::Zero(num_rows, num_vars)),
      senses(num_rows, Sense::LessEqual),
      b(Eigen::VectorXd::Zero(num_rows)),
      lower(Eigen::VectorXd::Zero(num_vars)),
      upper(Eigen::VectorXd::Constant(num_vars, kInf)) {}

void LinearProgram::validate() const {
  const int n = num_vars();
  const int m = num_rows();
  if (n == 0) throw InvalidArgument("lp: no variables");
  if (a.rows() != m || a.cols() != n || static_cast<int>(senses.size()) != m ||
      lower.size() != n || upper.size() != n) {
    throw InvalidArgument("lp: inconsistent dimensions");
  }
  if (!c.allFinite() || !a.allFinite() || !b.allFinite()) throw InvalidArgument("lp: non-finite data");
  for (int j = 0; j < n; ++j) {
    if (std::isnan(lower[j]) || std::isnan(upper[j]) || lower[j] == kInf || upper[j] == -kInf) {
      throw InvalidArgument("lp: invalid bound on variable " + std::to_string(j));
    }
  }
}

LpSolution solve_lp(const LinearProgram& lp, const LpOptions& opts) {
  lp.validate();
  LpSolution sol;
  for (int j = 0; j < lp.num_vars(); ++j) {
    if (lp.lower[j] > lp.upper[j]) {
      sol.status = LpStatus::Infeasible;
      return sol;
    }
  }
  const Eigen::VectorXd cmin = lp.direction == Direction::Maximize ? Eigen::VectorXd(-lp.c) : lp.c;
  const StandardForm sf = to_standard(lp, cmin);
  Tableau tab(sf, opts);

  const double infeas = tab.phase_one();
  sol.iterations = tab.iterations();
  const double scale = 1.0 + (sf.b.size() ? sf.b.lpNorm<Eigen::Infinity>() : 0.0);
  if (infeas > opts.tol * scale) {
    sol.status = LpStatus::Infeasible;
    return sol;
  }
  tab.purge_artificials();
  const bool bounded = tab.phase_two(sf.c);
  sol.iterations = tab.iterations();
  if (!bounded) {
    sol.status = LpStatus::Unbounded;
    return sol;
  }

  // Recover the basic solution and the duals from the final basis.
  const int m = tab.rows();
  const int ntot = static_cast<int>(sf.a.cols());
  Eigen::VectorXd z = Eigen::VectorXd::Zero(ntot);
  for (int i = 0; i < m; ++i) z[tab.basis()[i]] = tab.value(i);
  Eigen::VectorXd ystd = Eigen::VectorXd::Zero(sf.a.rows());
  if (m > 0) {
    Eigen::MatrixXd basis(m, m);
    Eigen::VectorXd rhs(m), cb(m);
    for (int k = 0; k < m; ++k) {
      const int col = tab.basis()[k];
      for (int i = 0; i < m; ++i) basis(i, k) = sf.a(tab.row_ids()[i], col);
      cb[k] = sf.c[col];
    }
    for (int i = 0; i < m; ++i) rhs[i] = sf.b[tab.row_ids()[i]];
    Eigen::PartialPivLU<Eigen::MatrixXd> lu(basis);
    Eigen::VectorXd zb = lu.solve(rhs);
    Eigen::VectorXd zb_tab(m);
    for (int k = 0; k < m; ++k) zb_tab[k] = tab.value(k);
    const double res_lu = (basis * zb - rhs).lpNorm<Eigen::Infinity>();
    const double res_tab = (basis * zb_tab - rhs).lpNorm<Eigen::Infinity>();
    if (zb.allFinite() && res_lu <= res_tab) {
      for (int k = 0; k < m; ++k) z[tab.basis()[k]] = std::max(0.0, zb[k]);
    }
    Eigen::VectorXd yb = lu.transpose().solve(cb);
    for (int i = 0; i < m; ++i) ystd[tab.row_ids()[i]] = yb[i];
  }

  sol.x.resize(lp.num_vars());
  for (int j = 0; j < lp.num_vars(); ++j) {
    const VarMap& v = sf.vars[j];
    switch (v.kind) {
      case VarKind::Shift: sol.x[j] = lp.lower[j] + z[v.col]; break;
      case VarKind::Flip: sol.x[j] = lp.upper[j] - z[v.col]; break;
      case VarKind::Free: sol.x[j] = z[v.col] - z[v.col2]; break;
    }
  }
  Eigen::VectorXd ymin(lp.num_rows());
  for (int i = 0; i < lp.num_rows(); ++i) ymin[i] = sf.row_sign[i] * ystd[i];
  sol.status = LpStatus::Optimal;
  certify(lp, cmin, ymin, sol);
  return sol;
}

LinearProgram build_inner_primal(const Eigen::VectorXd& t, const Eigen::VectorXd& p,
                                 const Eigen::MatrixXd& cost, double eps) {
  const int k = static_cast<int>(cost.rows());
  const int n = static_cast<int>(cost.cols());
  if (p.size() != k || t.size() != n) throw InvalidArgument("inner primal: dimension mismatch");
  if (!(eps >= 0.0)) throw InvalidArgument("inner primal: eps must be nonnegative");
  LinearProgram lp(n + k * n, 1 + k + n);
  lp.direction = Direction::Maximize;
  lp.c.head(n) = t;
  for (int j = 0; j < n; ++j) lp.lower[j] = -kInf;
  auto pi = [n](int i, int j) { return n + i * n + j; };
  lp.senses[0] = Sense::LessEqual;
  lp.b[0] = eps;
  for (int i = 0; i < k; ++i) {
    lp.senses[1 + i] = Sense::Equal;
    lp.b[1 + i] = p[i];
    for (int j = 0; j < n; ++j) {
      lp.a(0, pi(i, j)) = cost(i, j);
      lp.a(1 + i, pi(i, j)) = 1.0;
      lp.a(1 + k + j, pi(i, j)) = 1.0;
    }
  }
  for (int j = 0; j < n; ++j) {
    lp.senses[1 + k + j] = Sense::Equal;
    lp.a(1 + k + j, j) = -1.0;
  }
  return lp;
}

LinearProgram build_inner_dual(const Eigen::VectorXd& t, const Eigen::VectorXd& p,
                               const Eigen::MatrixXd& cost, double eps) {
  const int k = static_cast<int>(cost.rows());
  const int n = static_cast<int>(cost.cols());
  if (p.size() != k || t.size() != n) throw InvalidArgument("inner dual: dimension mismatch");
  if (!(eps >= 0.0)) throw InvalidArgument("inner dual: eps must be nonnegative");
  LinearProgram lp(1 + k, k * n);
  lp.c[0] = eps;
  lp.c.tail(k) = p;
  for (int i = 0; i < k; ++i) lp.lower[1 + i] = -kInf;
  for (int i = 0; i < k; ++i) {
    for (int j = 0; j < n; ++j) {
      const int r = i * n + j;
      lp.a(r, 0) = cost(i, j);
      lp.a(r, 1 + i) = 1.0;
      lp.senses[r] = Sense::GreaterEqual;
      lp.b[r] = t[j];
    }
  }
  return lp;
}

}  // namespace starreg
