#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace starreg {

// Base of every error thrown by the library. The CLI maps the concrete type
// onto a process exit code.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Malformed input: bad grid, non-positive gauge, mismatched sizes, bad config.
class InvalidArgument : public Error {
 public:
  using Error::Error;
};

// The optimization problem has no minimizer (empty sectors with eps = 0) or
// no feasible point at all.
class NonexistenceError : public Error {
 public:
  using Error::Error;
};

class InfeasibleError : public Error {
 public:
  using Error::Error;
};

// A solver ran out of iterations or broke down numerically. `log` carries the
// tail of the iteration history and, where available, the best iterate.
class SolverFailure : public Error {
 public:
  SolverFailure(const std::string& what, std::vector<std::string> log = {},
                std::vector<double> best_iterate = {}, double best_gap = 0.0)
      : Error(what),
        log(std::move(log)),
        best_iterate(std::move(best_iterate)),
        best_gap(best_gap) {}

  std::vector<std::string> log;
  std::vector<double> best_iterate;
  double best_gap;
};

}  // namespace starreg
