#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "mdvi/geometry.hpp"

namespace mdvi {

/// The seven step-size / stopping-rule variants.
enum class Algorithm : int { k1 = 1, k2, k3, k4, k5, k6, k7 };

inline Algorithm algorithm_from_int(int a) {
  if (a < 1 || a > 7) throw std::invalid_argument("algorithm must be in 1..7");
  return static_cast<Algorithm>(a);
}
inline int to_int(Algorithm a) { return static_cast<int>(a); }

/// kNone disables both stopping tests: the run consumes its whole budget.
enum class Criterion { kOne, kTwo, kNone };

enum class StepKind { kProductive, kNonProductive, kFinal };

enum class Termination { kCriterion1, kCriterion2, kMaxIter, kDegenerateOperator };

inline std::string_view to_string(Termination t) {
  switch (t) {
    case Termination::kCriterion1: return "Criterion1";
    case Termination::kCriterion2: return "Criterion2";
    case Termination::kMaxIter: return "MaxIter";
    case Termination::kDegenerateOperator: return "DegenerateOperator";
  }
  return "?";
}

inline std::string_view to_string(StepKind s) {
  switch (s) {
    case StepKind::kProductive: return "productive";
    case StepKind::kNonProductive: return "nonproductive";
    case StepKind::kFinal: return "final";
  }
  return "?";
}

struct SolverConfig {
  Algorithm algorithm = Algorithm::k2;
  Criterion criterion = Criterion::kOne;
  double epsilon = 0.05;
  double delta = 0.0;
  std::optional<std::uint64_t> max_iter;  // default: ten times the criterion-2 cap
  bool many_constraints = false;
  std::uint64_t trace_every = 0;  // 0 disables the trace
};

/// Running sums shared by the stopping tests and the certificates. Sums over
/// productive steps carry an `_i` flavour, over non-productive steps `_j`.
struct Accumulators {
  std::uint64_t k = 0;
  std::uint64_t i_count = 0;
  std::uint64_t j_count = 0;
  double sum_wf = 0.0;      // sum_{i in I} h_i^F
  double sum_inv_m2 = 0.0;  // sum_{i < k} 1 / M_i^2
  double sum_inv_g2 = 0.0;  // sum_{i in J} 1 / ||grad g(x_i)||_*^2
  double sum_inv_f2 = 0.0;  // sum_{i in I} 1 / ||F(x_i)||_*^2
  double sum_m2 = 0.0;      // sum_{t < k} M_t^2
};

struct SolverState {
  Vector x;
  Vector sum_wfx;  // sum_{i in I} h_i^F x_i
  Vector sum_x;    // sum_{i in I} x_i
  Accumulators acc;
};

struct TraceRecord {
  std::uint64_t iter = 0;
  StepKind kind = StepKind::kProductive;
  double g_value = 0.0;
  double norm_used = 0.0;
  double step_size = 0.0;
  Vector x;  // populated only when dimension <= kTraceCoordinateLimit
};

inline constexpr Eigen::Index kTraceCoordinateLimit = 4;

struct RunResult {
  Vector x_hat;
  std::uint64_t i_count = 0;
  std::uint64_t j_count = 0;
  std::uint64_t iterations = 0;
  Termination termination = Termination::kMaxIter;
  std::optional<double> certified_bound;
  std::vector<double> feasibility;  // g_i(x_hat)
  Accumulators acc;
  std::vector<TraceRecord> trace;
};

class NoProductiveSteps : public std::runtime_error {
 public:
  NoProductiveSteps(std::uint64_t iterations, Termination t)
      : std::runtime_error("no productive steps after " + std::to_string(iterations) +
                           " iterations; output point undefined"),
        iterations_(iterations),
        termination_(t) {}
  std::uint64_t iterations() const { return iterations_; }
  Termination termination() const { return termination_; }

 private:
  std::uint64_t iterations_;
  Termination termination_;
};

/// Signalled by norm-dependent step rules when the norm is numerically zero.
class DegenerateStep : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

}  // namespace mdvi
