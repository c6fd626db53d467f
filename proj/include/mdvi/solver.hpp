#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <stdexcept>

#include "mdvi/certify.hpp"
#include "mdvi/geometry.hpp"
#include "mdvi/problems.hpp"
#include "mdvi/solver_types.hpp"
#include "mdvi/step_rules.hpp"

namespace mdvi {

namespace detail {

struct Classification {
  bool productive;
  double g_value;
  std::size_t index;  // constraint used for a non-productive step
};

// Single-constraint view: g = max_i g_i, subgradient of the smallest argmax.
inline Classification classify_max(const ConstraintFamily& c, const Vector& x, double threshold) {
  const auto gm = eval_constraint_max(c, x);
  return {gm.value <= threshold, gm.value, gm.index};
}

// Many-constraints view: productive iff every g_i passes; otherwise the first
// violated constraint drives the step and later ones are never evaluated.
inline Classification classify_first_violated(const ConstraintFamily& c, const Vector& x,
                                              double threshold) {
  double worst = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < c.size(); ++i) {
    const double v = c.value(i, x);
    if (v > threshold) return {false, v, i};
    worst = std::max(worst, v);
  }
  return {true, worst, 0};
}

}  // namespace detail

template <Geometry G>
std::uint64_t default_max_iter(const VIProblem<G>& problem, const SolverConfig& config) {
  return 10 * criterion2_iteration_cap(config.algorithm, constants_of(problem), config.epsilon);
}

/// Mirror descent with productive / non-productive switching.
///
/// Productive steps move along F(x_k), non-productive ones along a subgradient
/// of the violated constraint. The output averages the productive iterates,
/// weighted by h_k^F (algorithms 1-6) or uniformly (algorithm 7).
template <Geometry G>
RunResult solve(const VIProblem<G>& problem, const SolverConfig& config) {
  const auto& geom = problem.geometry;
  const ProblemConstants constants = constants_of(problem);
  const Algorithm alg = config.algorithm;
  const double eps = config.epsilon;

  if (!(eps > 0.0)) throw std::invalid_argument("epsilon must be positive");
  if (config.delta < 0.0) throw std::invalid_argument("delta must be nonnegative");
  if (problem.constraints.empty()) throw std::invalid_argument("problem has no constraints");
  if (!(constants.l_f > 0.0)) throw std::invalid_argument("operator bound L_F must be positive");
  if (alg == Algorithm::k7 && !std::isfinite(constants.theta_squared))
    throw std::invalid_argument("algorithm 7 needs a finite pairwise prox radius");

  const std::uint64_t max_iter =
      config.max_iter ? *config.max_iter : default_max_iter(problem, config);
  if (max_iter < 1) throw std::invalid_argument("max_iter must be >= 1");

  const double threshold = productivity_threshold(alg, eps, constants.m_g);
  const double theta = std::sqrt(constants.theta_squared);
  const bool keep_coords = geom.dimension() <= kTraceCoordinateLimit;

  SolverState st{geom.start(), Vector::Zero(geom.dimension()), Vector::Zero(geom.dimension()), {}};
  detail::require_member(geom, st.x, "start point");

  RunResult result;
  result.termination = Termination::kMaxIter;

  auto record = [&](StepKind kind, double g_value, double norm, double h, const Vector& x) {
    if (config.trace_every == 0) return;
    if (kind != StepKind::kFinal && st.acc.k % config.trace_every != 0) return;
    result.trace.push_back({st.acc.k, kind, g_value, norm, h, keep_coords ? x : Vector()});
  };

  while (st.acc.k < max_iter) {
    const auto cls = config.many_constraints
                         ? detail::classify_first_violated(problem.constraints, st.x, threshold)
                         : detail::classify_max(problem.constraints, st.x, threshold);
    Vector direction;
    double norm = 0.0;
    double h = 0.0;
    if (cls.productive) {
      direction = problem.op.eval(st.x);
      norm = geom.dual_norm(direction);
      // A vanishing F(x_k) makes x_k stationary; keep it as a productive
      // iterate and size the step as if ||F(x_k)||_* were L_F.
      const double effective = norm <= kDegenerateNorm ? constants.l_f : norm;
      h = step_size(alg, StepRole::kProductive, eps, constants.l_f, constants.m_g, theta,
                    effective, st.acc.sum_m2 + effective * effective);
      auto& a = st.acc;
      ++a.i_count;
      a.sum_wf += h;
      a.sum_inv_m2 += 1.0 / (effective * effective);
      a.sum_inv_f2 += 1.0 / (effective * effective);
      a.sum_m2 += effective * effective;
      st.sum_wfx += h * st.x;
      st.sum_x += st.x;
      record(StepKind::kProductive, cls.g_value, norm, h, st.x);
    } else {
      direction = problem.constraints.subgradient(cls.index, st.x);
      norm = geom.dual_norm(direction);
      if (norm <= kDegenerateNorm) {
        // g(x_k) above threshold with a zero subgradient contradicts convexity
        // given a feasible point exists.
        result.termination = Termination::kDegenerateOperator;
        break;
      }
      h = step_size(alg, StepRole::kNonProductive, eps, constants.l_f, constants.m_g, theta, norm,
                    st.acc.sum_m2 + norm * norm);
      auto& a = st.acc;
      ++a.j_count;
      a.sum_inv_m2 += 1.0 / (norm * norm);
      a.sum_inv_g2 += 1.0 / (norm * norm);
      a.sum_m2 += norm * norm;
      record(StepKind::kNonProductive, cls.g_value, norm, h, st.x);
    }
    st.x = mirror_step(geom, st.x, direction, h);
    ++st.acc.k;

    if (check_stop(alg, config.criterion, st.acc, constants, eps)) {
      result.termination = config.criterion == Criterion::kOne ? Termination::kCriterion1
                                                               : Termination::kCriterion2;
      break;
    }
  }

  if (config.trace_every != 0) {
    const auto cls = config.many_constraints
                         ? detail::classify_first_violated(problem.constraints, st.x, threshold)
                         : detail::classify_max(problem.constraints, st.x, threshold);
    record(StepKind::kFinal, cls.g_value, 0.0, 0.0, st.x);
  }

  if (st.acc.i_count == 0) throw NoProductiveSteps(st.acc.k, result.termination);

  result.x_hat = alg == Algorithm::k7 ? Vector(st.sum_x / static_cast<double>(st.acc.i_count))
                                      : Vector(st.sum_wfx / st.acc.sum_wf);
  result.i_count = st.acc.i_count;
  result.j_count = st.acc.j_count;
  result.iterations = st.acc.k;
  result.acc = st.acc;
  result.feasibility = constraint_values(problem.constraints, result.x_hat);
  const Certificate cert = certificate(result, constants, config);
  if (cert.certified) result.certified_bound = cert.gap_bound;
  return result;
}

/// Per-constraint variant: every g_i is tested on productive steps and the
/// first violated one drives a non-productive step.
template <Geometry G>
RunResult solve_many_constraints(const VIProblem<G>& problem, SolverConfig config) {
  config.many_constraints = true;
  return solve(problem, config);
}

}  // namespace mdvi
