#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "mdvi/problems.hpp"
#include "mdvi/solver_types.hpp"
#include "mdvi/step_rules.hpp"

namespace mdvi {

/// Upper bound on sup_{x in Q} <F(x), x_hat - x> and on g(x_hat).
struct Certificate {
  bool certified = false;
  double gap_bound = std::numeric_limits<double>::infinity();
  double feasibility_bound = std::numeric_limits<double>::infinity();
  Algorithm algorithm = Algorithm::k1;
  Criterion criterion = Criterion::kOne;
  double delta = 0.0;
  std::vector<std::pair<std::string, double>> components;

  double component(const std::string& name) const {
    for (const auto& [n, v] : components)
      if (n == name) return v;
    throw std::out_of_range("no certificate component named " + name);
  }
};

namespace detail {

struct BoundTerms {
  double accuracy;        // the eps-order term that criterion 1 leaves
  double infeasible = 0;  // extra term paid for non-productive steps under criterion 2
};

inline BoundTerms bound_terms(Algorithm alg, Criterion crit, const Accumulators& s,
                                const ProblemConstants& c, double eps) {
  const auto n_i = static_cast<double>(s.i_count);
  const auto n_j = static_cast<double>(s.j_count);
  const double d = c.diameter;
  const double lf = c.l_f;
  const double mg = c.m_g;
  BoundTerms t{eps};
  switch (alg) {
    case Algorithm::k1:
      t.infeasible = d * lf * lf * n_j / (mg * n_i);
      break;
    case Algorithm::k2:
      t.infeasible = mg * d * s.sum_inv_g2 / s.sum_inv_f2;
      break;
    case Algorithm::k3:
      t.infeasible = d * n_j / s.sum_inv_f2;
      break;
    case Algorithm::k4:
      t.accuracy = eps * lf;
      t.infeasible = mg * d * lf / n_i * s.sum_inv_g2;
      break;
    case Algorithm::k5:
      t.accuracy = eps * lf;
      t.infeasible = d * lf * n_j / n_i;
      break;
    case Algorithm::k6:
      t.accuracy = eps * lf / mg;
      t.infeasible = d * lf * n_j / (mg * n_i);
      break;
    case Algorithm::k7:
      t.infeasible = n_j * mg * d / n_i;
      break;
  }
  // With no non-productive steps the extra term vanishes identically.
  if (crit == Criterion::kOne || s.j_count == 0) t.infeasible = 0.0;
  return t;
}

}  // namespace detail

/// Accuracy guarantee for a run, as a function of the terminating criterion.
/// Runs that stopped on the iteration budget get an uncertified marker.
inline Certificate certificate(Algorithm alg, Termination termination, const Accumulators& s,
                               const ProblemConstants& c, double eps, double delta) {
  Certificate cert;
  cert.algorithm = alg;
  cert.delta = delta;
  cert.feasibility_bound = productivity_threshold(alg, eps, c.m_g);
  if (termination != Termination::kCriterion1 && termination != Termination::kCriterion2)
    return cert;
  if (s.i_count == 0) throw std::logic_error("certificate requested without productive steps");
  cert.criterion = termination == Termination::kCriterion1 ? Criterion::kOne : Criterion::kTwo;
  const auto terms = detail::bound_terms(alg, cert.criterion, s, c, eps);
  cert.certified = true;
  cert.components = {{"accuracy", terms.accuracy},
                     {"nonproductive", terms.infeasible},
                     {"delta", delta}};
  cert.gap_bound = (terms.accuracy + terms.infeasible) + delta;
  return cert;
}

inline Certificate certificate(const RunResult& result, const ProblemConstants& c,
                               const SolverConfig& config) {
  return certificate(config.algorithm, result.termination, result.acc, c, config.epsilon,
                     config.delta);
}

template <Geometry G>
Certificate certificate(const RunResult& result, const VIProblem<G>& problem,
                        const SolverConfig& config) {
  return certificate(result, constants_of(problem), config);
}

/// max <F(x), x_hat - x> over a regular grid of points x in Q with g(x) <= 0.
/// Brute force, so restricted to dimension <= 3.
template <Geometry G>
double gap_oracle(const VIProblem<G>& problem, const Vector& x_hat, std::uint32_t resolution) {
  const Eigen::Index n = problem.geometry.dimension();
  if (n > 3) throw std::invalid_argument("gap oracle supports dimension <= 3");
  if (resolution < 2) throw std::invalid_argument("gap oracle resolution must be >= 2");
  const Box box = problem.geometry.bounding_box();
  const Vector step = (box.upper - box.lower) / static_cast<double>(resolution - 1);

  std::uint64_t total = 1;
  for (Eigen::Index d = 0; d < n; ++d) total *= resolution;

  double best = -std::numeric_limits<double>::infinity();
  Vector x(n);
  for (std::uint64_t flat = 0; flat < total; ++flat) {
    std::uint64_t rest = flat;
    for (Eigen::Index d = 0; d < n; ++d) {
      x[d] = box.lower[d] + step[d] * static_cast<double>(rest % resolution);
      rest /= resolution;
    }
    if (!problem.geometry.contains(x)) continue;
    if (eval_constraint_max(problem.constraints, x).value > 0.0) continue;
    best = std::max(best, problem.op.eval(x).dot(x_hat - x));
  }
  return best;
}

template <Geometry G>
double distance_to_witness(const VIProblem<G>& problem, const Vector& x_hat) {
  if (!problem.witness) throw std::logic_error("problem carries no witness solution");
  return problem.geometry.primal_norm(x_hat - *problem.witness);
}

}  // namespace mdvi
