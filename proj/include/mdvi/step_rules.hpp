#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <stdexcept>

#include "mdvi/problems.hpp"
#include "mdvi/solver_types.hpp"

namespace mdvi {

/// Norms at or below this are treated as zero by adaptive step rules.
inline constexpr double kDegenerateNorm = 1e-14;

enum class StepRole { kProductive, kNonProductive };

/// Algorithms 3 and 5 compare g against eps * M_g, the rest against eps.
inline double productivity_threshold(Algorithm alg, double eps, double m_g) {
  return (alg == Algorithm::k3 || alg == Algorithm::k5) ? eps * m_g : eps;
}

inline bool productivity_test(Algorithm alg, double eps, double m_g, double g_value) {
  return g_value <= productivity_threshold(alg, eps, m_g);
}

/// True when the step size for `role` divides by the current norm.
inline bool step_depends_on_norm(Algorithm alg, StepRole role) {
  switch (alg) {
    case Algorithm::k1: return false;
    case Algorithm::k2:
    case Algorithm::k4:
    case Algorithm::k7: return true;
    case Algorithm::k3:
    case Algorithm::k5:
    case Algorithm::k6: return role == StepRole::kProductive;
  }
  return false;
}

/// Step size h_k for the given role.
///
/// `current_norm` is ||F(x_k)||_* on productive steps and ||grad g(x_k)||_*
/// otherwise. For algorithm 7, `sum_m2` must already include M_k^2 and
/// `theta` is the pairwise prox radius.
inline double step_size(Algorithm alg, StepRole role, double eps, double l_f, double m_g,
                        double theta, double current_norm, double sum_m2) {
  if (step_depends_on_norm(alg, role) && alg != Algorithm::k7 && current_norm <= kDegenerateNorm)
    throw DegenerateStep("step rule received a vanishing norm");
  const bool prod = role == StepRole::kProductive;
  const double nrm = current_norm;
  switch (alg) {
    case Algorithm::k1: return prod ? eps / (l_f * l_f) : eps / (m_g * m_g);
    case Algorithm::k2: return eps / (nrm * nrm);
    case Algorithm::k3: return prod ? eps / (nrm * nrm) : eps / m_g;
    case Algorithm::k4: return prod ? eps / nrm : eps / (nrm * nrm);
    case Algorithm::k5: return prod ? eps / nrm : eps / m_g;
    case Algorithm::k6: return prod ? eps / (m_g * nrm) : eps / (m_g * m_g);
    case Algorithm::k7:
      if (!(sum_m2 > 0.0)) throw DegenerateStep("algorithm 7 step needs a positive norm sum");
      return theta / std::sqrt(sum_m2);
  }
  throw std::invalid_argument("unknown algorithm");
}

/// Evaluates stopping criterion 1 or 2 for the state after k completed steps.
inline bool check_stop(Algorithm alg, Criterion criterion, const Accumulators& s,
                       const ProblemConstants& c, double eps) {
  if (criterion == Criterion::kNone) return false;
  const bool first = criterion == Criterion::kOne;
  const double e2 = eps * eps;
  const auto n_i = static_cast<double>(s.i_count);
  const auto n_j = static_cast<double>(s.j_count);
  const double d = c.diameter;
  const double lf = c.l_f;
  const double mg = c.m_g;
  double rhs = 0.0;
  switch (alg) {
    case Algorithm::k1:
      rhs = e2 * n_i / (2.0 * lf * lf) + e2 * n_j / (2.0 * mg * mg);
      if (first) rhs -= eps * d * n_j / mg;
      break;
    case Algorithm::k2:
      rhs = e2 / 2.0 * s.sum_inv_m2;
      if (first) rhs -= mg * d * eps * s.sum_inv_g2;
      break;
    case Algorithm::k3:
      rhs = e2 / 2.0 * s.sum_inv_f2 + e2 / 2.0 * n_j;
      if (first) rhs -= eps * d * n_j;
      break;
    case Algorithm::k4:
      rhs = e2 / 2.0 * n_i + e2 / 2.0 * s.sum_inv_g2;
      if (first) rhs -= eps * mg * d * s.sum_inv_g2;
      break;
    case Algorithm::k5:
      rhs = e2 / 2.0 * (n_i + n_j);
      if (first) rhs -= eps * d * n_j;
      break;
    case Algorithm::k6:
      rhs = e2 / (2.0 * mg * mg) * (n_i + n_j);
      if (first) rhs -= eps * d * n_j / mg;
      break;
    case Algorithm::k7: {
      // k >= (2 theta / eps) sqrt(sum_{t<k} M_t^2) [+ |J| M_g D / eps]
      double need = 2.0 * std::sqrt(c.theta_squared) / eps * std::sqrt(s.sum_m2);
      if (first) need += n_j * mg * d / eps;
      return static_cast<double>(s.k) >= need;
    }
  }
  return c.r_squared <= rhs;
}

/// Iteration count by which criterion 2 is guaranteed to have fired.
inline std::uint64_t criterion2_iteration_cap(Algorithm alg, const ProblemConstants& c,
                                              double eps) {
  const double e2 = eps * eps;
  const double lf2 = c.l_f * c.l_f;
  const double mg2 = c.m_g * c.m_g;
  double bound = 0.0;
  switch (alg) {
    case Algorithm::k1:
    case Algorithm::k2: bound = 2.0 * c.r_squared * std::max(lf2, mg2) / e2; break;
    case Algorithm::k3: bound = 2.0 * c.r_squared * std::max(1.0, lf2) / e2; break;
    case Algorithm::k4: bound = 2.0 * c.r_squared * std::max(1.0, mg2) / e2; break;
    case Algorithm::k5: bound = 2.0 * c.r_squared / e2; break;
    case Algorithm::k6: bound = 2.0 * c.r_squared * mg2 / e2; break;
    case Algorithm::k7: bound = 4.0 * c.theta_squared * std::max(lf2, mg2) / e2; break;
  }
  if (!std::isfinite(bound)) throw std::invalid_argument("iteration cap is not finite");
  return static_cast<std::uint64_t>(std::ceil(bound));
}

}  // namespace mdvi
