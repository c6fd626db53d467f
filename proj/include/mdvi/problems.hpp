#pragma once

#include <cmath>
#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string_view>
#include <utility>
#include <vector>

#include <Eigen/Core>

#include "mdvi/geometry.hpp"
#include "mdvi/rng.hpp"

namespace mdvi {

using OperatorFn = std::function<Vector(const Vector&)>;
using ScalarFn = std::function<double(const Vector&)>;

/// A (delta-)monotone operator with a known bound on its dual norm over Q.
struct OperatorSpec {
  OperatorFn eval;
  double bound = 0.0;              // L_F
  double monotonicity_slack = 0.0;  // delta
};

struct Constraint {
  ScalarFn value;
  OperatorFn subgradient;
  double lipschitz = 0.0;
};

class ConstraintFamily {
 public:
  ConstraintFamily() = default;
  explicit ConstraintFamily(std::vector<Constraint> constraints)
      : constraints_(std::move(constraints)) {
    for (const auto& c : constraints_)
      if (!(c.lipschitz > 0.0))
        throw std::invalid_argument("constraint Lipschitz constants must be positive");
  }

  std::size_t size() const { return constraints_.size(); }
  bool empty() const { return constraints_.empty(); }

  double value(std::size_t i, const Vector& x) const { return constraints_.at(i).value(x); }
  Vector subgradient(std::size_t i, const Vector& x) const {
    return constraints_.at(i).subgradient(x);
  }
  double lipschitz(std::size_t i) const { return constraints_.at(i).lipschitz; }

  /// M_g.
  double max_lipschitz() const {
    double m = 0.0;
    for (const auto& c : constraints_) m = std::max(m, c.lipschitz);
    return m;
  }

  const std::vector<Constraint>& constraints() const { return constraints_; }

 private:
  std::vector<Constraint> constraints_;
};

struct ConstraintMax {
  double value;
  std::size_t index;  // smallest index attaining the max
};

inline ConstraintMax eval_constraint_max(const ConstraintFamily& c, const Vector& x) {
  if (c.empty()) throw std::invalid_argument("constraint family is empty");
  ConstraintMax best{c.value(0, x), 0};
  for (std::size_t i = 1; i < c.size(); ++i) {
    const double v = c.value(i, x);
    if (v > best.value) best = {v, i};
  }
  return best;
}

inline Vector subgradient_of_max(const ConstraintFamily& c, const Vector& x) {
  return c.subgradient(eval_constraint_max(c, x).index, x);
}

inline std::vector<double> constraint_values(const ConstraintFamily& c, const Vector& x) {
  std::vector<double> out(c.size());
  for (std::size_t i = 0; i < c.size(); ++i) out[i] = c.value(i, x);
  return out;
}

template <Geometry G>
struct VIProblem {
  G geometry;
  OperatorSpec op;
  ConstraintFamily constraints;
  std::optional<Vector> witness;  // a known feasible solution, tests only
};

/// Constants that enter step rules, stopping tests and certificates.
struct ProblemConstants {
  double r_squared = 0.0;
  double theta_squared = 0.0;
  double diameter = 0.0;
  double l_f = 0.0;
  double m_g = 0.0;
};

template <Geometry G>
ProblemConstants constants_of(const VIProblem<G>& p) {
  return {p.geometry.r_squared(), p.geometry.theta_squared(), p.geometry.diameter(), p.op.bound,
          p.constraints.max_lipschitz()};
}

// ---------------------------------------------------------------------------
// Constraint builders

/// g_i(x) = <a_i, x> - b_i with M_{g_i} = ||a_i||_2 (rows of `a`).
inline ConstraintFamily linear_constraints(Matrix a, Vector b) {
  if (a.rows() != b.size()) throw std::invalid_argument("linear constraints: row count mismatch");
  auto rows = std::make_shared<const Matrix>(std::move(a));
  auto rhs = std::make_shared<const Vector>(std::move(b));
  std::vector<Constraint> out;
  out.reserve(static_cast<std::size_t>(rows->rows()));
  for (Eigen::Index i = 0; i < rows->rows(); ++i) {
    const double lip = Vector(rows->row(i).transpose()).norm();
    out.push_back({[rows, rhs, i](const Vector& x) { return rows->row(i).dot(x) - (*rhs)[i]; },
                   [rows, i](const Vector&) -> Vector { return rows->row(i).transpose(); },
                   lip > 0.0 ? lip : 1.0});
  }
  return ConstraintFamily(std::move(out));
}

/// g(x) = -1 everywhere; stands in for "no functional constraint".
inline ConstraintFamily inactive_constraint(Eigen::Index n, double lipschitz = 1.0) {
  return ConstraintFamily({{[](const Vector&) { return -1.0; },
                            [n](const Vector&) -> Vector { return Vector::Zero(n); }, lipschitz}});
}

struct LinearConstraintsSpec {
  Eigen::Index m = 10;
  Eigen::Index n = 100;
  std::uint64_t seed = 0;
};

inline ConstraintFamily generate_linear_constraints(const LinearConstraintsSpec& spec) {
  if (spec.m < 1 || spec.n < 1) throw std::invalid_argument("linear constraints need m, n >= 1");
  const UniformStream a_stream(spec.seed, "linear/a");
  const UniformStream b_stream(spec.seed, "linear/b");
  Matrix a(spec.m, spec.n);
  Vector b(spec.m);
  for (Eigen::Index i = 0; i < spec.m; ++i) {
    for (Eigen::Index j = 0; j < spec.n; ++j)
      a(i, j) = a_stream.at(static_cast<std::uint64_t>(i * spec.n + j));
    b[i] = b_stream.at(static_cast<std::uint64_t>(i));
  }
  return linear_constraints(std::move(a), std::move(b));
}

// ---------------------------------------------------------------------------
// Harker-Pang

/// Largest singular value by power iteration on K^T K.
inline double spectral_norm(const Matrix& k, double rel_tol = 1e-6, int max_iter = 1000) {
  if (k.size() == 0) return 0.0;
  Vector v = Vector::Ones(k.cols()) / std::sqrt(static_cast<double>(k.cols()));
  double estimate = 0.0;
  for (int it = 0; it < std::max(max_iter, 200); ++it) {
    Vector w = k.transpose() * (k * v);
    const double nw = w.norm();
    if (nw == 0.0) return 0.0;
    const double next = std::sqrt(nw);  // ||K^T K v|| -> sigma_max^2 for unit v
    v = w / nw;
    if (std::abs(next - estimate) <= rel_tol * next) {
      estimate = next;
      break;
    }
    estimate = next;
  }
  return estimate;
}

inline Vector uniform_vector(Eigen::Index n, std::uint64_t seed, std::string_view tag) {
  const UniformStream s(seed, tag);
  Vector v(n);
  for (Eigen::Index i = 0; i < n; ++i) v[i] = s.at(static_cast<std::uint64_t>(i));
  return v;
}

struct HpHardSpec {
  Eigen::Index n = 100;
  std::uint64_t seed = 0;
  Vector q;  // empty means all zeros
  double radius = 1.0;
};

/// K = A A^T + B + C, with A entries U[0,1)/sqrt(n), B = S - S^T for S
/// entries U[0,1), and C diagonal U[0,1).
inline Matrix hphard_matrix(Eigen::Index n, std::uint64_t seed) {
  if (n < 1) throw std::invalid_argument("HpHard dimension must be >= 1");
  const UniformStream a_stream(seed, "hphard/A");
  const UniformStream s_stream(seed, "hphard/S");
  const UniformStream c_stream(seed, "hphard/C");
  const double a_scale = 1.0 / std::sqrt(static_cast<double>(n));
  Matrix a(n, n), s(n, n);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < n; ++j) {
      const auto idx = static_cast<std::uint64_t>(i * n + j);
      a(i, j) = a_scale * a_stream.at(idx);
      s(i, j) = s_stream.at(idx);
    }
  Matrix k = a * a.transpose() + (s - s.transpose());
  for (Eigen::Index i = 0; i < n; ++i) k(i, i) += c_stream.at(static_cast<std::uint64_t>(i));
  return k;
}

/// F(x) = K x + q on the ball of the given radius around 0, with
/// L_F = ||K||_2 r + ||q||_2.
inline VIProblem<EuclideanBall> generate_hphard(const HpHardSpec& spec,
                                                ConstraintFamily constraints) {
  if (!(spec.radius > 0.0)) throw std::invalid_argument("HpHard radius must be positive");
  const Vector q = spec.q.size() == 0 ? Vector::Zero(spec.n) : spec.q;
  if (q.size() != spec.n) throw std::invalid_argument("HpHard q has the wrong dimension");
  auto k = std::make_shared<const Matrix>(hphard_matrix(spec.n, spec.seed));
  auto offset = std::make_shared<const Vector>(q);
  OperatorSpec op{[k, offset](const Vector& x) -> Vector { return (*k) * x + *offset; },
                  spectral_norm(*k) * spec.radius + q.norm(), 0.0};
  std::optional<Vector> witness;
  if (q.isZero(0.0)) witness = Vector::Zero(spec.n);
  return {EuclideanBall(Vector::Zero(spec.n), spec.radius), std::move(op), std::move(constraints), std::move(witness)};
}

inline VIProblem<EuclideanBall> generate_hphard(const HpHardSpec& spec) {
  return generate_hphard(spec, inactive_constraint(spec.n));
}

// ---------------------------------------------------------------------------
// Forsaken game: min_x max_y x(y - 0.45) + h(x) - h(y), h(t) = t^2/4 - t^4/2 + t^6/6,
// subject to x^2 + 4y^2 <= 1.

namespace forsaken {

inline double h(double t) { return t * t / 4.0 - std::pow(t, 4) / 2.0 + std::pow(t, 6) / 6.0; }
inline double h_prime(double t) { return t / 2.0 - 2.0 * t * t * t + std::pow(t, 5); }
inline double objective(double x, double y) { return x * (y - 0.45) + h(x) - h(y); }

/// max |h'(t)| over |t| <= r, from the endpoints and the roots of h''.
inline double max_abs_h_prime(double r) {
  double best = std::abs(h_prime(r));
  // h''(t) = 1/2 - 6t^2 + 5t^4 = 0  =>  t^2 = (6 +- sqrt(26)) / 10
  for (double t2 : {(6.0 - std::sqrt(26.0)) / 10.0, (6.0 + std::sqrt(26.0)) / 10.0}) {
    const double t = std::sqrt(t2);
    if (t <= r) best = std::max(best, std::abs(h_prime(t)));
  }
  return best;
}

inline Vector operator_value(const Vector& z) {
  Vector out(2);
  out << z[1] - 0.45 + h_prime(z[0]), -(z[0] - h_prime(z[1]));
  return out;
}

}  // namespace forsaken

inline constexpr double kForsakenRadius = 1.2;

inline VIProblem<EuclideanBall> forsaken_problem(const Vector& start = Vector::Zero(2),
                                                 double radius = kForsakenRadius) {
  EuclideanBall ball(Vector::Zero(2), radius, start);
  // |F_1| <= |y| + 0.45 + H and |F_2| <= |x| + H with ||(x, y)|| <= r, so
  // ||F|| <= r + ||(0.45 + H, H)||.
  const double hmax = forsaken::max_abs_h_prime(radius);
  const double l_f = radius + std::hypot(0.45 + hmax, hmax);
  ConstraintFamily ellipse({{[](const Vector& z) { return z[0] * z[0] + 4.0 * z[1] * z[1] - 1.0; },
                             [](const Vector& z) -> Vector {
                               Vector g(2);
                               g << 2.0 * z[0], 8.0 * z[1];
                               return g;
                             },
                             8.0 * radius}});
  Vector desirable(2);
  desirable << 0.08, 0.4;
  return {std::move(ball), OperatorSpec{forsaken::operator_value, l_f, 0.0}, std::move(ellipse),
          desirable};
}

// ---------------------------------------------------------------------------
// Special cases

/// Minimization of a convex f: F = f'.
inline OperatorSpec wrap_minimization(OperatorFn f_subgrad, double bound, double delta = 0.0) {
  return {std::move(f_subgrad), bound, delta};
}

/// Convex-concave saddle f(u, v) with u = x[0..n_u), v = x[n_u..): F = (f_u, -f_v).
inline OperatorSpec wrap_saddle(std::function<Vector(const Vector&, const Vector&)> grad_u,
                                std::function<Vector(const Vector&, const Vector&)> grad_v,
                                Eigen::Index n_u, double bound) {
  return {[grad_u = std::move(grad_u), grad_v = std::move(grad_v), n_u](const Vector& x) -> Vector {
            const Vector u = x.head(n_u);
            const Vector v = x.tail(x.size() - n_u);
            Vector out(x.size());
            out.head(n_u) = grad_u(u, v);
            out.tail(x.size() - n_u) = -grad_v(u, v);
            return out;
          },
          bound, 0.0};
}

/// Fixed points of T: F(x) = x - T(x).
inline OperatorSpec wrap_fixed_point(OperatorFn t, double bound) {
  return {[t = std::move(t)](const Vector& x) -> Vector { return x - t(x); }, bound, 0.0};
}

}  // namespace mdvi
