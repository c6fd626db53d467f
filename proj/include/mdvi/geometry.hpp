#pragma once

#include <algorithm>
#include <cmath>
#include <concepts>
#include <functional>
#include <limits>
#include <stdexcept>
#include <string>
#include <utility>

#include <Eigen/Core>

namespace mdvi {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

/// Points farther than this (in the primal norm) from the feasible set are
/// rejected by membership checks.
inline constexpr double kMembershipTolerance = 1e-9;

struct Box {
  Vector lower;
  Vector upper;
};

// A normed space with a prox function and a compact feasible set. The
// geometry owns the exact proximal mapping; every solver step goes through
// it.
template <class G>
concept Geometry = requires(const G& g, const Vector& x, const Vector& p) {
  { g.dimension() } -> std::convertible_to<Eigen::Index>;
  { g.primal_norm(x) } -> std::convertible_to<double>;
  { g.dual_norm(p) } -> std::convertible_to<double>;
  { g.psi(x) } -> std::convertible_to<double>;
  { g.psi_gradient(x) } -> std::convertible_to<Vector>;
  { g.sigma() } -> std::convertible_to<double>;
  { g.divergence(x, x) } -> std::convertible_to<double>;
  { g.contains(x) } -> std::convertible_to<bool>;
  { g.diameter() } -> std::convertible_to<double>;
  { g.r_squared() } -> std::convertible_to<double>;
  { g.theta_squared() } -> std::convertible_to<double>;
  { g.start() } -> std::convertible_to<Vector>;
  { g.prox(x, p) } -> std::convertible_to<Vector>;
  { g.bounding_box() } -> std::convertible_to<Box>;
};

// psi = 0.5 * ||x||_2^2 on the ball {x : ||x - c||_2 <= r}. Self-dual norm,
// sigma = 1, and the proximal mapping is a projection of x - p.
class EuclideanBall {
 public:
  EuclideanBall(Vector center, double radius)
      : EuclideanBall(center, radius, center) {}

  EuclideanBall(Vector center, double radius, Vector start)
      : center_(std::move(center)), radius_(radius), start_(std::move(start)) {
    if (!(radius_ > 0.0)) throw std::invalid_argument("ball radius must be positive");
    if (center_.size() != start_.size())
      throw std::invalid_argument("ball center and start point differ in dimension");
    if ((start_ - center_).norm() > radius_ + kMembershipTolerance)
      throw std::domain_error("start point lies outside the ball");
  }

  static EuclideanBall unit(Eigen::Index n) { return {Vector::Zero(n), 1.0}; }

  Eigen::Index dimension() const { return center_.size(); }
  const Vector& center() const { return center_; }
  double radius() const { return radius_; }

  double primal_norm(const Vector& x) const { return x.norm(); }
  double dual_norm(const Vector& p) const { return p.norm(); }

  double psi(const Vector& x) const { return 0.5 * x.squaredNorm(); }
  Vector psi_gradient(const Vector& x) const { return x; }
  double sigma() const { return 1.0; }
  double divergence(const Vector& x, const Vector& y) const {
    return 0.5 * (x - y).squaredNorm();
  }

  double distance_to_set(const Vector& x) const {
    return std::max(0.0, (x - center_).norm() - radius_);
  }
  bool contains(const Vector& x) const {
    return x.size() == dimension() && distance_to_set(x) <= kMembershipTolerance;
  }

  double diameter() const { return 2.0 * radius_; }
  // max_{x in Q} 0.5||x - x0||^2 is attained on the far side of the ball.
  double r_squared() const {
    const double reach = radius_ + (start_ - center_).norm();
    return 0.5 * reach * reach;
  }
  double theta_squared() const { return 2.0 * radius_ * radius_; }
  const Vector& start() const { return start_; }

  Vector project(const Vector& y) const {
    Vector d = y - center_;
    const double nd = d.norm();
    if (nd <= radius_) return y;
    return center_ + d * (radius_ / nd);
  }

  Vector prox(const Vector& x, const Vector& p) const { return project(x - p); }

  Box bounding_box() const {
    return {center_.array() - radius_, center_.array() + radius_};
  }

 private:
  Vector center_;
  double radius_;
  Vector start_;
};

// Negative entropy on the probability simplex. sigma = 1 with respect to the
// l1 norm, whose dual is l_inf. The proximal mapping is the multiplicative
// weights update.
class EntropySimplex {
 public:
  static constexpr double kFloor = 1e-300;

  explicit EntropySimplex(Eigen::Index n)
      : EntropySimplex(Vector::Constant(n, 1.0 / static_cast<double>(n))) {}

  explicit EntropySimplex(Vector start) : start_(std::move(start)) {
    if (start_.size() < 1) throw std::invalid_argument("simplex dimension must be positive");
    if (!contains(start_)) throw std::domain_error("start point lies outside the simplex");
    if (start_.minCoeff() <= 0.0)
      throw std::domain_error("simplex start point must lie in the relative interior");
  }

  Eigen::Index dimension() const { return start_.size(); }

  double primal_norm(const Vector& x) const { return x.lpNorm<1>(); }
  double dual_norm(const Vector& p) const { return p.lpNorm<Eigen::Infinity>(); }

  double psi(const Vector& x) const {
    double s = 0.0;
    for (Eigen::Index i = 0; i < x.size(); ++i)
      if (x[i] > 0.0) s += x[i] * std::log(x[i]);
    return s;
  }
  Vector psi_gradient(const Vector& x) const {
    return x.unaryExpr([](double v) { return std::log(std::max(v, kFloor)) + 1.0; });
  }
  double sigma() const { return 1.0; }

  // Generalized KL divergence; reduces to sum x ln(x/y) on the simplex.
  double divergence(const Vector& x, const Vector& y) const {
    double s = 0.0;
    for (Eigen::Index i = 0; i < x.size(); ++i) {
      const double yi = std::max(y[i], kFloor);
      if (x[i] > 0.0) s += x[i] * std::log(x[i] / yi);
      s += yi - x[i];
    }
    return std::max(s, 0.0);
  }

  double distance_to_set(const Vector& x) const {
    double neg = 0.0;
    for (Eigen::Index i = 0; i < x.size(); ++i) neg += std::max(0.0, -x[i]);
    return neg + std::abs(x.sum() - 1.0);
  }
  bool contains(const Vector& x) const {
    return x.size() == dimension() && distance_to_set(x) <= kMembershipTolerance;
  }

  double diameter() const { return 2.0; }
  // max_{x in simplex} KL(x, x0) = -ln min_i x0_i, attained at a vertex.
  double r_squared() const { return -std::log(start_.minCoeff()); }
  // KL is unbounded on the simplex, so pairwise-radius rules cannot be used.
  double theta_squared() const { return std::numeric_limits<double>::infinity(); }
  const Vector& start() const { return start_; }

  Vector prox(const Vector& x, const Vector& p) const {
    Vector logits(x.size());
    for (Eigen::Index i = 0; i < x.size(); ++i)
      logits[i] = std::log(std::max(x[i], kFloor)) - p[i];
    const double top = logits.maxCoeff();
    Vector w = (logits.array() - top).exp().max(kFloor).matrix();
    return w / w.sum();
  }

  Box bounding_box() const { return {Vector::Zero(dimension()), Vector::Ones(dimension())}; }

 private:
  Vector start_;
};

namespace detail {
template <Geometry G>
void require_member(const G& geom, const Vector& x, const char* what) {
  if (!geom.contains(x))
    throw std::domain_error(std::string(what) + " lies outside the feasible set");
}
}  // namespace detail

/// V(x, y) = psi(x) - psi(y) - <grad psi(y), x - y>, with both points checked
/// against the feasible set.
template <Geometry G>
double bregman_divergence(const G& geom, const Vector& x, const Vector& y) {
  detail::require_member(geom, x, "first argument of the Bregman divergence");
  detail::require_member(geom, y, "second argument of the Bregman divergence");
  return geom.divergence(x, y);
}

/// argmin_{u in Q} { <h p, u> + V(u, x) }.
template <Geometry G>
Vector mirror_step(const G& geom, const Vector& x, const Vector& p, double h) {
  if (!(h > 0.0) || !std::isfinite(h)) throw std::invalid_argument("mirror step size must be positive");
  detail::require_member(geom, x, "mirror step base point");
  Vector z = geom.prox(x, h * p);
  if (!geom.contains(z) || !z.allFinite())
    throw std::runtime_error("mirror step left the feasible set");
  return z;
}

/// Checks h (f(y) - f(x)) <= h^2/(2 sigma) ||f'(y)||_*^2 + V(x, y) - V(x, z)
/// for z the mirror step from y along f'(y). Test oracle only.
template <Geometry G>
bool verify_lemma1(const G& geom, const std::function<double(const Vector&)>& f_value,
                   const std::function<Vector(const Vector&)>& f_subgrad, const Vector& y,
                   const Vector& x, double h) {
  const Vector grad = f_subgrad(y);
  const Vector z = mirror_step(geom, y, grad, h);
  const double dn = geom.dual_norm(grad);
  const double lhs = h * (f_value(y) - f_value(x));
  const double rhs = h * h / (2.0 * geom.sigma()) * dn * dn + bregman_divergence(geom, x, y) -
                     bregman_divergence(geom, x, z);
  return lhs <= rhs + 1e-8;
}

}  // namespace mdvi
