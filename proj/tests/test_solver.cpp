#include <gtest/gtest.h>

#include <cmath>

#include "mdvi/solver.hpp"
#include "test_support.hpp"

namespace {

using mdvi::Algorithm;
using mdvi::ConstraintFamily;
using mdvi::Criterion;
using mdvi::EuclideanBall;
using mdvi::SolverConfig;
using mdvi::StepKind;
using mdvi::Termination;
using mdvi::Vector;
using mdvi::VIProblem;

Vector vec(std::initializer_list<double> xs) {
  Vector v(static_cast<Eigen::Index>(xs.size()));
  Eigen::Index i = 0;
  for (double x : xs) v[i++] = x;
  return v;
}

SolverConfig config(int alg, Criterion crit, double eps) {
  SolverConfig c;
  c.algorithm = mdvi::algorithm_from_int(alg);
  c.criterion = crit;
  c.epsilon = eps;
  return c;
}

VIProblem<EuclideanBall> hphard(Eigen::Index n, Eigen::Index m, std::uint64_t seed) {
  return mdvi::generate_hphard({n, seed, mdvi::uniform_vector(n, seed, "hphard/q")},
                               mdvi::generate_linear_constraints({m, n, seed}));
}

// Offsets b shifted down so the constraints actually bite inside the ball.
VIProblem<EuclideanBall> tight_hphard(Eigen::Index n, Eigen::Index m, std::uint64_t seed) {
  mdvi::Matrix a(m, n);
  Vector b(m);
  const auto base = mdvi::generate_linear_constraints({m, n, seed});
  for (Eigen::Index i = 0; i < m; ++i) {
    a.row(i) = base.subgradient(static_cast<std::size_t>(i), Vector::Zero(n)).transpose();
    b[i] = -base.value(static_cast<std::size_t>(i), Vector::Zero(n)) * 0.2;
  }
  // F pushes toward -q, i.e. into the half-spaces with large <a_i, x>.
  return mdvi::generate_hphard({n, seed, -mdvi::uniform_vector(n, seed, "hphard/q")},
                               mdvi::linear_constraints(a, b));
}

double feasibility_slack(int alg, double eps, double m_g) {
  return (alg == 3 || alg == 5) ? eps * m_g : eps;
}

TEST(Solve, HpHardAdaptiveTerminatesQuickly) {
  const auto p = hphard(100, 10, 7);
  const auto r = mdvi::solve(p, config(2, Criterion::kOne, 0.05));
  EXPECT_EQ(r.termination, Termination::kCriterion1);
  EXPECT_LE(mdvi::eval_constraint_max(p.constraints, r.x_hat).value, 0.05);
  EXPECT_GE(r.iterations, 10u);
  EXPECT_LE(r.iterations, 10000u);
  EXPECT_EQ(*r.certified_bound, 0.05);
}

TEST(Solve, ConstantOperatorCriterion2Arithmetic) {
  // F = (2, 0), no active constraint: every step productive and criterion 2
  // for algorithm 1 fires at ceil(2 R^2 L_F^2 / eps^2) = ceil(2 * 0.5 * 4 / 0.0625) = 64.
  VIProblem<EuclideanBall> p{EuclideanBall::unit(2), {[](const Vector&) { return vec({2, 0}); }, 2.0, 0.0},
                             mdvi::inactive_constraint(2), std::nullopt};
  const auto r = mdvi::solve(p, config(1, Criterion::kTwo, 0.25));
  EXPECT_EQ(r.termination, Termination::kCriterion2);
  EXPECT_EQ(r.iterations, 64u);
  EXPECT_EQ(r.j_count, 0u);
  EXPECT_LT(r.x_hat[0], -0.5);
  EXPECT_EQ(r.x_hat[1], 0.0);
}

TEST(Solve, NoProductiveStepsIsAnError) {
  // g(x) = x_0 + 5 >= 4 on the unit ball.
  VIProblem<EuclideanBall> p{EuclideanBall::unit(2), {[](const Vector& x) -> Vector { return x; }, 1.0, 0.0},
                             mdvi::linear_constraints(mdvi::Matrix{{1.0, 0.0}}, vec({-5})), std::nullopt};
  SolverConfig c = config(2, Criterion::kOne, 0.05);
  c.max_iter = 50;
  try {
    mdvi::solve(p, c);
    FAIL() << "expected NoProductiveSteps";
  } catch (const mdvi::NoProductiveSteps& e) {
    EXPECT_EQ(e.iterations(), 50u);
    EXPECT_EQ(e.termination(), Termination::kMaxIter);
  }
}

TEST(Solve, ZeroSubgradientEndsTheRun) {
  // Step function constraint with a zero subgradient: nonsense input that the
  // solver must stop on rather than divide by zero.
  ConstraintFamily jump({{[](const Vector& x) { return x[0] > 0.5 ? 1.0 : -1.0; },
                          [](const Vector&) -> Vector { return Vector::Zero(2); }, 1.0}});
  VIProblem<EuclideanBall> p{EuclideanBall::unit(2), {[](const Vector&) { return vec({-1, 0}); }, 1.0, 0.0},
                             std::move(jump), std::nullopt};
  const auto r = mdvi::solve(p, config(2, Criterion::kOne, 0.1));
  EXPECT_EQ(r.termination, Termination::kDegenerateOperator);
  EXPECT_FALSE(r.certified_bound.has_value());
  EXPECT_GT(r.i_count, 0u);
}

TEST(Solve, StationaryStartIsKept) {
  // q = 0: F(0) = 0, so the iterate never moves and the output is the solution.
  const auto p = mdvi::generate_hphard({20, 2, {}}, mdvi::generate_linear_constraints({3, 20, 2}));
  for (int alg = 1; alg <= 7; ++alg) {
    const auto r = mdvi::solve(p, config(alg, Criterion::kOne, 0.1));
    EXPECT_EQ(r.x_hat, Vector::Zero(20)) << "alg " << alg;
    EXPECT_TRUE(r.termination == Termination::kCriterion1) << "alg " << alg;
  }
}

TEST(Solve, RejectsBadConfig) {
  const auto p = hphard(5, 2, 1);
  EXPECT_THROW(mdvi::solve(p, config(2, Criterion::kOne, 0.0)), std::invalid_argument);
  SolverConfig c = config(2, Criterion::kOne, 0.1);
  c.delta = -1;
  EXPECT_THROW(mdvi::solve(p, c), std::invalid_argument);
  c = config(2, Criterion::kOne, 0.1);
  c.max_iter = 0;
  EXPECT_THROW(mdvi::solve(p, c), std::invalid_argument);
  EXPECT_THROW(mdvi::algorithm_from_int(8), std::invalid_argument);

  mdvi::VIProblem<mdvi::EntropySimplex> game{mdvi::EntropySimplex(3),
                                              {[](const Vector& x) -> Vector { return x; }, 1.0, 0.0},
                                              mdvi::inactive_constraint(3), std::nullopt};
  EXPECT_THROW(mdvi::solve(game, config(7, Criterion::kOne, 0.1)), std::invalid_argument);
}

TEST(Solve, MatrixGameOnTheSimplex) {
  // Rock-paper-scissors: F(x) = A x with A skew, unique equilibrium at the centre.
  const mdvi::Matrix a{{0, 1, -1}, {-1, 0, 1}, {1, -1, 0}};
  mdvi::VIProblem<mdvi::EntropySimplex> game{mdvi::EntropySimplex(vec({0.6, 0.3, 0.1})),
                                              {[a](const Vector& x) -> Vector { return a * x; }, 1.0, 0.0},
                                              mdvi::inactive_constraint(3), std::nullopt};
  const auto r = mdvi::solve(game, config(2, Criterion::kTwo, 0.01));
  EXPECT_EQ(r.termination, Termination::kCriterion2);
  EXPECT_TRUE(game.geometry.contains(r.x_hat));
  // Gap of x_hat over the simplex: max_x <A x, x_hat - x> = max_x <A x, x_hat> = max_i (A^T x_hat)_i.
  const double gap = (a.transpose() * r.x_hat).maxCoeff();
  EXPECT_LE(gap, *r.certified_bound);
}

TEST(Property, SwitchingAndContainment) {
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    const auto p = tight_hphard(4, 3, seed);
    for (int alg = 1; alg <= 7; ++alg) {
      SolverConfig c = config(alg, Criterion::kTwo, 0.1);
      c.trace_every = 1;
      const auto r = mdvi::solve(p, c);
      ASSERT_EQ(r.i_count + r.j_count, r.iterations);
      ASSERT_EQ(r.trace.size(), r.iterations + 1);
      std::uint64_t prod = 0, non = 0;
      for (std::size_t t = 0; t < r.trace.size(); ++t) {
        const auto& rec = r.trace[t];
        ASSERT_TRUE(p.geometry.contains(rec.x));
        if (t + 1 == r.trace.size()) {
          ASSERT_EQ(rec.kind, StepKind::kFinal);
          continue;
        }
        ASSERT_EQ(rec.iter, t);
        ASSERT_GT(rec.step_size, 0.0);
        const bool productive = rec.g_value <= mdvi::productivity_threshold(c.algorithm, c.epsilon, p.constraints.max_lipschitz());
        ASSERT_EQ(rec.kind == StepKind::kProductive, productive);
        (productive ? prod : non) += 1;
      }
      ASSERT_EQ(prod, r.i_count);
      ASSERT_EQ(non, r.j_count);
      ASSERT_TRUE(p.geometry.contains(r.x_hat));
    }
  }
}

TEST(Property, TightConstraintsProduceNonProductiveSteps) {
  std::uint64_t total_j = 0;
  for (std::uint64_t seed = 1; seed <= 5; ++seed) total_j += mdvi::solve(tight_hphard(4, 3, seed), config(2, Criterion::kTwo, 0.1)).j_count;
  EXPECT_GT(total_j, 0u) << "test instances should exercise the switching";
}

TEST(Property, OutputFeasibility) {
  for (std::uint64_t seed = 1; seed <= 4; ++seed) {
    const auto p = tight_hphard(6, 4, seed);
    const double mg = p.constraints.max_lipschitz();
    for (int alg = 1; alg <= 7; ++alg)
      for (auto crit : {Criterion::kOne, Criterion::kTwo}) {
        SolverConfig c = config(alg, crit, 0.05);
        const auto r = mdvi::solve(p, c);
        if (r.termination == Termination::kMaxIter) continue;  // criterion 1 may never fire
        const double g = mdvi::eval_constraint_max(p.constraints, r.x_hat).value;
        ASSERT_LE(g, feasibility_slack(alg, 0.05, mg) + 1e-9) << "alg " << alg << " seed " << seed;
      }
  }
}

TEST(Property, Criterion2WithinCap) {
  for (std::uint64_t seed = 1; seed <= 3; ++seed) {
    const auto p = tight_hphard(5, 3, seed);
    for (int alg = 1; alg <= 7; ++alg) {
      SolverConfig c = config(alg, Criterion::kTwo, 0.1);
      const auto cap = mdvi::criterion2_iteration_cap(c.algorithm, mdvi::constants_of(p), c.epsilon);
      c.max_iter = cap;
      const auto r = mdvi::solve(p, c);
      ASSERT_EQ(r.termination, Termination::kCriterion2) << "alg " << alg;
      ASSERT_LE(r.iterations, cap);
    }
  }
}

TEST(Property, DefaultBudgetIsTenCaps) {
  const auto p = hphard(5, 2, 1);
  const auto c = config(3, Criterion::kTwo, 0.1);
  EXPECT_EQ(mdvi::default_max_iter(p, c), 10 * mdvi::criterion2_iteration_cap(c.algorithm, mdvi::constants_of(p), 0.1));
}

TEST(Property, AlgorithmOneWeightedEqualsPlainAverage) {
  for (std::uint64_t seed = 1; seed <= 3; ++seed) {
    const auto p = tight_hphard(3, 2, seed);
    SolverConfig c = config(1, Criterion::kTwo, 0.1);
    c.trace_every = 1;
    const auto r = mdvi::solve(p, c);
    Vector sum = Vector::Zero(3);
    std::uint64_t count = 0;
    for (const auto& rec : r.trace)
      if (rec.kind == StepKind::kProductive) {
        sum += rec.x;
        ++count;
      }
    ASSERT_EQ(count, r.i_count);
    EXPECT_LE((r.x_hat - sum / static_cast<double>(count)).norm(), 1e-12);
  }
}

TEST(Property, AlgorithmSevenUsesPlainAverage) {
  const auto p = tight_hphard(3, 2, 2);
  SolverConfig c = config(7, Criterion::kTwo, 0.1);
  c.trace_every = 1;
  const auto r = mdvi::solve(p, c);
  Vector sum = Vector::Zero(3);
  for (const auto& rec : r.trace)
    if (rec.kind == StepKind::kProductive) sum += rec.x;
  EXPECT_LE((r.x_hat - sum / static_cast<double>(r.i_count)).norm(), 1e-12);
}

TEST(Property, WeightedAverageForAdaptiveRules) {
  const auto p = tight_hphard(3, 2, 3);
  SolverConfig c = config(4, Criterion::kTwo, 0.1);
  c.trace_every = 1;
  const auto r = mdvi::solve(p, c);
  Vector num = Vector::Zero(3);
  double den = 0.0;
  for (const auto& rec : r.trace)
    if (rec.kind == StepKind::kProductive) {
      num += rec.step_size * rec.x;
      den += rec.step_size;
    }
  EXPECT_LE((r.x_hat - num / den).norm(), 1e-12);
  EXPECT_DOUBLE_EQ(r.acc.sum_wf, den);
}

TEST(Property, Deterministic) {
  const auto p = tight_hphard(4, 3, 9);
  for (int alg = 1; alg <= 7; ++alg) {
    SolverConfig c = config(alg, Criterion::kTwo, 0.1);
    c.trace_every = 1;
    const auto a = mdvi::solve(p, c), b = mdvi::solve(p, c);
    ASSERT_EQ(a.trace.size(), b.trace.size());
    for (std::size_t t = 0; t < a.trace.size(); ++t) {
      ASSERT_EQ(a.trace[t].x, b.trace[t].x);
      ASSERT_EQ(a.trace[t].step_size, b.trace[t].step_size);
      ASSERT_EQ(a.trace[t].g_value, b.trace[t].g_value);
    }
    ASSERT_EQ(a.x_hat, b.x_hat);
  }
}

TEST(Property, TraceDownsampling) {
  const auto p = tight_hphard(4, 3, 1);
  SolverConfig c = config(2, Criterion::kTwo, 0.1);
  c.trace_every = 7;
  const auto r = mdvi::solve(p, c);
  ASSERT_EQ(r.trace.size(), (r.iterations + 6) / 7 + 1);
  for (std::size_t t = 0; t + 1 < r.trace.size(); ++t) ASSERT_EQ(r.trace[t].iter, 7 * t);
  // Coordinates are dropped above four dimensions.
  const auto big = mdvi::solve(hphard(10, 2, 1), c);
  EXPECT_EQ(big.trace.front().x.size(), 0);
}

// ---------------------------------------------------------------------------
// Many-constraints mode

TEST(ManyConstraints, SingleConstraintMatchesPlainSolve) {
  for (std::uint64_t seed = 1; seed <= 3; ++seed) {
    const auto p = tight_hphard(4, 1, seed);
    for (int alg = 1; alg <= 7; ++alg) {
      SolverConfig c = config(alg, Criterion::kTwo, 0.1);
      c.trace_every = 1;
      const auto a = mdvi::solve(p, c);
      const auto b = mdvi::solve_many_constraints(p, c);
      ASSERT_EQ(a.trace.size(), b.trace.size());
      for (std::size_t t = 0; t < a.trace.size(); ++t) {
        ASSERT_EQ(a.trace[t].x, b.trace[t].x);
        ASSERT_EQ(a.trace[t].kind, b.trace[t].kind);
        ASSERT_EQ(a.trace[t].step_size, b.trace[t].step_size);
      }
    }
  }
}

TEST(ManyConstraints, InactiveConstraintsGiveUnconstrainedRun) {
  ConstraintFamily all_off({{[](const Vector&) { return -1.0; }, [](const Vector&) { return Vector(Vector::Zero(3)); }, 1.0},
                            {[](const Vector&) { return -1.0; }, [](const Vector&) { return Vector(Vector::Zero(3)); }, 1.0}});
  auto p = mdvi::generate_hphard({3, 1, mdvi::uniform_vector(3, 1, "hphard/q")}, std::move(all_off));
  const auto r = mdvi::solve_many_constraints(p, config(2, Criterion::kTwo, 0.1));
  EXPECT_EQ(r.j_count, 0u);
  EXPECT_EQ(r.i_count, r.iterations);
}

TEST(ManyConstraints, StepsAlongFirstViolatedConstraint) {
  // Both constraints violated at the start; the first one must drive the step.
  ConstraintFamily two = mdvi::linear_constraints(mdvi::Matrix{{1.0, 0.0}, {0.0, 3.0}}, vec({-0.5, -0.9}));
  VIProblem<EuclideanBall> p{EuclideanBall::unit(2), {[](const Vector&) { return vec({0, 1}); }, 1.0, 0.0},
                             std::move(two), std::nullopt};
  SolverConfig c = config(2, Criterion::kTwo, 0.05);
  c.trace_every = 1;
  c.max_iter = 200;
  const auto r = mdvi::solve_many_constraints(p, c);
  ASSERT_EQ(r.trace[0].kind, StepKind::kNonProductive);
  EXPECT_DOUBLE_EQ(r.trace[0].g_value, 0.5);  // g_0, not the larger g_1 = 0.9
  EXPECT_DOUBLE_EQ(r.trace[0].norm_used, 1.0);
  const auto plain = mdvi::solve(p, c);
  EXPECT_DOUBLE_EQ(plain.trace[0].g_value, 0.9);
  EXPECT_DOUBLE_EQ(plain.trace[0].norm_used, 3.0);
}

TEST(ManyConstraints, HpHardGuarantee) {
  for (std::uint64_t seed = 1; seed <= 3; ++seed) {
    const auto p = hphard(50, 10, seed);
    const auto r = mdvi::solve_many_constraints(p, config(2, Criterion::kOne, 0.05));
    ASSERT_EQ(r.termination, Termination::kCriterion1);
    for (double g : r.feasibility) ASSERT_LE(g, 0.05);
    EXPECT_EQ(*r.certified_bound, 0.05);
    const auto tight = tight_hphard(50, 10, seed);
    const auto rt = mdvi::solve_many_constraints(tight, config(2, Criterion::kTwo, 0.05));
    for (double g : rt.feasibility) ASSERT_LE(g, 0.05 + 1e-9);
  }
}

}  // namespace
