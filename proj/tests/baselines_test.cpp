#include <cmath>
#include <limits>
#include <numbers>

#include <gtest/gtest.h>

#include "manibo/baselines.hpp"
#include "manibo/error.hpp"
#include "manibo/experiments.hpp"
#include "support.hpp"

namespace manibo {
namespace {

Eigen::MatrixXd vec(std::initializer_list<double> xs) {
  Eigen::MatrixXd v(static_cast<Eigen::Index>(xs.size()), 1);
  Eigen::Index i = 0;
  for (double x : xs) v(i++, 0) = x;
  return v;
}

// f∘unembed has ambient gradient equal to the tangent part of grad f; checked
// against central differences on random probes for every gradient objective.
void expect_gradient_matches(const GradObjective& g, Rng& rng, int probes) {
  const ManifoldKind kind = g.base.kind;
  for (int i = 0; i < probes; ++i) {
    const ManifoldPoint x = random_point(kind, rng);
    const Ambient want = project_to_tangent(x, g.grad(x)).direction;
    const Ambient fd = testing::fd_gradient(kind, embed(x), [&](const Ambient& v) {
      return g.base.eval(unembed(kind, v));
    });
    EXPECT_LT((project_to_tangent(x, fd).direction - want).norm(), 1e-5 * want.norm())
        << kind.name();
  }
}

TEST(GradObjectives, MatchFiniteDifferences) {
  Rng rng(1);
  expect_gradient_matches(frechet_grad_objective(latitude_circle(8, -0.5)), rng, 20);
  for (const auto& kind : testing::test_kinds()) {
    FrechetProblem p;
    for (int i = 0; i < 4; ++i) p.data.push_back(random_point(kind, rng));
    expect_gradient_matches(frechet_grad_objective(p), rng, 10);
  }
  const auto spd = generate_spd_regression_data(75, 0.1, 42).at(0.3);
  expect_gradient_matches(spd_regression_grad_objective(spd), rng, 20);
}

TEST(RiemannianGd, StartAtMinimizerStopsImmediately) {
  const FrechetProblem p = latitude_circle(8, -0.5);
  const GdResult r = riemannian_gd(frechet_grad_objective(p), extrinsic_mean_oracle(p));
  EXPECT_EQ(r.iterations, 0);
  EXPECT_EQ(r.trace.records.size(), 1u);
  EXPECT_EQ(r.grad_evals, 1);
}

TEST(RiemannianGd, ConvergesToSouthPole) {
  const FrechetProblem p = latitude_circle(8, -0.5);
  const GradObjective g = frechet_grad_objective(p);
  Rng rng(2);
  for (int trial = 0; trial < 10; ++trial) {
    ManifoldPoint x0 = random_point(g.base.kind, rng);
    while (x0.coords()(2, 0) > 0.999) x0 = random_point(g.base.kind, rng);
    GdOptions opts;
    opts.max_iters = 100;
    const GdResult r = riemannian_gd(g, x0, opts);
    EXPECT_LE(r.iterations, 100);
    EXPECT_LT((r.x.coords() - vec({0, 0, -1})).norm(), 1e-6);
  }
}

TEST(RiemannianGd, TraceDecreasesAndBudgetHolds) {
  Rng rng(3);
  for (const auto& kind : testing::test_kinds()) {
    FrechetProblem p;
    for (int i = 0; i < 3; ++i) p.data.push_back(random_point(kind, rng));
    const GradObjective g = frechet_grad_objective(p);
    GdOptions opts;
    opts.max_cost = 15;
    opts.max_iters = 1000;
    const GdResult r = riemannian_gd(g, random_point(kind, rng), opts);
    EXPECT_LE(r.f_evals + r.grad_evals, 15);
    for (std::size_t s = 1; s < r.trace.records.size(); ++s) {
      EXPECT_LT(r.trace.records[s].f_best, r.trace.records[s - 1].f_best);
      EXPECT_EQ(r.trace.records[s].f_next, r.trace.records[s].f_best);
    }
    EXPECT_EQ(r.f, r.trace.records.back().f_best);
  }
}

TEST(RiemannianGd, SpdRetractionFailureBacktracks) {
  // A huge step makes the retraction leave the representable range; GD must
  // recover by halving rather than abort.
  const auto problem = generate_spd_regression_data(75, 0.1, 42).at(0.5);
  const GradObjective g = spd_regression_grad_objective(problem);
  GdOptions opts;
  opts.step = 1e3;
  opts.max_iters = 50;
  const GdResult r = riemannian_gd(g, random_point(g.base.kind, 5), opts);
  EXPECT_LT(r.f, g.base.eval(random_point(g.base.kind, 5)));
}

// Quadratic restricted to the unit circle, minimized on a dense angle grid.
TEST(NelderMead, CircleQuadraticMatchesGrid) {
  const auto s1 = ManifoldKind::sphere(1);
  Eigen::Matrix2d a;
  a << 2.0, 0.7, 0.7, -1.0;
  const Eigen::Vector2d b(0.3, -0.4);
  const Objective obj{s1,
                      [&](const ManifoldPoint& x) {
                        const Eigen::Vector2d v = x.coords().col(0);
                        return v.dot(a * v) + b.dot(v);
                      },
                      std::nullopt};
  double best = std::numeric_limits<double>::infinity();
  Eigen::Vector2d arg;
  for (int i = 0; i < 1000000; ++i) {
    const double t = 2 * std::numbers::pi * i / 1000000;
    const Eigen::Vector2d v(std::cos(t), std::sin(t));
    const double f = v.dot(a * v) + b.dot(v);
    if (f < best) {
      best = f;
      arg = v;
    }
  }
  NelderMeadOptions opts;
  opts.max_evals = 400;
  opts.tol = 1e-10;
  const NelderMeadResult r = nelder_mead(obj, ManifoldPoint(s1, vec({0.0, 1.0})), opts);
  EXPECT_LT((r.x.coords().col(0) - arg).norm(), 1e-4);
}

TEST(NelderMead, GrassmannWithinFivePercentInSixtyEvals) {
  int reached = 0;
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    const auto problem = random_grassmann_problem(3, 6, 2, seed);
    const Objective obj = grassmann_objective(problem);
    const double target = 1.05 * svd_oracle(problem).value;
    NelderMeadOptions opts;
    opts.max_evals = 60;
    const NelderMeadResult r = nelder_mead(obj, random_point(obj.kind, seed), opts);
    EXPECT_LE(r.evaluations, 60);
    if (r.f <= target) ++reached;
  }
  EXPECT_GE(reached, 3);
}

TEST(NelderMead, ConstantObjectiveKeepsStart) {
  const auto kind = ManifoldKind::grassmann(2, 3);
  const ManifoldPoint x0 = random_point(kind, 3);
  const Objective obj{kind, [](const ManifoldPoint&) { return 1.0; }, std::nullopt};
  NelderMeadOptions opts;
  opts.max_evals = 40;
  const NelderMeadResult r = nelder_mead(obj, x0, opts);
  EXPECT_EQ(r.evaluations, 40);
  EXPECT_LT(extrinsic_distance(r.x, x0), 1e-12);
}

TEST(NelderMead, OnlyValidPointsAndMonotoneIncumbent) {
  Rng rng(6);
  for (const auto& kind : testing::test_kinds()) {
    const ManifoldPoint target = random_point(kind, rng);
    int invalid = 0;
    const Objective obj{kind,
                        [&](const ManifoldPoint& x) {
                          try {
                            ManifoldPoint check(kind, x.coords());
                          } catch (const Error&) {
                            ++invalid;
                          }
                          return std::pow(extrinsic_distance(x, target), 2);
                        },
                        OracleOptimum{target, 0.0}};
    const NelderMeadResult r = nelder_mead(obj, random_point(kind, rng));
    EXPECT_EQ(invalid, 0);
    EXPECT_EQ(static_cast<int>(r.trace.records.size()), r.evaluations);
    for (std::size_t s = 1; s < r.trace.records.size(); ++s) {
      EXPECT_LE(r.trace.records[s].f_best, r.trace.records[s - 1].f_best);
    }
    EXPECT_LT(r.f, obj.eval(r.trace.records.front().best_point.value()) + 1e-15);
  }
}

}  // namespace
}  // namespace manibo
