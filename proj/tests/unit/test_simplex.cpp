#include "rigel/errors.hpp"
#include "rigel/simplex.hpp"

#include <doctest.h>

#include <cmath>
#include <random>

using namespace rigel;
using Eigen::VectorXd;

TEST_CASE("one-dimensional quadratic") {
  auto f = [](const VectorXd& x) { return (x[0] - 3) * (x[0] - 3); };
  const auto r = minimize(f, VectorXd::Zero(1));
  CHECK(r.argmin[0] == doctest::Approx(3.0).epsilon(1e-4));
  CHECK(r.value <= 1e-8);
  CHECK(r.converged);
  CHECK(r.value == f(r.argmin));
}

TEST_CASE("rosenbrock") {
  auto f = [](const VectorXd& x) {
    return 100 * std::pow(x[1] - x[0] * x[0], 2) + std::pow(1 - x[0], 2);
  };
  OptimizerConfig cfg;
  cfg.tolerance = 1e-9;
  cfg.max_iterations = 5000;
  VectorXd start(2);
  start << -1.2, 1.0;
  const auto r = minimize(f, start, cfg);
  CHECK(std::abs(r.argmin[0] - 1.0) < 1e-3);
  CHECK(std::abs(r.argmin[1] - 1.0) < 1e-3);
}

TEST_CASE("budget exhaustion") {
  auto f = [](const VectorXd& x) { return x[0] * x[0]; };
  OptimizerConfig cfg;
  cfg.max_iterations = 1;
  cfg.restart_on_failure = false;
  VectorXd start(1);
  start << 5.0;
  const auto r = minimize(f, start, cfg);
  CHECK_FALSE(r.converged);
  CHECK(r.value <= f(start));
  CHECK(r.value == f(r.argmin));
}

TEST_CASE("non-finite objective") {
  auto f = [](const VectorXd& x) { return x[0] > 0.5 ? std::nan("") : x[0] * x[0]; };
  CHECK_THROWS_AS(minimize(f, VectorXd::Zero(1)), EvaluationError);
  auto g = [](const VectorXd&) { return INFINITY; };
  CHECK_THROWS_AS(minimize(g, VectorXd::Zero(2)), EvaluationError);
}

TEST_CASE("config validation") {
  OptimizerConfig cfg;
  CHECK_NOTHROW(cfg.validate());
  CHECK(cfg.iteration_budget(10) == 5000);
  cfg.tolerance = 0;
  CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
  cfg = {};
  cfg.expansion = 1.0;
  CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
  cfg = {};
  cfg.contraction = 1.0;
  CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
  cfg = {};
  cfg.shrink = 0.0;
  CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
  cfg = {};
  cfg.reflection = 0.0;
  CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
  cfg = {};
  cfg.max_iterations = -1;
  CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
}

TEST_CASE("random convex quadratics converge to the analytic minimum") {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(-3, 3);
  for (int trial = 0; trial < 30; ++trial) {
    const int n = 2 + trial % 9;
    Eigen::MatrixXd a = Eigen::MatrixXd::NullaryExpr(n, n, [&] { return u(rng); });
    const Eigen::MatrixXd h = a.transpose() * a + Eigen::MatrixXd::Identity(n, n);
    const VectorXd center = VectorXd::NullaryExpr(n, [&] { return u(rng); });
    auto f = [&](const VectorXd& x) { return (x - center).dot(h * (x - center)); };
    OptimizerConfig cfg;
    cfg.tolerance = 1e-8;
    cfg.max_iterations = 20000 * n;
    const VectorXd start = VectorXd::Zero(n);
    const auto r = minimize(f, start, cfg);
    CHECK(r.value <= f(start));
    CHECK((r.argmin - center).norm() < 1e-3);
  }
}

TEST_CASE("deterministic") {
  auto f = [](const VectorXd& x) { return (x.array() - 1.5).square().sum() + std::sin(x[0]); };
  const auto a = minimize(f, VectorXd::Zero(4));
  const auto b = minimize(f, VectorXd::Zero(4));
  CHECK(a.argmin == b.argmin);
  CHECK(a.value == b.value);
  CHECK(a.iterations == b.iterations);
}

TEST_CASE("float scalar") {
  auto f = [](const Eigen::VectorXf& x) { return (x[0] - 2.f) * (x[0] - 2.f) + x[1] * x[1]; };
  OptimizerConfig cfg;
  cfg.tolerance = 1e-4;
  const auto r = minimize(f, Eigen::VectorXf::Zero(2), cfg);
  CHECK(r.argmin[0] == doctest::Approx(2.0f).epsilon(1e-3));
}
