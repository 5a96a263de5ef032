// Downhill simplex (Nelder-Mead) minimization.
#pragma once

#include "rigel/errors.hpp"

#include <Eigen/Core>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>
#include <stdexcept>
#include <vector>

namespace rigel {

struct OptimizerConfig {
  int max_iterations = 0;  // 0 selects 500 * n
  double tolerance = 1e-6;
  double initial_step = 1.0;
  double reflection = 1.0;
  double expansion = 2.0;
  double contraction = 0.5;
  double shrink = 0.5;
  bool restart_on_failure = true;

  void validate() const;

  int iteration_budget(Eigen::Index n) const {
    return max_iterations > 0 ? max_iterations : static_cast<int>(500 * n);
  }
};

template <typename Scalar>
struct BasicOptimizeResult {
  Eigen::Matrix<Scalar, Eigen::Dynamic, 1> argmin;
  Scalar value{};
  int iterations = 0;
  bool converged = false;
};

using OptimizeResult = BasicOptimizeResult<double>;

namespace detail {

template <typename Derived>
[[noreturn]] void throw_non_finite(const Eigen::MatrixBase<Derived>& p) {
  std::ostringstream os;
  os << "objective returned a non-finite value at (";
  for (Eigen::Index i = 0; i < p.size(); ++i) os << (i ? ", " : "") << p(i);
  os << ")";
  throw EvaluationError(os.str());
}

// One Nelder-Mead run from `start`. The best vertex never gets worse, so the
// returned value is <= objective(start).
template <typename Scalar, typename Objective>
BasicOptimizeResult<Scalar> nelder_mead_run(Objective& objective,
                                            const Eigen::Matrix<Scalar, Eigen::Dynamic, 1>& start,
                                            Scalar start_value, const OptimizerConfig& cfg,
                                            Scalar step, int budget) {
  using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;
  using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
  const Eigen::Index n = start.size();
  const Scalar tol = Scalar(cfg.tolerance);

  auto eval = [&](const Vector& p) {
    const Scalar v = objective(p);
    if (!std::isfinite(v)) throw_non_finite(p);
    return v;
  };

  Matrix simplex(n, n + 1);
  std::vector<Scalar> values(n + 1);
  simplex.col(0) = start;
  values[0] = start_value;
  for (Eigen::Index i = 0; i < n; ++i) {
    simplex.col(i + 1) = start;
    simplex(i, i + 1) += step;
    values[i + 1] = eval(simplex.col(i + 1));
  }

  std::vector<Eigen::Index> order(n + 1);
  Vector centroid(n), reflected(n), trial(n);
  BasicOptimizeResult<Scalar> result;

  auto diameter_below_tol = [&]() {
    const Scalar tol2 = tol * tol;
    for (Eigen::Index i = 0; i <= n; ++i)
      for (Eigen::Index j = i + 1; j <= n; ++j)
        if ((simplex.col(i) - simplex.col(j)).squaredNorm() >= tol2) return false;
    return true;
  };

  int iter = 0;
  for (;;) {
    std::iota(order.begin(), order.end(), Eigen::Index{0});
    std::stable_sort(order.begin(), order.end(),
                     [&](Eigen::Index a, Eigen::Index b) { return values[a] < values[b]; });
    const Eigen::Index best = order.front();
    const Eigen::Index worst = order.back();
    const Eigen::Index second_worst = order[n - 1];

    if (values[worst] - values[best] < tol * tol || diameter_below_tol()) {
      result.converged = true;
      break;
    }
    if (iter >= budget) break;
    ++iter;

    centroid.setZero();
    for (Eigen::Index k = 0; k < n; ++k) centroid += simplex.col(order[k]);
    centroid /= Scalar(n);

    reflected = centroid + Scalar(cfg.reflection) * (centroid - simplex.col(worst));
    const Scalar f_reflected = eval(reflected);

    if (f_reflected < values[best]) {
      trial = centroid + Scalar(cfg.expansion) * (reflected - centroid);
      const Scalar f_expanded = eval(trial);
      if (f_expanded < f_reflected) {
        simplex.col(worst) = trial;
        values[worst] = f_expanded;
      } else {
        simplex.col(worst) = reflected;
        values[worst] = f_reflected;
      }
      continue;
    }
    if (f_reflected < values[second_worst]) {
      simplex.col(worst) = reflected;
      values[worst] = f_reflected;
      continue;
    }

    bool accepted = false;
    if (f_reflected < values[worst]) {
      trial = centroid + Scalar(cfg.contraction) * (reflected - centroid);
      const Scalar f_contracted = eval(trial);
      if (f_contracted <= f_reflected) {
        simplex.col(worst) = trial;
        values[worst] = f_contracted;
        accepted = true;
      }
    } else {
      trial = centroid + Scalar(cfg.contraction) * (simplex.col(worst) - centroid);
      const Scalar f_contracted = eval(trial);
      if (f_contracted < values[worst]) {
        simplex.col(worst) = trial;
        values[worst] = f_contracted;
        accepted = true;
      }
    }
    if (accepted) continue;

    // shrink toward the best vertex
    for (Eigen::Index k = 1; k <= n; ++k) {
      const Eigen::Index i = order[k];
      simplex.col(i) = simplex.col(best) + Scalar(cfg.shrink) * (simplex.col(i) - simplex.col(best));
      values[i] = eval(simplex.col(i));
    }
  }

  const auto best_it = std::min_element(values.begin(), values.end());
  const auto best = static_cast<Eigen::Index>(best_it - values.begin());
  result.argmin = simplex.col(best);
  result.value = *best_it;
  result.iterations = iter;
  return result;
}

}  // namespace detail

/// Minimizes `objective` (callable on an n-vector, returning Scalar) from
/// `start`. The initial simplex is `start` plus one vertex offset by
/// cfg.initial_step along each axis. Stops when the largest vertex-to-vertex
/// distance drops below cfg.tolerance, the value spread below tolerance^2, or
/// the iteration budget runs out. A run that exhausts its budget is restarted
/// once from its best vertex with half the step.
///
/// Throws EvaluationError if the objective returns NaN or infinity.
template <typename Objective, typename Derived>
BasicOptimizeResult<typename Derived::Scalar> minimize(Objective&& objective,
                                                       const Eigen::MatrixBase<Derived>& start,
                                                       const OptimizerConfig& cfg = {}) {
  using Scalar = typename Derived::Scalar;
  using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;
  if (start.size() == 0) throw std::invalid_argument("minimize: empty start vector");
  if (!start.allFinite()) throw std::invalid_argument("minimize: start vector is not finite");

  const Vector x0 = start;
  const int budget = cfg.iteration_budget(x0.size());
  Scalar f0 = objective(x0);
  if (!std::isfinite(f0)) detail::throw_non_finite(x0);

  auto result = detail::nelder_mead_run<Scalar>(objective, x0, f0, cfg, Scalar(cfg.initial_step),
                                                budget);
  if (!result.converged && cfg.restart_on_failure) {
    auto retry = detail::nelder_mead_run<Scalar>(objective, result.argmin, result.value, cfg,
                                                 Scalar(cfg.initial_step / 2), budget);
    retry.iterations += result.iterations;
    if (retry.value <= result.value) return retry;
    result.iterations = retry.iterations;
  }
  return result;
}

}  // namespace rigel
