#pragma once

#include <functional>
#include <string>
#include <vector>

#include <Eigen/Core>

namespace mocap {

struct OptimSettings {
  double learningRate = 1.0; // scale of the trial step
  double gradTol = 1e-7; // infinity norm of the gradient
  double fTol = 1e-9; // |f_k - f_{k+1}| / max(1, |f_k|)
  double xTol = 1e-9; // infinity norm of the accepted step
  int maxIters = 10000;
  int history = 10;

  /// Throws std::invalid_argument if any setting is out of range.
  void validate() const;
};

enum class OptimStatus { ConvergedGrad, ConvergedF, ConvergedX, MaxIters, LineSearchFailure };

std::string toString(OptimStatus status);

struct OptimResult {
  Eigen::VectorXd x;
  double f = 0.0;
  OptimStatus status = OptimStatus::MaxIters;
  int iterations = 0;
  int evaluations = 0;
  std::vector<double> history; // accepted objective values, starting with f(x0)
};

/// Returns f(x) and writes the gradient into `grad` (already sized).
using Objective = std::function<double(const Eigen::VectorXd& x, Eigen::VectorXd& grad)>;

/// Limited-memory BFGS with a backtracking Armijo line search.
///
/// The first iteration steps along -g with trial length
/// learningRate * min(1, 1/|g|_1); later iterations try learningRate times the
/// two-loop quasi-Newton direction. Steps halve until sufficient decrease
/// (c1 = 1e-4) holds.
OptimResult minimizeLbfgs(const Objective& objective, const Eigen::VectorXd& x0, const OptimSettings& settings);

} // namespace mocap
