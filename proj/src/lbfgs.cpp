#include "mocap/lbfgs.h"

#include <algorithm>
#include <cmath>
#include <deque>
#include <stdexcept>

namespace mocap {

namespace {

constexpr double kArmijo = 1e-4;
constexpr double kShrink = 0.5;
constexpr int kMaxBacktracks = 50;

} // namespace

void OptimSettings::validate() const {
  if (!(learningRate > 0.0) || !(gradTol > 0.0) || !(fTol > 0.0) || !(xTol > 0.0)) {
    throw std::invalid_argument("OptimSettings: learning rate and tolerances must be positive");
  }
  if (maxIters < 1 || history < 1) {
    throw std::invalid_argument("OptimSettings: maxIters and history must be >= 1");
  }
}

std::string toString(OptimStatus status) {
  switch (status) {
    case OptimStatus::ConvergedGrad:
      return "converged-grad";
    case OptimStatus::ConvergedF:
      return "converged-f";
    case OptimStatus::ConvergedX:
      return "converged-x";
    case OptimStatus::MaxIters:
      return "max-iters";
    case OptimStatus::LineSearchFailure:
      return "line-search-failure";
  }
  return "unknown";
}

OptimResult minimizeLbfgs(const Objective& objective, const Eigen::VectorXd& x0, const OptimSettings& settings) {
  settings.validate();
  const Eigen::Index n = x0.size();

  OptimResult res;
  res.x = x0;
  Eigen::VectorXd g(n);
  res.f = objective(res.x, g);
  res.evaluations = 1;
  if (!std::isfinite(res.f) || !g.allFinite()) {
    throw std::invalid_argument("minimizeLbfgs: objective or gradient not finite at x0");
  }
  res.history.push_back(res.f);

  if (n == 0 || g.lpNorm<Eigen::Infinity>() <= settings.gradTol) {
    res.status = OptimStatus::ConvergedGrad;
    return res;
  }

  std::deque<Eigen::VectorXd> sHist;
  std::deque<Eigen::VectorXd> yHist;
  std::deque<double> rhoHist;
  std::vector<double> alpha(settings.history);

  Eigen::VectorXd xNew(n);
  Eigen::VectorXd gNew(n);
  Eigen::VectorXd d(n);

  for (int iter = 0; iter < settings.maxIters; ++iter) {
    // two-loop recursion
    d = -g;
    const int m = static_cast<int>(sHist.size());
    for (int i = m - 1; i >= 0; --i) {
      alpha[i] = rhoHist[i] * sHist[i].dot(d);
      d -= alpha[i] * yHist[i];
    }
    if (m > 0) {
      d *= sHist.back().dot(yHist.back()) / yHist.back().squaredNorm();
    }
    for (int i = 0; i < m; ++i) {
      const double beta = rhoHist[i] * yHist[i].dot(d);
      d += (alpha[i] - beta) * sHist[i];
    }

    double slope = g.dot(d);
    if (!(slope < 0.0)) {
      // not a descent direction, restart from steepest descent
      sHist.clear();
      yHist.clear();
      rhoHist.clear();
      d = -g;
      slope = -g.squaredNorm();
    }

    double step = settings.learningRate;
    if (iter == 0) {
      step *= std::min(1.0, 1.0 / g.lpNorm<1>());
    }

    bool accepted = false;
    double fNew = 0.0;
    for (int bt = 0; bt < kMaxBacktracks; ++bt) {
      xNew = res.x + step * d;
      fNew = objective(xNew, gNew);
      ++res.evaluations;
      if (std::isfinite(fNew) && gNew.allFinite() && fNew <= res.f + kArmijo * step * slope) {
        accepted = true;
        break;
      }
      step *= kShrink;
    }
    if (!accepted) {
      res.status = OptimStatus::LineSearchFailure;
      return res;
    }

    const Eigen::VectorXd s = xNew - res.x;
    const Eigen::VectorXd y = gNew - g;
    const double fPrev = res.f;
    res.x = xNew;
    res.f = fNew;
    g = gNew;
    res.iterations = iter + 1;
    res.history.push_back(res.f);

    const double sy = s.dot(y);
    if (sy > 1e-16 * s.squaredNorm()) {
      if (static_cast<int>(sHist.size()) == settings.history) {
        sHist.pop_front();
        yHist.pop_front();
        rhoHist.pop_front();
      }
      sHist.push_back(s);
      yHist.push_back(y);
      rhoHist.push_back(1.0 / sy);
    }

    if (g.lpNorm<Eigen::Infinity>() <= settings.gradTol) {
      res.status = OptimStatus::ConvergedGrad;
      return res;
    }
    if (std::abs(fPrev - res.f) / std::max(1.0, std::abs(fPrev)) <= settings.fTol) {
      res.status = OptimStatus::ConvergedF;
      return res;
    }
    if (s.lpNorm<Eigen::Infinity>() <= settings.xTol) {
      res.status = OptimStatus::ConvergedX;
      return res;
    }
  }
  res.status = OptimStatus::MaxIters;
  return res;
}

} // namespace mocap
