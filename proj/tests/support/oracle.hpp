#pragma once

// Test-only brute-force oracles. Everything here reimplements formulas
// directly from the data so the checks stay independent of the library's
// solve path.

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

namespace oracle {

// Learner's post-best-response loss, written out from the raw data.
inline double game_objective(const Eigen::MatrixXd& X, const Eigen::VectorXd& y,
                             const Eigen::VectorXd& z, double gamma,
                             const Eigen::VectorXd& w) {
  const double alpha = w.squaredNorm() / gamma;
  const Eigen::VectorXd u = alpha * z + X * w - y - alpha * y;
  return u.squaredNorm() / ((1.0 + alpha) * (1.0 + alpha));
}

// Argmin of a scalar function over [lo, hi] by golden-section search.
template <typename F>
double golden_min_scalar(F&& f, double lo, double hi, int iters = 48) {
  constexpr double kGolden = 0.6180339887498949;
  double x1 = hi - kGolden * (hi - lo);
  double x2 = lo + kGolden * (hi - lo);
  double f1 = f(x1);
  double f2 = f(x2);
  for (int i = 0; i < iters; ++i) {
    if (f1 > f2) {
      lo = x1;
      x1 = x2;
      f1 = f2;
      x2 = lo + kGolden * (hi - lo);
      f2 = f(x2);
    } else {
      hi = x2;
      x2 = x1;
      f2 = f1;
      x1 = hi - kGolden * (hi - lo);
      f1 = f(x1);
    }
  }
  return f1 < f2 ? x1 : x2;
}

// Central-difference gradient; accurate enough to drive the polish below
// the acceptance tolerances.
template <typename F>
Eigen::VectorXd fd_gradient(F&& f, const Eigen::VectorXd& w) {
  Eigen::VectorXd g(w.size());
  for (Eigen::Index j = 0; j < w.size(); ++j) {
    const double h = 1e-6 * (1.0 + std::abs(w(j)));
    Eigen::VectorXd wp = w, wm = w;
    wp(j) += h;
    wm(j) -= h;
    g(j) = (f(wp) - f(wm)) / (2.0 * h);
  }
  return g;
}

// Coordinate walker: cyclic golden-section line searches whose window grows
// while progress is pegged at the edge, so a start inside the localization
// box can march out of it along a descending valley.
template <typename F>
Eigen::VectorXd coordinate_walk(F&& f, Eigen::VectorXd w, double h,
                                double h_min = 1e-8, int max_sweeps = 400) {
  double fw = f(w);
  for (int sweep = 0; sweep < max_sweeps && h > h_min; ++sweep) {
    double moved = 0.0;
    for (Eigen::Index j = 0; j < w.size(); ++j) {
      const double wj = w(j);
      auto slice = [&](double t) {
        Eigen::VectorXd ww = w;
        ww(j) = t;
        return f(ww);
      };
      const double t = golden_min_scalar(slice, wj - h, wj + h);
      const double ft = slice(t);
      if (ft < fw) {
        moved = std::max(moved, std::abs(t - wj));
        w(j) = t;
        fw = ft;
      }
    }
    if (moved >= 0.5 * h)
      h = std::min(h * 2.0, 1024.0);
    else if (moved < 0.25 * h)
      h *= 0.5;
  }
  return w;
}

// BFGS with Armijo backtracking on finite-difference gradients. Handles the
// curved valleys where plain coordinate descent stalls.
template <typename F>
Eigen::VectorXd bfgs_polish(F&& f, Eigen::VectorXd w, int max_iter = 400) {
  const Eigen::Index n = w.size();
  Eigen::MatrixXd H = Eigen::MatrixXd::Identity(n, n);
  double fw = f(w);
  Eigen::VectorXd g = fd_gradient(f, w);
  for (int it = 0; it < max_iter; ++it) {
    if (g.norm() <= 1e-10 * (1.0 + std::abs(fw))) break;
    Eigen::VectorXd p = -(H * g);
    if (p.dot(g) >= 0.0) {  // stale curvature, reset to steepest descent
      H.setIdentity();
      p = -g;
    }
    double t = 1.0;
    double f_new = fw;
    Eigen::VectorXd w_new = w;
    const double slope = p.dot(g);
    bool accepted = false;
    for (int back = 0; back < 50; ++back) {
      w_new = w + t * p;
      f_new = f(w_new);
      if (f_new <= fw + 1e-4 * t * slope) {
        accepted = true;
        break;
      }
      t *= 0.5;
    }
    if (!accepted) break;
    const Eigen::VectorXd g_new = fd_gradient(f, w_new);
    const Eigen::VectorXd s = w_new - w;
    const Eigen::VectorXd yv = g_new - g;
    const double sy = s.dot(yv);
    if (sy > 1e-12 * s.norm() * yv.norm()) {
      const Eigen::MatrixXd syt = s * yv.transpose() / sy;
      H = (Eigen::MatrixXd::Identity(n, n) - syt) * H *
              (Eigen::MatrixXd::Identity(n, n) - syt.transpose()) +
          s * s.transpose() / sy;
    }
    if (s.norm() <= 1e-14 * (1.0 + w.norm())) {
      w = w_new;
      fw = f_new;
      break;
    }
    w = w_new;
    fw = f_new;
    g = g_new;
  }
  return w;
}

struct BruteForceResult {
  double value = 0.0;
  Eigen::VectorXd w;
};

// Global minimum of the game objective: coarse localization grid over the
// coordinate box [-box, box]^n, then walk + polish from the best distinct
// candidates (plus the zero and least-squares predictors). The polish is
// unconstrained, so minima outside the box are still reachable.
inline BruteForceResult brute_force_min(const Eigen::MatrixXd& X,
                                        const Eigen::VectorXd& y,
                                        const Eigen::VectorXd& z, double gamma,
                                        double box = 10.0) {
  const Eigen::Index n = X.cols();
  auto f = [&](const Eigen::VectorXd& w) {
    return game_objective(X, y, z, gamma, w);
  };

  int points_per_axis = 11;
  switch (n) {
    case 1: points_per_axis = 2001; break;
    case 2: points_per_axis = 121; break;
    case 3: points_per_axis = 41; break;
    case 4: points_per_axis = 17; break;
    default: points_per_axis = 11; break;
  }
  if (points_per_axis % 2 == 0) ++points_per_axis;  // keep 0 on the grid
  const double step = 2.0 * box / (points_per_axis - 1);

  const auto by_value = [](const auto& a, const auto& b) {
    return a.first < b.first;
  };
  std::vector<std::pair<double, Eigen::VectorXd>> candidates;
  Eigen::VectorXd w = Eigen::VectorXd::Constant(n, -box);
  std::vector<int> idx(static_cast<std::size_t>(n), 0);
  const auto total = static_cast<long long>(
      std::pow(static_cast<double>(points_per_axis), static_cast<double>(n)));
  for (long long k = 0; k < total; ++k) {
    candidates.emplace_back(f(w), w);
    std::push_heap(candidates.begin(), candidates.end(), by_value);
    if (candidates.size() > 160) {
      std::pop_heap(candidates.begin(), candidates.end(), by_value);
      candidates.pop_back();
    }
    for (Eigen::Index j = 0; j < n; ++j) {
      if (++idx[static_cast<std::size_t>(j)] < points_per_axis) {
        w(j) = -box + step * idx[static_cast<std::size_t>(j)];
        break;
      }
      idx[static_cast<std::size_t>(j)] = 0;
      w(j) = -box;
    }
  }
  std::sort(candidates.begin(), candidates.end(), by_value);

  // Well-separated starts from the coarse sweep.
  std::vector<Eigen::VectorXd> starts;
  for (const auto& [value, cw] : candidates) {
    bool close = false;
    for (const auto& s : starts)
      if ((s - cw).lpNorm<Eigen::Infinity>() < 2.0 * step) close = true;
    if (!close) starts.push_back(cw);
    if (starts.size() >= 12) break;
  }
  starts.push_back(Eigen::VectorXd::Zero(n));
  starts.push_back(X.colPivHouseholderQr().solve(y));  // plain least squares

  BruteForceResult best;
  best.value = std::numeric_limits<double>::infinity();
  for (const auto& s : starts) {
    Eigen::VectorXd refined =
        coordinate_walk(f, s, std::max(step, 0.5));
    refined = bfgs_polish(f, refined);
    const double value = f(refined);
    if (value < best.value) {
      best.value = value;
      best.w = refined;
    }
  }
  return best;
}

// Reference quantile, written against the definition h = (m-1)p directly.
inline double reference_quantile(std::vector<double> values, double p) {
  std::sort(values.begin(), values.end());
  const double h = (static_cast<double>(values.size()) - 1.0) * p;
  const auto lo = static_cast<std::size_t>(std::floor(h));
  const std::size_t hi = std::min(lo + 1, values.size() - 1);
  return values[lo] + (h - static_cast<double>(lo)) * (values[hi] - values[lo]);
}

}  // namespace oracle
