#include "spgls/solver.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <string>

#include "spgls/errors.hpp"

namespace spgls {

void SolverConfig::validate() const {
  if (!(tol > 0.0)) throw ArgumentError("tol must be positive");
  if (max_iter < 1) throw ArgumentError("max_iter must be at least 1");
  if (!(bracket_growth > 1.0))
    throw ArgumentError("bracket_growth must exceed 1");
}

const char* to_string(SolveStatus s) {
  switch (s) {
    case SolveStatus::Interior: return "interior";
    case SolveStatus::Boundary: return "boundary";
    case SolveStatus::Unattained: return "unattained";
  }
  return "unknown";
}

namespace {

// Shared tolerances: absolute eigenvalue tie threshold and the magnitude
// below which a coupling coefficient b_i counts as zero (0/0 convention).
struct DualTols {
  double tie;      // 1e-12 * (1 + |d|_inf)
  double b_floor;  // 1e-10 * |b|_inf

  explicit DualTols(const SpectralForm& sf)
      : tie(1e-12 * (1.0 + sf.d.cwiseAbs().maxCoeff())),
        b_floor(1e-10 * sf.b.cwiseAbs().maxCoeff()) {}
};

// 4*mu'(lambda) + something monotone: g(lambda) = -1 + (1/g) sum b_i^2/t_i^2.
// Decreasing on the domain; its root is the interior maximizer.
double dual_slope(const SpectralForm& sf, const DualTols& tols, double lambda) {
  double sum = 0.0;
  for (Eigen::Index i = 0; i < sf.d.size(); ++i) {
    if (std::abs(sf.b(i)) <= tols.b_floor) continue;
    const double t = sf.d(i) + lambda / sf.gamma;
    if (t <= tols.tie) return std::numeric_limits<double>::infinity();
    sum += (sf.b(i) * sf.b(i)) / (t * t);
  }
  return -1.0 + sum / sf.gamma;
}

double dual_slope_derivative(const SpectralForm& sf, const DualTols& tols,
                             double lambda) {
  double sum = 0.0;
  for (Eigen::Index i = 0; i < sf.d.size(); ++i) {
    if (std::abs(sf.b(i)) <= tols.b_floor) continue;
    const double t = sf.d(i) + lambda / sf.gamma;
    sum += (sf.b(i) * sf.b(i)) / (t * t * t);
  }
  return -2.0 * sum / (sf.gamma * sf.gamma);
}

double dual_value(const SpectralForm& sf, const DualTols& tols, double lambda) {
  double sum = 0.0;
  for (Eigen::Index i = 0; i < sf.d.size(); ++i) {
    if (std::abs(sf.b(i)) <= tols.b_floor) continue;
    const double t = sf.d(i) + lambda / sf.gamma;
    if (t <= tols.tie) return -std::numeric_limits<double>::infinity();
    sum += (sf.b(i) * sf.b(i)) / t;
  }
  return 0.25 * (sf.c - lambda - sum);
}

Eigen::VectorXd eliminated_s(const SpectralForm& sf, const DualTols& tols,
                             double lambda) {
  Eigen::VectorXd s = Eigen::VectorXd::Zero(sf.d.size());
  for (Eigen::Index i = 0; i < sf.d.size(); ++i) {
    if (std::abs(sf.b(i)) <= tols.b_floor) continue;
    const double t = sf.d(i) + lambda / sf.gamma;
    if (t > tols.tie) s(i) = (sf.b(i) * sf.b(i)) / t;
  }
  return s;
}

}  // namespace

std::optional<double> mu_of_lambda(const SpectralForm& sf, double lambda) {
  const DualTols tols(sf);
  double sum = 0.0;
  for (Eigen::Index i = 0; i < sf.d.size(); ++i) {
    const double t = sf.d(i) + lambda / sf.gamma;
    if (t < -tols.tie) return std::nullopt;
    const bool b_zero = std::abs(sf.b(i)) <= tols.b_floor;
    if (t <= tols.tie) {
      if (!b_zero) return std::nullopt;  // b outside Range(D + lambda/g I)
      continue;                          // 0/0 = 0
    }
    if (!b_zero) sum += (sf.b(i) * sf.b(i)) / t;
  }
  return 0.25 * (sf.c - lambda - sum);
}

SocpSolution solve_dual(const SpectralForm& sf, const SolverConfig& cfg) {
  cfg.validate();
  if (sf.d.size() == 0) throw ArgumentError("empty spectral form");

  const DualTols tols(sf);
  const double d_min = sf.d(0);
  const double lambda_left = -sf.gamma * d_min + 0.0;  // normalizes -0

  SocpSolution sol;

  // Hard case: the bottom eigenspace carries no coupling and the dual slope
  // is already nonpositive at the left endpoint.
  bool bottom_clear = true;
  for (Eigen::Index i = 0; i < sf.d.size() && sf.d(i) <= d_min + tols.tie; ++i)
    if (std::abs(sf.b(i)) > tols.b_floor) bottom_clear = false;

  if (bottom_clear && dual_slope(sf, tols, lambda_left) <= 0.0) {
    sol.lambda_star = lambda_left;
    sol.mu_star = dual_value(sf, tols, lambda_left);
    sol.s_star = eliminated_s(sf, tols, lambda_left);
    sol.status = SolveStatus::Boundary;
    sol.iterations = 0;
    return sol;
  }

  // Interior maximizer: bracket the root of the decreasing slope, then run
  // safeguarded Newton with bisection fallback.
  int iterations = 0;
  double lo = lambda_left;
  double offset = 1.0;
  double hi = lambda_left + offset;
  while (dual_slope(sf, tols, hi) >= 0.0) {
    lo = hi;
    offset *= cfg.bracket_growth;
    hi = lambda_left + offset;
    if (++iterations > cfg.max_iter)
      throw ConvergenceError("bracket expansion exceeded max_iter at lambda=" +
                             std::to_string(hi));
  }

  double lambda = 0.5 * (lo + hi);
  bool converged = false;
  for (; iterations < cfg.max_iter; ++iterations) {
    const double g = dual_slope(sf, tols, lambda);
    if (std::isfinite(g) && std::abs(g) <= cfg.tol) {
      converged = true;
      break;
    }
    if (g > 0.0)
      lo = lambda;
    else
      hi = lambda;
    if (hi - lo <= cfg.tol * (1.0 + std::abs(lambda))) {
      converged = true;
      break;
    }
    double next = std::numeric_limits<double>::quiet_NaN();
    if (std::isfinite(g)) {
      const double gp = dual_slope_derivative(sf, tols, lambda);
      if (gp < 0.0) next = lambda - g / gp;
    }
    lambda = (std::isfinite(next) && next > lo && next < hi)
                 ? next
                 : 0.5 * (lo + hi);
  }
  if (!converged)
    throw ConvergenceError("dual Newton did not converge; last bracket [" +
                           std::to_string(lo) + ", " + std::to_string(hi) + "]");

  sol.lambda_star = lambda;
  sol.mu_star = dual_value(sf, tols, lambda);
  sol.s_star = eliminated_s(sf, tols, lambda);
  sol.status = SolveStatus::Interior;
  sol.iterations = iterations;
  return sol;
}

double check_lmi(const GameMatrices& gm, double mu, double lambda) {
  const Eigen::MatrixXd M = gm.A - mu * gm.B + lambda * gm.C;
  return eig_sym(M).values(0);
}

void export_conic(const SpectralForm& sf, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write " + path.string());

  const Eigen::Index k = sf.d.size();  // n + 1 cones
  char buf[64];
  auto put = [&](double v) {
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    out << ' ' << buf;
  };

  // Variables in order: mu, lambda, s_1 .. s_k. Each "lin" row lists the
  // constant term then one coefficient per variable; the row asserts
  // c0 + c_mu*mu + c_lambda*lambda + sum c_i*s_i >= 0.
  out << "rsocp " << k << '\n';
  out << "obj max mu\n";
  for (Eigen::Index i = 0; i < k; ++i) {
    out << "lin";
    put(sf.d(i));
    put(0.0);
    put(1.0 / sf.gamma);
    for (Eigen::Index j = 0; j < k; ++j) put(0.0);
    out << '\n';
  }
  out << "lin";
  put(sf.c);
  put(-4.0);
  put(-1.0);
  for (Eigen::Index j = 0; j < k; ++j) put(-1.0);
  out << '\n';
  // Rotated cones s_i * (d_i + lambda/gamma) >= b_i^2.
  for (Eigen::Index i = 0; i < k; ++i) {
    out << "rcone " << (i + 1);
    put(sf.d(i));
    put(sf.b(i));
    put(sf.gamma);
    out << '\n';
  }
  if (!out) throw DataError("failed writing " + path.string());
}

}  // namespace spgls
