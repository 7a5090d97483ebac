#include "spgls/recovery.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "spgls/errors.hpp"

namespace spgls {

namespace {

struct Candidate {
  Eigen::VectorXd v;  // order n+2, image of the reduced null vector
  bool usable = false;
};

// Maps a reduced vector (ytil_{1:n+1}, last) back through V2 then V1.
Eigen::VectorXd map_back(const SpectralForm& sf, const Eigen::VectorXd& ytil) {
  const Eigen::Index n1 = sf.d.size();
  Eigen::VectorXd u(n1 + 1);
  u.head(n1) = sf.H * ytil.head(n1);
  u(n1) = ytil(n1);
  return CongruenceV1{sf.gamma}.apply(u);
}

Equilibrium make_equilibrium(const Eigen::VectorXd& v_normalized,
                             const GameMatrices& gm, const SocpSolution& sol) {
  const Eigen::Index n = gm.n;
  Equilibrium eq;
  eq.w = v_normalized.head(n);
  eq.alpha = v_normalized(n);
  eq.mu_star = sol.mu_star;
  eq.lambda_star = sol.lambda_star;
  eq.status = sol.status;

  const double den = (1.0 + eq.alpha) * (1.0 + eq.alpha);
  eq.objective_value = v_normalized.dot(gm.A * v_normalized) / den;
  eq.residual_constraint = std::abs(eq.alpha - eq.w.squaredNorm() / gm.gamma);
  eq.residual_objective = std::abs(eq.objective_value - eq.mu_star);
  return eq;
}

bool residuals_ok(const Equilibrium& eq) {
  return eq.residual_constraint <= 1e-8 * (1.0 + std::abs(eq.alpha)) &&
         eq.residual_objective <= 1e-6 * (1.0 + std::abs(eq.mu_star));
}

// The stationarity residual of the multiplier is amplified by (1+alpha)^2/4
// in the recovered constraint, so the solver's own tolerance is not enough
// when alpha is large. A few extended-precision Newton steps push the
// residual to the numeric floor before the null vector is formed.
double polish_multiplier(const SpectralForm& sf, double lambda) {
  const double b_floor = 1e-10 * sf.b.cwiseAbs().maxCoeff();
  const double tie = 1e-12 * (1.0 + sf.d.cwiseAbs().maxCoeff());
  const double lambda_left = -sf.gamma * sf.d(0) + 0.0;
  double best_lambda = lambda;
  long double best_abs_g = std::numeric_limits<long double>::infinity();
  for (int it = 0; it < 30; ++it) {
    long double sum = 0.0L;
    long double dsum = 0.0L;
    bool blocked = false;
    for (Eigen::Index i = 0; i < sf.d.size(); ++i) {
      if (std::abs(sf.b(i)) <= b_floor) continue;
      const long double t =
          static_cast<long double>(sf.d(i)) + static_cast<long double>(lambda) / sf.gamma;
      if (t <= tie) {
        blocked = true;
        break;
      }
      const long double bb = static_cast<long double>(sf.b(i)) * sf.b(i);
      sum += bb / (t * t);
      dsum -= 2.0L * bb / (t * t * t) / sf.gamma;
    }
    if (blocked) break;
    const long double g = sum / sf.gamma - 1.0L;
    if (fabsl(g) < best_abs_g) {
      best_abs_g = fabsl(g);
      best_lambda = lambda;
    }
    if (fabsl(g) <= 1e-17L || !(dsum < 0.0L)) break;
    double next = lambda - static_cast<double>(g / (dsum / sf.gamma));
    if (next <= lambda_left) next = 0.5 * (lambda + lambda_left);
    if (next == lambda) break;
    lambda = next;
  }
  return best_lambda;
}

}  // namespace

Equilibrium recover_primal(const SpectralForm& sf, const SocpSolution& sol,
                           const GameMatrices& gm) {
  if (sol.status == SolveStatus::Unattained)
    throw ArgumentError("cannot recover from an unattained solution");

  const Eigen::Index n1 = sf.d.size();
  const double tie = 1e-12 * (1.0 + sf.d.cwiseAbs().maxCoeff());
  const double lambda_use = sol.status == SolveStatus::Interior
                                ? polish_multiplier(sf, sol.lambda_star)
                                : sol.lambda_star;
  Eigen::VectorXd t = sf.d.array() + lambda_use / sf.gamma;

  // Base reduced vector: ytil_i = -b_i / t_i on the unblocked indices.
  Eigen::VectorXd ytil = Eigen::VectorXd::Zero(n1 + 1);
  std::vector<Eigen::Index> blocked;
  for (Eigen::Index i = 0; i < n1; ++i) {
    if (t(i) > tie)
      ytil(i) = -sf.b(i) / t(i);
    else
      blocked.push_back(i);
  }
  ytil(n1) = 1.0;

  std::vector<double> thetas{0.0};
  bool has_free = false;
  if (sol.status == SolveStatus::Boundary && !blocked.empty()) {
    // Hard case: one free component on the bottom eigenspace, its magnitude
    // fixed by the constraint sum ytil_i^2 = gamma.
    double ssum = 0.0;
    for (Eigen::Index i = 0; i < n1; ++i) ssum += ytil(i) * ytil(i);
    double theta_sq = sf.gamma - ssum;
    if (theta_sq < -1e-10 * sf.gamma)
      throw InconsistencyError("hard-case free component has negative square " +
                               std::to_string(theta_sq));
    theta_sq = std::max(theta_sq, 0.0);
    const double theta = std::sqrt(theta_sq);
    thetas = theta > 0.0 ? std::vector<double>{theta, -theta}
                         : std::vector<double>{0.0};
    has_free = true;
  }

  const Eigen::Index free_index = has_free ? blocked.front() : 0;
  Equilibrium best;
  bool have_nonzero_tail = false;
  for (double theta : thetas) {
    if (has_free) ytil(free_index) = theta;
    const Eigen::VectorXd v = map_back(sf, ytil);
    const double tail = v(n1);
    if (std::abs(tail) <= 1e-10 * (1.0 + v.norm())) continue;

    const Eigen::VectorXd vn = v / tail;
    Equilibrium eq = make_equilibrium(vn, gm, sol);
    if (!have_nonzero_tail) {
      best = eq;
      have_nonzero_tail = true;
    }
    if (residuals_ok(eq)) return eq;
  }

  if (!have_nonzero_tail)
    throw UnattainedError(
        "equilibrium is not attained: the optimal value mu* = " +
        std::to_string(sol.mu_star) +
        " is an infimum approached only as |w| grows without bound");
  throw VerificationError(
      "recovered vector fails residual checks: constraint " +
      std::to_string(best.residual_constraint) + ", objective " +
      std::to_string(best.residual_objective));
}

VerificationReport verify_equilibrium(const Equilibrium& eq,
                                      const GameMatrices& gm) {
  const Eigen::Index n = gm.n;
  Eigen::VectorXd v(n + 2);
  v.head(n) = eq.w;
  v(n) = eq.alpha;
  v(n + 1) = 1.0;

  VerificationReport rep;
  const double den = v.dot(gm.B * v);
  rep.objective_value = v.dot(gm.A * v) / den;
  rep.objective_residual = std::abs(rep.objective_value - eq.mu_star);
  rep.constraint_residual = std::abs(eq.alpha - eq.w.squaredNorm() / gm.gamma);
  rep.lmi_min_eig = check_lmi(gm, eq.mu_star, eq.lambda_star);

  rep.constraint_ok =
      rep.constraint_residual <= 1e-8 * (1.0 + std::abs(eq.alpha));
  rep.objective_ok =
      rep.objective_residual <= 1e-6 * (1.0 + std::abs(eq.mu_star));
  rep.lmi_ok = rep.lmi_min_eig >= -1e-8 * gm.A.norm();
  return rep;
}

Rank1Certificate rank1_decompose(const Eigen::MatrixXd& W,
                                 const Eigen::MatrixXd& G) {
  if (W.rows() != W.cols() || G.rows() != G.cols() || W.rows() != G.rows())
    throw ArgumentError("rank1_decompose requires square matrices of one order");

  const double norm_w = W.norm();
  const double norm_g = G.norm();
  const EigSym eig = eig_sym(W);
  if (eig.values.size() > 0 && eig.values(0) < -1e-10 * std::max(norm_w, 1.0))
    throw ArgumentError("matrix is not positive semidefinite");
  const double inner = (G.cwiseProduct(W)).sum();
  if (std::abs(inner) > 1e-8 * std::max(norm_g * norm_w, 1.0))
    throw ArgumentError("<G, W> must vanish");

  Rank1Certificate cert;
  const double cutoff = 1e-11 * std::max(eig.values.cwiseAbs().maxCoeff(), 0.0);
  for (Eigen::Index i = 0; i < eig.values.size(); ++i)
    if (eig.values(i) > cutoff)
      cert.factors.push_back(std::sqrt(eig.values(i)) * eig.vectors.col(i));
  cert.source_rank = static_cast<int>(cert.factors.size());
  if (cert.factors.empty()) return cert;

  const auto g_form = [&](const Eigen::VectorXd& p) { return p.dot(G * p); };
  std::vector<double> g(cert.factors.size());
  for (std::size_t k = 0; k < cert.factors.size(); ++k)
    g[k] = g_form(cert.factors[k]);

  const auto threshold = [&](std::size_t k) {
    return 1e-12 * std::max(norm_g, 1.0) * cert.factors[k].squaredNorm();
  };

  // Pair one positive with one negative form value per step; the rotation
  // zeroes the first and moves its value onto the second, so the loop ends
  // in at most r steps.
  const int cap = 2 * cert.source_rank + 8;
  for (int step = 0; step < cap; ++step) {
    std::size_t imax = 0, jmin = 0;
    for (std::size_t k = 1; k < g.size(); ++k) {
      if (g[k] > g[imax]) imax = k;
      if (g[k] < g[jmin]) jmin = k;
    }
    if (g[imax] <= threshold(imax) || g[jmin] >= -threshold(jmin)) {
      return cert;
    }
    Eigen::VectorXd& pi = cert.factors[imax];
    Eigen::VectorXd& pj = cert.factors[jmin];
    const double a = g[imax];
    const double c = g[jmin];
    const double bq = pi.dot(G * pj);
    const double disc = bq * bq - a * c;  // > 0 since a > 0 > c
    const double qroot = -(bq + std::copysign(std::sqrt(disc), bq));
    const double tr = qroot / a;  // stable root of a t^2 + 2 b t + c = 0
    const double denom = std::sqrt(tr * tr + 1.0);

    const Eigen::VectorXd pi_new = (tr * pi + pj) / denom;
    const Eigen::VectorXd pj_new = (pi - tr * pj) / denom;
    pi = pi_new;
    pj = pj_new;
    g[imax] = g_form(pi);
    g[jmin] = g_form(pj);
  }
  throw InconsistencyError("rank-1 pairing loop failed to terminate");
}

Equilibrium recover_from_dual_matrix(const Eigen::MatrixXd& What,
                                     const GameMatrices& gm, double mu_star,
                                     double lambda_star) {
  const Eigen::Index order = gm.n + 2;
  if (What.rows() != order || What.cols() != order)
    throw ArgumentError("dual matrix must have order n+2");

  const Eigen::MatrixXd W = 0.5 * (What + What.transpose());
  const double scale = std::max(W.norm(), 1.0);
  const Eigen::MatrixXd slack = gm.A - mu_star * gm.B + lambda_star * gm.C;

  const auto rel_ok = [&](double value, double target, double ref) {
    return std::abs(value - target) <= 1e-6 * std::max(ref, 1.0);
  };
  if (!rel_ok((gm.B.cwiseProduct(W)).sum(), 1.0, gm.B.norm() * scale))
    throw ArgumentError("dual matrix violates <B, W> = 1");
  if (!rel_ok((gm.C.cwiseProduct(W)).sum(), 0.0, gm.C.norm() * scale))
    throw ArgumentError("dual matrix violates <C, W> = 0");
  if (!rel_ok((slack.cwiseProduct(W)).sum(), 0.0, slack.norm() * scale))
    throw ArgumentError("dual matrix violates complementary slackness");
  if (eig_sym(W).values(0) < -1e-6 * scale)
    throw ArgumentError("dual matrix is not positive semidefinite");

  const double corner = W(order - 1, order - 1);
  if (corner <= 1e-10 * W.trace())
    throw DegenerateDualError(
        "dual matrix corner vanishes; no equilibrium can be extracted");

  const Eigen::MatrixXd Wbar = W / corner;
  const Rank1Certificate cert = rank1_decompose(Wbar, gm.C);

  std::size_t pick = cert.factors.size();
  double best_tail = 0.0;
  for (std::size_t k = 0; k < cert.factors.size(); ++k) {
    const double tail = std::abs(cert.factors[k](order - 1));
    if (tail > best_tail) {
      best_tail = tail;
      pick = k;
    }
  }
  if (pick == cert.factors.size() ||
      best_tail <= 1e-10 * (1.0 + cert.factors[pick].norm()))
    throw UnattainedError("no rank-1 factor has a nonzero last entry");

  const Eigen::VectorXd v = cert.factors[pick] / cert.factors[pick](order - 1);
  SocpSolution sol;
  sol.mu_star = mu_star;
  sol.lambda_star = lambda_star;
  sol.status = SolveStatus::Interior;
  Equilibrium eq = make_equilibrium(v, gm, sol);

  const VerificationReport rep = verify_equilibrium(eq, gm);
  if (!rep.pass())
    throw VerificationError(
        "dual-matrix recovery failed verification: objective residual " +
        std::to_string(rep.objective_residual) + ", constraint residual " +
        std::to_string(rep.constraint_residual));
  return eq;
}

}  // namespace spgls
