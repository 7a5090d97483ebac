#pragma once

#include <vector>

#include "spgls/solver.hpp"

namespace spgls {

/// Recovered Stackelberg equilibrium: predictor w with alpha = w'w / gamma.
struct Equilibrium {
  Eigen::VectorXd w;
  double alpha = 0.0;
  double mu_star = 0.0;
  double lambda_star = 0.0;
  double objective_value = 0.0;      // game objective evaluated at w
  double residual_constraint = 0.0;  // |alpha - w'w/gamma|
  double residual_objective = 0.0;   // |objective_value - mu_star|
  SolveStatus status = SolveStatus::Interior;
};

struct VerificationReport {
  double objective_value = 0.0;
  double objective_residual = 0.0;
  double constraint_residual = 0.0;
  double lmi_min_eig = 0.0;
  bool objective_ok = false;
  bool constraint_ok = false;
  bool lmi_ok = false;

  bool pass() const { return objective_ok && constraint_ok && lmi_ok; }
};

/// Rank-1 factors p_i with sum p_i p_i' = W and p_i' G p_i = 0 for each i.
struct Rank1Certificate {
  std::vector<Eigen::VectorXd> factors;
  int source_rank = 0;
};

/// Null-space recovery: builds the reduced null vector from (mu*, lambda*),
/// maps it back through both congruences and normalizes the last component
/// to 1. The boundary (hard) case carries a free component on the bottom
/// eigenspace whose sign is fixed by verification. Throws UnattainedError
/// when every candidate has a vanishing last component.
Equilibrium recover_primal(const SpectralForm& sf, const SocpSolution& sol,
                           const GameMatrices& gm);

/// Recomputes the game objective at w, the constraint residual and the
/// matrix-inequality certificate from the original matrices.
VerificationReport verify_equilibrium(const Equilibrium& eq,
                                      const GameMatrices& gm);

/// Sturm-style decomposition of a PSD matrix W with <G, W> = 0 into rank-1
/// factors neutral against G. Each pairing step applies the rotation
///   p_i <- (t p_i + p_j) / sqrt(t^2+1),  p_j <- (p_i - t p_j) / sqrt(t^2+1)
/// which preserves p_i p_i' + p_j p_j' exactly.
Rank1Certificate rank1_decompose(const Eigen::MatrixXd& W,
                                 const Eigen::MatrixXd& G);

/// Extracts an equilibrium from a feasible dual-optimal matrix What via the
/// rank-1 decomposition against C. Throws DegenerateDualError when the
/// matrix corner What(n+2, n+2) vanishes.
Equilibrium recover_from_dual_matrix(const Eigen::MatrixXd& What,
                                     const GameMatrices& gm, double mu_star,
                                     double lambda_star);

}  // namespace spgls
