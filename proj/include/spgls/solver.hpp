#pragma once

#include <filesystem>
#include <limits>
#include <optional>

#include "spgls/reform.hpp"

namespace spgls {

struct SolverConfig {
  double tol = 1e-10;          // relative tolerance on lambda and on mu'(lambda)
  int max_iter = 200;          // cap for bracketing + Newton iterations
  double bracket_growth = 2.0; // expansion factor for the initial bracket

  void validate() const;
};

enum class SolveStatus { Interior, Boundary, Unattained };

const char* to_string(SolveStatus s);

/// Maximizer of the eliminated 1-D dual
///   mu(lambda) = (c - lambda - sum_i b_i^2 / (d_i + lambda/gamma)) / 4
/// over lambda >= -gamma*d_min, with s_i = b_i^2/(d_i + lambda/gamma).
struct SocpSolution {
  double mu_star = 0.0;
  double lambda_star = 0.0;
  Eigen::VectorXd s_star;
  SolveStatus status = SolveStatus::Interior;
  int iterations = 0;
  // min eigenvalue of A - mu*B + lambda*C; NaN until certified via check_lmi.
  double certificate_min_eig = std::numeric_limits<double>::quiet_NaN();
};

/// Value of the dual at a given lambda, or nullopt when lambda is outside
/// the domain (some d_i + lambda/gamma < 0, or = 0 with b_i != 0). Terms
/// with both b_i and d_i + lambda/gamma zero drop out (0/0 = 0).
std::optional<double> mu_of_lambda(const SpectralForm& sf, double lambda);

/// Safeguarded Newton on mu'(lambda) with a bisection fallback; detects the
/// boundary (hard) case where the maximizer sits at lambda = -gamma*d_min.
SocpSolution solve_dual(const SpectralForm& sf, const SolverConfig& cfg = {});

/// Independent feasibility certificate: min eigenvalue of A - mu*B + lambda*C
/// computed from the original matrices, not the reduced form.
double check_lmi(const GameMatrices& gm, double mu, double lambda);

/// Writes the problem in a plain-text rotated-cone format so an external
/// conic solver can cross-check mu*. See README for the exact grammar.
void export_conic(const SpectralForm& sf, const std::filesystem::path& path);

}  // namespace spgls
