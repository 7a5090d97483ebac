#pragma once

#include <Eigen/Dense>

#include "spgls/dataset.hpp"

namespace spgls {

/// The symmetric triple of order n+2 behind the game's matrix inequality
/// A - mu*B + lambda*C >= 0, together with gamma.
///
///   A = [ X'X       X'(z-y)      -X'y     ]      (a Gram matrix, PSD)
///       [ (z-y)'X   |z-y|^2      -(z-y)'y ]
///       [ -y'X      -y'(z-y)     y'y      ]
///   B = zeros except the trailing 2x2 block of ones
///   C = Diag(I_n / gamma) with trailing 2x2 block [[0,-1/2],[-1/2,0]]
struct GameMatrices {
  Eigen::MatrixXd A;
  Eigen::MatrixXd B;
  Eigen::MatrixXd C;
  double gamma = 1.0;
  Eigen::Index n = 0;
  Eigen::Index m = 0;
};

/// First congruence. V1 is fully determined by gamma:
///   V1 = [ I_n  0            0 ]
///        [ 0    1/sqrt(g)    1 ]
///        [ 0   -1/sqrt(g)    1 ]
/// and is invertible for every gamma > 0.
struct CongruenceV1 {
  double gamma = 1.0;

  Eigen::MatrixXd matrix(Eigen::Index n) const;
  /// V1 * u without forming the matrix.
  Eigen::VectorXd apply(const Eigen::VectorXd& u) const;
  /// M -> V1' * M * V1 without forming V1 (mixes the last two rows/columns).
  Eigen::MatrixXd congruence(const Eigen::MatrixXd& M) const;
};

struct CongruenceTriple {
  Eigen::MatrixXd Abar;  // V1' A V1, symmetrized
  Eigen::MatrixXd Bbar;  // Diag(0_{n+1}, 4), exact by construction
  Eigen::MatrixXd Cbar;  // Diag(I_{n+1}/gamma, -1), exact by construction
};

/// Everything the 1-D dual solver needs after both congruences:
/// Abar11 = H * Diag(d) * H', b = H' * Abar12, c = Abar22.
struct SpectralForm {
  Eigen::VectorXd d;  // ascending, length n+1
  Eigen::VectorXd b;  // length n+1
  double c = 0.0;
  Eigen::MatrixXd H;  // orthogonal, order n+1
  double gamma = 1.0;
  Eigen::Index n = 0;
  Eigen::Index m = 0;
  double y_norm_sq = 0.0;  // |y|^2, kept for the bisection baseline's bracket
};

struct EigSym {
  Eigen::VectorXd values;   // ascending
  Eigen::MatrixXd vectors;  // orthonormal columns
};

/// Assembles A blockwise (never forming [X | z-y | -y] explicitly), B and C.
GameMatrices build_matrices(const Dataset& d, double gamma);

/// Applies V1 to all three matrices. Bbar and Cbar are checked against their
/// known patterns and returned exactly; a mismatch is an internal error.
CongruenceTriple congruence_v1(const GameMatrices& gm);

/// Symmetrizes (M + M')/2 and decomposes. Eigenvalues ascend; each
/// eigenvector's first nonzero component is made nonnegative so the result
/// is deterministic.
EigSym eig_sym(const Eigen::MatrixXd& M);

/// Runs congruence_v1, decomposes Abar11 and assembles (d, b, c, H).
/// When eig_seconds is given it receives the spectral-decomposition time.
SpectralForm build_spectral(const GameMatrices& gm, double* eig_seconds = nullptr);

}  // namespace spgls
