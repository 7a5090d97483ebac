#include "spgls/reform.hpp"

#include <chrono>
#include <cmath>

#include "spgls/errors.hpp"

namespace spgls {

Eigen::MatrixXd CongruenceV1::matrix(Eigen::Index n) const {
  const double s = 1.0 / std::sqrt(gamma);
  Eigen::MatrixXd v1 = Eigen::MatrixXd::Identity(n + 2, n + 2);
  v1(n, n) = s;
  v1(n, n + 1) = 1.0;
  v1(n + 1, n) = -s;
  v1(n + 1, n + 1) = 1.0;
  return v1;
}

Eigen::VectorXd CongruenceV1::apply(const Eigen::VectorXd& u) const {
  const Eigen::Index n = u.size() - 2;
  const double s = 1.0 / std::sqrt(gamma);
  Eigen::VectorXd v = u;
  v(n) = s * u(n) + u(n + 1);
  v(n + 1) = -s * u(n) + u(n + 1);
  return v;
}

Eigen::MatrixXd CongruenceV1::congruence(const Eigen::MatrixXd& M) const {
  // V1 differs from the identity only in the trailing 2x2 block, so the
  // congruence is two column mixes followed by two row mixes.
  const Eigen::Index n = M.rows() - 2;
  const double s = 1.0 / std::sqrt(gamma);
  Eigen::MatrixXd T = M;
  const Eigen::VectorXd ca = M.col(n);
  const Eigen::VectorXd cb = M.col(n + 1);
  T.col(n) = s * (ca - cb);
  T.col(n + 1) = ca + cb;
  const Eigen::RowVectorXd ra = T.row(n);
  const Eigen::RowVectorXd rb = T.row(n + 1);
  T.row(n) = s * (ra - rb);
  T.row(n + 1) = ra + rb;
  return T;
}

GameMatrices build_matrices(const Dataset& d, double gamma) {
  if (!(gamma > 0.0)) throw ArgumentError("gamma must be positive");
  d.validate();

  const Eigen::Index n = d.cols();
  const Eigen::Index m = d.rows();
  const Eigen::VectorXd r = d.z - d.y;

  GameMatrices gm;
  gm.gamma = gamma;
  gm.n = n;
  gm.m = m;

  // Upper triangle first, then mirror, so A is exactly symmetric.
  Eigen::MatrixXd A = Eigen::MatrixXd::Zero(n + 2, n + 2);
  A.topLeftCorner(n, n).selfadjointView<Eigen::Upper>().rankUpdate(
      d.X.transpose());
  A.block(0, n, n, 1) = d.X.transpose() * r;
  A.block(0, n + 1, n, 1) = -(d.X.transpose() * d.y);
  A(n, n) = r.squaredNorm();
  A(n, n + 1) = -r.dot(d.y);
  A(n + 1, n + 1) = d.y.squaredNorm();
  A.triangularView<Eigen::StrictlyLower>() =
      A.triangularView<Eigen::StrictlyUpper>().transpose();
  gm.A = std::move(A);

  gm.B = Eigen::MatrixXd::Zero(n + 2, n + 2);
  gm.B.bottomRightCorner(2, 2).setOnes();

  gm.C = Eigen::MatrixXd::Zero(n + 2, n + 2);
  gm.C.diagonal().head(n).setConstant(1.0 / gamma);
  gm.C(n, n + 1) = -0.5;
  gm.C(n + 1, n) = -0.5;

  if (!gm.A.allFinite()) throw NumericError("game matrices are non-finite");
  return gm;
}

CongruenceTriple congruence_v1(const GameMatrices& gm) {
  const Eigen::Index n = gm.n;
  const CongruenceV1 v1{gm.gamma};

  CongruenceTriple t;
  t.Abar = v1.congruence(gm.A);
  t.Abar = 0.5 * (t.Abar + t.Abar.transpose()).eval();

  // Known targets: Bbar = Diag(0_{n+1}, 4), Cbar = Diag(I_{n+1}/gamma, -1).
  Eigen::MatrixXd bbar_target = Eigen::MatrixXd::Zero(n + 2, n + 2);
  bbar_target(n + 1, n + 1) = 4.0;
  Eigen::MatrixXd cbar_target = Eigen::MatrixXd::Zero(n + 2, n + 2);
  cbar_target.diagonal().head(n + 1).setConstant(1.0 / gm.gamma);
  cbar_target(n + 1, n + 1) = -1.0;

  const Eigen::MatrixXd bbar = v1.congruence(gm.B);
  const Eigen::MatrixXd cbar = v1.congruence(gm.C);
  const double scale_b = 4.0;
  const double scale_c = std::max(1.0, 1.0 / gm.gamma);
  if (((bbar - bbar_target).cwiseAbs().maxCoeff() > 1e-10 * scale_b) ||
      ((cbar - cbar_target).cwiseAbs().maxCoeff() > 1e-10 * scale_c))
    throw InconsistencyError("congruence of B or C deviates from its pattern");

  t.Bbar = std::move(bbar_target);
  t.Cbar = std::move(cbar_target);
  return t;
}

EigSym eig_sym(const Eigen::MatrixXd& M) {
  if (M.rows() != M.cols()) throw ArgumentError("matrix must be square");
  const double scale = M.cwiseAbs().maxCoeff();
  const double asym = (M - M.transpose()).cwiseAbs().maxCoeff();
  if (asym > 1e-12 * std::max(scale, 1.0))
    throw ArgumentError("matrix is not symmetric to relative 1e-12");

  const Eigen::MatrixXd S = 0.5 * (M + M.transpose());
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(S);
  if (es.info() != Eigen::Success)
    throw NumericError("eigendecomposition failed for order " +
                       std::to_string(M.rows()));

  EigSym out;
  out.values = es.eigenvalues();
  out.vectors = es.eigenvectors();
  // Deterministic sign: first nonzero component of each column nonnegative.
  for (Eigen::Index j = 0; j < out.vectors.cols(); ++j) {
    for (Eigen::Index i = 0; i < out.vectors.rows(); ++i) {
      const double v = out.vectors(i, j);
      if (std::abs(v) > 1e-9) {
        if (v < 0.0) out.vectors.col(j) = -out.vectors.col(j);
        break;
      }
    }
  }
  return out;
}

SpectralForm build_spectral(const GameMatrices& gm, double* eig_seconds) {
  const Eigen::Index n = gm.n;
  const CongruenceTriple t = congruence_v1(gm);

  const auto t0 = std::chrono::steady_clock::now();
  const EigSym eig = eig_sym(t.Abar.topLeftCorner(n + 1, n + 1));
  const auto t1 = std::chrono::steady_clock::now();
  if (eig_seconds)
    *eig_seconds = std::chrono::duration<double>(t1 - t0).count();

  SpectralForm sf;
  sf.d = eig.values;
  sf.H = eig.vectors;
  sf.b = sf.H.transpose() * t.Abar.col(n + 1).head(n + 1);
  sf.c = t.Abar(n + 1, n + 1);
  sf.gamma = gm.gamma;
  sf.n = n;
  sf.m = gm.m;
  sf.y_norm_sq = gm.A(n + 1, n + 1);
  return sf;
}

}  // namespace spgls
