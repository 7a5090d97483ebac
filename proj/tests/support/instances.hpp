#pragma once

// Shared instance makers for the solver/recovery/evaluate suites.

#include <random>

#include "spgls/dataset.hpp"

namespace test_instances {

// X=[[1]], y=[1], z=[1]: hand-solvable hard case (mu*=0, lambda*=0, w*=1).
inline spgls::Dataset unit_instance() {
  spgls::Dataset d;
  d.X = Eigen::MatrixXd::Ones(1, 1);
  d.y = Eigen::VectorXd::Ones(1);
  d.z = Eigen::VectorXd::Ones(1);
  return d;
}

// X=[[1],[1]], y=(1,-1), z=y: the objective's infimum 0 is unattained.
inline spgls::Dataset unattained_instance() {
  spgls::Dataset d;
  d.X = Eigen::MatrixXd::Ones(2, 1);
  d.y.resize(2);
  d.y << 1.0, -1.0;
  d.z = d.y;
  return d;
}

// X=[[1],[1]], y=(1,-1), z=3y: symmetric instance with two global
// equilibria w* = +-sqrt(5/11); mu* = 7/16, lambda* = -2, alpha* = 5/11.
inline spgls::Dataset degenerate_pair_instance() {
  spgls::Dataset d = unattained_instance();
  d.z = 3.0 * d.y;
  return d;
}

inline spgls::Dataset random_instance(Eigen::Index m, Eigen::Index n,
                                      std::uint64_t seed, double z_shift = 0.5) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss;
  spgls::Dataset d;
  d.X.resize(m, n);
  d.y.resize(m);
  for (Eigen::Index i = 0; i < m; ++i) {
    for (Eigen::Index j = 0; j < n; ++j) d.X(i, j) = gauss(rng);
    d.y(i) = gauss(rng);
  }
  d.z = d.y;
  for (Eigen::Index i = 0; i < m; ++i) d.z(i) += z_shift * gauss(rng);
  return d;
}

}  // namespace test_instances
