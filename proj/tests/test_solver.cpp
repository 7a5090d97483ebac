#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>

#include "spgls/errors.hpp"
#include "spgls/solver.hpp"
#include "support/instances.hpp"
#include "support/oracle.hpp"

using namespace spgls;
using test_instances::random_instance;
using test_instances::unit_instance;

namespace {

SpectralForm unit_spectral() {
  return build_spectral(build_matrices(unit_instance(), 1.0));
}

}  // namespace

TEST_SUITE("solver") {

TEST_CASE("mu_of_lambda on the unit instance") {
  const SpectralForm sf = unit_spectral();
  // (1 - 0 - 2/2)/4 with the bottom 0/0 term dropped.
  CHECK(mu_of_lambda(sf, 0.0).value() == doctest::Approx(0.0).epsilon(1e-14));
  // (1 - 2 - 2/4)/4
  CHECK(mu_of_lambda(sf, 2.0).value() == doctest::Approx(-0.375));
  CHECK_FALSE(mu_of_lambda(sf, -1.0).has_value());
}

TEST_CASE("solve_dual detects the boundary case on the unit instance") {
  const SocpSolution sol = solve_dual(unit_spectral());
  CHECK(sol.status == SolveStatus::Boundary);
  CHECK(std::abs(sol.mu_star) <= 1e-12);
  CHECK(std::abs(sol.lambda_star) <= 1e-12);
}

TEST_CASE("closed form when b vanishes") {
  SpectralForm sf;
  sf.d.resize(2);
  sf.d << 1.0, 1.0;
  sf.b = Eigen::VectorXd::Zero(2);
  sf.c = 0.0;
  sf.H = Eigen::MatrixXd::Identity(2, 2);
  sf.gamma = 1.0;
  sf.n = 1;
  sf.m = 1;
  const SocpSolution sol = solve_dual(sf);
  CHECK(sol.status == SolveStatus::Boundary);
  CHECK(sol.lambda_star == doctest::Approx(-1.0));
  CHECK(sol.mu_star == doctest::Approx(0.25));
  CHECK(sol.s_star.isZero());
}

TEST_CASE("solution feasibility and eliminated s") {
  for (std::uint64_t seed : {2u, 9u, 14u}) {
    const Dataset d = random_instance(6, 3, seed);
    const SpectralForm sf = build_spectral(build_matrices(d, 0.4));
    const SocpSolution sol = solve_dual(sf);

    const double tol_abs = 1e-9 * (1.0 + sf.d.cwiseAbs().maxCoeff());
    for (Eigen::Index i = 0; i < sf.d.size(); ++i) {
      const double t = sf.d(i) + sol.lambda_star / sf.gamma;
      CHECK(t >= -tol_abs);
      CHECK(sol.s_star(i) * t >= sf.b(i) * sf.b(i) - 1e-8 * (1.0 + sf.b(i) * sf.b(i)));
    }
    const double slack =
        sf.c - 4.0 * sol.mu_star - sol.lambda_star - sol.s_star.sum();
    CHECK(std::abs(slack) <= 1e-8 * (1.0 + std::abs(sf.c)));
  }
}

TEST_CASE("interior stationarity identity") {
  const Dataset d = random_instance(8, 4, 3);
  const SpectralForm sf = build_spectral(build_matrices(d, 0.25));
  const SocpSolution sol = solve_dual(sf);
  REQUIRE(sol.status == SolveStatus::Interior);
  double sum = 0.0;
  for (Eigen::Index i = 0; i < sf.d.size(); ++i) {
    const double t = sf.d(i) + sol.lambda_star / sf.gamma;
    sum += sf.b(i) * sf.b(i) / (t * t);
  }
  CHECK(std::abs(sum - sf.gamma) <= 1e-6 * sf.gamma);
}

TEST_CASE("dual matches the brute-force oracle on small instances") {
  int instance = 0;
  for (std::uint64_t seed : {11u, 12u, 13u, 14u, 15u, 16u}) {
    const Eigen::Index n = 1 + (instance % 4);
    const Eigen::Index m = 2 + (instance % 5);
    const double gamma = (instance % 2) ? 0.1 : 1.0;
    ++instance;

    const Dataset d = random_instance(m, n, seed);
    const SocpSolution sol = solve_dual(build_spectral(build_matrices(d, gamma)));
    const auto brute = oracle::brute_force_min(d.X, d.y, d.z, gamma);
    CHECK(std::abs(sol.mu_star - brute.value) <=
          1e-6 * (1.0 + std::abs(brute.value)));
  }
}

TEST_CASE("concavity: interior values dominate chords") {
  const Dataset d = random_instance(7, 3, 21);
  const SpectralForm sf = build_spectral(build_matrices(d, 0.6));
  const double lambda_left = -sf.gamma * sf.d(0);
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> off(0.01, 4.0);
  for (int rep = 0; rep < 25; ++rep) {
    double a = lambda_left + off(rng);
    double c = lambda_left + off(rng);
    if (a > c) std::swap(a, c);
    const double t = 0.3 + 0.4 * off(rng) / 4.0;
    const double b = a + t * (c - a);
    const auto fa = mu_of_lambda(sf, a);
    const auto fb = mu_of_lambda(sf, b);
    const auto fc = mu_of_lambda(sf, c);
    REQUIRE(fa.has_value());
    REQUIRE(fb.has_value());
    REQUIRE(fc.has_value());
    const double chord = *fa + (*fc - *fa) * (b - a) / (c - a);
    CHECK(*fb >= chord - 1e-10 * (1.0 + std::abs(chord)));
  }
}

TEST_CASE("check_lmi certificates") {
  const Dataset d = random_instance(6, 3, 8);
  const GameMatrices gm = build_matrices(d, 0.5);

  // (0,0) is feasible because A is Gram.
  CHECK(check_lmi(gm, 0.0, 0.0) >= -1e-10 * gm.A.trace());
  // (-1, 1) is strictly feasible.
  CHECK(check_lmi(gm, -1.0, 1.0) > 0.0);

  const SpectralForm sf = build_spectral(gm);
  const SocpSolution sol = solve_dual(sf);
  const double cert = check_lmi(gm, sol.mu_star, sol.lambda_star);
  CHECK(cert >= -1e-8 * gm.A.norm());

  SUBCASE("local optimality probe") {
    const double tol = 1e-10;
    CHECK(check_lmi(gm, sol.mu_star - 10 * tol, sol.lambda_star) >=
          -1e-8 * gm.A.norm());
    const double bump = 1e-4 * (1.0 + std::abs(sol.mu_star));
    CHECK(check_lmi(gm, sol.mu_star + bump, sol.lambda_star) <
          -1e-8 * gm.A.norm());
  }

  SUBCASE("unit instance is singular at the optimum") {
    const GameMatrices ugm = build_matrices(unit_instance(), 1.0);
    CHECK(std::abs(check_lmi(ugm, 0.0, 0.0)) <= 1e-10);
  }
}

TEST_CASE("export_conic layout") {
  const std::filesystem::path p =
      std::filesystem::temp_directory_path() / "spgls_conic.txt";
  export_conic(unit_spectral(), p);

  std::ifstream in(p);
  REQUIRE(in.good());
  std::string line;
  int lin_rows = 0;
  int rcones = 0;
  std::getline(in, line);
  CHECK(line == "rsocp 2");
  std::getline(in, line);
  CHECK(line == "obj max mu");
  while (std::getline(in, line)) {
    if (line.rfind("lin", 0) == 0) ++lin_rows;
    if (line.rfind("rcone", 0) == 0) ++rcones;
  }
  CHECK(lin_rows == 3);  // n + 2 linear rows
  CHECK(rcones == 2);    // n + 1 rotated cones
}

TEST_CASE("config validation and iteration caps") {
  SolverConfig bad;
  bad.tol = 0.0;
  CHECK_THROWS_AS(static_cast<void>(solve_dual(unit_spectral(), bad)),
                  ArgumentError);

  SolverConfig capped;
  capped.max_iter = 1;
  const Dataset d = random_instance(6, 3, 19);
  const SpectralForm sf = build_spectral(build_matrices(d, 0.5));
  CHECK_THROWS_AS(static_cast<void>(solve_dual(sf, capped)), ConvergenceError);
}

}  // TEST_SUITE
