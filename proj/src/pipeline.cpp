#include "spgls/spgls.hpp"

#include <chrono>

namespace spgls {

namespace {

class StageTimer {
 public:
  StageTimer() : last_(std::chrono::steady_clock::now()) {}

  double lap() {
    const auto now = std::chrono::steady_clock::now();
    const double s = std::chrono::duration<double>(now - last_).count();
    last_ = now;
    return s;
  }

 private:
  std::chrono::steady_clock::time_point last_;
};

}  // namespace

GameSolution solve_game(const Dataset& d, double gamma,
                        const SolverConfig& cfg) {
  GameSolution out;
  StageTimer timer;

  const GameMatrices gm = build_matrices(d, gamma);
  out.seconds.build = timer.lap();

  const SpectralForm sf = build_spectral(gm, &out.seconds.eig);
  out.seconds.spectral = timer.lap();

  out.socp = solve_dual(sf, cfg);
  out.seconds.solve = timer.lap();

  out.socp.certificate_min_eig =
      check_lmi(gm, out.socp.mu_star, out.socp.lambda_star);
  out.seconds.certify = timer.lap();

  out.equilibrium = recover_primal(sf, out.socp, gm);
  out.seconds.recover = timer.lap();

  out.report = verify_equilibrium(out.equilibrium, gm);
  out.seconds.verify = timer.lap();
  return out;
}

}  // namespace spgls
