#pragma once

#include "spgls/dataset.hpp"
#include "spgls/errors.hpp"
#include "spgls/evaluate.hpp"
#include "spgls/recovery.hpp"
#include "spgls/reform.hpp"
#include "spgls/solver.hpp"

namespace spgls {

struct StageSeconds {
  double build = 0.0;
  double spectral = 0.0;
  double eig = 0.0;  // decomposition portion of the spectral stage
  double solve = 0.0;
  double certify = 0.0;
  double recover = 0.0;
  double verify = 0.0;
};

/// End-to-end result of one game solve.
struct GameSolution {
  Equilibrium equilibrium;
  SocpSolution socp;
  VerificationReport report;
  StageSeconds seconds;
};

/// Full pipeline: build matrices, reduce, solve the 1-D dual, certify the
/// matrix inequality, recover w and verify. Throws on solver or recovery
/// failure; a failed verification is returned in the report, not thrown.
GameSolution solve_game(const Dataset& d, double gamma,
                        const SolverConfig& cfg = {});

}  // namespace spgls
