#pragma once

#include <filesystem>
#include <string>
#include <utility>
#include <vector>

#include "spgls/dataset.hpp"
#include "spgls/recovery.hpp"
#include "spgls/reform.hpp"

namespace spgls {

/// Game objective
///   | (w'w/g) z + X w - y - (w'w/g) y |^2 / (1 + w'w/g)^2
/// i.e. the learner's squared loss after the provider's best response.
double spg_objective(const Eigen::VectorXd& w, const Dataset& d, double gamma);

/// Provider's closed-form optimal data modification
///   X* = (z w' + gamma X)(w w' + gamma I)^{-1}.
Eigen::MatrixXd best_response(const Eigen::MatrixXd& X, const Eigen::VectorXd& w,
                              const Eigen::VectorXd& z, double gamma);

/// X* w computed directly via Sherman-Morrison, without forming X*.
Eigen::VectorXd attacked_prediction(const Eigen::MatrixXd& X,
                                    const Eigen::VectorXd& w,
                                    const Eigen::VectorXd& z, double gamma);

struct FResult {
  double value = 0.0;
  double lambda_at_max = 0.0;
};

/// Parametric value F(q) = sup_lambda [c - 4q - lambda - sum b_i^2/(d_i +
/// lambda/gamma)], evaluated by golden-section search (deliberately a
/// different 1-D method than solve_dual). F is nonincreasing in q and its
/// unique root is mu*.
FResult f_of_q_detail(const SpectralForm& sf, double q);
double f_of_q(const SpectralForm& sf, double q);

struct BisectionState {
  double q_lo = 0.0;
  double q_hi = 0.0;
  int iterations = 0;
  std::vector<std::pair<double, double>> history;  // (q, F(q)) evaluations
};

struct BisectionResult {
  double q_star = 0.0;
  BisectionState state;
};

/// Bisection baseline on F(q) with bracket [0, |y|^2] (the w = 0 point
/// certifies F(|y|^2) <= 0). wide_bracket widens the start to [0, 2 |y|^2].
BisectionResult dinkelbach_bisection(const SpectralForm& sf, double eps,
                                     bool wide_bracket = false);

/// w = (X'X + eta I)^{-1} X'y via a positive-definite solve.
Eigen::VectorXd ridge_fit(const Eigen::MatrixXd& X, const Eigen::VectorXd& y,
                          double eta);

enum class Method { Spg, Bisect, Ridge, Ols };

const char* to_string(Method m);
Method parse_method(const std::string& name);
std::vector<Method> parse_method_list(const std::string& csv);

/// Equilibrium predictor on a training set via the direct dual solve.
Eigen::VectorXd fit_spg(const Dataset& train, double gamma,
                        const SolverConfig& cfg = {});

/// Equilibrium predictor via the bisection baseline (recovery reuses the
/// lambda at which the golden-section maximum of F(q*) was attained).
Eigen::VectorXd fit_bisect(const Dataset& train, double gamma,
                           double eps = 1e-8);

struct CvCell {
  std::vector<double> fold_mse;
  double mean_mse = std::numeric_limits<double>::quiet_NaN();
  double std_mse = std::numeric_limits<double>::quiet_NaN();
  double seconds = 0.0;
  double ridge_eta = std::numeric_limits<double>::quiet_NaN();  // ridge only
  std::string error;  // nonempty when the fit failed for this cell
};

struct CvReport {
  Eigen::VectorXd gamma_grid;  // ascending
  std::vector<Method> methods;
  std::vector<std::vector<CvCell>> cells;  // [method][gamma]

  void to_csv(const std::filesystem::path& path) const;
  std::string to_json() const;
};

/// 9 logarithmically spaced ridge penalties in [1e-5, 1e3].
Eigen::VectorXd ridge_eta_grid();

/// For each gamma and method: fit on the train folds, score the mean squared
/// error of attacked predictions on the test fold, labels multiplied by
/// label_scale before scoring. attacked_eval = false scores plain X*w
/// predictions instead (no provider response at test time). Honors
/// SPGLS_THREADS for cell parallelism; results are assembled in
/// deterministic (gamma, method, fold) order.
CvReport cross_validate(const Dataset& d, const Eigen::VectorXd& gamma_grid,
                        const std::vector<Method>& methods, const FoldPlan& plan,
                        double label_scale = 1.0, bool attacked_eval = true);

}  // namespace spgls
