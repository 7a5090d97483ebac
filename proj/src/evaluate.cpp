#include "spgls/evaluate.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <thread>

#include <json.hpp>

#include "spgls/errors.hpp"

namespace spgls {

double spg_objective(const Eigen::VectorXd& w, const Dataset& d, double gamma) {
  if (!(gamma > 0.0)) throw ArgumentError("gamma must be positive");
  const double alpha = w.squaredNorm() / gamma;
  const Eigen::VectorXd u = alpha * d.z + d.X * w - d.y - alpha * d.y;
  const double den = (1.0 + alpha) * (1.0 + alpha);
  return u.squaredNorm() / den;
}

Eigen::MatrixXd best_response(const Eigen::MatrixXd& X, const Eigen::VectorXd& w,
                              const Eigen::VectorXd& z, double gamma) {
  if (!(gamma > 0.0)) throw ArgumentError("gamma must be positive");
  // (w w' + g I)^{-1} = (I - w w' / (g + w'w)) / g by Sherman-Morrison.
  const Eigen::MatrixXd M = z * w.transpose() + gamma * X;
  const double denom = gamma + w.squaredNorm();
  return (M - (M * w) * (w.transpose() / denom)) / gamma;
}

Eigen::VectorXd attacked_prediction(const Eigen::MatrixXd& X,
                                    const Eigen::VectorXd& w,
                                    const Eigen::VectorXd& z, double gamma) {
  if (!(gamma > 0.0)) throw ArgumentError("gamma must be positive");
  const double alpha = w.squaredNorm() / gamma;
  return (alpha * z + X * w) / (1.0 + alpha);
}

namespace {

double f_value(const SpectralForm& sf, double q, double lambda) {
  const auto mu = mu_of_lambda(sf, lambda);
  if (!mu) return -std::numeric_limits<double>::infinity();
  return 4.0 * (*mu - q);
}

}  // namespace

FResult f_of_q_detail(const SpectralForm& sf, double q) {
  const double lambda_left = -sf.gamma * sf.d(0);

  // Expand to the right until the concave value turns downward.
  double a = lambda_left;
  double offset = 1.0;
  double x_prev = lambda_left + offset;
  double v_prev = f_value(sf, q, x_prev);
  double hi = x_prev;
  for (int k = 0; k < 200; ++k) {
    offset *= 2.0;
    const double x = lambda_left + offset;
    const double v = f_value(sf, q, x);
    if (v < v_prev) {
      hi = x;
      break;
    }
    x_prev = x;
    v_prev = v;
    hi = x;
    if (k == 199)
      throw ConvergenceError("golden-section bracket failed to close");
  }

  // Golden-section search; the left endpoint itself is never probed, which
  // keeps blocked boundary evaluations out of the shrinking interval.
  constexpr double kGolden = 0.6180339887498949;
  double x1 = hi - kGolden * (hi - a);
  double x2 = a + kGolden * (hi - a);
  double f1 = f_value(sf, q, x1);
  double f2 = f_value(sf, q, x2);
  for (int it = 0; it < 300 && (hi - a) > 1e-11 * (1.0 + std::abs(a) + std::abs(hi));
       ++it) {
    if (f1 < f2) {
      a = x1;
      x1 = x2;
      f1 = f2;
      x2 = a + kGolden * (hi - a);
      f2 = f_value(sf, q, x2);
    } else {
      hi = x2;
      x2 = x1;
      f2 = f1;
      x1 = hi - kGolden * (hi - a);
      f1 = f_value(sf, q, x1);
    }
  }

  FResult best;
  best.value = f1;
  best.lambda_at_max = x1;
  if (f2 > best.value) {
    best.value = f2;
    best.lambda_at_max = x2;
  }
  // The boundary point is admissible in the hard case; take it if better.
  const double v_left = f_value(sf, q, lambda_left);
  if (v_left > best.value) {
    best.value = v_left;
    best.lambda_at_max = lambda_left;
  }
  return best;
}

double f_of_q(const SpectralForm& sf, double q) {
  return f_of_q_detail(sf, q).value;
}

BisectionResult dinkelbach_bisection(const SpectralForm& sf, double eps,
                                     bool wide_bracket) {
  if (!(eps > 0.0)) throw ArgumentError("eps must be positive");

  BisectionResult res;
  BisectionState& st = res.state;
  st.q_lo = 0.0;
  st.q_hi = wide_bracket ? 2.0 * sf.y_norm_sq : sf.y_norm_sq;

  const double f_lo = f_of_q(sf, st.q_lo);
  st.history.emplace_back(st.q_lo, f_lo);
  if (f_lo < -1e-9 * (1.0 + st.q_hi))
    throw InconsistencyError("F(q_lo) is negative: " + std::to_string(f_lo));
  if (st.q_hi > 0.0) {
    const double f_hi = f_of_q(sf, st.q_hi);
    st.history.emplace_back(st.q_hi, f_hi);
    if (f_hi > 1e-9 * (1.0 + st.q_hi))
      throw InconsistencyError("F(q_hi) is positive: " + std::to_string(f_hi));
  }

  constexpr int kCap = 4096;
  while (st.q_hi - st.q_lo > eps) {
    const double mid = 0.5 * (st.q_lo + st.q_hi);
    const double fm = f_of_q(sf, mid);
    st.history.emplace_back(mid, fm);
    if (fm >= 0.0)
      st.q_lo = mid;
    else
      st.q_hi = mid;
    if (++st.iterations > kCap)
      throw ConvergenceError("bisection exceeded its iteration cap");
  }
  res.q_star = 0.5 * (st.q_lo + st.q_hi);
  return res;
}

Eigen::VectorXd ridge_fit(const Eigen::MatrixXd& X, const Eigen::VectorXd& y,
                          double eta) {
  if (eta < 0.0) throw ArgumentError("eta must be nonnegative");
  if (X.rows() != y.size()) throw ArgumentError("X and y row counts differ");

  const Eigen::Index n = X.cols();
  Eigen::MatrixXd M = Eigen::MatrixXd::Zero(n, n);
  M.selfadjointView<Eigen::Upper>().rankUpdate(X.transpose());
  M.triangularView<Eigen::StrictlyLower>() =
      M.triangularView<Eigen::StrictlyUpper>().transpose();
  M.diagonal().array() += eta;

  const Eigen::VectorXd rhs = X.transpose() * y;
  Eigen::LLT<Eigen::MatrixXd> llt(M);
  if (llt.info() != Eigen::Success)
    throw NumericError("normal equations are singular (eta too small?)");
  // LLT happily factors consistent singular systems; a vanishing pivot is
  // the rank deficiency signal. The pivot ratio scales like sqrt(cond), so
  // 1e-7 marks cond(M) ~ 1e14, past which the normal equations are noise.
  const Eigen::VectorXd pivots = llt.matrixLLT().diagonal();
  if (!(pivots.minCoeff() > 1e-7 * pivots.maxCoeff()))
    throw NumericError("normal equations are rank deficient at this eta");
  const Eigen::VectorXd w = llt.solve(rhs);
  const double resid = (M * w - rhs).norm();
  if (!w.allFinite() || resid > 1e-6 * (1.0 + rhs.norm() + M.norm() * w.norm()))
    throw NumericError("normal equations are numerically singular");
  return w;
}

const char* to_string(Method m) {
  switch (m) {
    case Method::Spg: return "spg";
    case Method::Bisect: return "bisect";
    case Method::Ridge: return "ridge";
    case Method::Ols: return "ols";
  }
  return "unknown";
}

Method parse_method(const std::string& name) {
  if (name == "spg") return Method::Spg;
  if (name == "bisect") return Method::Bisect;
  if (name == "ridge") return Method::Ridge;
  if (name == "ols") return Method::Ols;
  throw ArgumentError("unknown method '" + name + "'");
}

std::vector<Method> parse_method_list(const std::string& csv) {
  std::vector<Method> out;
  std::size_t start = 0;
  while (start <= csv.size()) {
    const std::size_t comma = csv.find(',', start);
    const std::string tok =
        csv.substr(start, comma == std::string::npos ? csv.size() - start
                                                     : comma - start);
    if (!tok.empty()) out.push_back(parse_method(tok));
    if (comma == std::string::npos) break;
    start = comma + 1;
  }
  if (out.empty()) throw ArgumentError("empty method list");
  return out;
}

Eigen::VectorXd fit_spg(const Dataset& train, double gamma,
                        const SolverConfig& cfg) {
  const GameMatrices gm = build_matrices(train, gamma);
  const SpectralForm sf = build_spectral(gm);
  const SocpSolution sol = solve_dual(sf, cfg);
  return recover_primal(sf, sol, gm).w;
}

namespace {

// Local Newton refinement of the dual multiplier before recovery; the
// golden-section location is accurate enough for F(q) but recovery needs
// the stationarity residual itself to be small.
double refine_multiplier(const SpectralForm& sf, double lambda) {
  const double b_floor = 1e-10 * sf.b.cwiseAbs().maxCoeff();
  const double tie = 1e-12 * (1.0 + sf.d.cwiseAbs().maxCoeff());
  const double lambda_left = -sf.gamma * sf.d(0) + 0.0;
  for (int it = 0; it < 60; ++it) {
    double slope = -1.0;
    double deriv = 0.0;
    bool blocked = false;
    for (Eigen::Index i = 0; i < sf.d.size(); ++i) {
      if (std::abs(sf.b(i)) <= b_floor) continue;
      const double t = sf.d(i) + lambda / sf.gamma;
      if (t <= tie) {
        blocked = true;
        break;
      }
      slope += sf.b(i) * sf.b(i) / (t * t) / sf.gamma;
      deriv -= 2.0 * sf.b(i) * sf.b(i) / (t * t * t) / (sf.gamma * sf.gamma);
    }
    if (blocked || std::abs(slope) <= 1e-13 || !(deriv < 0.0)) break;
    double next = lambda - slope / deriv;
    if (next <= lambda_left) next = 0.5 * (lambda + lambda_left);
    if (next == lambda) break;
    lambda = next;
  }
  return lambda;
}

}  // namespace

Eigen::VectorXd fit_bisect(const Dataset& train, double gamma, double eps) {
  const GameMatrices gm = build_matrices(train, gamma);
  const SpectralForm sf = build_spectral(gm);
  const BisectionResult res = dinkelbach_bisection(sf, eps);
  const FResult fd = f_of_q_detail(sf, res.q_star);
  const double lambda_hat = refine_multiplier(sf, fd.lambda_at_max);

  const auto solution_at = [&](double lambda, SolveStatus status) {
    SocpSolution sol;
    sol.lambda_star = lambda;
    sol.mu_star = mu_of_lambda(sf, lambda).value_or(res.q_star);
    sol.status = status;
    sol.iterations = res.state.iterations;
    return sol;
  };

  try {
    return recover_primal(sf, solution_at(lambda_hat, SolveStatus::Interior),
                          gm).w;
  } catch (const VerificationError&) {
    // Near the domain boundary the interior formula misses the free
    // component; retry as a hard case at the endpoint when admissible.
    const double lambda_left = -gamma * sf.d(0);
    if (mu_of_lambda(sf, lambda_left).has_value())
      return recover_primal(sf, solution_at(lambda_left, SolveStatus::Boundary),
                            gm).w;
    throw;
  }
}

Eigen::VectorXd ridge_eta_grid() {
  Eigen::VectorXd grid(9);
  const double lo = std::log10(1e-5);
  const double hi = std::log10(1e3);
  for (int i = 0; i < 9; ++i)
    grid(i) = std::pow(10.0, lo + (hi - lo) * i / 8.0);
  return grid;
}

namespace {

struct FoldData {
  Dataset train;
  Dataset test;
};

double fold_mse(const Eigen::VectorXd& w, const Dataset& test, double gamma,
                double label_scale, bool attacked_eval) {
  const Eigen::VectorXd pred =
      (attacked_eval ? attacked_prediction(test.X, w, test.z, gamma)
                     : Eigen::VectorXd(test.X * w)) *
      label_scale;
  const Eigen::VectorXd truth = test.y * label_scale;
  return (pred - truth).squaredNorm() / static_cast<double>(test.rows());
}

void finalize_cell(CvCell& cell) {
  if (cell.fold_mse.empty()) return;
  double sum = 0.0;
  for (double v : cell.fold_mse) sum += v;
  cell.mean_mse = sum / static_cast<double>(cell.fold_mse.size());
  if (cell.fold_mse.size() > 1) {
    double ss = 0.0;
    for (double v : cell.fold_mse) ss += (v - cell.mean_mse) * (v - cell.mean_mse);
    cell.std_mse = std::sqrt(ss / static_cast<double>(cell.fold_mse.size() - 1));
  } else {
    cell.std_mse = 0.0;
  }
}

int thread_count_from_env() {
  const char* env = std::getenv("SPGLS_THREADS");
  if (!env) return 1;
  const int v = std::atoi(env);
  if (v < 1) return 1;
  return std::min(v, 64);
}

}  // namespace

CvReport cross_validate(const Dataset& d, const Eigen::VectorXd& gamma_grid,
                        const std::vector<Method>& methods, const FoldPlan& plan,
                        double label_scale, bool attacked_eval) {
  d.validate();
  if (gamma_grid.size() == 0) throw ArgumentError("empty gamma grid");
  if (!std::is_sorted(gamma_grid.data(), gamma_grid.data() + gamma_grid.size()))
    throw ArgumentError("gamma grid must ascend");
  if (gamma_grid(0) <= 0.0) throw ArgumentError("gamma values must be positive");
  if (methods.empty()) throw ArgumentError("no methods requested");
  if (static_cast<Eigen::Index>(plan.assignments.size()) != d.rows())
    throw ArgumentError("fold plan does not match the dataset");
  if (!(label_scale > 0.0)) throw ArgumentError("label scale must be positive");

  std::vector<FoldData> folds(static_cast<std::size_t>(plan.k));
  for (int f = 0; f < plan.k; ++f) {
    folds[static_cast<std::size_t>(f)].train =
        d.select_rows(plan.complement_indices(f));
    folds[static_cast<std::size_t>(f)].test = d.select_rows(plan.fold_indices(f));
  }

  CvReport report;
  report.gamma_grid = gamma_grid;
  report.methods = methods;
  report.cells.assign(methods.size(),
                      std::vector<CvCell>(static_cast<std::size_t>(gamma_grid.size())));

  const Eigen::VectorXd etas = ridge_eta_grid();
  const auto run_cell = [&](std::size_t mi, Eigen::Index gi) {
    const double gamma = gamma_grid(gi);
    const Method method = methods[mi];
    CvCell& cell = report.cells[mi][static_cast<std::size_t>(gi)];
    const auto t0 = std::chrono::steady_clock::now();
    try {
      if (method == Method::Ridge) {
        double best_mean = std::numeric_limits<double>::infinity();
        for (Eigen::Index e = 0; e < etas.size(); ++e) {
          std::vector<double> losses;
          losses.reserve(folds.size());
          for (const FoldData& fd : folds) {
            const Eigen::VectorXd w = ridge_fit(fd.train.X, fd.train.y, etas(e));
            losses.push_back(fold_mse(w, fd.test, gamma, label_scale, attacked_eval));
          }
          double mean = 0.0;
          for (double v : losses) mean += v;
          mean /= static_cast<double>(losses.size());
          if (mean < best_mean) {
            best_mean = mean;
            cell.fold_mse = std::move(losses);
            cell.ridge_eta = etas(e);
          }
        }
      } else {
        for (const FoldData& fd : folds) {
          Eigen::VectorXd w;
          switch (method) {
            case Method::Spg: w = fit_spg(fd.train, gamma); break;
            case Method::Bisect: w = fit_bisect(fd.train, gamma); break;
            case Method::Ols: w = ridge_fit(fd.train.X, fd.train.y, 0.0); break;
            case Method::Ridge: break;  // handled above
          }
          cell.fold_mse.push_back(
              fold_mse(w, fd.test, gamma, label_scale, attacked_eval));
        }
      }
      finalize_cell(cell);
    } catch (const Error& e) {
      cell.fold_mse.clear();
      cell.error = e.what();
    }
    const auto t1 = std::chrono::steady_clock::now();
    cell.seconds = std::chrono::duration<double>(t1 - t0).count();
  };

  const int threads = thread_count_from_env();
  const std::size_t total =
      methods.size() * static_cast<std::size_t>(gamma_grid.size());
  if (threads <= 1) {
    for (std::size_t k = 0; k < total; ++k)
      run_cell(k / static_cast<std::size_t>(gamma_grid.size()),
               static_cast<Eigen::Index>(k % static_cast<std::size_t>(gamma_grid.size())));
  } else {
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> pool;
    pool.reserve(static_cast<std::size_t>(threads));
    for (int t = 0; t < threads; ++t) {
      pool.emplace_back([&] {
        for (std::size_t k = next.fetch_add(1); k < total; k = next.fetch_add(1))
          run_cell(k / static_cast<std::size_t>(gamma_grid.size()),
                   static_cast<Eigen::Index>(
                       k % static_cast<std::size_t>(gamma_grid.size())));
      });
    }
    for (auto& th : pool) th.join();
  }
  return report;
}

void CvReport::to_csv(const std::filesystem::path& path) const {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write " + path.string());
  out << "gamma,method,mean_mse,std_mse,seconds\n";
  char buf[160];
  for (Eigen::Index gi = 0; gi < gamma_grid.size(); ++gi) {
    for (std::size_t mi = 0; mi < methods.size(); ++mi) {
      const CvCell& cell = cells[mi][static_cast<std::size_t>(gi)];
      std::snprintf(buf, sizeof(buf), "%.17g,%s,%.12g,%.12g,%.6f\n",
                    gamma_grid(gi), to_string(methods[mi]), cell.mean_mse,
                    cell.std_mse, cell.seconds);
      out << buf;
    }
  }
  if (!out) throw DataError("failed writing " + path.string());
}

std::string CvReport::to_json() const {
  nlohmann::json j;
  j["gamma_grid"] = std::vector<double>(
      gamma_grid.data(), gamma_grid.data() + gamma_grid.size());
  std::vector<std::string> names;
  names.reserve(methods.size());
  for (Method m : methods) names.emplace_back(to_string(m));
  j["methods"] = names;

  nlohmann::json results = nlohmann::json::array();
  nlohmann::json timings;
  for (std::size_t mi = 0; mi < methods.size(); ++mi) {
    double total_seconds = 0.0;
    for (Eigen::Index gi = 0; gi < gamma_grid.size(); ++gi) {
      const CvCell& cell = cells[mi][static_cast<std::size_t>(gi)];
      nlohmann::json row;
      row["gamma"] = gamma_grid(gi);
      row["method"] = to_string(methods[mi]);
      row["fold_mse"] = cell.fold_mse;
      row["mean_mse"] = cell.mean_mse;
      row["std_mse"] = cell.std_mse;
      if (methods[mi] == Method::Ridge) row["ridge_eta"] = cell.ridge_eta;
      if (!cell.error.empty()) row["error"] = cell.error;
      results.push_back(std::move(row));
      total_seconds += cell.seconds;
    }
    timings[to_string(methods[mi])] = total_seconds;
  }
  j["results"] = std::move(results);
  j["timings"] = std::move(timings);
  return j.dump(2);
}

}  // namespace spgls
