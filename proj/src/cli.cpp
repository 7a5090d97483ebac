#include "spgls/cli.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>

#include <CLI11.hpp>
#include <json.hpp>

#include "spgls/spgls.hpp"

namespace spgls::cli {

namespace {

// Label-column resolution: an explicit z column is strict, the default "z"
// is used only when the header actually has one.
Dataset load_with_labels(const std::filesystem::path& input,
                         const std::string& y_column,
                         const std::string& z_column) {
  if (!z_column.empty()) return load_csv(input, y_column, z_column);
  const std::vector<std::string> header = csv_header(input);
  const bool has_z =
      std::find(header.begin(), header.end(), "z") != header.end();
  if (has_z && y_column != "z") return load_csv(input, y_column, std::string("z"));
  return load_csv(input, y_column);
}

double elapsed(const std::chrono::steady_clock::time_point& t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
      .count();
}

int run_gen(const GenConfig& cfg) {
  const Dataset d = synth_regression(cfg.m, cfg.n, cfg.noise, cfg.seed);
  save_csv(d, cfg.out);
  std::cout << "wrote " << cfg.out.string() << " (" << d.rows() << " rows, "
            << d.cols() << " features)\n";
  return kExitOk;
}

int run_attack(const AttackConfig& cfg) {
  Dataset d = load_with_labels(cfg.input, cfg.y_column, cfg.z_column);
  const AttackSpec spec = parse_attack_spec(cfg.spec);
  d.z = gen_targets(d.y, spec);
  save_csv(d, cfg.out);
  std::cout << "wrote " << cfg.out.string() << " with targets from '"
            << cfg.spec << "'\n";
  return kExitOk;
}

int run_solve(const SolveConfig& cfg) {
  const Dataset d = load_with_labels(cfg.input, cfg.y_column, cfg.z_column);
  SolverConfig scfg;
  scfg.tol = cfg.tol;

  StageSeconds sec;
  auto t0 = std::chrono::steady_clock::now();
  const GameMatrices gm = build_matrices(d, cfg.gamma);
  sec.build = elapsed(t0);

  t0 = std::chrono::steady_clock::now();
  const SpectralForm sf = build_spectral(gm, &sec.eig);
  sec.spectral = elapsed(t0);

  if (!cfg.export_conic_path.empty()) export_conic(sf, cfg.export_conic_path);

  t0 = std::chrono::steady_clock::now();
  SocpSolution sol = solve_dual(sf, scfg);
  sec.solve = elapsed(t0);

  t0 = std::chrono::steady_clock::now();
  sol.certificate_min_eig = check_lmi(gm, sol.mu_star, sol.lambda_star);
  sec.certify = elapsed(t0);

  t0 = std::chrono::steady_clock::now();
  const Equilibrium eq = recover_primal(sf, sol, gm);
  sec.recover = elapsed(t0);

  t0 = std::chrono::steady_clock::now();
  const VerificationReport rep = verify_equilibrium(eq, gm);
  sec.verify = elapsed(t0);

  nlohmann::json j;
  j["mu"] = eq.mu_star;
  j["lambda"] = eq.lambda_star;
  j["alpha"] = eq.alpha;
  j["w"] = std::vector<double>(eq.w.data(), eq.w.data() + eq.w.size());
  j["objective"] = eq.objective_value;
  j["residuals"] = {{"constraint", eq.residual_constraint},
                    {"objective", eq.residual_objective}};
  j["status"] = to_string(eq.status);
  j["iterations"] = sol.iterations;
  j["certificate_min_eig"] = sol.certificate_min_eig;
  j["verification"] = {{"pass", rep.pass()},
                       {"objective_ok", rep.objective_ok},
                       {"constraint_ok", rep.constraint_ok},
                       {"lmi_ok", rep.lmi_ok},
                       {"lmi_min_eig", rep.lmi_min_eig}};
  j["timings"] = {{"build_s", sec.build},     {"spectral_s", sec.spectral},
                  {"eig_s", sec.eig},         {"solve_s", sec.solve},
                  {"certify_s", sec.certify}, {"recover_s", sec.recover},
                  {"verify_s", sec.verify}};

  if (!cfg.out_json.empty()) {
    std::ofstream out(cfg.out_json);
    if (!out) throw DataError("cannot write " + cfg.out_json.string());
    out << j.dump(2) << '\n';
  } else {
    std::cout << j.dump(2) << '\n';
  }

  std::cout << "mu* = " << eq.mu_star << ", lambda* = " << eq.lambda_star
            << ", status = " << to_string(eq.status)
            << ", verification = " << (rep.pass() ? "pass" : "FAIL") << '\n';
  if (!rep.pass())
    throw VerificationError("equilibrium failed verification; see report");
  return kExitOk;
}

int run_cv(const CvConfig& cfg) {
  if (!(cfg.gamma_lo > 0.0) || !(cfg.gamma_lo <= cfg.gamma_hi))
    throw ArgumentError("gamma grid requires 0 < lo <= hi");
  if (cfg.gamma_count < 1) throw ArgumentError("gamma count must be positive");
  if (cfg.folds < 2) throw ArgumentError("folds must be at least 2");

  const Dataset raw = load_with_labels(cfg.input, cfg.y_column, cfg.z_column);
  auto [normalized, nparams] = minmax_normalize(raw);
  auto [scaled, sparams] = scale_labels(normalized, cfg.beta);

  Eigen::VectorXd grid(cfg.gamma_count);
  if (cfg.gamma_count == 1) {
    grid(0) = cfg.gamma_lo;
  } else if (cfg.linear_spacing) {
    for (int i = 0; i < cfg.gamma_count; ++i)
      grid(i) = cfg.gamma_lo +
                (cfg.gamma_hi - cfg.gamma_lo) * i / (cfg.gamma_count - 1.0);
  } else {
    const double llo = std::log(cfg.gamma_lo);
    const double lhi = std::log(cfg.gamma_hi);
    for (int i = 0; i < cfg.gamma_count; ++i)
      grid(i) = std::exp(llo + (lhi - llo) * i / (cfg.gamma_count - 1.0));
    grid(0) = cfg.gamma_lo;
    grid(cfg.gamma_count - 1) = cfg.gamma_hi;
  }

  const FoldPlan plan = kfold_split(scaled.rows(), cfg.folds, cfg.seed);
  const std::vector<Method> methods = parse_method_list(cfg.methods);
  const CvReport report = cross_validate(scaled, grid, methods, plan,
                                         sparams.label_scale(), !cfg.clean_eval);

  if (!cfg.out_csv.empty()) report.to_csv(cfg.out_csv);
  if (!cfg.out_json.empty()) {
    std::ofstream out(cfg.out_json);
    if (!out) throw DataError("cannot write " + cfg.out_json.string());
    out << report.to_json() << '\n';
  }

  for (std::size_t mi = 0; mi < methods.size(); ++mi) {
    double best = std::numeric_limits<double>::infinity();
    double seconds = 0.0;
    for (const CvCell& cell : report.cells[mi]) {
      if (!std::isnan(cell.mean_mse)) best = std::min(best, cell.mean_mse);
      seconds += cell.seconds;
    }
    std::printf("%-6s best mean MSE %.6g, total %.3f s\n",
                to_string(methods[mi]), best, seconds);
  }
  return kExitOk;
}

int run_bench(const BenchConfig& cfg) {
  if (cfg.sizes.empty() || cfg.ratios.empty())
    throw ArgumentError("bench requires sizes and ratios");

  std::vector<BenchRow> rows;
  std::uint64_t seed = cfg.seed;
  for (const Eigen::Index n : cfg.sizes) {
    for (const double p : cfg.ratios) {
      const auto m = static_cast<Eigen::Index>(
          std::max<double>(2.0, std::llround(p * static_cast<double>(n))));
      Dataset d = synth_regression(m, n, 0.1, seed++);
      d.z = gen_targets(d.y, Quartile{0.25});

      BenchRow row;
      row.m = m;
      row.n = n;
      const GameMatrices gm = build_matrices(d, cfg.gamma);
      const SpectralForm sf = build_spectral(gm, &row.eig_seconds);

      auto t0 = std::chrono::steady_clock::now();
      const SocpSolution sol = solve_dual(sf);
      row.direct_seconds = elapsed(t0);

      t0 = std::chrono::steady_clock::now();
      const BisectionResult bis =
          dinkelbach_bisection(sf, cfg.eps, cfg.wide_bracket);
      row.bisect_seconds = elapsed(t0);

      if (std::abs(bis.q_star - sol.mu_star) > cfg.eps + 1e-6 * (1.0 + sol.mu_star))
        throw InconsistencyError("bench: bisection and direct solves disagree");

      rows.push_back(row);
      if (!cfg.out.empty()) emit_bench_report(rows, cfg.out);  // flush partials
      std::printf("m=%lld n=%lld bisect %.6g s, direct %.6g s, eig %.6g s\n",
                  static_cast<long long>(m), static_cast<long long>(n),
                  row.bisect_seconds, row.direct_seconds, row.eig_seconds);
    }
  }
  return kExitOk;
}

}  // namespace

void emit_bench_report(const std::vector<BenchRow>& rows,
                       const std::filesystem::path& path) {
  if (rows.empty()) throw ArgumentError("no bench rows to write");
  std::ofstream out(path);
  if (!out) throw DataError("cannot write " + path.string());
  out << "m,n,bisect_seconds,direct_seconds,eig_seconds,ratio\n";
  char buf[200];
  for (const BenchRow& r : rows) {
    std::snprintf(buf, sizeof(buf), "%lld,%lld,%.9g,%.9g,%.9g,%.9g\n",
                  static_cast<long long>(r.m), static_cast<long long>(r.n),
                  r.bisect_seconds, r.direct_seconds, r.eig_seconds,
                  r.bisect_seconds / r.direct_seconds);
    out << buf;
  }
  if (!out) throw DataError("failed writing " + path.string());
}

int run(const RunConfig& config) {
  return std::visit(
      [](const auto& cfg) -> int {
        using T = std::decay_t<decltype(cfg)>;
        if constexpr (std::is_same_v<T, GenConfig>) return run_gen(cfg);
        if constexpr (std::is_same_v<T, SolveConfig>) return run_solve(cfg);
        if constexpr (std::is_same_v<T, CvConfig>) return run_cv(cfg);
        if constexpr (std::is_same_v<T, BenchConfig>) return run_bench(cfg);
        if constexpr (std::is_same_v<T, AttackConfig>) return run_attack(cfg);
      },
      config);
}

int main_with_args(int argc, const char* const* argv) {
  CLI::App app{"Stackelberg prediction game solver (least-squares losses)"};
  app.require_subcommand(1);

  GenConfig gen;
  auto* gen_cmd = app.add_subcommand("gen", "Generate a synthetic CSV dataset");
  gen_cmd->add_option("--m", gen.m, "Sample count")->required();
  gen_cmd->add_option("--n", gen.n, "Feature count")->required();
  gen_cmd->add_option("--noise", gen.noise, "Label noise stddev");
  gen_cmd->add_option("--seed", gen.seed, "RNG seed");
  gen_cmd->add_option("--out", gen.out, "Output CSV path")->required();

  SolveConfig solve;
  auto* solve_cmd =
      app.add_subcommand("solve", "Solve one game instance and verify it");
  solve_cmd->add_option("--input", solve.input, "Input CSV")->required();
  solve_cmd->add_option("--gamma", solve.gamma, "Manipulation cost parameter");
  solve_cmd->add_option("--y-col", solve.y_column, "Learner label column");
  solve_cmd->add_option("--z-col", solve.z_column,
                        "Provider target column (default: 'z' when present)");
  solve_cmd->add_option("--out-json", solve.out_json, "Equilibrium JSON path");
  solve_cmd->add_option("--tol", solve.tol, "Dual solver tolerance");
  solve_cmd->add_option("--export-conic", solve.export_conic_path,
                        "Also write the rotated-cone problem to this path");

  CvConfig cv;
  auto* cv_cmd = app.add_subcommand(
      "cv", "Cross-validate methods over a gamma grid (SPGLS_THREADS honored)");
  cv_cmd->add_option("--input", cv.input, "Input CSV")->required();
  cv_cmd->add_option("--y-col", cv.y_column, "Learner label column");
  cv_cmd->add_option("--z-col", cv.z_column, "Provider target column");
  cv_cmd->add_option("--gamma-lo", cv.gamma_lo, "Grid lower bound");
  cv_cmd->add_option("--gamma-hi", cv.gamma_hi, "Grid upper bound");
  cv_cmd->add_option("--gamma-count", cv.gamma_count, "Grid size");
  cv_cmd->add_flag("--linear-gamma", cv.linear_spacing,
                   "Linear instead of logarithmic gamma spacing");
  cv_cmd->add_option("--folds", cv.folds, "Fold count");
  cv_cmd->add_option("--seed", cv.seed, "Fold shuffle seed");
  cv_cmd->add_option("--beta", cv.beta, "Label scaling constant");
  cv_cmd->add_option("--methods", cv.methods,
                     "Comma list from spg,bisect,ridge,ols");
  cv_cmd->add_flag("--clean-eval", cv.clean_eval,
                   "Score plain X*w instead of attacked predictions");
  cv_cmd->add_option("--out-csv", cv.out_csv, "Report CSV path");
  cv_cmd->add_option("--out-json", cv.out_json, "Report JSON path");

  BenchConfig bench;
  std::vector<long long> bench_sizes;
  auto* bench_cmd =
      app.add_subcommand("bench", "Time eig/direct/bisection across sizes");
  bench_cmd->add_option("--sizes", bench_sizes, "Feature counts n")
      ->delimiter(',');
  bench_cmd->add_option("--ratios", bench.ratios, "m = ratio * n values")
      ->delimiter(',');
  bench_cmd->add_option("--gamma", bench.gamma, "Manipulation cost parameter");
  bench_cmd->add_option("--eps", bench.eps, "Bisection tolerance");
  bench_cmd->add_flag("--wide-bracket", bench.wide_bracket,
                      "Start the bisection from the doubled bracket [0, 2|y|^2]");
  bench_cmd->add_option("--seed", bench.seed, "Dataset seed");
  bench_cmd->add_option("--out", bench.out, "Report CSV path");

  AttackConfig attack;
  auto* attack_cmd =
      app.add_subcommand("attack", "Apply a target-label attack to a CSV");
  attack_cmd->add_option("--input", attack.input, "Input CSV")->required();
  attack_cmd->add_option("--spec", attack.spec, "Attack spec, e.g. threshold:6")
      ->required();
  attack_cmd->add_option("--y-col", attack.y_column, "Learner label column");
  attack_cmd->add_option("--z-col", attack.z_column, "Provider target column");
  attack_cmd->add_option("--out", attack.out, "Output CSV path")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitArgument;
  }

  RunConfig config;
  if (gen_cmd->parsed()) {
    config = gen;
  } else if (solve_cmd->parsed()) {
    config = solve;
  } else if (cv_cmd->parsed()) {
    config = cv;
  } else if (bench_cmd->parsed()) {
    if (!bench_sizes.empty()) {
      bench.sizes.clear();
      for (long long s : bench_sizes)
        bench.sizes.push_back(static_cast<Eigen::Index>(s));
    }
    config = bench;
  } else {
    config = attack;
  }

  try {
    return run(config);
  } catch (const ArgumentError& e) {
    std::cerr << "error: argument: " << e.what() << '\n';
    return kExitArgument;
  } catch (const DataError& e) {
    std::cerr << "error: data: " << e.what() << '\n';
    return kExitData;
  } catch (const Error& e) {
    std::cerr << "error: solver: " << e.what() << '\n';
    return kExitSolver;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitSolver;
  }
}

}  // namespace spgls::cli
