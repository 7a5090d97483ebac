#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <variant>
#include <vector>

#include <Eigen/Dense>

namespace spgls::cli {

// Exit codes: 0 success, 2 argument error, 3 data error, 4 solver or
// verification failure.
inline constexpr int kExitOk = 0;
inline constexpr int kExitArgument = 2;
inline constexpr int kExitData = 3;
inline constexpr int kExitSolver = 4;

struct GenConfig {
  Eigen::Index m = 200;
  Eigen::Index n = 100;
  double noise = 0.1;
  std::uint64_t seed = 0;
  std::filesystem::path out;
};

struct SolveConfig {
  std::filesystem::path input;
  double gamma = 0.01;
  std::string y_column = "y";
  std::string z_column;  // empty: use "z" when present, else z = y
  std::filesystem::path out_json;
  double tol = 1e-10;
  std::filesystem::path export_conic_path;  // optional cross-check artifact
};

struct CvConfig {
  std::filesystem::path input;
  std::string y_column = "y";
  std::string z_column;
  double gamma_lo = 1e-3;
  double gamma_hi = 0.75;
  int gamma_count = 40;
  bool linear_spacing = false;
  int folds = 10;
  std::uint64_t seed = 0;
  double beta = 1.0;
  bool clean_eval = false;  // score plain X*w instead of attacked predictions
  std::string methods = "spg,ridge,ols";
  std::filesystem::path out_csv;
  std::filesystem::path out_json;
};

struct BenchConfig {
  std::vector<Eigen::Index> sizes = {100, 500, 1000};  // feature counts n
  std::vector<double> ratios = {0.5, 1.0, 2.0};        // m = ratio * n
  double gamma = 0.01;
  double eps = 1e-8;
  bool wide_bracket = false;  // start bisection from [0, 2|y|^2]
  std::uint64_t seed = 0;
  std::filesystem::path out;
};

struct AttackConfig {
  std::filesystem::path input;
  std::string spec;  // compact attack string, e.g. "threshold:6"
  std::string y_column = "y";
  std::string z_column;
  std::filesystem::path out;
};

using RunConfig =
    std::variant<GenConfig, SolveConfig, CvConfig, BenchConfig, AttackConfig>;

struct BenchRow {
  Eigen::Index m = 0;
  Eigen::Index n = 0;
  double bisect_seconds = 0.0;
  double direct_seconds = 0.0;
  double eig_seconds = 0.0;
};

/// CSV with columns m, n, bisect_seconds, direct_seconds, eig_seconds, ratio.
void emit_bench_report(const std::vector<BenchRow>& rows,
                       const std::filesystem::path& path);

/// Executes one subcommand; throws spgls errors on failure.
int run(const RunConfig& config);

/// Parses argv, runs, and maps exceptions onto exit codes.
int main_with_args(int argc, const char* const* argv);

}  // namespace spgls::cli
