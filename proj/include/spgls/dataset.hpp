#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <utility>
#include <variant>
#include <vector>

namespace spgls {

/// A regression instance as seen by both players: features X (m x n), the
/// learner's labels y and the data provider's target labels z.
struct Dataset {
  Eigen::MatrixXd X;
  Eigen::VectorXd y;
  Eigen::VectorXd z;
  std::vector<std::string> feature_names;  // optional; column order of X

  Eigen::Index rows() const { return X.rows(); }
  Eigen::Index cols() const { return X.cols(); }

  /// Throws unless shapes agree, m >= 1, n >= 1 and all entries are finite.
  void validate() const;

  /// Row subset in the given order.
  Dataset select_rows(const std::vector<Eigen::Index>& rows) const;
};

// Provider target-label constructions.
struct Threshold {
  double t;  // z_i = max(y_i, t)
};
struct Offset {
  double delta;
  bool clamp_at_zero = false;  // z_i = max(y_i + delta, 0) when set
};
struct Quartile {
  double p;  // z_i = max(y_i, quantile_p(y)), p in (0,1)
};
struct NoisyThreshold {
  double t;
  double sigma;  // per-sample threshold t_i = clamp(t + N(0, sigma^2), lo, hi)
  double lower_bound;
  double upper_bound;
  std::uint64_t seed = 0;
};
struct UniformThreshold {
  double t;
  double halfwidth;  // t_i = t + U(-halfwidth, halfwidth)
  std::uint64_t seed = 0;
};

using AttackSpec =
    std::variant<Threshold, Offset, Quartile, NoisyThreshold, UniformThreshold>;

/// Parses the compact CLI form: "threshold:6", "offset:-5:clamp",
/// "quartile:0.25", "noisy-threshold:6:0.5[:lo:hi[:seed]]",
/// "uniform-threshold:6:1[:seed]".
AttackSpec parse_attack_spec(const std::string& text);

/// What a preprocessing step did, so predictions can be mapped back.
struct NormalizationParams {
  Eigen::VectorXd col_min;
  Eigen::VectorXd col_max;
  double beta = 1.0;
  double y_inf_norm = 1.0;

  /// Multiplier that undoes the label scaling.
  double label_scale() const { return beta * y_inf_norm; }
};

struct FoldPlan {
  int k = 0;
  std::vector<int> assignments;  // length m, values in [0, k)
  std::uint64_t seed = 0;

  std::vector<Eigen::Index> fold_indices(int fold) const;
  std::vector<Eigen::Index> complement_indices(int fold) const;
};

/// Reads a comma-separated numeric table with one header row. All non-label
/// columns become features in file order. Without a z column, z = y.
Dataset load_csv(const std::filesystem::path& path, const std::string& y_column,
                 const std::optional<std::string>& z_column = std::nullopt);

/// Writes features, then y, then z, with round-trip-exact formatting.
void save_csv(const Dataset& d, const std::filesystem::path& path);

/// Header row of a CSV file (used for label-column auto-detection).
std::vector<std::string> csv_header(const std::filesystem::path& path);

/// Per-column (x - min) / (max - min); constant columns map to zeros.
std::pair<Dataset, NormalizationParams> minmax_normalize(const Dataset& d);

/// Divides y and z by beta * ||y||_inf.
std::pair<Dataset, NormalizationParams> scale_labels(const Dataset& d,
                                                     double beta);

/// Linear-interpolation quantile between order statistics, h = (m-1)p.
double quantile(const Eigen::VectorXd& v, double p);

Eigen::VectorXd gen_targets(const Eigen::VectorXd& y, const AttackSpec& spec);

/// Deterministic shuffled fold assignment; fold sizes differ by at most 1.
FoldPlan kfold_split(Eigen::Index m, int k, std::uint64_t seed);

/// Standard-normal X and hidden coefficients, y = X*coef + N(0, sigma^2),
/// z = y. Deterministic for a fixed seed.
Dataset synth_regression(Eigen::Index m, Eigen::Index n, double noise_sigma,
                         std::uint64_t seed);

}  // namespace spgls
