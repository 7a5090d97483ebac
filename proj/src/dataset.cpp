#include "spgls/dataset.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numeric>
#include <random>
#include <sstream>

#include "spgls/errors.hpp"

namespace spgls {

namespace {

std::string trim(const std::string& s) {
  auto first = s.find_first_not_of(" \t\r");
  if (first == std::string::npos) return {};
  auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

std::vector<std::string> split(const std::string& line, char sep) {
  std::vector<std::string> out;
  std::string cell;
  std::stringstream ss(line);
  while (std::getline(ss, cell, sep)) out.push_back(trim(cell));
  if (!line.empty() && line.back() == sep) out.emplace_back();
  return out;
}

double parse_cell(const std::string& cell, std::size_t row, std::size_t col,
                  const std::string& col_name) {
  const char* begin = cell.data();
  const char* end = begin + cell.size();
  double value = 0.0;
  auto [ptr, ec] = std::from_chars(begin, end, value);
  if (ec != std::errc() || ptr != end || !std::isfinite(value)) {
    throw DataError("parse error at row " + std::to_string(row) + ", column " +
                    std::to_string(col) + " (" + col_name + "): '" + cell + "'");
  }
  return value;
}

void format_double(std::string& out, double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  out += buf;
}

}  // namespace

void Dataset::validate() const {
  if (X.rows() < 1 || X.cols() < 1)
    throw ArgumentError("dataset requires m >= 1 and n >= 1");
  if (y.size() != X.rows() || z.size() != X.rows())
    throw ArgumentError("label lengths must match the row count of X");
  if (!X.allFinite() || !y.allFinite() || !z.allFinite())
    throw NumericError("dataset contains non-finite entries");
}

Dataset Dataset::select_rows(const std::vector<Eigen::Index>& rows) const {
  Dataset out;
  out.X.resize(static_cast<Eigen::Index>(rows.size()), X.cols());
  out.y.resize(static_cast<Eigen::Index>(rows.size()));
  out.z.resize(static_cast<Eigen::Index>(rows.size()));
  for (std::size_t i = 0; i < rows.size(); ++i) {
    out.X.row(static_cast<Eigen::Index>(i)) = X.row(rows[i]);
    out.y(static_cast<Eigen::Index>(i)) = y(rows[i]);
    out.z(static_cast<Eigen::Index>(i)) = z(rows[i]);
  }
  out.feature_names = feature_names;
  return out;
}

std::vector<Eigen::Index> FoldPlan::fold_indices(int fold) const {
  std::vector<Eigen::Index> out;
  for (std::size_t i = 0; i < assignments.size(); ++i)
    if (assignments[i] == fold) out.push_back(static_cast<Eigen::Index>(i));
  return out;
}

std::vector<Eigen::Index> FoldPlan::complement_indices(int fold) const {
  std::vector<Eigen::Index> out;
  for (std::size_t i = 0; i < assignments.size(); ++i)
    if (assignments[i] != fold) out.push_back(static_cast<Eigen::Index>(i));
  return out;
}

std::vector<std::string> csv_header(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open " + path.string());
  std::string line;
  if (!std::getline(in, line)) throw DataError("empty file: " + path.string());
  return split(line, ',');
}

Dataset load_csv(const std::filesystem::path& path, const std::string& y_column,
                 const std::optional<std::string>& z_column) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open " + path.string());

  std::string line;
  if (!std::getline(in, line)) throw DataError("empty file: " + path.string());
  const std::vector<std::string> header = split(line, ',');

  auto find_column = [&](const std::string& name) {
    auto it = std::find(header.begin(), header.end(), name);
    if (it == header.end())
      throw DataError("column '" + name + "' not found in " + path.string());
    return static_cast<std::size_t>(it - header.begin());
  };

  const std::size_t y_idx = find_column(y_column);
  std::optional<std::size_t> z_idx;
  if (z_column) z_idx = find_column(*z_column);
  if (z_idx && *z_idx == y_idx)
    throw DataError("y and z must be distinct columns");

  std::vector<std::size_t> feature_cols;
  std::vector<std::string> feature_names;
  for (std::size_t j = 0; j < header.size(); ++j) {
    if (j == y_idx || (z_idx && j == *z_idx)) continue;
    feature_cols.push_back(j);
    feature_names.push_back(header[j]);
  }
  if (feature_cols.empty())
    throw DataError("no feature columns left after removing labels");

  std::vector<std::vector<double>> rows;
  std::size_t row_number = 1;  // header is row 0
  while (std::getline(in, line)) {
    if (trim(line).empty()) {
      ++row_number;
      continue;
    }
    const std::vector<std::string> cells = split(line, ',');
    if (cells.size() != header.size())
      throw DataError("row " + std::to_string(row_number) + " has " +
                      std::to_string(cells.size()) + " cells, expected " +
                      std::to_string(header.size()));
    std::vector<double> parsed(cells.size());
    for (std::size_t j = 0; j < cells.size(); ++j)
      parsed[j] = parse_cell(cells[j], row_number, j, header[j]);
    rows.push_back(std::move(parsed));
    ++row_number;
  }
  if (rows.empty()) throw DataError("no data rows in " + path.string());

  const Eigen::Index m = static_cast<Eigen::Index>(rows.size());
  const Eigen::Index n = static_cast<Eigen::Index>(feature_cols.size());
  Dataset d;
  d.X.resize(m, n);
  d.y.resize(m);
  d.z.resize(m);
  d.feature_names = std::move(feature_names);
  for (Eigen::Index i = 0; i < m; ++i) {
    const auto& r = rows[static_cast<std::size_t>(i)];
    for (Eigen::Index j = 0; j < n; ++j)
      d.X(i, j) = r[feature_cols[static_cast<std::size_t>(j)]];
    d.y(i) = r[y_idx];
    d.z(i) = z_idx ? r[*z_idx] : r[y_idx];
  }
  d.validate();
  return d;
}

void save_csv(const Dataset& d, const std::filesystem::path& path) {
  d.validate();
  std::ofstream out(path);
  if (!out) throw DataError("cannot write " + path.string());

  std::string buf;
  for (Eigen::Index j = 0; j < d.cols(); ++j) {
    if (j < static_cast<Eigen::Index>(d.feature_names.size()) &&
        !d.feature_names[static_cast<std::size_t>(j)].empty())
      buf += d.feature_names[static_cast<std::size_t>(j)];
    else
      buf += "x" + std::to_string(j + 1);
    buf += ',';
  }
  buf += "y,z\n";
  for (Eigen::Index i = 0; i < d.rows(); ++i) {
    for (Eigen::Index j = 0; j < d.cols(); ++j) {
      format_double(buf, d.X(i, j));
      buf += ',';
    }
    format_double(buf, d.y(i));
    buf += ',';
    format_double(buf, d.z(i));
    buf += '\n';
  }
  out << buf;
  if (!out) throw DataError("failed writing " + path.string());
}

std::pair<Dataset, NormalizationParams> minmax_normalize(const Dataset& d) {
  d.validate();
  NormalizationParams params;
  params.col_min = d.X.colwise().minCoeff();
  params.col_max = d.X.colwise().maxCoeff();

  Dataset out = d;
  for (Eigen::Index j = 0; j < d.cols(); ++j) {
    const double range = params.col_max(j) - params.col_min(j);
    if (range > 0.0)
      out.X.col(j) = (d.X.col(j).array() - params.col_min(j)) / range;
    else
      out.X.col(j).setZero();  // constant column
  }
  return {std::move(out), std::move(params)};
}

std::pair<Dataset, NormalizationParams> scale_labels(const Dataset& d,
                                                     double beta) {
  d.validate();
  if (!(beta > 0.0)) throw ArgumentError("beta must be positive");
  const double y_inf = d.y.cwiseAbs().maxCoeff();
  if (y_inf == 0.0) throw DataError("cannot scale labels: y is all zero");

  NormalizationParams params;
  params.beta = beta;
  params.y_inf_norm = y_inf;

  Dataset out = d;
  out.y = d.y / (beta * y_inf);
  out.z = d.z / (beta * y_inf);
  return {std::move(out), std::move(params)};
}

double quantile(const Eigen::VectorXd& v, double p) {
  if (v.size() == 0) throw ArgumentError("quantile of an empty vector");
  if (!(p >= 0.0 && p <= 1.0)) throw ArgumentError("quantile p must be in [0,1]");
  std::vector<double> s(v.data(), v.data() + v.size());
  std::sort(s.begin(), s.end());
  const double h = static_cast<double>(s.size() - 1) * p;
  const auto lo = static_cast<std::size_t>(std::floor(h));
  const std::size_t hi = std::min(lo + 1, s.size() - 1);
  const double frac = h - static_cast<double>(lo);
  return s[lo] + frac * (s[hi] - s[lo]);
}

namespace {

struct TargetVisitor {
  const Eigen::VectorXd& y;

  Eigen::VectorXd operator()(const Threshold& a) const {
    return y.cwiseMax(a.t);
  }
  Eigen::VectorXd operator()(const Offset& a) const {
    Eigen::VectorXd z = y.array() + a.delta;
    if (a.clamp_at_zero) z = z.cwiseMax(0.0);
    return z;
  }
  Eigen::VectorXd operator()(const Quartile& a) const {
    if (!(a.p > 0.0 && a.p < 1.0))
      throw ArgumentError("quartile p must lie in (0,1)");
    return y.cwiseMax(quantile(y, a.p));
  }
  Eigen::VectorXd operator()(const NoisyThreshold& a) const {
    if (a.sigma < 0.0) throw ArgumentError("sigma must be nonnegative");
    if (a.lower_bound > a.upper_bound)
      throw ArgumentError("noisy threshold bounds are inverted");
    std::mt19937_64 rng(a.seed);
    std::normal_distribution<double> noise(0.0, 1.0);
    Eigen::VectorXd z(y.size());
    for (Eigen::Index i = 0; i < y.size(); ++i) {
      double ti = a.t + a.sigma * noise(rng);
      ti = std::clamp(ti, a.lower_bound, a.upper_bound);
      z(i) = std::max(y(i), ti);
    }
    return z;
  }
  Eigen::VectorXd operator()(const UniformThreshold& a) const {
    if (a.halfwidth < 0.0) throw ArgumentError("halfwidth must be nonnegative");
    std::mt19937_64 rng(a.seed);
    std::uniform_real_distribution<double> noise(-a.halfwidth, a.halfwidth);
    Eigen::VectorXd z(y.size());
    for (Eigen::Index i = 0; i < y.size(); ++i)
      z(i) = std::max(y(i), a.t + (a.halfwidth > 0.0 ? noise(rng) : 0.0));
    return z;
  }
};

double parse_real(const std::string& s, const std::string& what) {
  try {
    std::size_t pos = 0;
    const double v = std::stod(s, &pos);
    if (pos != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    throw ArgumentError("cannot parse " + what + " from '" + s + "'");
  }
}

std::uint64_t parse_seed(const std::string& s) {
  try {
    return static_cast<std::uint64_t>(std::stoull(s));
  } catch (const std::exception&) {
    throw ArgumentError("cannot parse seed from '" + s + "'");
  }
}

}  // namespace

Eigen::VectorXd gen_targets(const Eigen::VectorXd& y, const AttackSpec& spec) {
  if (y.size() == 0) throw ArgumentError("gen_targets requires nonempty y");
  return std::visit(TargetVisitor{y}, spec);
}

AttackSpec parse_attack_spec(const std::string& text) {
  const std::vector<std::string> parts = split(text, ':');
  if (parts.empty() || parts[0].empty())
    throw ArgumentError("empty attack spec");
  const std::string& kind = parts[0];
  const std::size_t nargs = parts.size() - 1;

  if (kind == "threshold") {
    if (nargs != 1) throw ArgumentError("usage: threshold:t");
    return Threshold{parse_real(parts[1], "threshold t")};
  }
  if (kind == "offset") {
    if (nargs < 1 || nargs > 2) throw ArgumentError("usage: offset:delta[:clamp]");
    bool clamp = false;
    if (nargs == 2) {
      if (parts[2] != "clamp")
        throw ArgumentError("unknown offset modifier '" + parts[2] + "'");
      clamp = true;
    }
    return Offset{parse_real(parts[1], "offset delta"), clamp};
  }
  if (kind == "quartile") {
    if (nargs != 1) throw ArgumentError("usage: quartile:p");
    return Quartile{parse_real(parts[1], "quartile p")};
  }
  if (kind == "noisy-threshold") {
    if (nargs < 2 || nargs == 3 || nargs > 5)
      throw ArgumentError("usage: noisy-threshold:t:sigma[:lo:hi[:seed]]");
    NoisyThreshold a{parse_real(parts[1], "threshold t"),
                     parse_real(parts[2], "sigma"),
                     -std::numeric_limits<double>::infinity(),
                     std::numeric_limits<double>::infinity(), 0};
    if (nargs >= 4) {
      a.lower_bound = parse_real(parts[3], "lower bound");
      a.upper_bound = parse_real(parts[4], "upper bound");
    }
    if (nargs == 5) a.seed = parse_seed(parts[5]);
    return a;
  }
  if (kind == "uniform-threshold") {
    if (nargs < 2 || nargs > 3)
      throw ArgumentError("usage: uniform-threshold:t:halfwidth[:seed]");
    UniformThreshold a{parse_real(parts[1], "threshold t"),
                       parse_real(parts[2], "halfwidth"), 0};
    if (nargs == 3) a.seed = parse_seed(parts[3]);
    return a;
  }
  throw ArgumentError("unknown attack kind '" + kind + "'");
}

FoldPlan kfold_split(Eigen::Index m, int k, std::uint64_t seed) {
  if (k < 2) throw ArgumentError("k must be at least 2");
  if (static_cast<Eigen::Index>(k) > m)
    throw ArgumentError("k must not exceed the sample count");

  std::vector<Eigen::Index> perm(static_cast<std::size_t>(m));
  std::iota(perm.begin(), perm.end(), Eigen::Index{0});
  std::mt19937_64 rng(seed);
  std::shuffle(perm.begin(), perm.end(), rng);

  FoldPlan plan;
  plan.k = k;
  plan.seed = seed;
  plan.assignments.assign(static_cast<std::size_t>(m), 0);
  for (std::size_t i = 0; i < perm.size(); ++i)
    plan.assignments[static_cast<std::size_t>(perm[i])] =
        static_cast<int>(i % static_cast<std::size_t>(k));
  return plan;
}

Dataset synth_regression(Eigen::Index m, Eigen::Index n, double noise_sigma,
                         std::uint64_t seed) {
  if (m < 1 || n < 1) throw ArgumentError("m and n must be at least 1");
  if (noise_sigma < 0.0) throw ArgumentError("noise sigma must be nonnegative");

  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss(0.0, 1.0);

  Dataset d;
  d.X.resize(m, n);
  for (Eigen::Index i = 0; i < m; ++i)
    for (Eigen::Index j = 0; j < n; ++j) d.X(i, j) = gauss(rng);

  Eigen::VectorXd coef(n);
  for (Eigen::Index j = 0; j < n; ++j) coef(j) = gauss(rng);

  d.y = d.X * coef;
  if (noise_sigma > 0.0)
    for (Eigen::Index i = 0; i < m; ++i) d.y(i) += noise_sigma * gauss(rng);
  d.z = d.y;

  d.feature_names.reserve(static_cast<std::size_t>(n));
  for (Eigen::Index j = 0; j < n; ++j)
    d.feature_names.push_back("x" + std::to_string(j + 1));
  return d;
}

}  // namespace spgls
