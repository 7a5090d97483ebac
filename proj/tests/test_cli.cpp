#include <doctest.h>

#include <sys/wait.h>
#include <unistd.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <vector>

#include <json.hpp>

#include "spgls/cli.hpp"
#include "spgls/dataset.hpp"
#include "spgls/errors.hpp"

using namespace spgls;
namespace fs = std::filesystem;

namespace {

fs::path work_dir() {
  static const fs::path dir = [] {
    fs::path p = fs::temp_directory_path() /
                 ("spgls_cli_test_" + std::to_string(::getpid()));
    fs::create_directories(p);
    return p;
  }();
  return dir;
}

int run_cli(const std::string& args) {
  const std::string cmd = std::string(SPGLS_CLI_PATH) + " " + args +
                          " >" + (work_dir() / "stdout.txt").string() +
                          " 2>" + (work_dir() / "stderr.txt").string();
  const int rc = std::system(cmd.c_str());
  return WEXITSTATUS(rc);
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

fs::path write_file(const std::string& name, const std::string& content) {
  const fs::path p = work_dir() / name;
  std::ofstream out(p);
  out << content;
  return p;
}

}  // namespace

TEST_SUITE("cli") {

TEST_CASE("gen writes a deterministic csv") {
  const fs::path out1 = work_dir() / "gen1.csv";
  const fs::path out2 = work_dir() / "gen2.csv";
  REQUIRE(run_cli("gen --m 20 --n 4 --noise 0.1 --seed 7 --out " +
                  out1.string()) == 0);
  REQUIRE(run_cli("gen --m 20 --n 4 --noise 0.1 --seed 7 --out " +
                  out2.string()) == 0);
  CHECK(slurp(out1) == slurp(out2));  // byte-identical for one config+seed

  const Dataset d = load_csv(out1, "y", std::string("z"));
  CHECK(d.rows() == 20);
  CHECK(d.cols() == 4);
  CHECK(csv_header(out1).size() == 6);  // n features + y + z
}

TEST_CASE("attack rewrites targets") {
  const fs::path in = write_file("attack_in.csv", "x1,y\n1,5\n2,7\n");
  const fs::path out = work_dir() / "attack_out.csv";
  REQUIRE(run_cli("attack --input " + in.string() +
                  " --spec threshold:6 --out " + out.string()) == 0);
  const Dataset d = load_csv(out, "y", std::string("z"));
  CHECK(d.z(0) == 6.0);
  CHECK(d.z(1) == 7.0);
  CHECK(d.y(0) == 5.0);
}

TEST_CASE("solve emits verified equilibrium json") {
  const fs::path in = write_file("solve_w1.csv", "x1,y,z\n1,1,1\n");
  const fs::path out = work_dir() / "solve_w1.json";
  REQUIRE(run_cli("solve --input " + in.string() + " --gamma 1 --out-json " +
                  out.string()) == 0);

  const auto j = nlohmann::json::parse(slurp(out));
  CHECK(j["mu"].get<double>() == doctest::Approx(0.0).epsilon(1e-12));
  CHECK(j["lambda"].get<double>() == doctest::Approx(0.0).epsilon(1e-12));
  CHECK(j["alpha"].get<double>() == doctest::Approx(1.0));
  CHECK(j["w"].size() == 1);
  CHECK(j["w"][0].get<double>() == doctest::Approx(1.0));
  CHECK(j["status"] == "boundary");
  CHECK(j["verification"]["pass"] == true);
  CHECK(j.contains("timings"));

  SUBCASE("results are byte-identical apart from the timing block") {
    const fs::path out2 = work_dir() / "solve_w1_again.json";
    REQUIRE(run_cli("solve --input " + in.string() + " --gamma 1 --out-json " +
                    out2.string()) == 0);
    auto a = nlohmann::json::parse(slurp(out));
    auto b = nlohmann::json::parse(slurp(out2));
    a.erase("timings");
    b.erase("timings");
    CHECK(a.dump() == b.dump());
  }

  SUBCASE("conic export alongside the solve") {
    const fs::path conic = work_dir() / "w1.rsocp";
    REQUIRE(run_cli("solve --input " + in.string() + " --gamma 1 " +
                    "--export-conic " + conic.string()) == 0);
    const std::string text = slurp(conic);
    CHECK(text.rfind("rsocp 2", 0) == 0);
  }
}

TEST_CASE("exit codes") {
  const fs::path in = write_file("codes.csv", "x1,y,z\n1,1,1\n");

  SUBCASE("argument errors exit 2") {
    CHECK(run_cli("frobnicate") == cli::kExitArgument);
    CHECK(run_cli("solve") == cli::kExitArgument);  // missing --input
    CHECK(run_cli("attack --input " + in.string() +
                  " --spec bogus:1 --out /tmp/x.csv") == cli::kExitArgument);
    CHECK(run_cli("solve --input " + in.string() + " --gamma 0") ==
          cli::kExitArgument);
  }
  SUBCASE("data errors exit 3") {
    CHECK(run_cli("solve --input /nonexistent.csv --gamma 1") ==
          cli::kExitData);
    const fs::path bad = write_file("bad.csv", "x1,y\n1,abc\n");
    CHECK(run_cli("solve --input " + bad.string() + " --gamma 1") ==
          cli::kExitData);
    CHECK(run_cli("solve --input " + in.string() +
                  " --gamma 1 --y-col missing") == cli::kExitData);
  }
  SUBCASE("unattained equilibria exit 4") {
    const fs::path un = write_file("codes_unatt.csv", "x1,y,z\n1,1,1\n1,-1,-1\n");
    CHECK(run_cli("solve --input " + un.string() + " --gamma 1") ==
          cli::kExitSolver);
  }
  SUBCASE("help exits 0") { CHECK(run_cli("--help") == 0); }
}

TEST_CASE("cv writes csv and json reports") {
  const fs::path data = work_dir() / "cv_data.csv";
  REQUIRE(run_cli("gen --m 24 --n 2 --noise 0.1 --seed 3 --out " +
                  data.string()) == 0);
  const fs::path attacked = work_dir() / "cv_attacked.csv";
  REQUIRE(run_cli("attack --input " + data.string() +
                  " --spec quartile:0.25 --out " + attacked.string()) == 0);

  const fs::path csv = work_dir() / "cv_report.csv";
  const fs::path json = work_dir() / "cv_report.json";
  REQUIRE(run_cli("cv --input " + attacked.string() +
                  " --gamma-lo 0.01 --gamma-hi 0.5 --gamma-count 3 "
                  "--folds 3 --methods spg,ols --out-csv " +
                  csv.string() + " --out-json " + json.string()) == 0);

  std::ifstream in(csv);
  std::string line;
  std::getline(in, line);
  CHECK(line == "gamma,method,mean_mse,std_mse,seconds");
  int rows = 0;
  while (std::getline(in, line)) ++rows;
  CHECK(rows == 6);  // 3 gammas x 2 methods

  const auto j = nlohmann::json::parse(slurp(json));
  CHECK(j["gamma_grid"].size() == 3);
  CHECK(j["results"].size() == 6);
  CHECK(j.contains("timings"));

  SUBCASE("grid bounds validated") {
    CHECK(run_cli("cv --input " + attacked.string() +
                  " --gamma-lo 0 --gamma-hi 0.5") == cli::kExitArgument);
    CHECK(run_cli("cv --input " + attacked.string() +
                  " --gamma-lo 0.6 --gamma-hi 0.5") == cli::kExitArgument);
  }
}

TEST_CASE("bench emits the timing table") {
  const fs::path out = work_dir() / "bench.csv";
  REQUIRE(run_cli("bench --sizes 8,12 --ratios 1,2 --seed 5 --out " +
                  out.string()) == 0);
  std::ifstream in(out);
  std::string line;
  std::getline(in, line);
  CHECK(line == "m,n,bisect_seconds,direct_seconds,eig_seconds,ratio");
  int rows = 0;
  while (std::getline(in, line)) {
    ++rows;
    // ratio column must be the quotient of the two timing columns
    std::stringstream ss(line);
    std::string cell;
    std::vector<double> vals;
    while (std::getline(ss, cell, ',')) vals.push_back(std::stod(cell));
    REQUIRE(vals.size() == 6);
    CHECK(vals[5] ==
          doctest::Approx(vals[2] / vals[3]).epsilon(1e-6));
  }
  CHECK(rows == 4);
}

TEST_CASE("emit_bench_report rejects empty input") {
  CHECK_THROWS_AS(
      cli::emit_bench_report({}, work_dir() / "empty.csv"), ArgumentError);
}

}  // TEST_SUITE
