#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <optional>

#include "spgls/spgls.hpp"

namespace py = pybind11;

namespace {

spgls::Dataset make_dataset(Eigen::MatrixXd X, Eigen::VectorXd y,
                            std::optional<Eigen::VectorXd> z) {
  spgls::Dataset d;
  d.X = std::move(X);
  d.y = std::move(y);
  d.z = z ? std::move(*z) : d.y;
  d.validate();
  return d;
}

}  // namespace

PYBIND11_MODULE(spgls, m) {
  m.doc() =
      "Global equilibrium solver for the Stackelberg prediction game with "
      "least-squares losses";

  const auto base = py::register_exception<spgls::Error>(m, "Error");
  py::register_exception<spgls::ArgumentError>(m, "ArgumentError", base.ptr());
  py::register_exception<spgls::DataError>(m, "DataError", base.ptr());
  py::register_exception<spgls::NumericError>(m, "NumericError", base.ptr());
  py::register_exception<spgls::ConvergenceError>(m, "ConvergenceError",
                                                  base.ptr());
  py::register_exception<spgls::UnattainedError>(m, "UnattainedError",
                                                 base.ptr());
  py::register_exception<spgls::VerificationError>(m, "VerificationError",
                                                   base.ptr());

  py::class_<spgls::Dataset>(m, "Dataset")
      .def(py::init(&make_dataset), py::arg("X"), py::arg("y"),
           py::arg("z") = std::nullopt)
      .def_readwrite("X", &spgls::Dataset::X)
      .def_readwrite("y", &spgls::Dataset::y)
      .def_readwrite("z", &spgls::Dataset::z)
      .def_readwrite("feature_names", &spgls::Dataset::feature_names)
      .def("__repr__", [](const spgls::Dataset& d) {
        return "Dataset(" + std::to_string(d.rows()) + " x " +
               std::to_string(d.cols()) + ")";
      });

  py::class_<spgls::NormalizationParams>(m, "NormalizationParams")
      .def_readonly("col_min", &spgls::NormalizationParams::col_min)
      .def_readonly("col_max", &spgls::NormalizationParams::col_max)
      .def_readonly("beta", &spgls::NormalizationParams::beta)
      .def_readonly("y_inf_norm", &spgls::NormalizationParams::y_inf_norm)
      .def("label_scale", &spgls::NormalizationParams::label_scale);

  py::class_<spgls::SocpSolution>(m, "SocpSolution")
      .def_readonly("mu_star", &spgls::SocpSolution::mu_star)
      .def_readonly("lambda_star", &spgls::SocpSolution::lambda_star)
      .def_readonly("s_star", &spgls::SocpSolution::s_star)
      .def_readonly("iterations", &spgls::SocpSolution::iterations)
      .def_readonly("certificate_min_eig",
                    &spgls::SocpSolution::certificate_min_eig)
      .def_property_readonly("status", [](const spgls::SocpSolution& s) {
        return std::string(spgls::to_string(s.status));
      });

  py::class_<spgls::Equilibrium>(m, "Equilibrium")
      .def_readonly("w", &spgls::Equilibrium::w)
      .def_readonly("alpha", &spgls::Equilibrium::alpha)
      .def_readonly("mu_star", &spgls::Equilibrium::mu_star)
      .def_readonly("lambda_star", &spgls::Equilibrium::lambda_star)
      .def_readonly("objective_value", &spgls::Equilibrium::objective_value)
      .def_readonly("residual_constraint",
                    &spgls::Equilibrium::residual_constraint)
      .def_readonly("residual_objective",
                    &spgls::Equilibrium::residual_objective)
      .def_property_readonly("status", [](const spgls::Equilibrium& e) {
        return std::string(spgls::to_string(e.status));
      });

  py::class_<spgls::VerificationReport>(m, "VerificationReport")
      .def_readonly("objective_value", &spgls::VerificationReport::objective_value)
      .def_readonly("objective_residual",
                    &spgls::VerificationReport::objective_residual)
      .def_readonly("constraint_residual",
                    &spgls::VerificationReport::constraint_residual)
      .def_readonly("lmi_min_eig", &spgls::VerificationReport::lmi_min_eig)
      .def_property_readonly("passed", &spgls::VerificationReport::pass);

  py::class_<spgls::StageSeconds>(m, "StageSeconds")
      .def_readonly("build", &spgls::StageSeconds::build)
      .def_readonly("spectral", &spgls::StageSeconds::spectral)
      .def_readonly("eig", &spgls::StageSeconds::eig)
      .def_readonly("solve", &spgls::StageSeconds::solve)
      .def_readonly("certify", &spgls::StageSeconds::certify)
      .def_readonly("recover", &spgls::StageSeconds::recover)
      .def_readonly("verify", &spgls::StageSeconds::verify);

  py::class_<spgls::GameSolution>(m, "GameSolution")
      .def_readonly("equilibrium", &spgls::GameSolution::equilibrium)
      .def_readonly("socp", &spgls::GameSolution::socp)
      .def_readonly("report", &spgls::GameSolution::report)
      .def_readonly("seconds", &spgls::GameSolution::seconds);

  m.def("synth_regression", &spgls::synth_regression, py::arg("m"),
        py::arg("n"), py::arg("noise_sigma"), py::arg("seed"),
        "Standard-normal regression data with Gaussian label noise");
  m.def(
      "load_csv",
      [](const std::string& path, const std::string& y_column,
         std::optional<std::string> z_column) {
        return spgls::load_csv(path, y_column, z_column);
      },
      py::arg("path"), py::arg("y_column") = "y",
      py::arg("z_column") = std::nullopt);
  m.def(
      "save_csv",
      [](const spgls::Dataset& d, const std::string& path) {
        spgls::save_csv(d, path);
      },
      py::arg("dataset"), py::arg("path"));
  m.def(
      "gen_targets",
      [](const Eigen::VectorXd& y, const std::string& spec) {
        return spgls::gen_targets(y, spgls::parse_attack_spec(spec));
      },
      py::arg("y"), py::arg("spec"),
      "Provider targets from a compact spec like 'threshold:6'");
  m.def("minmax_normalize", &spgls::minmax_normalize, py::arg("dataset"));
  m.def("scale_labels", &spgls::scale_labels, py::arg("dataset"),
        py::arg("beta"));

  m.def(
      "solve_game",
      [](const spgls::Dataset& d, double gamma, double tol) {
        spgls::SolverConfig cfg;
        cfg.tol = tol;
        return spgls::solve_game(d, gamma, cfg);
      },
      py::arg("dataset"), py::arg("gamma"), py::arg("tol") = 1e-10,
      "Solve one game instance end to end (reduce, solve, recover, verify)");

  m.def("spg_objective", &spgls::spg_objective, py::arg("w"),
        py::arg("dataset"), py::arg("gamma"));
  m.def("best_response", &spgls::best_response, py::arg("X"), py::arg("w"),
        py::arg("z"), py::arg("gamma"));
  m.def("attacked_prediction", &spgls::attacked_prediction, py::arg("X"),
        py::arg("w"), py::arg("z"), py::arg("gamma"));
  m.def("ridge_fit", &spgls::ridge_fit, py::arg("X"), py::arg("y"),
        py::arg("eta"));
  m.def(
      "dinkelbach_q",
      [](const spgls::Dataset& d, double gamma, double eps) {
        const auto sf = spgls::build_spectral(spgls::build_matrices(d, gamma));
        const auto res = spgls::dinkelbach_bisection(sf, eps);
        return py::make_tuple(res.q_star, res.state.iterations);
      },
      py::arg("dataset"), py::arg("gamma"), py::arg("eps") = 1e-8,
      "Bisection baseline; returns (q_star, iterations)");
}
