// Copyright 2026 The residyn Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <pybind11/eigen.h>
#include <pybind11/functional.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "residyn/experiment.hpp"
#include "residyn/rbd.hpp"

namespace py = pybind11;
using namespace residyn;

PYBIND11_MODULE(_residyn, m) {
  m.doc() = "interpretable hybrid robot-dynamics identification";

  py::register_exception<ConfigError>(m, "ConfigError", PyExc_ValueError);
  py::register_exception<DataError>(m, "DataError", PyExc_RuntimeError);
  py::register_exception<NumericError>(m, "NumericError", PyExc_ArithmeticError);

  // --- robot model and rigid-body dynamics -------------------------------
  py::class_<RobotModel>(m, "RobotModel")
      .def_property_readonly("dof", &RobotModel::dof)
      .def_property_readonly("name", &RobotModel::name)
      .def("damping_diagonal", &RobotModel::damping_diagonal)
      .def("q_min", &RobotModel::q_min)
      .def("q_max", &RobotModel::q_max)
      .def("qd_max", &RobotModel::qd_max)
      .def("hash", [](const RobotModel& model) { return hash_hex(model.hash()); })
      .def("to_json", &robot_model_to_json);

  m.def("franka7_synthetic", &make_franka7_synthetic,
        "built-in 7-DoF synthetic serial arm");
  m.def("load_robot_model", &load_robot_model, py::arg("path"));
  m.def("parse_robot_model", &parse_robot_model, py::arg("json_text"));

  m.def("inertia_matrix", &inertia_matrix, py::arg("model"), py::arg("q"));
  m.def("gravity_torque", &gravity_torque, py::arg("model"), py::arg("q"));
  m.def("coriolis_torque", &coriolis_torque, py::arg("model"), py::arg("q"),
        py::arg("qd"));
  m.def("inverse_dynamics", &inverse_dynamics, py::arg("model"), py::arg("q"),
        py::arg("qd"), py::arg("qdd"));
  m.def("forward_dynamics", &forward_dynamics, py::arg("model"), py::arg("q"),
        py::arg("qd"), py::arg("tau_eff"));

  // --- simulation ----------------------------------------------------------
  py::class_<SimConfig>(m, "SimConfig")
      .def(py::init([](double dt_env, int substeps, double horizon) {
             SimConfig cfg{dt_env, substeps, horizon};
             cfg.validate();
             return cfg;
           }),
           py::arg("dt_env") = 0.001, py::arg("substeps") = 1,
           py::arg("horizon") = 10.0)
      .def_readwrite("dt_env", &SimConfig::dt_env)
      .def_readwrite("substeps", &SimConfig::substeps)
      .def_readwrite("horizon", &SimConfig::horizon)
      .def_property_readonly("env_steps", &SimConfig::env_steps);

  py::class_<JointState>(m, "JointState")
      .def(py::init([](Vec q, Vec qd) { return JointState{std::move(q), std::move(qd)}; }),
           py::arg("q"), py::arg("qd"))
      .def_readwrite("q", &JointState::q)
      .def_readwrite("qd", &JointState::qd);

  py::class_<Reference>(m, "Reference")
      .def_readwrite("q_star", &Reference::q_star)
      .def_readwrite("qd_star", &Reference::qd_star);

  py::class_<Rollout>(m, "Rollout")
      .def_readonly("t", &Rollout::t)
      .def_readonly("q", &Rollout::q)
      .def_readonly("qd", &Rollout::qd)
      .def_readonly("tau_m", &Rollout::tau_m)
      .def_readonly("q_star", &Rollout::q_star)
      .def_readonly("qd_star", &Rollout::qd_star);

  m.def("damping_torque", &damping_torque, py::arg("model"), py::arg("qd"));
  m.def("step", &step, py::arg("model"), py::arg("state"), py::arg("tau_m"),
        py::arg("dt_sim"));
  m.def("rollout", &rollout, py::arg("model"), py::arg("controller"),
        py::arg("reference"), py::arg("sim"), py::arg("blowup_qd") = 100.0,
        "closed-loop rollout; controller is (step, state) -> torque");
  m.def("save_rollout_csv", &save_rollout_csv, py::arg("rollout"), py::arg("path"));
  m.def("load_rollout_csv", &load_rollout_csv, py::arg("path"));

  // --- control -------------------------------------------------------------
  py::class_<PidGains>(m, "PidGains")
      .def_static("uniform", &PidGains::uniform, py::arg("dof"), py::arg("kp"),
                  py::arg("ki"), py::arg("kd"), py::arg("clip"))
      .def_readwrite("kp", &PidGains::kp)
      .def_readwrite("ki", &PidGains::ki)
      .def_readwrite("kd", &PidGains::kd)
      .def_readwrite("clip", &PidGains::clip);

  m.def(
      "pid_step",
      [](const PidGains& gains, const RobotModel& model, const JointState& state,
         const Vec& q_star, const Vec& qd_star, const Vec& integral, double dt_env) {
        PidResult res = pid_step(gains, model, state, q_star, qd_star, integral, dt_env);
        return py::make_tuple(res.tau_m, res.integral);
      },
      py::arg("gains"), py::arg("model"), py::arg("state"), py::arg("q_star"),
      py::arg("qd_star"), py::arg("integral"), py::arg("dt_env"),
      "returns (tau_m, updated_integral)");

  // --- excitation ------------------------------------------------------------
  py::class_<MultiSineSpec>(m, "MultiSineSpec")
      .def(py::init<>())
      .def_readwrite("modes", &MultiSineSpec::modes)
      .def_readwrite("amp_lo", &MultiSineSpec::amp_lo)
      .def_readwrite("amp_hi", &MultiSineSpec::amp_hi)
      .def_readwrite("freq_lo", &MultiSineSpec::freq_lo)
      .def_readwrite("freq_hi", &MultiSineSpec::freq_hi)
      .def_readwrite("margin", &MultiSineSpec::margin)
      .def_readwrite("guard", &MultiSineSpec::guard);

  m.def(
      "make_reference",
      [](const RobotModel& model, const MultiSineSpec& spec, const Vec& tgrid,
         std::uint64_t seed) {
        Rng rng(seed);
        return make_reference(JointLimits::of(model), spec, tgrid, rng);
      },
      py::arg("model"), py::arg("spec"), py::arg("tgrid"), py::arg("seed"));

  // --- numerical differentiation ---------------------------------------------
  py::class_<DiffConfig>(m, "DiffConfig")
      .def(py::init([](const std::string& method, double alpha, int iterations,
                       double delta) {
             DiffConfig cfg = DiffConfig::from_name(method);
             cfg.alpha_tv = alpha;
             cfg.iterations = iterations;
             cfg.delta = delta;
             cfg.validate();
             return cfg;
           }),
           py::arg("method") = "finite", py::arg("alpha") = 1e-2,
           py::arg("iterations") = 100, py::arg("delta") = 1e-8)
      .def_property_readonly("method", &DiffConfig::method_name);

  m.def("finite_difference", &finite_difference, py::arg("signal"), py::arg("dt"));
  m.def(
      "tvr_differentiate",
      [](const Vec& signal, double dt, const DiffConfig& cfg) {
        TvrResult res = tvr_differentiate(signal, dt, cfg);
        return py::make_tuple(res.derivative, res.converged);
      },
      py::arg("signal"), py::arg("dt"), py::arg("cfg"),
      "returns (derivative, converged)");
  m.def(
      "derive_chain",
      [](const Mat& series, double dt, const DiffConfig& cfg) {
        DerivativeChain chain = derive_chain(series, dt, cfg);
        return py::make_tuple(chain.d1, chain.d2, chain.d3);
      },
      py::arg("series"), py::arg("dt"), py::arg("cfg"));

  // --- dataset -----------------------------------------------------------------
  m.def("feature_registry", &feature_registry, py::arg("dof"));
  m.def(
      "build_features",
      [](const Rollout& r, const RobotModel& model, const DiffConfig& diff) {
        BuiltFeatures built = build_features(r, model, diff);
        return py::make_tuple(built.X, built.targets.Y);
      },
      py::arg("rollout"), py::arg("model"), py::arg("diff"),
      "returns (X, Y_motor)");
  m.def(
      "residual_targets",
      [](const Mat& y_motor, const Mat& X, int dof) {
        return residual_targets(TargetMatrix{y_motor, TargetKind::kMotor}, X, dof).Y;
      },
      py::arg("y_motor"), py::arg("X"), py::arg("dof"));

  py::class_<Dataset>(m, "Dataset")
      .def_readonly("X_train", &Dataset::X_train)
      .def_readonly("X_test", &Dataset::X_test)
      .def_property_readonly("Y_train",
                             [](const Dataset& ds) { return ds.train_targets.Y; })
      .def_property_readonly("Y_test",
                             [](const Dataset& ds) { return ds.test_targets.Y; })
      .def_readonly("feature_names", &Dataset::feature_names)
      .def_readonly("dof", &Dataset::dof)
      .def_readonly("hash", &Dataset::hash);

  m.def("load_dataset", &load_dataset, py::arg("directory"));

  // --- sparse regression -----------------------------------------------------
  py::class_<PolyLibrary>(m, "PolyLibrary")
      .def(py::init<int, std::vector<std::string>>(), py::arg("input_dim"),
           py::arg("input_names") = std::vector<std::string>{})
      .def_property_readonly("size", &PolyLibrary::size)
      .def_property_readonly("names", &PolyLibrary::names)
      .def("expand", &PolyLibrary::expand, py::arg("X"));

  py::class_<StlsqOptions>(m, "StlsqOptions")
      .def(py::init([](double threshold, double ridge, int max_iter, bool standardize) {
             StlsqOptions opt{threshold, ridge, max_iter, standardize};
             opt.validate();
             return opt;
           }),
           py::arg("threshold") = 0.01, py::arg("ridge") = 1e-4,
           py::arg("max_iter") = 100, py::arg("standardize") = true)
      .def_readwrite("threshold", &StlsqOptions::threshold)
      .def_readwrite("ridge", &StlsqOptions::ridge)
      .def_readwrite("max_iter", &StlsqOptions::max_iter)
      .def_readwrite("standardize", &StlsqOptions::standardize);

  py::class_<SparseLinearModel>(m, "SparseLinearModel")
      .def_readonly("W", &SparseLinearModel::W)
      .def_readonly("b", &SparseLinearModel::b)
      .def_readonly("feature_names", &SparseLinearModel::feature_names)
      .def_readonly("sparsity_warning", &SparseLinearModel::sparsity_warning)
      .def("predict", &SparseLinearModel::predict, py::arg("library"), py::arg("X"))
      .def("active_terms",
           [](const SparseLinearModel& model, int output) {
             std::vector<std::pair<std::string, double>> out;
             for (const ActiveTerm& t : active_terms(model, output))
               out.emplace_back(t.name, t.coefficient);
             return out;
           },
           py::arg("output"))
      .def("to_json", [](const SparseLinearModel& model) {
        return sparse_model_to_json(model);
      });

  m.def("stlsq", &stlsq, py::arg("library"), py::arg("X"), py::arg("Y"),
        py::arg("options") = StlsqOptions{});

  // --- symbolic regression -----------------------------------------------------
  py::class_<Expression>(m, "Expression")
      .def_property_readonly("complexity", &Expression::complexity)
      .def_property_readonly("constants", &Expression::constants)
      .def("__eq__", [](const Expression& a, const Expression& b) { return a == b; });

  py::class_<SymRegConfig>(m, "SymRegConfig")
      .def(py::init<>())
      .def_readwrite("population", &SymRegConfig::population)
      .def_readwrite("generations", &SymRegConfig::generations)
      .def_readwrite("tournament", &SymRegConfig::tournament)
      .def_readwrite("crossover_prob", &SymRegConfig::crossover_prob)
      .def_readwrite("point_mutation_prob", &SymRegConfig::point_mutation_prob)
      .def_readwrite("constant_perturb_prob", &SymRegConfig::constant_perturb_prob)
      .def_readwrite("hoist_prob", &SymRegConfig::hoist_prob)
      .def_readwrite("max_complexity", &SymRegConfig::max_complexity)
      .def_readwrite("parsimony", &SymRegConfig::parsimony)
      .def_readwrite("batch_size", &SymRegConfig::batch_size)
      .def_readwrite("seed", &SymRegConfig::seed)
      .def_readwrite("restarts", &SymRegConfig::restarts)
      .def_readwrite("threads", &SymRegConfig::threads);

  py::class_<ParetoFront>(m, "ParetoFront")
      .def("entries",
           [](const ParetoFront& front) {
             std::vector<std::tuple<int, double, Expression>> out;
             for (const FrontEntry& e : front.entries())
               out.emplace_back(e.complexity, e.mse, e.expr);
             return out;
           })
      .def_property_readonly("best_mse", &ParetoFront::best_mse);

  m.def("evaluate", &evaluate, py::arg("expr"), py::arg("X"));
  m.def("evaluate_mse", &evaluate_mse, py::arg("expr"), py::arg("X"), py::arg("y"));
  m.def("fit_symbolic", &fit_symbolic, py::arg("X"), py::arg("y"), py::arg("cfg"),
        py::call_guard<py::gil_scoped_release>());
  m.def("select_model", &select_model, py::arg("front"));
  m.def("simplify", &simplify, py::arg("expr"));
  m.def("refine_constants", &refine_constants, py::arg("expr"), py::arg("X"),
        py::arg("y"), py::arg("golden_iterations") = 50);
  m.def("render", &render, py::arg("expr"), py::arg("registry"));
  m.def("parse_expression", &parse_expression, py::arg("text"), py::arg("registry"));

  // --- neural baseline ---------------------------------------------------------
  py::class_<TrainConfig>(m, "TrainConfig")
      .def(py::init<>())
      .def_readwrite("learning_rate", &TrainConfig::learning_rate)
      .def_readwrite("batch_size", &TrainConfig::batch_size)
      .def_readwrite("epochs", &TrainConfig::epochs)
      .def_readwrite("seed", &TrainConfig::seed);

  py::class_<Mlp>(m, "Mlp")
      .def(py::init<std::vector<int>, std::uint64_t>(), py::arg("sizes"),
           py::arg("init_seed") = 0)
      .def_property_readonly("sizes", &Mlp::sizes)
      .def("forward", &Mlp::forward, py::arg("X"))
      .def("to_json", &mlp_to_json);

  m.def(
      "train_mlp",
      [](const Mlp& net, const Mat& X, const Mat& Y, const TrainConfig& cfg,
         std::optional<Mat> residual_base) {
        TrainResult res = train(net, X, Y, cfg,
                                residual_base ? &*residual_base : nullptr);
        return py::make_tuple(res.net, res.loss_curve);
      },
      py::arg("net"), py::arg("X"), py::arg("Y"), py::arg("cfg"),
      py::arg("residual_base") = std::nullopt, "returns (net, loss_curve)");
  m.def("gradient_check", &gradient_check, py::arg("net"), py::arg("X"), py::arg("Y"));

  // --- methods and reporting ------------------------------------------------
  py::enum_<MethodKind>(m, "MethodKind")
      .value("sr", MethodKind::kSr)
      .value("sindy", MethodKind::kSindy)
      .value("r_sr", MethodKind::kRSr)
      .value("r_sindy", MethodKind::kRSindy)
      .value("r_sindy_sr", MethodKind::kRSindySr)
      .value("nn", MethodKind::kNn)
      .value("r_nn", MethodKind::kRNn);

  py::class_<MethodSpec>(m, "MethodSpec")
      .def(py::init<>())
      .def_readwrite("kind", &MethodSpec::kind)
      .def_readwrite("sym", &MethodSpec::sym)
      .def_readwrite("sparse", &MethodSpec::sparse)
      .def_readwrite("nn", &MethodSpec::nn)
      .def_readwrite("seed", &MethodSpec::seed);

  py::class_<TrainedModel>(m, "TrainedModel")
      .def_property_readonly("kind",
                             [](const TrainedModel& model) {
                               return method_name(model.kind);
                             })
      .def_readonly("residual", &TrainedModel::residual)
      .def_readonly("feature_names", &TrainedModel::feature_names)
      .def("equations", [](const TrainedModel& model) { return equations(model); })
      .def("to_json", &trained_model_to_json);

  m.def("train_method", &train_method, py::arg("spec"), py::arg("dataset"),
        py::call_guard<py::gil_scoped_release>());
  m.def("predict", &predict, py::arg("model"), py::arg("X"), py::arg("feature_names"));
  m.def(
      "relative_rmse",
      [](const Mat& predicted, const Mat& target) {
        return relative_rmse(predicted, target).value;
      },
      py::arg("predicted"), py::arg("target"));

  // --- experiment pipeline ---------------------------------------------------
  py::class_<ExperimentConfig>(m, "ExperimentConfig")
      .def_static("load", &ExperimentConfig::load, py::arg("path"))
      .def_static("parse", &ExperimentConfig::parse, py::arg("json_text"))
      .def_readwrite("output_dir", &ExperimentConfig::output_dir)
      .def_readwrite("seed", &ExperimentConfig::seed);

  m.def("cmd_simulate", &cmd_simulate, py::call_guard<py::gil_scoped_release>());
  m.def("cmd_build", &cmd_build, py::call_guard<py::gil_scoped_release>());
  m.def("cmd_train", &cmd_train, py::arg("cfg"), py::arg("method") = "all",
        py::call_guard<py::gil_scoped_release>());
  m.def("cmd_evaluate", &cmd_evaluate, py::call_guard<py::gil_scoped_release>());
  m.def("cmd_report", &cmd_report, py::call_guard<py::gil_scoped_release>());
  m.def("cmd_ingest", &cmd_ingest, py::arg("cfg"), py::arg("data_dir"),
        py::arg("map_path"), py::call_guard<py::gil_scoped_release>());
}
