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

#include "residyn/experiment.hpp"

#include <algorithm>
#include <cstdlib>
#include <filesystem>

#include <json.hpp>

#include "residyn/csv.hpp"
#include "residyn/rbd.hpp"

namespace residyn {

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;

namespace {

double get_or(const json& obj, const char* key, double fallback) {
  return obj.contains(key) ? obj.at(key).get<double>() : fallback;
}

int get_or_int(const json& obj, const char* key, int fallback) {
  return obj.contains(key) ? obj.at(key).get<int>() : fallback;
}

SymRegConfig parse_sym(const json& obj, const SymRegConfig& base) {
  SymRegConfig cfg = base;
  cfg.population = get_or_int(obj, "population", cfg.population);
  cfg.generations = get_or_int(obj, "generations", cfg.generations);
  cfg.tournament = get_or_int(obj, "tournament", cfg.tournament);
  cfg.crossover_prob = get_or(obj, "crossover", cfg.crossover_prob);
  cfg.point_mutation_prob = get_or(obj, "point_mutation", cfg.point_mutation_prob);
  cfg.constant_perturb_prob = get_or(obj, "constant_perturb", cfg.constant_perturb_prob);
  cfg.hoist_prob = get_or(obj, "hoist", cfg.hoist_prob);
  cfg.max_complexity = get_or_int(obj, "max_complexity", cfg.max_complexity);
  cfg.max_depth = get_or_int(obj, "max_depth", cfg.max_depth);
  cfg.parsimony = get_or(obj, "parsimony", cfg.parsimony);
  if (obj.contains("batch_size"))
    cfg.batch_size = obj.at("batch_size").get<Eigen::Index>();
  cfg.restarts = get_or_int(obj, "restarts", cfg.restarts);
  return cfg;
}

StlsqOptions parse_stlsq(const json& obj, const StlsqOptions& base) {
  StlsqOptions cfg = base;
  cfg.threshold = get_or(obj, "threshold", cfg.threshold);
  cfg.ridge = get_or(obj, "ridge", cfg.ridge);
  cfg.max_iter = get_or_int(obj, "max_iter", cfg.max_iter);
  if (obj.contains("standardize")) cfg.standardize = obj.at("standardize").get<bool>();
  return cfg;
}

TrainConfig parse_nn(const json& obj, const TrainConfig& base) {
  TrainConfig cfg = base;
  cfg.learning_rate = get_or(obj, "learning_rate", cfg.learning_rate);
  cfg.batch_size = get_or_int(obj, "batch_size", cfg.batch_size);
  cfg.epochs = get_or_int(obj, "epochs", cfg.epochs);
  return cfg;
}

std::string rollout_name(const char* split, int index) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%s_%03d.csv", split, index);
  return buf;
}

}  // namespace

ExperimentConfig ExperimentConfig::parse(const std::string& text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::exception& e) {
    throw ConfigError(std::string("experiment config: invalid JSON: ") + e.what());
  }

  ExperimentConfig cfg;
  if (doc.contains("robot_model")) cfg.robot_model = doc["robot_model"].get<std::string>();
  if (doc.contains("output_dir")) cfg.output_dir = doc["output_dir"].get<std::string>();
  if (doc.contains("seed")) cfg.seed = doc["seed"].get<std::uint64_t>();

  if (doc.contains("sim")) {
    const auto& s = doc["sim"];
    cfg.sim.dt_env = get_or(s, "dt_env", cfg.sim.dt_env);
    cfg.sim.substeps = get_or_int(s, "substeps", cfg.sim.substeps);
    cfg.sim.horizon = get_or(s, "horizon", cfg.sim.horizon);
  }
  cfg.sim.validate();

  if (doc.contains("excitation")) {
    const auto& e = doc["excitation"];
    cfg.excitation.modes = get_or_int(e, "modes", cfg.excitation.modes);
    if (e.contains("amplitude")) {
      cfg.excitation.amp_lo = e["amplitude"][0].get<double>();
      cfg.excitation.amp_hi = e["amplitude"][1].get<double>();
    }
    if (e.contains("frequency")) {
      cfg.excitation.freq_lo = e["frequency"][0].get<double>();
      cfg.excitation.freq_hi = e["frequency"][1].get<double>();
    }
    cfg.excitation.margin = get_or(e, "margin", cfg.excitation.margin);
    cfg.excitation.guard = get_or(e, "guard", cfg.excitation.guard);
  }
  cfg.excitation.validate();

  if (doc.contains("counts")) {
    cfg.train_rollouts = get_or_int(doc["counts"], "train", cfg.train_rollouts);
    cfg.test_rollouts = get_or_int(doc["counts"], "test", cfg.test_rollouts);
  }
  if (cfg.train_rollouts < 1 || cfg.test_rollouts < 1)
    throw ConfigError("experiment config: rollout counts must be >= 1");

  if (doc.contains("gains")) {
    const auto& g = doc["gains"];
    cfg.kp = get_or(g, "kp", cfg.kp);
    cfg.ki = get_or(g, "ki", cfg.ki);
    cfg.kd = get_or(g, "kd", cfg.kd);
    cfg.clip = get_or(g, "clip", cfg.clip);
  }

  if (doc.contains("diff")) {
    const auto& d = doc["diff"];
    cfg.diff = DiffConfig::from_name(d.value("method", "finite"));
    cfg.diff.alpha_tv = get_or(d, "alpha", cfg.diff.alpha_tv);
    cfg.diff.iterations = get_or_int(d, "iterations", cfg.diff.iterations);
    cfg.diff.delta = get_or(d, "delta", cfg.diff.delta);
    cfg.diff.validate();
    cfg.diff_specified = true;
  }

  if (doc.contains("methods")) {
    for (const auto& [name, body] : doc["methods"].items()) {
      MethodSpec spec;
      spec.kind = method_from_name(name);
      spec.seed = derive_seed(cfg.seed, name, 0);
      spec.sym = parse_sym(body, spec.sym);
      spec.sparse = parse_stlsq(body, spec.sparse);
      spec.nn = parse_nn(body, spec.nn);
      cfg.methods.push_back(std::move(spec));
    }
  }

  if (doc.contains("ingest") && doc["ingest"].contains("test_files"))
    cfg.ingest_test_files =
        doc["ingest"]["test_files"].get<std::vector<std::string>>();
  return cfg;
}

ExperimentConfig ExperimentConfig::load(const std::string& path) {
  std::error_code ec;
  if (!fs::exists(path, ec))
    throw ConfigError("experiment config: no such file: " + path);
  return parse(read_file(path));
}

RobotModel ExperimentConfig::robot() const {
  if (robot_model == "builtin:franka7_synthetic") return make_franka7_synthetic();
  return load_robot_model(robot_model);
}

PidGains ExperimentConfig::gains(int dof) const {
  return PidGains::uniform(dof, kp, ki, kd, clip);
}

std::string ExperimentConfig::resolved_output_dir() const {
  const char* root = std::getenv("RESIDYN_OUTPUT_ROOT");
  if (root && root[0] != '\0' && fs::path(output_dir).is_relative())
    return (fs::path(root) / output_dir).string();
  return output_dir;
}

std::string ExperimentConfig::rollout_dir() const {
  return (fs::path(resolved_output_dir()) / "rollouts").string();
}

std::string ExperimentConfig::dataset_dir() const {
  return (fs::path(resolved_output_dir()) / "dataset").string();
}

std::string ExperimentConfig::model_dir() const {
  return (fs::path(resolved_output_dir()) / "models").string();
}

void cmd_simulate(const ExperimentConfig& cfg) {
  const RobotModel model = cfg.robot();
  const int n = model.dof();
  const PidGains gains = cfg.gains(n);
  const JointLimits limits = JointLimits::of(model);
  const Vec tgrid = Vec::LinSpaced(cfg.sim.env_steps() + 1, 0.0, cfg.sim.horizon);

  fs::create_directories(cfg.rollout_dir());

  const auto run_split = [&](const char* split, int count) {
    for (int i = 0; i < count; ++i) {
      const std::uint64_t seed = derive_seed(
          cfg.seed, std::string(split) + "-rollout", static_cast<std::uint64_t>(i));
      Rng rng(seed);
      const Reference ref = make_reference(limits, cfg.excitation, tgrid, rng);

      Vec integral = Vec::Zero(n);
      Controller controller = [&](int k, const JointState& state) {
        auto res = pid_step(gains, model, state, ref.q_star.row(k).transpose(),
                            ref.qd_star.row(k).transpose(), integral,
                            cfg.sim.dt_env);
        integral = res.integral;
        return res.tau_m;
      };
      const Rollout rollout_data = rollout(model, controller, ref, cfg.sim);

      const fs::path csv_path = fs::path(cfg.rollout_dir()) / rollout_name(split, i);
      save_rollout_csv(rollout_data, csv_path.string());

      json sidecar;
      sidecar["split"] = split;
      sidecar["index"] = i;
      sidecar["seed"] = seed;
      sidecar["sim"] = {{"dt_env", cfg.sim.dt_env},
                        {"substeps", cfg.sim.substeps},
                        {"horizon", cfg.sim.horizon}};
      sidecar["excitation"] = {{"modes", cfg.excitation.modes},
                               {"amplitude", {cfg.excitation.amp_lo, cfg.excitation.amp_hi}},
                               {"frequency", {cfg.excitation.freq_lo, cfg.excitation.freq_hi}},
                               {"margin", cfg.excitation.margin},
                               {"guard", cfg.excitation.guard}};
      sidecar["gains"] = {{"kp", cfg.kp}, {"ki", cfg.ki}, {"kd", cfg.kd}, {"clip", cfg.clip}};
      sidecar["model_hash"] = hash_hex(model.hash());
      fs::path sidecar_path = csv_path;
      sidecar_path.replace_extension(".json");
      write_file(sidecar_path.string(), sidecar.dump(2));
    }
  };
  run_split("train", cfg.train_rollouts);
  run_split("test", cfg.test_rollouts);
}

void cmd_build(const ExperimentConfig& cfg) {
  const RobotModel model = cfg.robot();
  const fs::path dir(cfg.rollout_dir());
  if (!fs::is_directory(dir))
    throw DataError("build: no rollouts at " + dir.string() + " (run simulate first)");

  std::vector<std::string> files;
  for (const auto& entry : fs::directory_iterator(dir))
    if (entry.path().extension() == ".csv") files.push_back(entry.path().string());
  std::sort(files.begin(), files.end());
  if (files.empty())
    throw DataError("build: no rollout CSV files in " + dir.string());

  std::vector<Rollout> train, test;
  std::vector<DataSource> sources;
  for (const std::string& file : files) {
    const std::string name = fs::path(file).filename().string();
    const bool is_train = name.rfind("train_", 0) == 0;
    const bool is_test = name.rfind("test_", 0) == 0;
    if (!is_train && !is_test) continue;
    Rollout r = load_rollout_csv(file);
    sources.push_back({name, hash_hex(fnv1a(read_file(file))),
                       is_train ? "train" : "test"});
    (is_train ? train : test).push_back(std::move(r));
  }
  Dataset ds = assemble_dataset(train, test, model, cfg.diff, sources);
  save_dataset(ds, cfg.dataset_dir());
}

void cmd_train(const ExperimentConfig& cfg, const std::string& method_or_all) {
  if (cfg.methods.empty())
    throw ConfigError("train: the config lists no methods");
  const Dataset ds = load_dataset(cfg.dataset_dir());
  fs::create_directories(cfg.model_dir());

  bool trained_any = false;
  for (const MethodSpec& spec : cfg.methods) {
    const std::string name = method_name(spec.kind);
    if (method_or_all != "all" && method_or_all != name) continue;
    TrainedModel model = train_method(spec, ds);
    write_file((fs::path(cfg.model_dir()) / (name + ".json")).string(),
               trained_model_to_json(model));
    trained_any = true;
  }
  if (!trained_any)
    throw ConfigError("train: method '" + method_or_all +
                      "' is not in the config's method list");
}

namespace {

std::vector<TrainedModel> load_trained_models(const ExperimentConfig& cfg) {
  if (cfg.methods.empty())
    throw ConfigError("evaluate: the config lists no methods");
  std::vector<TrainedModel> models;
  for (const MethodSpec& spec : cfg.methods) {
    const std::string name = method_name(spec.kind);
    const fs::path file = fs::path(cfg.model_dir()) / (name + ".json");
    if (!fs::exists(file))
      throw DataError("evaluate: missing trained model " + file.string() +
                      " (run train first)");
    models.push_back(trained_model_from_json(read_file(file.string())));
  }
  return models;
}

}  // namespace

void cmd_evaluate(const ExperimentConfig& cfg) {
  const Dataset ds = load_dataset(cfg.dataset_dir());
  const std::vector<TrainedModel> models = load_trained_models(cfg);

  json doc;
  doc["dataset_hash"] = ds.hash;
  json entries = json::object();
  for (const TrainedModel& model : models) {
    if (model.dataset_hash != ds.hash)
      throw DataError("evaluate: model '" + method_name(model.kind) +
                      "' was trained on a different dataset (hash " +
                      model.dataset_hash + " vs " + ds.hash + ")");
    const Vec train_rmse =
        relative_rmse(predict(model, ds.X_train, ds.feature_names), ds.train_targets.Y)
            .value;
    const Vec test_rmse =
        relative_rmse(predict(model, ds.X_test, ds.feature_names), ds.test_targets.Y)
            .value;
    entries[method_name(model.kind)] = {
        {"train_relative_rmse",
         std::vector<double>(train_rmse.data(), train_rmse.data() + train_rmse.size())},
        {"test_relative_rmse",
         std::vector<double>(test_rmse.data(), test_rmse.data() + test_rmse.size())}};
  }
  doc["methods"] = entries;
  write_file((fs::path(cfg.resolved_output_dir()) / "evaluation.json").string(),
             doc.dump(2));
}

void cmd_report(const ExperimentConfig& cfg) {
  const Dataset ds = load_dataset(cfg.dataset_dir());
  const std::vector<TrainedModel> models = load_trained_models(cfg);
  for (const TrainedModel& model : models)
    if (model.dataset_hash != ds.hash)
      throw DataError("report: model '" + method_name(model.kind) +
                      "' was trained on a different dataset");
  const Report rep = report(models, ds);
  const fs::path out(cfg.resolved_output_dir());
  write_file((out / "report.json").string(), rep.json);
  write_file((out / "report.txt").string(), rep.text);
}

void cmd_ingest(const ExperimentConfig& cfg, const std::string& data_dir,
                const std::string& map_path) {
  const RobotModel model = cfg.robot();
  const ColumnMap map = ColumnMap::from_json(read_file(map_path));
  // Real-world signals default to the total-variation differentiator.
  DiffConfig diff = cfg.diff_specified ? cfg.diff : DiffConfig::from_name("tvr");

  auto rollouts = ingest_external(data_dir, map, model, diff);
  if (rollouts.size() < 2)
    throw DataError("ingest: need at least two trajectories to form a split");

  // Split assignment: explicit override, or the trailing quarter (at least
  // one file) of the lexicographic order becomes the test set.
  const auto is_test = [&](const std::string& file) {
    const std::string name = fs::path(file).filename().string();
    if (!cfg.ingest_test_files.empty())
      return std::find(cfg.ingest_test_files.begin(), cfg.ingest_test_files.end(),
                       name) != cfg.ingest_test_files.end();
    return false;
  };

  std::vector<Rollout> train, test;
  std::vector<DataSource> sources;
  size_t n_test = std::max<size_t>(1, rollouts.size() / 4);
  for (size_t i = 0; i < rollouts.size(); ++i) {
    const auto& [file, rollout_data] = rollouts[i];
    bool test_split;
    if (!cfg.ingest_test_files.empty()) {
      test_split = is_test(file);
    } else {
      test_split = i + n_test >= rollouts.size();
    }
    sources.push_back({fs::path(file).filename().string(),
                       hash_hex(fnv1a(read_file(file))),
                       test_split ? "test" : "train"});
    (test_split ? test : train).push_back(rollout_data);
  }
  if (train.empty() || test.empty())
    throw DataError("ingest: split override left an empty train or test set");

  Dataset ds = assemble_dataset(train, test, model, diff, sources);
  save_dataset(ds, cfg.dataset_dir());
}

}  // namespace residyn
