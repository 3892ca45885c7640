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

#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>

#include "residyn/csv.hpp"
#include "residyn/experiment.hpp"

using namespace residyn;
namespace fs = std::filesystem;

namespace {

struct TempDir {
  fs::path path;
  explicit TempDir(const std::string& name) : path(fs::temp_directory_path() / name) {
    fs::remove_all(path);
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
};

// Tiny but complete experiment: 1+1 rollouts, 1.2 s horizon, cheap methods.
std::string mini_config(const std::string& out_dir) {
  return R"({
  "robot_model": "builtin:franka7_synthetic",
  "output_dir": ")" + out_dir + R"(",
  "seed": 7,
  "sim": {"dt_env": 0.002, "substeps": 2, "horizon": 1.2},
  "counts": {"train": 1, "test": 1},
  "diff": {"method": "finite"},
  "methods": {
    "r-sindy": {"standardize": false},
    "nn": {"epochs": 2, "learning_rate": 0.001}
  }
})";
}

int run_cli(const std::string& args) {
  const char* bin = std::getenv("RESIDYN_CLI_BIN");
  REQUIRE(bin != nullptr);
  const std::string cmd = std::string(bin) + " " + args + " >/dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WEXITSTATUS(status);
}

}  // namespace

TEST_CASE("experiment config parsing") {
  SUBCASE("defaults with overrides") {
    ExperimentConfig cfg = ExperimentConfig::parse(mini_config("/tmp/x"));
    CHECK(cfg.seed == 7);
    CHECK(cfg.sim.horizon == 1.2);
    CHECK(cfg.train_rollouts == 1);
    REQUIRE(cfg.methods.size() == 2);
    CHECK(cfg.methods[0].kind == MethodKind::kRSindy);
    CHECK_FALSE(cfg.methods[0].sparse.standardize);
    CHECK(cfg.methods[1].nn.epochs == 2);
  }

  SUBCASE("bad json and unknown methods are config errors") {
    CHECK_THROWS_AS(ExperimentConfig::parse("{oops"), ConfigError);
    CHECK_THROWS_AS(ExperimentConfig::parse(R"({"methods": {"bogus": {}}})"),
                    ConfigError);
    CHECK_THROWS_AS(ExperimentConfig::load("/nonexistent/config.json"), ConfigError);
  }

  SUBCASE("output root env override applies to relative paths") {
    ExperimentConfig cfg = ExperimentConfig::parse(R"({"output_dir": "rel/out"})");
    setenv("RESIDYN_OUTPUT_ROOT", "/tmp/residyn_root", 1);
    CHECK(cfg.resolved_output_dir() == "/tmp/residyn_root/rel/out");
    unsetenv("RESIDYN_OUTPUT_ROOT");
    CHECK(cfg.resolved_output_dir() == "rel/out");
  }
}

TEST_CASE("pipeline on a miniature experiment") {
  TempDir dir("residyn_cli_pipeline");
  ExperimentConfig cfg = ExperimentConfig::parse(mini_config(dir.path.string()));

  cmd_simulate(cfg);

  SUBCASE("simulate writes rollouts with sidecars, deterministically") {
    CHECK(fs::exists(dir.path / "rollouts" / "train_000.csv"));
    CHECK(fs::exists(dir.path / "rollouts" / "train_000.json"));
    CHECK(fs::exists(dir.path / "rollouts" / "test_000.csv"));
    const std::string first = read_file((dir.path / "rollouts" / "train_000.csv").string());
    cmd_simulate(cfg);
    const std::string second = read_file((dir.path / "rollouts" / "train_000.csv").string());
    CHECK(first == second);
  }

  cmd_build(cfg);

  SUBCASE("build produces the 49-column dataset with provenance") {
    Dataset ds = load_dataset(cfg.dataset_dir());
    CHECK(ds.X_train.cols() == 49);
    CHECK(ds.X_train.rows() == cfg.sim.env_steps());
    const std::string hash = ds.hash;
    cmd_build(cfg);
    CHECK(load_dataset(cfg.dataset_dir()).hash == hash);
    REQUIRE(ds.sources.size() == 2);
    CHECK(ds.sources[0].split == "test");  // lexicographic: test_000 then train_000
    CHECK(ds.sources[1].split == "train");
  }

  SUBCASE("evaluate before train is an actionable data error") {
    CHECK_THROWS_AS(cmd_evaluate(cfg), DataError);
  }

  SUBCASE("train, evaluate, report") {
    cmd_train(cfg, "all");
    CHECK(fs::exists(dir.path / "models" / "r-sindy.json"));
    CHECK(fs::exists(dir.path / "models" / "nn.json"));

    cmd_evaluate(cfg);
    CHECK(fs::exists(dir.path / "evaluation.json"));

    cmd_report(cfg);
    const std::string rep = read_file((dir.path / "report.json").string());
    CHECK(rep.find("r-sindy") != std::string::npos);
    CHECK(rep.find("nn") != std::string::npos);
    CHECK(fs::exists(dir.path / "report.txt"));

    SUBCASE("training a single named method refreshes only that model") {
      cmd_train(cfg, "r-sindy");
      CHECK_THROWS_AS(cmd_train(cfg, "sr"), ConfigError);  // not in config
    }
  }
}

TEST_CASE("ingest applies the trailing-quarter split and records it") {
  TempDir dir("residyn_cli_ingest");
  TempDir data("residyn_cli_ingest_data");

  // Four single-joint trajectory files.
  for (int f = 0; f < 4; ++f) {
    std::ofstream out(data.path / ("traj_" + std::to_string(f) + ".csv"));
    out << "t,q1,tau1\n";
    for (int k = 0; k < 200; ++k) {
      const double t = 0.01 * k;
      out << t << ',' << 0.3 * std::sin(t + f) << ',' << std::cos(t) << '\n';
    }
  }
  const fs::path map = data.path / "map.json";
  write_file(map.string(), R"({"t": "t", "q": ["q1"], "taum": ["tau1"]})");

  // Single-joint model for the adapter.
  Joint j;
  j.axis = Vec3::UnitZ();
  j.mass = 1.0;
  j.com = Vec3(0.1, 0, 0);
  j.inertia = Mat3::Identity() * 0.01;
  j.damping = 0.1;
  const std::string model_path = (data.path / "robot.json").string();
  write_file(model_path, robot_model_to_json(RobotModel::create("one", {j})));

  ExperimentConfig cfg = ExperimentConfig::parse(
      R"({"robot_model": ")" + model_path + R"(", "output_dir": ")" +
      dir.path.string() + R"(", "diff": {"method": "finite"}})");

  cmd_ingest(cfg, data.path.string(), map.string());
  Dataset ds = load_dataset(cfg.dataset_dir());
  REQUIRE(ds.sources.size() == 4);
  int train_count = 0, test_count = 0;
  for (const auto& s : ds.sources) (s.split == "train" ? train_count : test_count)++;
  CHECK(train_count == 3);
  CHECK(test_count == 1);
  CHECK(ds.sources[3].split == "test");  // lexicographically last file
  CHECK(ds.diff_method == "finite");
}

TEST_CASE("cli binary maps errors to exit codes") {
  TempDir dir("residyn_cli_binary");

  SUBCASE("missing config file exits 2") {
    CHECK(run_cli("simulate -c /nonexistent.json") == 2);
  }

  SUBCASE("missing robot model file exits 2") {
    const fs::path cfg_path = dir.path / "config.json";
    write_file(cfg_path.string(),
               R"({"robot_model": "/nonexistent_robot.json", "output_dir": ")" +
                   dir.path.string() + R"("})");
    CHECK(run_cli("simulate -c " + cfg_path.string()) == 2);
  }

  SUBCASE("usage errors exit 2") {
    CHECK(run_cli("bogus-subcommand") == 2);
    CHECK(run_cli("simulate") == 2);  // missing --config
  }

  SUBCASE("build before simulate exits 3") {
    const fs::path cfg_path = dir.path / "config.json";
    write_file(cfg_path.string(), mini_config((dir.path / "empty").string()));
    CHECK(run_cli("build -c " + cfg_path.string()) == 3);
  }
}
