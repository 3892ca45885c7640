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

#include "residyn/dataset.hpp"

#include <algorithm>
#include <filesystem>

#include <json.hpp>

#include "residyn/csv.hpp"

namespace residyn {

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;

std::vector<std::string> feature_registry(int dof) {
  std::vector<std::string> names;
  names.reserve(static_cast<size_t>(7 * dof));
  const char* stems[] = {"q", "qd", "qdd", "qddd", "tau_i", "tau_c", "tau_g"};
  for (const char* stem : stems)
    for (int j = 1; j <= dof; ++j)
      names.push_back(std::string(stem) + std::to_string(j));
  return names;
}

BuiltFeatures build_features(const Rollout& rollout, const RobotModel& model,
                             const DiffConfig& diff) {
  rollout.validate();
  const int n = model.dof();
  if (rollout.dof() != n)
    throw ConfigError("build_features: rollout has " + std::to_string(rollout.dof()) +
                      " joints, model has " + std::to_string(n));
  const int N1 = rollout.samples();
  if (N1 < 5) throw DataError("build_features: rollout needs at least 5 samples");

  const double dt = rollout.t[1] - rollout.t[0];

  // Accelerations and jerks from the recorded velocities, differentiated on
  // the full series so the kept rows are interior points.
  Mat qdd(N1, n), qddd(N1, n);
  for (int j = 0; j < n; ++j) {
    const Vec d1 = differentiate(rollout.qd.col(j), dt, diff);
    const Vec d2 = differentiate(d1, dt, diff);
    qdd.col(j) = d1;
    qddd.col(j) = d2;
  }
  if (!qdd.allFinite() || !qddd.allFinite())
    throw NumericError("build_features: non-finite derivatives");

  const FeatureLayout layout{n};
  const int rows = N1 - 1;  // final state row has no recorded torque
  BuiltFeatures out;
  out.X = Mat(rows, layout.width());
  out.targets.Y = rollout.tau_m.topRows(rows);
  out.targets.kind = TargetKind::kMotor;

  for (int k = 0; k < rows; ++k) {
    const Vec q = rollout.q.row(k).transpose();
    const Vec qd = rollout.qd.row(k).transpose();
    const Vec qdd_k = qdd.row(k).transpose();
    out.X.row(k).segment(layout.q(), n) = q.transpose();
    out.X.row(k).segment(layout.qd(), n) = qd.transpose();
    out.X.row(k).segment(layout.qdd(), n) = qdd_k.transpose();
    out.X.row(k).segment(layout.qddd(), n) = qddd.row(k);
    out.X.row(k).segment(layout.tau_i(), n) =
        (inertia_matrix(model, q) * qdd_k).transpose();
    out.X.row(k).segment(layout.tau_c(), n) = coriolis_torque(model, q, qd).transpose();
    out.X.row(k).segment(layout.tau_g(), n) = gravity_torque(model, q).transpose();
  }
  if (!out.X.allFinite()) throw NumericError("build_features: non-finite features");
  return out;
}

TargetMatrix residual_targets(const TargetMatrix& motor, const Mat& X, int dof) {
  if (motor.kind == TargetKind::kResidual)
    throw DataError("residual_targets: targets are already residual");
  const FeatureLayout layout{dof};
  if (X.cols() != layout.width())
    throw ConfigError("residual_targets: feature width mismatch");
  if (X.rows() != motor.Y.rows())
    throw ConfigError("residual_targets: row mismatch");

  TargetMatrix out;
  out.kind = TargetKind::kResidual;
  out.Y = motor.Y - X.middleCols(layout.tau_i(), dof) -
          X.middleCols(layout.tau_c(), dof) - X.middleCols(layout.tau_g(), dof);
  return out;
}

void Dataset::compute_hash() {
  std::uint64_t h = fnv1a(model_hash);
  h = fnv1a(diff_method, h);
  for (const DataSource& s : sources) {
    h = fnv1a(s.file, h);
    h = fnv1a(s.hash, h);
    h = fnv1a(s.split, h);
  }
  h = fnv1a(std::to_string(X_train.rows()) + "x" + std::to_string(X_train.cols()) +
                "|" + std::to_string(X_test.rows()),
            h);
  hash = hash_hex(h);
}

Dataset assemble_dataset(const std::vector<Rollout>& train,
                         const std::vector<Rollout>& test, const RobotModel& model,
                         const DiffConfig& diff,
                         const std::vector<DataSource>& sources) {
  if (train.empty() || test.empty())
    throw DataError("dataset: need at least one train and one test rollout");

  Dataset ds;
  ds.dof = model.dof();
  ds.feature_names = feature_registry(model.dof());
  ds.model_hash = hash_hex(model.hash());
  ds.diff_method = diff.method_name();
  ds.sources = sources;

  const auto stack = [&](const std::vector<Rollout>& rollouts, Mat& X, TargetMatrix& t) {
    std::vector<BuiltFeatures> parts;
    Eigen::Index rows = 0;
    for (const Rollout& r : rollouts) {
      parts.push_back(build_features(r, model, diff));
      rows += parts.back().X.rows();
    }
    X.resize(rows, parts[0].X.cols());
    t.Y.resize(rows, model.dof());
    t.kind = TargetKind::kMotor;
    Eigen::Index at = 0;
    for (const BuiltFeatures& part : parts) {
      X.middleRows(at, part.X.rows()) = part.X;
      t.Y.middleRows(at, part.X.rows()) = part.targets.Y;
      at += part.X.rows();
    }
  };
  stack(train, ds.X_train, ds.train_targets);
  stack(test, ds.X_test, ds.test_targets);
  ds.compute_hash();
  return ds;
}

namespace {

std::vector<std::string> target_header(int dof) {
  std::vector<std::string> names;
  for (int j = 1; j <= dof; ++j) names.push_back("taum" + std::to_string(j));
  return names;
}

}  // namespace

void save_dataset(const Dataset& ds, const std::string& directory) {
  fs::create_directories(directory);
  const fs::path dir(directory);
  write_csv((dir / "X_train.csv").string(), ds.feature_names, ds.X_train);
  write_csv((dir / "X_test.csv").string(), ds.feature_names, ds.X_test);
  write_csv((dir / "Y_train.csv").string(), target_header(ds.dof), ds.train_targets.Y);
  write_csv((dir / "Y_test.csv").string(), target_header(ds.dof), ds.test_targets.Y);

  json meta;
  meta["dof"] = ds.dof;
  meta["feature_names"] = ds.feature_names;
  meta["target_kind"] =
      ds.train_targets.kind == TargetKind::kMotor ? "motor" : "residual";
  json sources = json::array();
  for (const DataSource& s : ds.sources)
    sources.push_back({{"file", s.file}, {"hash", s.hash}, {"split", s.split}});
  meta["provenance"] = {{"model_hash", ds.model_hash},
                        {"diff_method", ds.diff_method},
                        {"sources", sources},
                        {"dataset_hash", ds.hash}};
  write_file((dir / "meta.json").string(), meta.dump(2));
}

Dataset load_dataset(const std::string& directory) {
  const fs::path dir(directory);
  if (!fs::exists(dir / "meta.json"))
    throw DataError("dataset: " + directory + " has no meta.json (run build first)");
  json meta;
  try {
    meta = json::parse(read_file((dir / "meta.json").string()));
  } catch (const json::exception& e) {
    throw DataError(std::string("dataset: invalid meta.json: ") + e.what());
  }

  Dataset ds;
  ds.dof = meta.at("dof").get<int>();
  ds.feature_names = meta.at("feature_names").get<std::vector<std::string>>();
  const TargetKind kind = meta.at("target_kind").get<std::string>() == "motor"
                              ? TargetKind::kMotor
                              : TargetKind::kResidual;
  auto [xh_train, x_train] = read_csv_matrix((dir / "X_train.csv").string());
  auto [yh_train, y_train] = read_csv_matrix((dir / "Y_train.csv").string());
  auto [xh_test, x_test] = read_csv_matrix((dir / "X_test.csv").string());
  auto [yh_test, y_test] = read_csv_matrix((dir / "Y_test.csv").string());
  if (xh_train != ds.feature_names || xh_test != ds.feature_names)
    throw DataError("dataset: feature headers do not match meta.json registry");
  ds.X_train = std::move(x_train);
  ds.X_test = std::move(x_test);
  ds.train_targets = {std::move(y_train), kind};
  ds.test_targets = {std::move(y_test), kind};

  const auto& prov = meta.at("provenance");
  ds.model_hash = prov.at("model_hash").get<std::string>();
  ds.diff_method = prov.at("diff_method").get<std::string>();
  for (const auto& s : prov.at("sources"))
    ds.sources.push_back({s.at("file").get<std::string>(),
                          s.at("hash").get<std::string>(),
                          s.value("split", "")});
  ds.hash = prov.at("dataset_hash").get<std::string>();
  return ds;
}

ColumnMap ColumnMap::from_json(const std::string& text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::exception& e) {
    throw ConfigError(std::string("column map: invalid JSON: ") + e.what());
  }
  const auto as_string = [](const json& v) -> std::string {
    if (v.is_number_integer()) return std::to_string(v.get<long>());
    return v.get<std::string>();
  };
  ColumnMap map;
  if (!doc.contains("t") || !doc.contains("q") || !doc.contains("taum"))
    throw ConfigError("column map: required fields are t, q, taum");
  map.t = as_string(doc["t"]);
  for (const auto& v : doc["q"]) map.q.push_back(as_string(v));
  for (const auto& v : doc["taum"]) map.taum.push_back(as_string(v));
  if (doc.contains("qd"))
    for (const auto& v : doc["qd"]) map.qd.push_back(as_string(v));
  if (map.q.size() != map.taum.size())
    throw ConfigError("column map: q and taum must list the same joint count");
  if (!map.qd.empty() && map.qd.size() != map.q.size())
    throw ConfigError("column map: qd must list the same joint count as q");
  return map;
}

namespace {

// Resolves a column-map entry (index digits or header name) to an index.
int resolve_column(const CsvTable& table, const std::string& key,
                   const std::string& file) {
  if (!key.empty() &&
      std::all_of(key.begin(), key.end(), [](char c) { return std::isdigit(c); })) {
    const int idx = std::stoi(key);
    if (idx < 0 || static_cast<size_t>(idx) >= table.header.size())
      throw DataError(file + ": column index " + key + " out of range (" +
                      std::to_string(table.header.size()) + " columns)");
    return idx;
  }
  const int idx = table.col(key);
  if (idx < 0) throw DataError(file + ": missing column '" + key + "'");
  return idx;
}

Rollout ingest_file(const std::string& path, const ColumnMap& map,
                    const RobotModel& model, const DiffConfig& diff) {
  // Header auto-detection: a first line that fails numeric parsing is a header.
  CsvTable table = read_delimited(path, /*has_header=*/false);
  if (!table.rows.empty()) {
    bool numeric = true;
    for (const auto& field : table.rows[0]) {
      try {
        parse_double(field, path);
      } catch (const DataError&) {
        numeric = false;
        break;
      }
    }
    if (!numeric) {
      table.header = table.rows[0];
      table.rows.erase(table.rows.begin());
    }
  }
  const int n = model.dof();
  if (static_cast<int>(map.q.size()) != n)
    throw ConfigError(path + ": column map lists " + std::to_string(map.q.size()) +
                      " joints, model has " + std::to_string(n));
  const int rows = static_cast<int>(table.rows.size());
  if (rows < 5) throw DataError(path + ": too few samples");

  const int t_col = resolve_column(table, map.t, path);
  std::vector<int> q_cols, qd_cols, tau_cols;
  for (const auto& k : map.q) q_cols.push_back(resolve_column(table, k, path));
  for (const auto& k : map.qd) qd_cols.push_back(resolve_column(table, k, path));
  for (const auto& k : map.taum) tau_cols.push_back(resolve_column(table, k, path));

  const auto cell = [&](int r, int c) -> double {
    const auto& row = table.rows[static_cast<size_t>(r)];
    if (static_cast<size_t>(c) >= row.size())
      throw DataError(path + ": row " + std::to_string(r) + " too short");
    const double v = parse_double(row[static_cast<size_t>(c)],
                                  path + ":" + std::to_string(r));
    if (!std::isfinite(v))
      throw DataError(path + ": non-finite value at row " + std::to_string(r));
    return v;
  };

  Rollout out;
  out.t = Vec(rows);
  out.q = Mat(rows, n);
  out.qd = Mat(rows, n);
  out.tau_m = Mat(rows - 1, n);
  for (int r = 0; r < rows; ++r) {
    out.t[r] = cell(r, t_col);
    for (int j = 0; j < n; ++j) {
      out.q(r, j) = cell(r, q_cols[static_cast<size_t>(j)]);
      if (!qd_cols.empty()) out.qd(r, j) = cell(r, qd_cols[static_cast<size_t>(j)]);
      if (r < rows - 1) out.tau_m(r, j) = cell(r, tau_cols[static_cast<size_t>(j)]);
    }
  }

  // Uniform sampling within 1% jitter.
  const double dt = (out.t[rows - 1] - out.t[0]) / (rows - 1);
  if (!(dt > 0)) throw DataError(path + ": timestamps not increasing");
  for (int r = 1; r < rows; ++r) {
    const double step = out.t[r] - out.t[r - 1];
    if (std::abs(step - dt) > 0.01 * dt)
      throw DataError(path + ": non-uniform sampling at row " + std::to_string(r) +
                      " (step " + format_double(step) + " vs mean " +
                      format_double(dt) + ")");
  }

  if (qd_cols.empty()) {
    for (int j = 0; j < n; ++j) out.qd.col(j) = differentiate(out.q.col(j), dt, diff);
  }
  out.validate();
  return out;
}

}  // namespace

std::vector<std::pair<std::string, Rollout>> ingest_external(
    const std::string& directory, const ColumnMap& map, const RobotModel& model,
    const DiffConfig& diff) {
  if (!fs::is_directory(directory))
    throw DataError("ingest: " + directory + " is not a directory");
  std::vector<std::string> files;
  for (const auto& entry : fs::directory_iterator(directory)) {
    if (!entry.is_regular_file()) continue;
    const std::string ext = entry.path().extension().string();
    if (ext == ".csv" || ext == ".txt" || ext == ".dat" || ext == ".tsv")
      files.push_back(entry.path().string());
  }
  std::sort(files.begin(), files.end());
  if (files.empty())
    throw DataError("ingest: no delimited files (.csv/.txt/.dat/.tsv) in " + directory);

  std::vector<std::pair<std::string, Rollout>> out;
  out.reserve(files.size());
  for (const std::string& file : files)
    out.emplace_back(file, ingest_file(file, map, model, diff));
  return out;
}

}  // namespace residyn
