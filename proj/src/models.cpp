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

#include "residyn/models.hpp"

#include <cmath>
#include <future>
#include <sstream>
#include <thread>

#include <json.hpp>

#include "residyn/csv.hpp"

namespace residyn {

using json = nlohmann::ordered_json;

std::string method_name(MethodKind kind) {
  switch (kind) {
    case MethodKind::kSr: return "sr";
    case MethodKind::kSindy: return "sindy";
    case MethodKind::kRSr: return "r-sr";
    case MethodKind::kRSindy: return "r-sindy";
    case MethodKind::kRSindySr: return "r-sindy-sr";
    case MethodKind::kNn: return "nn";
    case MethodKind::kRNn: return "r-nn";
  }
  throw ConfigError("method: unknown kind");
}

MethodKind method_from_name(const std::string& name) {
  for (MethodKind kind : all_methods())
    if (method_name(kind) == name) return kind;
  throw ConfigError("method: unknown name '" + name +
                    "' (sr|sindy|r-sr|r-sindy|r-sindy-sr|nn|r-nn)");
}

const std::vector<MethodKind>& all_methods() {
  static const std::vector<MethodKind> kinds = {
      MethodKind::kSr,     MethodKind::kSindy,    MethodKind::kRSr,
      MethodKind::kRSindy, MethodKind::kRSindySr, MethodKind::kNn,
      MethodKind::kRNn};
  return kinds;
}

void MethodSpec::validate() const {
  sym.validate();
  sparse.validate();
  nn.validate();
}

namespace {

bool is_residual_kind(MethodKind kind) {
  return kind == MethodKind::kRSr || kind == MethodKind::kRSindy ||
         kind == MethodKind::kRSindySr || kind == MethodKind::kRNn;
}

Mat rigid_body_columns(const Eigen::Ref<const Mat>& X, int dof) {
  const FeatureLayout layout{dof};
  return X.middleCols(layout.tau_i(), dof) + X.middleCols(layout.tau_c(), dof) +
         X.middleCols(layout.tau_g(), dof);
}

// Seven independent scalar fits, one engine instance per output; parallel
// across joints with per-joint seeds.
std::vector<Expression> fit_per_joint(const Eigen::Ref<const Mat>& X, const Mat& Y,
                                      const SymRegConfig& base,
                                      std::uint64_t master_seed,
                                      std::string_view tag) {
  const int m = static_cast<int>(Y.cols());
  std::vector<std::future<Expression>> futures;
  futures.reserve(static_cast<size_t>(m));
  for (int j = 0; j < m; ++j) {
    SymRegConfig cfg = base;
    cfg.seed = derive_seed(master_seed, tag, static_cast<std::uint64_t>(j));
    cfg.threads = 1;  // joints already saturate the cores
    futures.push_back(std::async(std::launch::async, [&X, &Y, cfg, j] {
      const Vec y = Y.col(j);
      ParetoFront front = fit_symbolic(X, y, cfg);
      Expression chosen = select_model(front);
      chosen = refine_constants(chosen, X, y);
      return simplify(chosen);
    }));
  }
  std::vector<Expression> out;
  out.reserve(static_cast<size_t>(m));
  for (auto& f : futures) out.push_back(f.get());
  return out;
}

Mat evaluate_expressions(const std::vector<Expression>& exprs,
                         const Eigen::Ref<const Mat>& X) {
  Mat out(X.rows(), static_cast<Eigen::Index>(exprs.size()));
  for (size_t j = 0; j < exprs.size(); ++j) out.col(static_cast<Eigen::Index>(j)) =
      evaluate(exprs[j], X);
  return out;
}

}  // namespace

TrainedModel train_method(const MethodSpec& spec, const Dataset& dataset) {
  spec.validate();
  if (dataset.X_train.rows() < 1) throw DataError("train_method: empty train split");
  if (dataset.train_targets.kind != TargetKind::kMotor)
    throw DataError("train_method: dataset targets must be motor torques");

  TrainedModel model;
  model.kind = spec.kind;
  model.residual = is_residual_kind(spec.kind);
  model.feature_names = dataset.feature_names;
  model.dof = dataset.dof;
  model.dataset_hash = dataset.hash;

  const Mat& X = dataset.X_train;
  const Mat& Y = dataset.train_targets.Y;
  const PolyLibrary library(static_cast<int>(X.cols()), dataset.feature_names);

  switch (spec.kind) {
    case MethodKind::kSr: {
      model.expressions = fit_per_joint(X, Y, spec.sym, spec.seed, "sr");
      break;
    }
    case MethodKind::kSindy: {
      model.sparse = stlsq(library, X, Y, spec.sparse);
      break;
    }
    case MethodKind::kRSr: {
      const TargetMatrix res = residual_targets(dataset.train_targets, X, dataset.dof);
      model.expressions = fit_per_joint(X, res.Y, spec.sym, spec.seed, "r-sr");
      break;
    }
    case MethodKind::kRSindy: {
      const TargetMatrix res = residual_targets(dataset.train_targets, X, dataset.dof);
      model.sparse = stlsq(library, X, res.Y, spec.sparse);
      break;
    }
    case MethodKind::kRSindySr: {
      const TargetMatrix res = residual_targets(dataset.train_targets, X, dataset.dof);
      model.sparse = stlsq(library, X, res.Y, spec.sparse);
      // Stage 1 frozen; the second layer fits what it left behind.
      const Mat stage1 = rigid_body_columns(X, dataset.dof) +
                         model.sparse->predict(library, X);
      const Mat y2 = Y - stage1;
      model.stage2 = fit_per_joint(X, y2, spec.sym, spec.seed, "stage2");
      break;
    }
    case MethodKind::kNn: {
      Mlp net({static_cast<int>(X.cols()), 128, 128, dataset.dof},
              derive_seed(spec.seed, "nn-init", 0));
      TrainConfig cfg = spec.nn;
      cfg.seed = derive_seed(spec.seed, "nn-train", 0);
      TrainResult result = train(net, X, Y, cfg);
      if (cfg.epochs > 0 && !(result.loss_curve.back() < result.loss_curve.front()))
        throw NumericError("train_method: nn training failed to reduce the loss");
      model.net = std::move(result.net);
      break;
    }
    case MethodKind::kRNn: {
      Mlp net({static_cast<int>(X.cols()), 128, 128, dataset.dof},
              derive_seed(spec.seed, "r-nn-init", 0));
      TrainConfig cfg = spec.nn;
      cfg.seed = derive_seed(spec.seed, "r-nn-train", 0);
      const Mat base = rigid_body_columns(X, dataset.dof);
      TrainResult result = train(net, X, Y, cfg, &base);
      if (cfg.epochs > 0 && !(result.loss_curve.back() < result.loss_curve.front()))
        throw NumericError("train_method: r-nn training failed to reduce the loss");
      model.net = std::move(result.net);
      break;
    }
  }
  return model;
}

Mat predict(const TrainedModel& model, const Eigen::Ref<const Mat>& X,
            const std::vector<std::string>& feature_names) {
  if (feature_names != model.feature_names)
    throw ConfigError("predict: feature registry does not match the trained model");
  if (X.cols() != static_cast<Eigen::Index>(model.feature_names.size()))
    throw ConfigError("predict: feature width mismatch");

  Mat out;
  switch (model.kind) {
    case MethodKind::kSr:
    case MethodKind::kRSr:
      out = evaluate_expressions(model.expressions, X);
      break;
    case MethodKind::kSindy:
    case MethodKind::kRSindy:
    case MethodKind::kRSindySr: {
      const PolyLibrary library(static_cast<int>(X.cols()), model.feature_names);
      out = model.sparse->predict(library, X);
      if (model.kind == MethodKind::kRSindySr)
        out += evaluate_expressions(model.stage2, X);
      break;
    }
    case MethodKind::kNn:
    case MethodKind::kRNn:
      out = model.net->forward(X);
      break;
  }
  if (model.residual) out += rigid_body_columns(X, model.dof);
  return out;
}

RelativeRmse relative_rmse(const Eigen::Ref<const Mat>& predicted,
                           const Eigen::Ref<const Mat>& target) {
  if (predicted.rows() != target.rows() || predicted.cols() != target.cols())
    throw ConfigError("relative_rmse: shape mismatch");
  if (target.rows() < 1) throw ConfigError("relative_rmse: empty input");

  RelativeRmse out;
  out.value = Vec(target.cols());
  out.degenerate.assign(static_cast<size_t>(target.cols()), false);
  const double N = static_cast<double>(target.rows());
  for (Eigen::Index j = 0; j < target.cols(); ++j) {
    const double err = std::sqrt((predicted.col(j) - target.col(j)).squaredNorm() / N);
    const double ref = std::sqrt(target.col(j).squaredNorm() / N);
    if (ref == 0.0) {
      out.value[j] = err;
      out.degenerate[static_cast<size_t>(j)] = true;
    } else {
      out.value[j] = err / ref;
    }
  }
  return out;
}

namespace {

std::string linear_terms_string(const std::vector<ActiveTerm>& terms) {
  if (terms.empty()) return "0";
  std::string out;
  for (size_t i = 0; i < terms.size(); ++i) {
    const double c = terms[i].coefficient;
    const bool is_bias = terms[i].name == "1";
    std::string piece = is_bias ? format_double(std::abs(c))
                                : format_double(std::abs(c)) + "*" + terms[i].name;
    if (i == 0) {
      out = (c < 0 ? "-" : "") + piece;
    } else {
      out += (c < 0 ? " - " : " + ") + piece;
    }
  }
  return out;
}

}  // namespace

std::vector<std::string> equations(const TrainedModel& model) {
  std::vector<std::string> out;
  switch (model.kind) {
    case MethodKind::kSr:
    case MethodKind::kRSr:
      for (const Expression& e : model.expressions)
        out.push_back(render(e, model.feature_names));
      break;
    case MethodKind::kSindy:
    case MethodKind::kRSindy: {
      for (int j = 0; j < model.dof; ++j)
        out.push_back(linear_terms_string(active_terms(*model.sparse, j)));
      break;
    }
    case MethodKind::kRSindySr: {
      for (int j = 0; j < model.dof; ++j) {
        std::string stage1 = linear_terms_string(active_terms(*model.sparse, j));
        std::string stage2 = render(model.stage2[static_cast<size_t>(j)],
                                    model.feature_names);
        out.push_back("[" + stage1 + "] + [" + stage2 + "]");
      }
      break;
    }
    case MethodKind::kNn:
    case MethodKind::kRNn:
      break;
  }
  return out;
}

Report report(const std::vector<TrainedModel>& models, const Dataset& dataset) {
  if (models.empty()) throw DataError("report: no trained models");
  for (const TrainedModel& m : models) {
    if (m.feature_names != dataset.feature_names)
      throw ConfigError("report: model/dataset registry mismatch (" +
                        method_name(m.kind) + ")");
    if (m.dataset_hash != dataset.hash)
      throw ConfigError("report: model was trained on a different dataset (" +
                        method_name(m.kind) + ")");
  }

  const int dof = dataset.dof;
  struct Row {
    std::string name;
    Vec train, test;
    std::vector<std::string> eqs;
  };
  std::vector<Row> rows;
  for (const TrainedModel& m : models) {
    Row row;
    row.name = method_name(m.kind);
    row.train = relative_rmse(predict(m, dataset.X_train, dataset.feature_names),
                              dataset.train_targets.Y)
                    .value;
    row.test = relative_rmse(predict(m, dataset.X_test, dataset.feature_names),
                             dataset.test_targets.Y)
                   .value;
    row.eqs = equations(m);
    rows.push_back(std::move(row));
  }

  const auto rounded = [](double v) { return std::round(v * 1000.0) / 1000.0; };
  const auto best_mask = [&](bool test_split, int joint) {
    double best = 1e300;
    for (const Row& row : rows)
      best = std::min(best, rounded(test_split ? row.test[joint] : row.train[joint]));
    std::vector<bool> mask;
    for (const Row& row : rows)
      mask.push_back(rounded(test_split ? row.test[joint] : row.train[joint]) == best);
    return mask;
  };

  json doc;
  doc["dataset"] = {{"hash", dataset.hash},
                    {"dof", dof},
                    {"train_rows", dataset.X_train.rows()},
                    {"test_rows", dataset.X_test.rows()}};
  json methods = json::object();
  for (const Row& row : rows) {
    json entry;
    entry["train_relative_rmse"] =
        std::vector<double>(row.train.data(), row.train.data() + dof);
    entry["test_relative_rmse"] =
        std::vector<double>(row.test.data(), row.test.data() + dof);
    if (!row.eqs.empty()) entry["equations"] = row.eqs;
    methods[row.name] = entry;
  }
  doc["methods"] = methods;

  // Human-readable tables, one per split, 3-decimal resolution, best-per-joint
  // starred (ties share the star).
  std::ostringstream text;
  for (bool test_split : {false, true}) {
    text << (test_split ? "Test" : "Train")
         << " relative RMSE per joint\n";
    text << "joint";
    for (const Row& row : rows) text << '\t' << row.name;
    text << '\n';
    for (int j = 0; j < dof; ++j) {
      const auto mask = best_mask(test_split, j);
      text << (j + 1);
      for (size_t r = 0; r < rows.size(); ++r) {
        const double v = test_split ? rows[r].test[j] : rows[r].train[j];
        char buf[32];
        std::snprintf(buf, sizeof(buf), "%.3f", v);
        text << '\t' << buf << (mask[r] ? "*" : "");
      }
      text << '\n';
    }
    text << '\n';
  }
  text << "Identified models\n";
  for (const Row& row : rows) {
    if (row.eqs.empty()) continue;
    text << row.name << ":\n";
    for (size_t j = 0; j < row.eqs.size(); ++j)
      text << "  joint " << (j + 1) << ": " << row.eqs[j] << '\n';
  }

  Report out;
  out.json = doc.dump(2);
  out.text = text.str();
  return out;
}

std::string trained_model_to_json(const TrainedModel& model) {
  json doc;
  doc["type"] = "trained_model";
  doc["kind"] = method_name(model.kind);
  doc["residual"] = model.residual;
  doc["dof"] = model.dof;
  doc["feature_names"] = model.feature_names;
  doc["dataset_hash"] = model.dataset_hash;
  if (!model.expressions.empty()) {
    json exprs = json::array();
    for (const Expression& e : model.expressions)
      exprs.push_back(json::parse(expression_to_json(e, model.feature_names)));
    doc["expressions"] = exprs;
  }
  if (model.sparse) doc["sparse"] = json::parse(sparse_model_to_json(*model.sparse));
  if (!model.stage2.empty()) {
    json exprs = json::array();
    for (const Expression& e : model.stage2)
      exprs.push_back(json::parse(expression_to_json(e, model.feature_names)));
    doc["stage2"] = exprs;
  }
  if (model.net) doc["net"] = json::parse(mlp_to_json(*model.net));
  return doc.dump(2);
}

TrainedModel trained_model_from_json(const std::string& text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::exception& e) {
    throw DataError(std::string("trained model: invalid JSON: ") + e.what());
  }
  if (doc.value("type", "") != "trained_model")
    throw DataError("trained model: wrong type tag");

  TrainedModel model;
  model.kind = method_from_name(doc.at("kind").get<std::string>());
  model.residual = doc.at("residual").get<bool>();
  model.dof = doc.at("dof").get<int>();
  model.feature_names = doc.at("feature_names").get<std::vector<std::string>>();
  model.dataset_hash = doc.at("dataset_hash").get<std::string>();
  if (doc.contains("expressions"))
    for (const auto& e : doc["expressions"])
      model.expressions.push_back(expression_from_json(e.dump(), model.feature_names));
  if (doc.contains("sparse"))
    model.sparse = sparse_model_from_json(doc["sparse"].dump());
  if (doc.contains("stage2"))
    for (const auto& e : doc["stage2"])
      model.stage2.push_back(expression_from_json(e.dump(), model.feature_names));
  if (doc.contains("net")) model.net = mlp_from_json(doc["net"].dump());
  return model;
}

}  // namespace residyn
