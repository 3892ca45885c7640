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

#include "residyn/models.hpp"
#include "test_util.hpp"

using namespace residyn;

namespace {

// Small simulator dataset shared across the method tests. Deliberately tiny:
// these cases exercise dispatch, composition, and serialization mechanics;
// recovery quality at the full 10-rollout scale lives in the acceptance suite.
const Dataset& small_dataset() {
  static const Dataset ds = [] {
    const RobotModel model = make_franka7_synthetic();
    SimConfig cfg{0.002, 2, 2.0};
    std::vector<Rollout> train{testutil::excited_rollout(model, cfg, 11),
                               testutil::excited_rollout(model, cfg, 12)};
    std::vector<Rollout> test{testutil::excited_rollout(model, cfg, 13)};
    return assemble_dataset(train, test, model, DiffConfig{},
                            {{"a", "1", "train"}, {"b", "2", "train"},
                             {"c", "3", "test"}});
  }();
  return ds;
}

MethodSpec cheap_spec(MethodKind kind, std::uint64_t seed = 5) {
  MethodSpec spec;
  spec.kind = kind;
  spec.seed = seed;
  spec.sym.population = 128;
  spec.sym.generations = 25;
  spec.sym.restarts = 2;
  spec.sym.batch_size = 1024;
  spec.sparse.standardize = false;
  spec.nn.epochs = 3;
  spec.nn.learning_rate = 1e-3;
  return spec;
}

}  // namespace

TEST_CASE("relative rmse") {
  SUBCASE("perfect prediction is zero") {
    Mat t(3, 2);
    t << 1, 2, 3, 4, 5, 6;
    RelativeRmse r = relative_rmse(t, t);
    CHECK(r.value.cwiseAbs().maxCoeff() == 0.0);
  }

  SUBCASE("zero prediction of a nonzero target is one") {
    Mat t(4, 3);
    t.setConstant(2.5);
    RelativeRmse r = relative_rmse(Mat::Zero(4, 3), t);
    CHECK((r.value.array() - 1.0).abs().maxCoeff() < 1e-12);
  }

  SUBCASE("hand-computed column") {
    Mat target(2, 1), pred(2, 1);
    target << 3, 4;
    pred << 3, 0;
    RelativeRmse r = relative_rmse(pred, target);
    CHECK(r.value[0] == doctest::Approx(0.8).epsilon(1e-12));
    CHECK_FALSE(r.degenerate[0]);
  }

  SUBCASE("degenerate target column returns the raw error RMS") {
    Mat target = Mat::Zero(4, 1);
    Mat pred = Mat::Constant(4, 1, 2.0);
    RelativeRmse r = relative_rmse(pred, target);
    CHECK(r.degenerate[0]);
    CHECK(r.value[0] == doctest::Approx(2.0));
  }

  SUBCASE("error scale covariance") {
    Rng rng(3);
    Mat target(50, 2), err(50, 2);
    for (int i = 0; i < 50; ++i)
      for (int j = 0; j < 2; ++j) {
        target(i, j) = rng.uniform(-3, 3);
        err(i, j) = rng.uniform(-1, 1);
      }
    Vec a = relative_rmse(target + err, target).value;
    Vec b = relative_rmse(target + 3.0 * err, target).value;
    CHECK((b - 3.0 * a).cwiseAbs().maxCoeff() < 1e-12);
  }

  SUBCASE("shape mismatch") {
    CHECK_THROWS_AS(relative_rmse(Mat::Zero(3, 2), Mat::Zero(3, 3)), ConfigError);
  }
}

TEST_CASE("r-sindy trains on residual targets and composes with tau_rbd") {
  const Dataset& ds = small_dataset();
  TrainedModel model = train_method(cheap_spec(MethodKind::kRSindy), ds);
  REQUIRE(model.sparse.has_value());
  CHECK(model.residual);

  SUBCASE("prediction composes tau_rbd with the learned residual") {
    const PolyLibrary lib(49, ds.feature_names);
    const FeatureLayout layout{7};
    Mat base = ds.X_test.middleCols(layout.tau_i(), 7) +
               ds.X_test.middleCols(layout.tau_c(), 7) +
               ds.X_test.middleCols(layout.tau_g(), 7);
    Mat expected = base + model.sparse->predict(lib, ds.X_test);
    Mat got = predict(model, ds.X_test, ds.feature_names);
    CHECK((expected - got).cwiseAbs().maxCoeff() < 1e-12);
  }

  SUBCASE("training fit beats the raw rigid-body baseline") {
    const FeatureLayout layout{7};
    Mat base = ds.X_train.middleCols(layout.tau_i(), 7) +
               ds.X_train.middleCols(layout.tau_c(), 7) +
               ds.X_train.middleCols(layout.tau_g(), 7);
    Vec fitted = relative_rmse(predict(model, ds.X_train, ds.feature_names),
                               ds.train_targets.Y)
                     .value;
    Vec bare = relative_rmse(base, ds.train_targets.Y).value;
    for (int j = 0; j < 7; ++j) CHECK(fitted[j] <= bare[j] + 1e-12);
  }
}

TEST_CASE("two-stage model is the sum of its stages") {
  const Dataset& ds = small_dataset();
  MethodSpec spec = cheap_spec(MethodKind::kRSindySr, 21);
  TrainedModel model = train_method(spec, ds);
  REQUIRE(model.sparse.has_value());
  REQUIRE(model.stage2.size() == 7);

  const PolyLibrary lib(49, ds.feature_names);
  const FeatureLayout layout{7};
  Mat base = ds.X_test.middleCols(layout.tau_i(), 7) +
             ds.X_test.middleCols(layout.tau_c(), 7) +
             ds.X_test.middleCols(layout.tau_g(), 7);
  Mat stage1 = base + model.sparse->predict(lib, ds.X_test);
  Mat stage2(ds.X_test.rows(), 7);
  for (int j = 0; j < 7; ++j)
    stage2.col(j) = evaluate(model.stage2[static_cast<size_t>(j)], ds.X_test);
  Mat got = predict(model, ds.X_test, ds.feature_names);
  CHECK((stage1 + stage2 - got).cwiseAbs().maxCoeff() < 1e-12);

  SUBCASE("stage 2 never hurts the training fit") {
    TrainedModel stage1_only = train_method(cheap_spec(MethodKind::kRSindy, 21), ds);
    Vec two = relative_rmse(predict(model, ds.X_train, ds.feature_names),
                            ds.train_targets.Y)
                  .value;
    Vec one = relative_rmse(predict(stage1_only, ds.X_train, ds.feature_names),
                            ds.train_targets.Y)
                  .value;
    for (int j = 0; j < 7; ++j) CHECK(two[j] <= one[j] + 1e-9);
  }
}

TEST_CASE("residual decomposition holds for every residual kind") {
  const Dataset& ds = small_dataset();
  const FeatureLayout layout{7};
  Mat base = ds.X_test.middleCols(layout.tau_i(), 7) +
             ds.X_test.middleCols(layout.tau_c(), 7) +
             ds.X_test.middleCols(layout.tau_g(), 7);

  SUBCASE("an identically-zero residual stage predicts tau_rbd") {
    TrainedModel model;
    model.kind = MethodKind::kRSr;
    model.residual = true;
    model.dof = 7;
    model.feature_names = ds.feature_names;
    model.dataset_hash = ds.hash;
    for (int j = 0; j < 7; ++j)
      model.expressions.push_back(Expression::constant(0.0));
    Mat got = predict(model, ds.X_test, ds.feature_names);
    CHECK((got - base).cwiseAbs().maxCoeff() == 0.0);
  }

  SUBCASE("r-nn prediction equals base plus network output") {
    MethodSpec spec = cheap_spec(MethodKind::kRNn, 3);
    TrainedModel model = train_method(spec, ds);
    REQUIRE(model.net.has_value());
    Mat got = predict(model, ds.X_test, ds.feature_names);
    Mat expected = base + model.net->forward(ds.X_test);
    CHECK((got - expected).cwiseAbs().maxCoeff() < 1e-12);
  }
}

TEST_CASE("method dispatch produces the right artifact shapes") {
  const Dataset& ds = small_dataset();

  TrainedModel sr = train_method(cheap_spec(MethodKind::kSr, 7), ds);
  CHECK(sr.expressions.size() == 7);
  CHECK_FALSE(sr.residual);
  CHECK(equations(sr).size() == 7);

  TrainedModel sindy = train_method(cheap_spec(MethodKind::kSindy, 7), ds);
  CHECK(sindy.sparse.has_value());
  CHECK_FALSE(sindy.residual);

  TrainedModel nn = train_method(cheap_spec(MethodKind::kNn, 7), ds);
  CHECK(nn.net.has_value());
  CHECK_FALSE(nn.residual);
  CHECK(equations(nn).empty());
}

TEST_CASE("report") {
  const Dataset& ds = small_dataset();
  std::vector<TrainedModel> models;
  models.push_back(train_method(cheap_spec(MethodKind::kRSindy, 5), ds));
  models.push_back(train_method(cheap_spec(MethodKind::kSindy, 5), ds));

  Report rep = report(models, ds);

  SUBCASE("json carries both splits for every method") {
    CHECK(rep.json.find("r-sindy") != std::string::npos);
    CHECK(rep.json.find("train_relative_rmse") != std::string::npos);
    CHECK(rep.json.find("test_relative_rmse") != std::string::npos);
    CHECK(rep.json.find("equations") != std::string::npos);
  }

  SUBCASE("text includes the per-joint table and equations") {
    CHECK(rep.text.find("Train relative RMSE") != std::string::npos);
    CHECK(rep.text.find("Identified models") != std::string::npos);
    CHECK(rep.text.find("joint 7:") != std::string::npos);
  }

  SUBCASE("registry and provenance mismatches are refused") {
    TrainedModel bad = models[0];
    bad.dataset_hash = "deadbeef";
    CHECK_THROWS_AS(report({bad}, ds), ConfigError);
    TrainedModel bad2 = models[0];
    bad2.feature_names[3] = "zz";
    CHECK_THROWS_AS(report({bad2}, ds), ConfigError);
  }
}

TEST_CASE("trained model serialization round trips") {
  const Dataset& ds = small_dataset();
  for (MethodKind kind : {MethodKind::kRSindy, MethodKind::kRSr, MethodKind::kNn,
                          MethodKind::kRSindySr}) {
    TrainedModel model = train_method(cheap_spec(kind, 9), ds);
    TrainedModel back = trained_model_from_json(trained_model_to_json(model));
    CHECK(back.kind == model.kind);
    CHECK(back.residual == model.residual);
    CHECK(back.dataset_hash == model.dataset_hash);
    Mat a = predict(model, ds.X_test, ds.feature_names);
    Mat b = predict(back, ds.X_test, ds.feature_names);
    CHECK((a - b).cwiseAbs().maxCoeff() < 1e-12);
  }
}
