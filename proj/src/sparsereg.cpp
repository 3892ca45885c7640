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

#include "residyn/sparsereg.hpp"

#include <algorithm>

#include <json.hpp>

namespace residyn {

using json = nlohmann::ordered_json;

PolyLibrary::PolyLibrary(int input_dim, std::vector<std::string> input_names)
    : d_(input_dim) {
  if (d_ < 1) throw ConfigError("poly library: input dimension must be >= 1");
  if (input_names.empty()) {
    input_names.reserve(static_cast<size_t>(d_));
    for (int i = 0; i < d_; ++i) input_names.push_back("x" + std::to_string(i + 1));
  }
  if (static_cast<int>(input_names.size()) != d_)
    throw ConfigError("poly library: name count does not match dimension");
  input_names_ = std::move(input_names);

  p_ = 1 + d_ + d_ * (d_ + 1) / 2;
  names_.reserve(static_cast<size_t>(p_));
  terms_.reserve(static_cast<size_t>(p_));

  names_.push_back("1");
  terms_.emplace_back(-1, -1);
  for (int i = 0; i < d_; ++i) {
    names_.push_back(input_names_[static_cast<size_t>(i)]);
    terms_.emplace_back(i, -1);
  }
  for (int i = 0; i < d_; ++i) {
    for (int j = i; j < d_; ++j) {
      if (i == j) {
        names_.push_back(input_names_[static_cast<size_t>(i)] + "^2");
      } else {
        names_.push_back(input_names_[static_cast<size_t>(i)] + "*" +
                         input_names_[static_cast<size_t>(j)]);
      }
      terms_.emplace_back(i, j);
    }
  }
}

Mat PolyLibrary::expand(const Eigen::Ref<const Mat>& X) const {
  if (X.cols() != d_)
    throw ConfigError("poly library: expected " + std::to_string(d_) +
                      " input columns, got " + std::to_string(X.cols()));
  if (!X.allFinite()) throw NumericError("poly library: non-finite input");

  Mat theta(X.rows(), p_);
  theta.col(0).setOnes();
  theta.middleCols(1, d_) = X;
  int c = 1 + d_;
  for (int i = 0; i < d_; ++i)
    for (int j = i; j < d_; ++j)
      theta.col(c++) = X.col(i).cwiseProduct(X.col(j));
  return theta;
}

void StlsqOptions::validate() const {
  if (!(threshold >= 0)) throw ConfigError("stlsq: threshold must be >= 0");
  if (!(ridge >= 0)) throw ConfigError("stlsq: ridge must be >= 0");
  if (max_iter < 1) throw ConfigError("stlsq: max_iter must be >= 1");
}

namespace {

// Exact ridge solution (G + ridge I)^-1 C. Rounding can push near-collinear
// Grams slightly indefinite, where a Cholesky-type solve silently returns
// garbage; an LDLT attempt is kept as the fast path and verified against the
// normal equations, falling back to an eigendecomposition with a clamped
// spectrum when the residual betrays it.
Mat solve_ridge(const Mat& gram, const Mat& rhs, double ridge) {
  const double top = gram.rows() > 0 ? gram.diagonal().maxCoeff() : 0.0;
  const double shift = std::max(ridge, 1e-12 * top);
  Mat regularized = gram;
  regularized.diagonal().array() += shift;

  Eigen::LDLT<Mat> ldlt(regularized);
  if (ldlt.info() == Eigen::Success) {
    Mat w = ldlt.solve(rhs);
    const double residual = (regularized * w - rhs).cwiseAbs().maxCoeff();
    const double scale = rhs.cwiseAbs().maxCoeff() + 1e-300;
    if (w.allFinite() && residual <= 1e-8 * scale) return w;
  }

  Eigen::SelfAdjointEigenSolver<Mat> es(gram);
  if (es.info() != Eigen::Success)
    throw NumericError("stlsq: eigendecomposition of the Gram matrix failed");
  const Vec lambda = es.eigenvalues().cwiseMax(0.0);
  const Vec inv = (lambda.array() + shift).inverse();
  return es.eigenvectors() *
         (inv.asDiagonal() * (es.eigenvectors().transpose() * rhs));
}

// Ridge solve restricted to an active set of library columns.
Vec solve_active(const Mat& gram, const Vec& rhs, const std::vector<int>& active,
                 double ridge) {
  const int a = static_cast<int>(active.size());
  Mat G(a, a);
  Vec c(a);
  for (int r = 0; r < a; ++r) {
    c[r] = rhs[active[static_cast<size_t>(r)]];
    for (int s = 0; s < a; ++s)
      G(r, s) = gram(active[static_cast<size_t>(r)], active[static_cast<size_t>(s)]);
  }
  return solve_ridge(G, c, ridge);
}

}  // namespace

namespace {

// Core STLSQ over precomputed normal equations (shared by both entry points;
// the block accumulation order of the callers keeps results deterministic).
SparseLinearModel stlsq_from_gram(const Mat& gram_in, const Mat& cross_in,
                                  Eigen::Index N,
                                  const std::vector<std::string>& names,
                                  const StlsqOptions& options) {
  const int p = static_cast<int>(gram_in.rows());
  const int m = static_cast<int>(cross_in.cols());
  const Mat& gram = gram_in;
  const Mat& cross = cross_in;

  // Column scales: unit RMS in the solver space. Degenerate (all-zero)
  // columns are excluded from every active set. The bias keeps scale 1.
  Vec scale = Vec::Ones(p);
  std::vector<bool> degenerate(static_cast<size_t>(p), false);
  for (int j = 0; j < p; ++j) {
    const double rms = std::sqrt(std::max(0.0, gram(j, j)) / static_cast<double>(N));
    if (rms < 1e-12) {
      degenerate[static_cast<size_t>(j)] = true;
      scale[j] = 1.0;
    } else if (options.standardize && j != 0) {
      scale[j] = rms;
    }
  }
  Mat gram_s = gram;
  Mat cross_s = cross;
  for (int r = 0; r < p; ++r) {
    gram_s.row(r) /= scale[r];
    cross_s.row(r) /= scale[r];
  }
  for (int c = 0; c < p; ++c) gram_s.col(c) /= scale[c];

  std::vector<int> full_active;
  for (int j = 0; j < p; ++j)
    if (!degenerate[static_cast<size_t>(j)]) full_active.push_back(j);

  SparseLinearModel model;
  model.options = options;
  model.feature_names = names;
  model.column_scale = scale;
  model.W_scaled = Mat::Zero(m, p);

  // Round 0 shares one decomposition across outputs (identical active sets).
  Mat G0(static_cast<int>(full_active.size()), static_cast<int>(full_active.size()));
  Mat C0(static_cast<int>(full_active.size()), m);
  for (size_t r = 0; r < full_active.size(); ++r) {
    C0.row(static_cast<int>(r)) = cross_s.row(full_active[r]);
    for (size_t s = 0; s < full_active.size(); ++s)
      G0(static_cast<int>(r), static_cast<int>(s)) = gram_s(full_active[r], full_active[s]);
  }
  const Mat W0 = solve_ridge(G0, C0, options.ridge);

  for (int out = 0; out < m; ++out) {
    std::vector<int> active = full_active;
    Vec w = W0.col(out);
    for (int iter = 0; iter < options.max_iter; ++iter) {
      // Thresholding only ever removes columns.
      std::vector<int> kept;
      kept.reserve(active.size());
      for (size_t i = 0; i < active.size(); ++i)
        if (std::abs(w[static_cast<Eigen::Index>(i)]) >= options.threshold)
          kept.push_back(active[i]);
      if (kept.size() == active.size()) break;
      active = std::move(kept);
      if (active.empty()) break;
      w = solve_active(gram_s, cross_s.col(out), active, options.ridge);
    }
    if (active.empty()) {
      model.sparsity_warning = true;
      continue;
    }
    // Guard the invariant when max_iter ends mid-flight.
    for (size_t i = 0; i < active.size(); ++i) {
      const double wi = w[static_cast<Eigen::Index>(i)];
      if (std::abs(wi) >= options.threshold)
        model.W_scaled(out, active[i]) = wi;
    }
  }

  model.W = model.W_scaled;
  for (int j = 0; j < p; ++j) model.W.col(j) /= scale[j];
  model.b = model.W.col(0);
  return model;
}

}  // namespace

SparseLinearModel stlsq_expanded(const Mat& theta,
                                 const std::vector<std::string>& names,
                                 const Eigen::Ref<const Mat>& Y,
                                 const StlsqOptions& options) {
  options.validate();
  const Eigen::Index N = theta.rows();
  const int p = static_cast<int>(theta.cols());
  const int m = static_cast<int>(Y.cols());
  if (Y.rows() != N) throw ConfigError("stlsq: X/Y row mismatch");
  if (N < 1) throw ConfigError("stlsq: empty data");
  if (!theta.allFinite() || !Y.allFinite())
    throw NumericError("stlsq: non-finite data");

  Mat gram = Mat::Zero(p, p);
  Mat cross = Mat::Zero(p, m);
  constexpr Eigen::Index kBlock = 8192;
  for (Eigen::Index start = 0; start < N; start += kBlock) {
    const Eigen::Index len = std::min(kBlock, N - start);
    const auto block = theta.middleRows(start, len);
    gram.selfadjointView<Eigen::Lower>().rankUpdate(block.transpose(), 1.0);
    cross.noalias() += block.transpose() * Y.middleRows(start, len);
  }
  gram.triangularView<Eigen::Upper>() = gram.transpose();
  return stlsq_from_gram(gram, cross, N, names, options);
}

SparseLinearModel stlsq(const PolyLibrary& library, const Eigen::Ref<const Mat>& X,
                        const Eigen::Ref<const Mat>& Y, const StlsqOptions& options) {
  // Expand row blocks on the fly; the full Theta for a large dataset would
  // dwarf the Gram matrix it feeds.
  options.validate();
  const Eigen::Index N = X.rows();
  const int p = library.size();
  const int m = static_cast<int>(Y.cols());
  if (Y.rows() != N) throw ConfigError("stlsq: X/Y row mismatch");
  if (N < 1) throw ConfigError("stlsq: empty data");
  if (!X.allFinite() || !Y.allFinite()) throw NumericError("stlsq: non-finite data");

  Mat gram = Mat::Zero(p, p);
  Mat cross = Mat::Zero(p, m);
  constexpr Eigen::Index kBlock = 8192;
  for (Eigen::Index start = 0; start < N; start += kBlock) {
    const Eigen::Index len = std::min(kBlock, N - start);
    const Mat theta = library.expand(X.middleRows(start, len));
    gram.selfadjointView<Eigen::Lower>().rankUpdate(theta.transpose(), 1.0);
    cross.noalias() += theta.transpose() * Y.middleRows(start, len);
  }
  gram.triangularView<Eigen::Upper>() = gram.transpose();
  return stlsq_from_gram(gram, cross, N, library.names(), options);
}

Mat SparseLinearModel::predict(const PolyLibrary& library,
                               const Eigen::Ref<const Mat>& X) const {
  if (library.size() != W.cols())
    throw ConfigError("sparse model: library size mismatch");
  // Blockwise expansion; the full Theta for a long dataset would be orders of
  // magnitude larger than anything else in the pipeline.
  Mat out(X.rows(), W.rows());
  constexpr Eigen::Index kBlock = 8192;
  for (Eigen::Index start = 0; start < X.rows(); start += kBlock) {
    const Eigen::Index len = std::min(kBlock, X.rows() - start);
    out.middleRows(start, len).noalias() =
        library.expand(X.middleRows(start, len)) * W.transpose();
  }
  return out;
}

std::vector<ActiveTerm> active_terms(const SparseLinearModel& model, int output) {
  if (output < 0 || output >= model.W.rows())
    throw ConfigError("active_terms: output index out of range");
  std::vector<ActiveTerm> terms;
  for (int j = 0; j < model.W.cols(); ++j) {
    const double w = model.W(output, j);
    if (w != 0.0)
      terms.push_back({model.feature_names[static_cast<size_t>(j)], w, j});
  }
  std::sort(terms.begin(), terms.end(), [](const ActiveTerm& a, const ActiveTerm& b) {
    if (std::abs(a.coefficient) != std::abs(b.coefficient))
      return std::abs(a.coefficient) > std::abs(b.coefficient);
    return a.column < b.column;
  });
  return terms;
}

std::string sparse_model_to_json(const SparseLinearModel& model) {
  json doc;
  doc["type"] = "sparse_linear";
  doc["outputs"] = model.W.rows();
  doc["library"] = model.feature_names;
  doc["options"] = {{"threshold", model.options.threshold},
                    {"ridge", model.options.ridge},
                    {"max_iter", model.options.max_iter},
                    {"standardize", model.options.standardize}};
  json triplets = json::array();
  for (int i = 0; i < model.W.rows(); ++i)
    for (int j = 0; j < model.W.cols(); ++j)
      if (model.W(i, j) != 0.0)
        triplets.push_back({i, j, model.W(i, j), model.W_scaled(i, j)});
  doc["coefficients"] = triplets;
  doc["bias"] = std::vector<double>(model.b.data(), model.b.data() + model.b.size());
  doc["column_scale"] = std::vector<double>(
      model.column_scale.data(), model.column_scale.data() + model.column_scale.size());
  doc["sparsity_warning"] = model.sparsity_warning;
  return doc.dump(2);
}

SparseLinearModel sparse_model_from_json(const std::string& text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::exception& e) {
    throw DataError(std::string("sparse model: invalid JSON: ") + e.what());
  }
  if (doc.value("type", "") != "sparse_linear")
    throw DataError("sparse model: wrong type tag");

  SparseLinearModel model;
  model.feature_names = doc["library"].get<std::vector<std::string>>();
  const int m = doc["outputs"].get<int>();
  const int p = static_cast<int>(model.feature_names.size());
  model.W = Mat::Zero(m, p);
  model.W_scaled = Mat::Zero(m, p);
  for (const auto& t : doc["coefficients"]) {
    model.W(t[0].get<int>(), t[1].get<int>()) = t[2].get<double>();
    model.W_scaled(t[0].get<int>(), t[1].get<int>()) = t[3].get<double>();
  }
  const auto bias = doc["bias"].get<std::vector<double>>();
  model.b = Eigen::Map<const Vec>(bias.data(), static_cast<Eigen::Index>(bias.size()));
  const auto scale = doc["column_scale"].get<std::vector<double>>();
  model.column_scale =
      Eigen::Map<const Vec>(scale.data(), static_cast<Eigen::Index>(scale.size()));
  model.options.threshold = doc["options"]["threshold"].get<double>();
  model.options.ridge = doc["options"]["ridge"].get<double>();
  model.options.max_iter = doc["options"]["max_iter"].get<int>();
  model.options.standardize = doc["options"]["standardize"].get<bool>();
  model.sparsity_warning = doc["sparsity_warning"].get<bool>();
  return model;
}

}  // namespace residyn
