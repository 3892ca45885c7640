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

#ifndef RESIDYN_SPARSEREG_HPP_
#define RESIDYN_SPARSEREG_HPP_

#include <string>
#include <vector>

#include "residyn/common.hpp"

namespace residyn {

// Degree-2 polynomial feature library over d inputs: bias, the d linear
// terms, then all squares and pairwise products in (i <= j) order.
// p = 1 + d + d(d+1)/2 columns, with a deterministic name registry.
class PolyLibrary {
 public:
  explicit PolyLibrary(int input_dim,
                       std::vector<std::string> input_names = {});

  int input_dim() const { return d_; }
  int size() const { return p_; }
  const std::vector<std::string>& names() const { return names_; }
  const std::vector<std::string>& input_names() const { return input_names_; }

  // Monomial exponents of column c as (first index, second index); -1 unused.
  // Column 0 is the bias.
  std::pair<int, int> term(int c) const { return terms_[static_cast<size_t>(c)]; }

  Mat expand(const Eigen::Ref<const Mat>& X) const;

 private:
  int d_;
  int p_;
  std::vector<std::string> input_names_;
  std::vector<std::string> names_;
  std::vector<std::pair<int, int>> terms_;
};

struct StlsqOptions {
  double threshold = 0.01;  // sparsity threshold (applied in solver scale)
  double ridge = 1e-4;      // L2 regularization strength
  int max_iter = 100;
  bool standardize = true;  // scale library columns to unit RMS before solving

  void validate() const;
};

// W Theta(x) with the bias column folded into W; b is the bias coefficient
// reported separately. After fitting, every surviving coefficient satisfies
// |w| >= threshold in the solver's working scale.
struct SparseLinearModel {
  Mat W;                  // m x p, original units
  Vec b;                  // m, equal to W.col(0)
  Mat W_scaled;           // m x p, solver scale (thresholding space)
  Vec column_scale;       // p, RMS used for standardization (1 when disabled)
  StlsqOptions options;
  std::vector<std::string> feature_names;
  bool sparsity_warning = false;  // an output lost every term

  Mat predict(const PolyLibrary& library, const Eigen::Ref<const Mat>& X) const;
};

// Sequentially thresholded least squares with ridge regularization, fitted
// jointly for all output columns over a shared Gram matrix.
SparseLinearModel stlsq(const PolyLibrary& library, const Eigen::Ref<const Mat>& X,
                        const Eigen::Ref<const Mat>& Y, const StlsqOptions& options);

// Same, but over an already-expanded feature matrix Theta.
SparseLinearModel stlsq_expanded(const Mat& theta,
                                 const std::vector<std::string>& names,
                                 const Eigen::Ref<const Mat>& Y,
                                 const StlsqOptions& options);

struct ActiveTerm {
  std::string name;
  double coefficient;
  int column;
};

// Nonzero terms of one output, sorted by |coefficient| descending.
// The bias column is included only when nonzero.
std::vector<ActiveTerm> active_terms(const SparseLinearModel& model, int output);

std::string sparse_model_to_json(const SparseLinearModel& model);
SparseLinearModel sparse_model_from_json(const std::string& text);

}  // namespace residyn

#endif  // RESIDYN_SPARSEREG_HPP_
