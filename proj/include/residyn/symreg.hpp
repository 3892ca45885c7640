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

#ifndef RESIDYN_SYMREG_HPP_
#define RESIDYN_SYMREG_HPP_

#include <map>
#include <string>
#include <vector>

#include "residyn/common.hpp"

namespace residyn {

enum class ExprOp : std::uint8_t { kAdd, kSub, kMul };

struct ExprNode {
  enum Kind : std::uint8_t { kConst, kVar, kBinary };
  Kind kind = kConst;
  ExprOp op = ExprOp::kAdd;  // valid when kind == kBinary
  int var = 0;               // valid when kind == kVar
  double value = 0.0;        // valid when kind == kConst
};

// Expression tree over {+, -, *}, variables, and real constants, stored as a
// postfix node sequence (value semantics, cheap subtree splicing for the
// genetic operators). Complexity is the node count.
class Expression {
 public:
  Expression() = default;

  static Expression constant(double value);
  static Expression variable(int index);
  static Expression binary(ExprOp op, const Expression& lhs, const Expression& rhs);

  const std::vector<ExprNode>& nodes() const { return nodes_; }
  std::vector<ExprNode>& nodes() { return nodes_; }
  bool empty() const { return nodes_.empty(); }
  int complexity() const { return static_cast<int>(nodes_.size()); }
  int depth() const;
  int max_var_index() const;

  // All constants therein, in postfix order.
  std::vector<double> constants() const;

  bool operator==(const Expression& other) const;

 private:
  std::vector<ExprNode> nodes_;
};

// Rowwise evaluation; rows with a non-finite intermediate evaluate to +inf
// (the sentinel that forces infinite fitness).
Vec evaluate(const Expression& expr, const Eigen::Ref<const Mat>& X);

// Mean squared error against y; +inf when any row hits the sentinel.
double evaluate_mse(const Expression& expr, const Eigen::Ref<const Mat>& X,
                    const Vec& y);

struct SymRegConfig {
  int population = 500;
  int generations = 200;
  int tournament = 7;
  double crossover_prob = 0.7;
  double point_mutation_prob = 0.2;
  double constant_perturb_prob = 0.3;
  double hoist_prob = 0.05;
  int max_complexity = 30;
  int max_depth = 12;
  double parsimony = 1e-3;          // complexity pressure in tournament fitness
  Eigen::Index batch_size = 10000;  // rows per fitness batch
  std::uint64_t seed = 0;
  int restarts = 4;
  int threads = 0;  // 0 = hardware concurrency

  void validate() const;
};

struct FrontEntry {
  int complexity = 0;
  double mse = 0.0;
  Expression expr;
};

// Best expression per complexity level, kept monotone: an entry survives only
// while no simpler entry matches or beats its full-data MSE.
class ParetoFront {
 public:
  void insert(const Expression& expr, double full_mse);
  void merge(const ParetoFront& other);
  bool empty() const { return by_complexity_.empty(); }

  // Monotone view, ascending complexity, strictly decreasing MSE.
  std::vector<FrontEntry> entries() const;
  double best_mse() const;

 private:
  std::map<int, FrontEntry> by_complexity_;
};

// Evolutionary search; deterministic for a fixed seed independent of the
// thread count. Restarts run independent populations and merge their fronts.
ParetoFront fit_symbolic(const Eigen::Ref<const Mat>& X, const Vec& y,
                         const SymRegConfig& cfg);

// Largest marginal log-MSE drop per unit of added complexity; ties toward
// lower complexity. A single-entry front returns that entry.
Expression select_model(const ParetoFront& front);

// Constant folding, identity elimination (x+0, x*1, x*0, x-x), and
// constant-commuting canonicalization. Preserves evaluation semantics.
Expression simplify(const Expression& expr);

// Final polish of the selected expression: closed-form least-squares refit of
// the constants that enter linearly (top-level additive/multiplicative
// coefficients), then coordinate-wise golden-section search for the rest.
Expression refine_constants(const Expression& expr, const Eigen::Ref<const Mat>& X,
                            const Vec& y, int golden_iterations = 50);

// Deterministic infix rendering against the feature-name registry, e.g.
// "tau_i1 + tau_c1 + 6.721*qd1". render(parse(render(e))) == render(e).
std::string render(const Expression& expr, const std::vector<std::string>& registry);

Expression parse_expression(const std::string& text,
                            const std::vector<std::string>& registry);

std::string expression_to_json(const Expression& expr,
                               const std::vector<std::string>& registry);
Expression expression_from_json(const std::string& text,
                                const std::vector<std::string>& registry);

}  // namespace residyn

#endif  // RESIDYN_SYMREG_HPP_
