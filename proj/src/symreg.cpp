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

#include "residyn/symreg.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstring>
#include <future>
#include <limits>
#include <thread>

#include <json.hpp>

#include "residyn/csv.hpp"

namespace residyn {

using json = nlohmann::ordered_json;

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

int arity(const ExprNode& n) { return n.kind == ExprNode::kBinary ? 2 : 0; }

// First index of the subtree whose root sits at `end` in postfix order.
size_t subtree_start(const std::vector<ExprNode>& nodes, size_t end) {
  int need = 1;
  size_t j = end + 1;
  while (need > 0) {
    --j;
    need -= 1;
    need += arity(nodes[j]);
  }
  return j;
}

double apply_op(ExprOp op, double a, double b) {
  switch (op) {
    case ExprOp::kAdd: return a + b;
    case ExprOp::kSub: return a - b;
    case ExprOp::kMul: return a * b;
  }
  return 0.0;
}

}  // namespace

Expression Expression::constant(double value) {
  Expression e;
  ExprNode n;
  n.kind = ExprNode::kConst;
  n.value = value;
  e.nodes_.push_back(n);
  return e;
}

Expression Expression::variable(int index) {
  if (index < 0) throw ConfigError("expression: negative variable index");
  Expression e;
  ExprNode n;
  n.kind = ExprNode::kVar;
  n.var = index;
  e.nodes_.push_back(n);
  return e;
}

Expression Expression::binary(ExprOp op, const Expression& lhs, const Expression& rhs) {
  if (lhs.empty() || rhs.empty()) throw ConfigError("expression: empty operand");
  Expression e;
  e.nodes_.reserve(lhs.nodes_.size() + rhs.nodes_.size() + 1);
  e.nodes_.insert(e.nodes_.end(), lhs.nodes_.begin(), lhs.nodes_.end());
  e.nodes_.insert(e.nodes_.end(), rhs.nodes_.begin(), rhs.nodes_.end());
  ExprNode n;
  n.kind = ExprNode::kBinary;
  n.op = op;
  e.nodes_.push_back(n);
  return e;
}

int Expression::depth() const {
  std::vector<int> stack;
  for (const ExprNode& n : nodes_) {
    if (n.kind == ExprNode::kBinary) {
      const int r = stack.back();
      stack.pop_back();
      const int l = stack.back();
      stack.pop_back();
      stack.push_back(1 + std::max(l, r));
    } else {
      stack.push_back(1);
    }
  }
  return stack.empty() ? 0 : stack.back();
}

int Expression::max_var_index() const {
  int m = -1;
  for (const ExprNode& n : nodes_)
    if (n.kind == ExprNode::kVar) m = std::max(m, n.var);
  return m;
}

std::vector<double> Expression::constants() const {
  std::vector<double> out;
  for (const ExprNode& n : nodes_)
    if (n.kind == ExprNode::kConst) out.push_back(n.value);
  return out;
}

bool Expression::operator==(const Expression& other) const {
  if (nodes_.size() != other.nodes_.size()) return false;
  for (size_t i = 0; i < nodes_.size(); ++i) {
    const ExprNode& a = nodes_[i];
    const ExprNode& b = other.nodes_[i];
    if (a.kind != b.kind) return false;
    if (a.kind == ExprNode::kBinary && a.op != b.op) return false;
    if (a.kind == ExprNode::kVar && a.var != b.var) return false;
    if (a.kind == ExprNode::kConst && a.value != b.value) return false;
  }
  return true;
}

// ---------------------------------------------------------------------------
// Evaluation

namespace {

constexpr Eigen::Index kBlock = 512;

// Evaluates one row block into `out` (length len). Stack buffers are reused
// across blocks by the caller.
void eval_block(const std::vector<ExprNode>& nodes, const Eigen::Ref<const Mat>& X,
                Eigen::Index start, Eigen::Index len,
                std::vector<std::vector<double>>& stack, double* out) {
  int top = 0;
  for (const ExprNode& n : nodes) {
    switch (n.kind) {
      case ExprNode::kConst: {
        double* buf = stack[static_cast<size_t>(top++)].data();
        for (Eigen::Index r = 0; r < len; ++r) buf[r] = n.value;
        break;
      }
      case ExprNode::kVar: {
        double* buf = stack[static_cast<size_t>(top++)].data();
        const double* col = X.col(n.var).data() + start;
        for (Eigen::Index r = 0; r < len; ++r) buf[r] = col[r];
        break;
      }
      case ExprNode::kBinary: {
        double* a = stack[static_cast<size_t>(top - 2)].data();
        const double* b = stack[static_cast<size_t>(top - 1)].data();
        --top;
        switch (n.op) {
          case ExprOp::kAdd:
            for (Eigen::Index r = 0; r < len; ++r) a[r] += b[r];
            break;
          case ExprOp::kSub:
            for (Eigen::Index r = 0; r < len; ++r) a[r] -= b[r];
            break;
          case ExprOp::kMul:
            for (Eigen::Index r = 0; r < len; ++r) a[r] *= b[r];
            break;
        }
        break;
      }
    }
  }
  const double* res = stack[0].data();
  for (Eigen::Index r = 0; r < len; ++r) out[r] = res[r];
}

int stack_need(const std::vector<ExprNode>& nodes) {
  int depth = 0, peak = 0;
  for (const ExprNode& n : nodes) {
    depth += 1 - arity(n);
    peak = std::max(peak, depth);
  }
  return peak;
}

void check_vars(const Expression& expr, Eigen::Index cols) {
  if (expr.empty()) throw ConfigError("expression: empty");
  if (expr.max_var_index() >= cols)
    throw ConfigError("expression: variable index " +
                      std::to_string(expr.max_var_index()) +
                      " out of range for " + std::to_string(cols) + " features");
}

}  // namespace

Vec evaluate(const Expression& expr, const Eigen::Ref<const Mat>& X) {
  check_vars(expr, X.cols());
  const Eigen::Index N = X.rows();
  Vec out(N);
  std::vector<std::vector<double>> stack(
      static_cast<size_t>(stack_need(expr.nodes())),
      std::vector<double>(static_cast<size_t>(kBlock)));
  for (Eigen::Index start = 0; start < N; start += kBlock) {
    const Eigen::Index len = std::min(kBlock, N - start);
    eval_block(expr.nodes(), X, start, len, stack, out.data() + start);
  }
  for (Eigen::Index r = 0; r < N; ++r)
    if (!std::isfinite(out[r])) out[r] = kInf;
  return out;
}

double evaluate_mse(const Expression& expr, const Eigen::Ref<const Mat>& X,
                    const Vec& y) {
  check_vars(expr, X.cols());
  if (X.rows() != y.size()) throw ConfigError("evaluate_mse: X/y row mismatch");
  const Eigen::Index N = X.rows();
  if (N == 0) return 0.0;
  std::vector<std::vector<double>> stack(
      static_cast<size_t>(stack_need(expr.nodes())),
      std::vector<double>(static_cast<size_t>(kBlock)));
  std::vector<double> buf(static_cast<size_t>(kBlock));
  double acc = 0.0;
  for (Eigen::Index start = 0; start < N; start += kBlock) {
    const Eigen::Index len = std::min(kBlock, N - start);
    eval_block(expr.nodes(), X, start, len, stack, buf.data());
    for (Eigen::Index r = 0; r < len; ++r) {
      const double d = buf[static_cast<size_t>(r)] - y[start + r];
      acc += d * d;
    }
    if (!std::isfinite(acc)) return kInf;
  }
  const double mse = acc / static_cast<double>(N);
  return std::isfinite(mse) ? mse : kInf;
}

// ---------------------------------------------------------------------------
// Simplification

namespace {

bool is_const(const Expression& e, double* value = nullptr) {
  if (e.complexity() != 1 || e.nodes()[0].kind != ExprNode::kConst) return false;
  if (value) *value = e.nodes()[0].value;
  return true;
}

Expression subexpr(const std::vector<ExprNode>& nodes, size_t start, size_t end) {
  Expression e;
  e.nodes().assign(nodes.begin() + static_cast<long>(start),
                   nodes.begin() + static_cast<long>(end) + 1);
  return e;
}

Expression simplify_combine(ExprOp op, const Expression& L, const Expression& R);
Expression simplify_sum(const std::vector<ExprNode>& nodes, size_t end);

Expression simplify_span(const std::vector<ExprNode>& nodes, size_t end) {
  const ExprNode& root = nodes[end];
  if (root.kind != ExprNode::kBinary) return subexpr(nodes, end, end);
  if (root.op == ExprOp::kAdd || root.op == ExprOp::kSub)
    return simplify_sum(nodes, end);
  const size_t rstart = subtree_start(nodes, end - 1);
  Expression R = simplify_span(nodes, end - 1);
  Expression L = simplify_span(nodes, rstart - 1);
  return simplify_combine(root.op, L, R);
}

struct SumTerm {
  Expression expr;  // raw subtree, simplified lazily by the caller
  double sign;
};

void collect_sum_terms(const std::vector<ExprNode>& nodes, size_t end, double sign,
                       std::vector<SumTerm>& out) {
  const ExprNode& root = nodes[end];
  if (root.kind == ExprNode::kBinary &&
      (root.op == ExprOp::kAdd || root.op == ExprOp::kSub)) {
    const size_t rstart = subtree_start(nodes, end - 1);
    collect_sum_terms(nodes, rstart - 1, sign, out);
    collect_sum_terms(nodes, end - 1, root.op == ExprOp::kSub ? -sign : sign, out);
    return;
  }
  out.push_back({subexpr(nodes, subtree_start(nodes, end), end), sign});
}

std::string structural_key(const Expression& e) {
  std::string key;
  key.reserve(e.nodes().size() * 12);
  for (const ExprNode& n : e.nodes()) {
    key.push_back(static_cast<char>('0' + n.kind));
    if (n.kind == ExprNode::kBinary) key.push_back(static_cast<char>('a' + static_cast<int>(n.op)));
    if (n.kind == ExprNode::kVar) key += std::to_string(n.var);
    if (n.kind == ExprNode::kConst) {
      std::uint64_t bits;
      std::memcpy(&bits, &n.value, sizeof(bits));
      key += std::to_string(bits);
    }
    key.push_back('|');
  }
  return key;
}

// Flattens the additive chain, simplifies each term, and collects like terms:
// x + x -> 2*x, c1*f + c2*f -> (c1+c2)*f, constants merge into one trailing
// term. Order follows first appearance.
Expression simplify_sum(const std::vector<ExprNode>& nodes, size_t end) {
  std::vector<SumTerm> raw;
  collect_sum_terms(nodes, end, 1.0, raw);

  struct Bucket {
    Expression core;  // empty for the constant bucket
    double coefficient = 0.0;
  };
  std::vector<Bucket> buckets;
  std::vector<std::string> keys;
  double constant = 0.0;

  for (const SumTerm& term : raw) {
    Expression t = simplify_span(term.expr.nodes(), term.expr.nodes().size() - 1);
    double value = 0.0;
    if (is_const(t, &value)) {
      constant += term.sign * value;
      continue;
    }
    // Split a leading constant coefficient (const-left after simplification).
    double coef = term.sign;
    Expression core = t;
    const ExprNode& troot = t.nodes().back();
    if (troot.kind == ExprNode::kBinary && troot.op == ExprOp::kMul) {
      const size_t rstart = subtree_start(t.nodes(), t.nodes().size() - 2);
      Expression left = subexpr(t.nodes(), 0, rstart - 1);
      double c = 0.0;
      if (is_const(left, &c)) {
        coef = term.sign * c;
        core = subexpr(t.nodes(), rstart, t.nodes().size() - 2);
      }
    }
    const std::string key = structural_key(core);
    bool found = false;
    for (size_t i = 0; i < keys.size(); ++i) {
      if (keys[i] == key) {
        buckets[i].coefficient += coef;
        found = true;
        break;
      }
    }
    if (!found) {
      keys.push_back(key);
      buckets.push_back({std::move(core), coef});
    }
  }

  Expression acc;
  bool constant_pending = constant != 0.0;
  // A leading negative bucket reads better (and stays smaller) hanging off
  // the constant than off a synthetic zero.
  if (constant_pending && (buckets.empty() || buckets.front().coefficient < 0.0)) {
    acc = Expression::constant(constant);
    constant_pending = false;
  }
  for (const Bucket& bucket : buckets) {
    if (bucket.coefficient == 0.0) continue;
    const double magnitude = std::abs(bucket.coefficient);
    Expression piece =
        magnitude == 1.0
            ? bucket.core
            : simplify_combine(ExprOp::kMul, Expression::constant(magnitude),
                               bucket.core);
    if (acc.empty()) {
      if (bucket.coefficient < 0.0) {
        piece = bucket.coefficient == -1.0
                    ? Expression::binary(ExprOp::kSub, Expression::constant(0.0),
                                         bucket.core)
                    : simplify_combine(ExprOp::kMul,
                                       Expression::constant(bucket.coefficient),
                                       bucket.core);
      }
      acc = piece;
    } else {
      acc = Expression::binary(bucket.coefficient < 0.0 ? ExprOp::kSub : ExprOp::kAdd,
                               acc, piece);
    }
  }
  if (acc.empty()) return Expression::constant(constant);
  if (constant_pending) {
    if (constant < 0.0)
      return Expression::binary(ExprOp::kSub, acc, Expression::constant(-constant));
    return Expression::binary(ExprOp::kAdd, acc, Expression::constant(constant));
  }
  return acc;
}

Expression simplify_combine(ExprOp op, const Expression& L, const Expression& R) {
  double lc = 0.0, rc = 0.0;
  const bool lconst = is_const(L, &lc);
  const bool rconst = is_const(R, &rc);

  // Constant folding (kept symbolic if it would overflow).
  if (lconst && rconst) {
    const double v = apply_op(op, lc, rc);
    if (std::isfinite(v)) return Expression::constant(v);
  }

  switch (op) {
    case ExprOp::kAdd:
      if (lconst && lc == 0.0) return R;
      if (rconst && rc == 0.0) return L;
      // Commute the constant rightward, merging across nested sums.
      if (lconst) return simplify_combine(ExprOp::kAdd, R, L);
      if (rconst && L.complexity() >= 3) {
        const ExprNode& lroot = L.nodes().back();
        if (lroot.kind == ExprNode::kBinary && lroot.op == ExprOp::kAdd) {
          const size_t lr_start = subtree_start(L.nodes(), L.nodes().size() - 2);
          Expression Lr = subexpr(L.nodes(), lr_start, L.nodes().size() - 2);
          double nested = 0.0;
          if (is_const(Lr, &nested)) {
            Expression Ll = subexpr(L.nodes(), 0, lr_start - 1);
            const double v = nested + rc;
            if (std::isfinite(v))
              return simplify_combine(ExprOp::kAdd, Ll, Expression::constant(v));
          }
        }
      }
      break;
    case ExprOp::kSub:
      if (rconst && rc == 0.0) return L;
      if (L == R) return Expression::constant(0.0);
      break;
    case ExprOp::kMul:
      if ((lconst && lc == 0.0) || (rconst && rc == 0.0))
        return Expression::constant(0.0);
      if (lconst && lc == 1.0) return R;
      if (rconst && rc == 1.0) return L;
      // Commute the constant leftward, merging across nested products.
      if (rconst) return simplify_combine(ExprOp::kMul, R, L);
      if (lconst && R.complexity() >= 3) {
        const ExprNode& rroot = R.nodes().back();
        if (rroot.kind == ExprNode::kBinary && rroot.op == ExprOp::kMul) {
          const size_t rr_start = subtree_start(R.nodes(), R.nodes().size() - 2);
          Expression Rl = subexpr(R.nodes(), 0, rr_start - 1);
          double nested = 0.0;
          if (is_const(Rl, &nested)) {
            Expression Rr = subexpr(R.nodes(), rr_start, R.nodes().size() - 2);
            const double v = lc * nested;
            if (std::isfinite(v))
              return simplify_combine(ExprOp::kMul, Expression::constant(v), Rr);
          }
        }
      }
      break;
  }
  return Expression::binary(op, L, R);
}

}  // namespace

Expression simplify(const Expression& expr) {
  if (expr.empty()) return expr;
  Expression out = simplify_span(expr.nodes(), expr.nodes().size() - 1);
  // Local rules cascade bottom-up; one extra pass reaches the fixpoint for
  // patterns exposed by the first.
  Expression again = simplify_span(out.nodes(), out.nodes().size() - 1);
  while (!(again == out)) {
    out = again;
    again = simplify_span(out.nodes(), out.nodes().size() - 1);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Rendering and parsing

namespace {

int precedence(const ExprNode& n) {
  if (n.kind != ExprNode::kBinary) return 3;
  return n.op == ExprOp::kMul ? 2 : 1;
}

std::string render_span(const std::vector<ExprNode>& nodes, size_t end,
                        const std::vector<std::string>& registry) {
  const ExprNode& root = nodes[end];
  if (root.kind == ExprNode::kConst) return format_double(root.value);
  if (root.kind == ExprNode::kVar) {
    if (root.var < 0 || static_cast<size_t>(root.var) >= registry.size())
      throw ConfigError("render: variable index " + std::to_string(root.var) +
                        " not covered by the registry");
    return registry[static_cast<size_t>(root.var)];
  }
  const size_t rstart = subtree_start(nodes, end - 1);
  const int my_prec = precedence(root);
  const ExprNode& lroot = nodes[rstart - 1];
  const ExprNode& rroot = nodes[end - 1];

  std::string left = render_span(nodes, rstart - 1, registry);
  std::string right = render_span(nodes, end - 1, registry);
  if (precedence(lroot) < my_prec) left = "(" + left + ")";
  if (precedence(rroot) < my_prec ||
      (precedence(rroot) == my_prec && root.op == ExprOp::kSub))
    right = "(" + right + ")";

  switch (root.op) {
    case ExprOp::kAdd: return left + " + " + right;
    case ExprOp::kSub: return left + " - " + right;
    case ExprOp::kMul: return left + "*" + right;
  }
  return "";
}

struct Parser {
  const std::string& text;
  const std::vector<std::string>& registry;
  size_t pos = 0;

  void skip_ws() {
    while (pos < text.size() && (text[pos] == ' ' || text[pos] == '\t')) ++pos;
  }

  bool eat(char c) {
    skip_ws();
    if (pos < text.size() && text[pos] == c) {
      ++pos;
      return true;
    }
    return false;
  }

  [[noreturn]] void fail(const std::string& what) {
    throw ConfigError("parse: " + what + " at position " + std::to_string(pos) +
                      " in '" + text + "'");
  }

  Expression parse_expression() {
    Expression e = parse_term();
    while (true) {
      skip_ws();
      if (eat('+')) {
        e = Expression::binary(ExprOp::kAdd, e, parse_term());
      } else if (eat('-')) {
        e = Expression::binary(ExprOp::kSub, e, parse_term());
      } else {
        return e;
      }
    }
  }

  Expression parse_term() {
    Expression e = parse_factor();
    while (true) {
      skip_ws();
      if (eat('*')) {
        e = Expression::binary(ExprOp::kMul, e, parse_factor());
      } else {
        return e;
      }
    }
  }

  Expression parse_factor() {
    skip_ws();
    if (pos >= text.size()) fail("unexpected end of input");
    const char c = text[pos];
    if (c == '(') {
      ++pos;
      Expression e = parse_expression();
      if (!eat(')')) fail("expected ')'");
      return e;
    }
    if (c == '-') {
      ++pos;
      Expression inner = parse_factor();
      double v = 0.0;
      if (is_const(inner, &v)) return Expression::constant(-v);
      return Expression::binary(ExprOp::kMul, Expression::constant(-1.0), inner);
    }
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') return parse_number();
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') return parse_ident();
    fail("unexpected character");
  }

  Expression parse_number() {
    size_t end = pos;
    while (end < text.size() &&
           (std::isdigit(static_cast<unsigned char>(text[end])) || text[end] == '.'))
      ++end;
    if (end < text.size() && (text[end] == 'e' || text[end] == 'E')) {
      size_t exp = end + 1;
      if (exp < text.size() && (text[exp] == '+' || text[exp] == '-')) ++exp;
      if (exp < text.size() && std::isdigit(static_cast<unsigned char>(text[exp]))) {
        end = exp;
        while (end < text.size() && std::isdigit(static_cast<unsigned char>(text[end])))
          ++end;
      }
    }
    double v = 0.0;
    auto res = std::from_chars(text.data() + pos, text.data() + end, v);
    if (res.ec != std::errc()) fail("bad number");
    pos = static_cast<size_t>(res.ptr - text.data());
    return Expression::constant(v);
  }

  Expression parse_ident() {
    size_t end = pos;
    while (end < text.size() &&
           (std::isalnum(static_cast<unsigned char>(text[end])) || text[end] == '_'))
      ++end;
    const std::string name = text.substr(pos, end - pos);
    pos = end;
    for (size_t i = 0; i < registry.size(); ++i)
      if (registry[i] == name) return Expression::variable(static_cast<int>(i));
    fail("unknown feature '" + name + "'");
  }
};

}  // namespace

std::string render(const Expression& expr, const std::vector<std::string>& registry) {
  if (expr.empty()) throw ConfigError("render: empty expression");
  return render_span(expr.nodes(), expr.nodes().size() - 1, registry);
}

Expression parse_expression(const std::string& text,
                            const std::vector<std::string>& registry) {
  Parser parser{text, registry};
  Expression e = parser.parse_expression();
  parser.skip_ws();
  if (parser.pos != text.size()) parser.fail("trailing input");
  return e;
}

// ---------------------------------------------------------------------------
// Pareto front and model selection

void ParetoFront::insert(const Expression& expr, double full_mse) {
  if (expr.empty() || !std::isfinite(full_mse)) return;
  const int c = expr.complexity();
  auto it = by_complexity_.find(c);
  if (it != by_complexity_.end() && it->second.mse <= full_mse) return;
  by_complexity_[c] = FrontEntry{c, full_mse, expr};
}

void ParetoFront::merge(const ParetoFront& other) {
  for (const auto& [c, entry] : other.by_complexity_) insert(entry.expr, entry.mse);
}

std::vector<FrontEntry> ParetoFront::entries() const {
  std::vector<FrontEntry> out;
  double best = kInf;
  for (const auto& [c, entry] : by_complexity_) {
    if (entry.mse < best) {
      out.push_back(entry);
      best = entry.mse;
    }
  }
  return out;
}

double ParetoFront::best_mse() const {
  double best = kInf;
  for (const auto& [c, entry] : by_complexity_) best = std::min(best, entry.mse);
  return best;
}

Expression select_model(const ParetoFront& front) {
  const std::vector<FrontEntry> entries = front.entries();
  if (entries.empty()) throw DataError("select_model: empty front");
  if (entries.size() == 1) return entries[0].expr;

  const auto log_mse = [](double mse) { return std::log(std::max(mse, 1e-300)); };
  size_t best = 1;
  double best_score = -kInf;
  for (size_t i = 1; i < entries.size(); ++i) {
    const double drop = log_mse(entries[i - 1].mse) - log_mse(entries[i].mse);
    const double score =
        drop / static_cast<double>(entries[i].complexity - entries[i - 1].complexity);
    // Strict improvement keeps ties at the lower complexity.
    if (score > best_score + 1e-12) {
      best_score = score;
      best = i;
    }
  }
  return entries[best].expr;
}

// ---------------------------------------------------------------------------
// Constant refinement

namespace {

struct AdditiveTerm {
  Expression expr;
  double sign = 1.0;
};

void collect_terms(const std::vector<ExprNode>& nodes, size_t end, double sign,
                   std::vector<AdditiveTerm>& out) {
  const ExprNode& root = nodes[end];
  if (root.kind == ExprNode::kBinary &&
      (root.op == ExprOp::kAdd || root.op == ExprOp::kSub)) {
    const size_t rstart = subtree_start(nodes, end - 1);
    collect_terms(nodes, rstart - 1, sign, out);
    collect_terms(nodes, end - 1, root.op == ExprOp::kSub ? -sign : sign, out);
    return;
  }
  out.push_back({subexpr(nodes, subtree_start(nodes, end), end), sign});
}

// Rebuilds the expression from refined terms, preserving the additive shape.
Expression rebuild_terms(const std::vector<AdditiveTerm>& terms) {
  Expression acc;
  for (const AdditiveTerm& t : terms) {
    if (acc.empty()) {
      acc = t.sign > 0 ? t.expr
                       : Expression::binary(ExprOp::kSub, Expression::constant(0.0),
                                            t.expr);
    } else {
      acc = Expression::binary(t.sign > 0 ? ExprOp::kAdd : ExprOp::kSub, acc, t.expr);
    }
  }
  return acc;
}

// Positions of every constant node, postfix order.
std::vector<size_t> constant_positions(const Expression& e) {
  std::vector<size_t> out;
  for (size_t i = 0; i < e.nodes().size(); ++i)
    if (e.nodes()[i].kind == ExprNode::kConst) out.push_back(i);
  return out;
}

double golden_section(const std::function<double(double)>& f, double lo, double hi,
                      int iterations) {
  const double phi = (std::sqrt(5.0) - 1.0) / 2.0;
  double a = lo, b = hi;
  double x1 = b - phi * (b - a), x2 = a + phi * (b - a);
  double f1 = f(x1), f2 = f(x2);
  for (int i = 0; i < iterations; ++i) {
    if (f1 <= f2) {
      b = x2;
      x2 = x1;
      f2 = f1;
      x1 = b - phi * (b - a);
      f1 = f(x1);
    } else {
      a = x1;
      x1 = x2;
      f1 = f2;
      x2 = a + phi * (b - a);
      f2 = f(x2);
    }
  }
  return f1 <= f2 ? x1 : x2;
}

}  // namespace

Expression refine_constants(const Expression& expr, const Eigen::Ref<const Mat>& X,
                            const Vec& y, int golden_iterations) {
  if (expr.empty()) return expr;
  check_vars(expr, X.cols());
  const Eigen::Index N = X.rows();

  std::vector<AdditiveTerm> terms;
  collect_terms(expr.nodes(), expr.nodes().size() - 1, 1.0, terms);

  // Linear parameters: a bare constant term, or the constant factor of a
  // top-level product. Everything else contributes a fixed offset.
  struct LinearParam {
    size_t term = 0;
    size_t const_pos = 0;  // node position inside the term expression
    Vec basis;
  };
  std::vector<LinearParam> params;
  Vec fixed = Vec::Zero(N);

  for (size_t t = 0; t < terms.size(); ++t) {
    const Expression& e = terms[t].expr;
    const auto& nodes = e.nodes();
    const double sign = terms[t].sign;
    if (nodes.size() == 1 && nodes[0].kind == ExprNode::kConst) {
      params.push_back({t, 0, Vec::Constant(N, sign)});
      continue;
    }
    const ExprNode& root = nodes.back();
    if (root.kind == ExprNode::kBinary && root.op == ExprOp::kMul) {
      const size_t rstart = subtree_start(nodes, nodes.size() - 2);
      const bool right_const =
          (rstart == nodes.size() - 2) && nodes[nodes.size() - 2].kind == ExprNode::kConst;
      const bool left_const =
          (rstart - 1 == 0) && nodes[0].kind == ExprNode::kConst;
      if (right_const) {
        Expression rest = subexpr(nodes, 0, rstart - 1);
        params.push_back({t, nodes.size() - 2, sign * evaluate(rest, X)});
        continue;
      }
      if (left_const) {
        Expression rest = subexpr(nodes, rstart, nodes.size() - 2);
        params.push_back({t, 0, sign * evaluate(rest, X)});
        continue;
      }
    }
    fixed += sign * evaluate(e, X);
  }

  std::vector<AdditiveTerm> refined = terms;
  if (!params.empty() && fixed.allFinite()) {
    Mat B(N, static_cast<Eigen::Index>(params.size()));
    bool usable = true;
    for (size_t c = 0; c < params.size(); ++c) {
      if (!params[c].basis.allFinite()) usable = false;
      B.col(static_cast<Eigen::Index>(c)) = params[c].basis;
    }
    if (usable) {
      const Vec target = y - fixed;
      const Vec theta = B.colPivHouseholderQr().solve(target);
      if (theta.allFinite()) {
        for (size_t c = 0; c < params.size(); ++c) {
          refined[params[c].term].expr.nodes()[params[c].const_pos].value =
              theta[static_cast<Eigen::Index>(c)];
        }
      }
    }
  }

  Expression out = rebuild_terms(refined);
  double best_mse = evaluate_mse(out, X, y);
  {
    const double original = evaluate_mse(expr, X, y);
    if (original < best_mse) {
      out = expr;
      best_mse = original;
    }
  }

  // Remaining constants (embedded below the top level) by golden section.
  const std::vector<size_t> positions =
      golden_iterations > 0 ? constant_positions(out) : std::vector<size_t>{};
  for (size_t pos : positions) {
    Expression trial = out;
    const double c0 = trial.nodes()[pos].value;
    const double span = 2.0 * std::abs(c0) + 1.0;
    const auto objective = [&](double c) {
      trial.nodes()[pos].value = c;
      return evaluate_mse(trial, X, y);
    };
    const double c_best = golden_section(objective, c0 - span, c0 + span,
                                         golden_iterations);
    trial.nodes()[pos].value = c_best;
    const double mse = evaluate_mse(trial, X, y);
    if (mse < best_mse) {
      out = trial;
      best_mse = mse;
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Evolution

void SymRegConfig::validate() const {
  if (population < 4) throw ConfigError("symreg: population must be >= 4");
  if (generations < 1) throw ConfigError("symreg: generations must be >= 1");
  if (tournament < 1) throw ConfigError("symreg: tournament must be >= 1");
  const auto prob = [](double p) { return p >= 0.0 && p <= 1.0; };
  if (!prob(crossover_prob) || !prob(point_mutation_prob) ||
      !prob(constant_perturb_prob) || !prob(hoist_prob))
    throw ConfigError("symreg: probabilities must lie in [0, 1]");
  if (max_complexity < 1) throw ConfigError("symreg: max_complexity must be >= 1");
  if (batch_size < 1) throw ConfigError("symreg: batch_size must be >= 1");
  if (restarts < 1) throw ConfigError("symreg: restarts must be >= 1");
}

namespace {

struct Individual {
  Expression expr;
  double batch_mse = kInf;
  double fitness = kInf;
};

Expression random_leaf(Rng& rng, int d) {
  if (rng.uniform01() < 0.7)
    return Expression::variable(static_cast<int>(rng.uniform_index(static_cast<std::uint64_t>(d))));
  return Expression::constant(rng.uniform(-2.0, 2.0));
}

ExprOp random_op(Rng& rng) {
  const double r = rng.uniform01();
  if (r < 1.0 / 3.0) return ExprOp::kAdd;
  if (r < 2.0 / 3.0) return ExprOp::kSub;
  return ExprOp::kMul;
}

Expression random_tree(Rng& rng, int d, int depth) {
  if (depth <= 1 || rng.uniform01() < 0.3) return random_leaf(rng, d);
  const ExprOp op = random_op(rng);
  Expression l = random_tree(rng, d, depth - 1);
  Expression r = random_tree(rng, d, depth - 1);
  return Expression::binary(op, l, r);
}

// Replaces the subtree rooted at index `at` with `replacement`.
Expression splice(const Expression& base, size_t at, const Expression& replacement) {
  const auto& nodes = base.nodes();
  const size_t start = subtree_start(nodes, at);
  Expression out;
  out.nodes().reserve(nodes.size() - (at - start + 1) + replacement.nodes().size());
  out.nodes().assign(nodes.begin(), nodes.begin() + static_cast<long>(start));
  out.nodes().insert(out.nodes().end(), replacement.nodes().begin(),
                     replacement.nodes().end());
  out.nodes().insert(out.nodes().end(), nodes.begin() + static_cast<long>(at) + 1,
                     nodes.end());
  return out;
}

Expression crossover(Rng& rng, const Expression& a, const Expression& b) {
  const size_t at = rng.uniform_index(a.nodes().size());
  const size_t from = rng.uniform_index(b.nodes().size());
  const size_t from_start = subtree_start(b.nodes(), from);
  Expression donor = subexpr(b.nodes(), from_start, from);
  return splice(a, at, donor);
}

Expression point_mutate(Rng& rng, const Expression& e, int d) {
  Expression out = e;
  const size_t at = rng.uniform_index(out.nodes().size());
  ExprNode& n = out.nodes()[at];
  if (n.kind == ExprNode::kBinary) {
    n.op = random_op(rng);
  } else {
    const Expression leaf = random_leaf(rng, d);
    n = leaf.nodes()[0];
  }
  return out;
}

Expression constant_mutate(Rng& rng, const Expression& e) {
  std::vector<size_t> positions;
  for (size_t i = 0; i < e.nodes().size(); ++i)
    if (e.nodes()[i].kind == ExprNode::kConst) positions.push_back(i);
  if (positions.empty()) return e;
  Expression out = e;
  ExprNode& n = out.nodes()[positions[rng.uniform_index(positions.size())]];
  if (rng.uniform01() < 0.15 || n.value == 0.0) {
    n.value = rng.uniform(-3.0, 3.0);
  } else {
    n.value *= std::exp(rng.gaussian(0.0, 0.1));
  }
  return out;
}

Expression hoist_mutate(Rng& rng, const Expression& e) {
  if (e.complexity() < 3) return e;
  const size_t outer = rng.uniform_index(e.nodes().size());
  const size_t outer_start = subtree_start(e.nodes(), outer);
  if (outer == outer_start) return e;
  const size_t inner =
      outer_start + rng.uniform_index(outer - outer_start + 1);
  const size_t inner_start = subtree_start(e.nodes(), inner);
  return splice(e, outer, subexpr(e.nodes(), inner_start, inner));
}

// Chunked deterministic parallel map over the population.
template <typename F>
void parallel_for(int n, int threads, F&& f) {
  if (threads <= 1 || n < 64) {
    for (int i = 0; i < n; ++i) f(i);
    return;
  }
  std::vector<std::future<void>> futures;
  const int chunk = (n + threads - 1) / threads;
  for (int t = 0; t < threads; ++t) {
    const int lo = t * chunk;
    const int hi = std::min(n, lo + chunk);
    if (lo >= hi) break;
    futures.push_back(std::async(std::launch::async, [lo, hi, &f] {
      for (int i = lo; i < hi; ++i) f(i);
    }));
  }
  for (auto& fu : futures) fu.get();
}

ParetoFront run_restart(const Eigen::Ref<const Mat>& X, const Vec& y,
                        const SymRegConfig& cfg, std::uint64_t restart_seed,
                        int threads) {
  const int d = static_cast<int>(X.cols());
  const Eigen::Index N = X.rows();
  const double y_mean = y.size() > 0 ? y.mean() : 0.0;

  std::vector<Individual> pop(static_cast<size_t>(cfg.population));
  for (int i = 0; i < cfg.population; ++i) {
    Rng rng(derive_seed(restart_seed, "init", static_cast<std::uint64_t>(i)));
    if (i < d) {
      pop[static_cast<size_t>(i)].expr = Expression::variable(i % d);
    } else if (i < 2 * d) {
      // Scaled single-variable terms so coefficient structure is reachable
      // from generation zero.
      pop[static_cast<size_t>(i)].expr = Expression::binary(
          ExprOp::kMul, Expression::constant(rng.uniform(-2.0, 2.0)),
          Expression::variable(i - d));
    } else if (i == 2 * d) {
      pop[static_cast<size_t>(i)].expr = Expression::constant(y_mean);
    } else {
      pop[static_cast<size_t>(i)].expr = random_tree(rng, d, 2 + i % 4);
    }
  }

  ParetoFront front;
  front.insert(Expression::constant(y_mean), evaluate_mse(Expression::constant(y_mean), X, y));

  Mat Xb;
  Vec yb;
  const bool batched = cfg.batch_size < N;

  for (int gen = 0; gen < cfg.generations; ++gen) {
    // Batch resampled every generation; admission uses full data.
    if (batched) {
      Rng rng(derive_seed(restart_seed, "batch", static_cast<std::uint64_t>(gen)));
      Xb.resize(cfg.batch_size, d);
      yb.resize(cfg.batch_size);
      for (Eigen::Index r = 0; r < cfg.batch_size; ++r) {
        const auto pick = static_cast<Eigen::Index>(
            rng.uniform_index(static_cast<std::uint64_t>(N)));
        Xb.row(r) = X.row(pick);
        yb[r] = y[pick];
      }
    }
    const Eigen::Ref<const Mat> Xeval =
        batched ? Eigen::Ref<const Mat>(Xb) : Eigen::Ref<const Mat>(X);
    const Vec& yeval = batched ? yb : y;

    parallel_for(cfg.population, threads, [&](int i) {
      Individual& ind = pop[static_cast<size_t>(i)];
      ind.batch_mse = evaluate_mse(ind.expr, Xeval, yeval);
      ind.fitness = ind.batch_mse * (1.0 + cfg.parsimony * ind.expr.complexity());
    });

    // Front admission: the best batch candidate per complexity level, and
    // only when its batch score beats everything the front already holds at
    // that complexity or below. Admitted candidates get a cheap linear
    // coefficient polish and are scored on the full data.
    std::vector<double> front_floor(static_cast<size_t>(cfg.max_complexity) + 1, kInf);
    {
      double running = kInf;
      const std::vector<FrontEntry> entries = front.entries();
      size_t at = 0;
      for (int c = 0; c <= cfg.max_complexity; ++c) {
        while (at < entries.size() && entries[at].complexity <= c)
          running = std::min(running, entries[at++].mse);
        front_floor[static_cast<size_t>(c)] = running;
      }
    }
    std::map<int, int> best_slot;
    for (int i = 0; i < cfg.population; ++i) {
      const Individual& ind = pop[static_cast<size_t>(i)];
      if (!std::isfinite(ind.batch_mse)) continue;
      const int c = ind.expr.complexity();
      if (c > cfg.max_complexity ||
          ind.batch_mse >= front_floor[static_cast<size_t>(c)])
        continue;
      auto it = best_slot.find(c);
      if (it == best_slot.end() ||
          ind.batch_mse < pop[static_cast<size_t>(it->second)].batch_mse)
        best_slot[c] = i;
    }
    for (const auto& [c, slot] : best_slot) {
      Expression candidate = simplify(pop[static_cast<size_t>(slot)].expr);
      if (candidate.empty() || candidate.complexity() > cfg.max_complexity) continue;
      candidate = refine_constants(candidate, X, y, /*golden_iterations=*/0);
      candidate = simplify(candidate);
      front.insert(candidate, evaluate_mse(candidate, X, y));
    }

    if (gen == cfg.generations - 1) break;

    // Breed the next generation; slot 0 carries the front's best expression.
    std::vector<Individual> next(static_cast<size_t>(cfg.population));
    const std::vector<FrontEntry> entries = front.entries();
    next[0].expr = entries.empty() ? pop[0].expr : entries.back().expr;

    const auto tournament = [&](Rng& rng) -> const Expression& {
      int best = static_cast<int>(rng.uniform_index(static_cast<std::uint64_t>(cfg.population)));
      for (int k = 1; k < cfg.tournament; ++k) {
        const int c = static_cast<int>(rng.uniform_index(static_cast<std::uint64_t>(cfg.population)));
        const Individual& ci = pop[static_cast<size_t>(c)];
        const Individual& bi = pop[static_cast<size_t>(best)];
        if (ci.fitness < bi.fitness ||
            (ci.fitness == bi.fitness &&
             ci.expr.complexity() < bi.expr.complexity()))
          best = c;
      }
      return pop[static_cast<size_t>(best)].expr;
    };

    for (int i = 1; i < cfg.population; ++i) {
      Rng rng(derive_seed(restart_seed, "breed",
                          (static_cast<std::uint64_t>(gen) << 24) ^
                              static_cast<std::uint64_t>(i)));
      Expression child;
      if (rng.uniform01() < cfg.crossover_prob) {
        const Expression& p1 = tournament(rng);
        const Expression& p2 = tournament(rng);
        child = crossover(rng, p1, p2);
        if (child.complexity() > cfg.max_complexity || child.depth() > cfg.max_depth)
          child = p1;
      } else {
        child = tournament(rng);
      }
      if (rng.uniform01() < cfg.point_mutation_prob) child = point_mutate(rng, child, d);
      if (rng.uniform01() < cfg.constant_perturb_prob) child = constant_mutate(rng, child);
      if (rng.uniform01() < cfg.hoist_prob) child = hoist_mutate(rng, child);
      if (child.complexity() > cfg.max_complexity || child.depth() > cfg.max_depth)
        child = random_leaf(rng, d);
      next[static_cast<size_t>(i)].expr = std::move(child);
    }
    pop = std::move(next);
  }
  return front;
}

}  // namespace

ParetoFront fit_symbolic(const Eigen::Ref<const Mat>& X, const Vec& y,
                         const SymRegConfig& cfg) {
  cfg.validate();
  if (X.rows() != y.size()) throw ConfigError("fit_symbolic: X/y row mismatch");
  if (X.rows() < 1) throw ConfigError("fit_symbolic: empty data");
  if (!y.allFinite() || !X.allFinite())
    throw NumericError("fit_symbolic: non-finite data");

  const int threads = cfg.threads > 0
                          ? cfg.threads
                          : static_cast<int>(std::thread::hardware_concurrency());

  // Restarts are independent; run them concurrently and merge in order.
  std::vector<std::future<ParetoFront>> futures;
  futures.reserve(static_cast<size_t>(cfg.restarts));
  const int inner_threads = std::max(1, threads / cfg.restarts);
  for (int r = 0; r < cfg.restarts; ++r) {
    const std::uint64_t restart_seed =
        derive_seed(cfg.seed, "restart", static_cast<std::uint64_t>(r));
    futures.push_back(std::async(std::launch::async, [&X, &y, &cfg, restart_seed,
                                                      inner_threads] {
      return run_restart(X, y, cfg, restart_seed, inner_threads);
    }));
  }
  ParetoFront merged;
  for (auto& f : futures) merged.merge(f.get());
  return merged;
}

// ---------------------------------------------------------------------------
// Serialization

namespace {

json tree_to_json(const std::vector<ExprNode>& nodes, size_t end,
                  const std::vector<std::string>& registry) {
  const ExprNode& root = nodes[end];
  if (root.kind == ExprNode::kConst) return json{{"const", root.value}};
  if (root.kind == ExprNode::kVar)
    return json{{"var", registry[static_cast<size_t>(root.var)]},
                {"index", root.var}};
  const size_t rstart = subtree_start(nodes, end - 1);
  const char* op = root.op == ExprOp::kAdd ? "+" : root.op == ExprOp::kSub ? "-" : "*";
  return json{{"op", op},
              {"lhs", tree_to_json(nodes, rstart - 1, registry)},
              {"rhs", tree_to_json(nodes, end - 1, registry)}};
}

Expression tree_from_json(const json& node, const std::vector<std::string>& registry) {
  if (node.contains("const")) return Expression::constant(node["const"].get<double>());
  if (node.contains("var")) {
    const std::string name = node["var"].get<std::string>();
    for (size_t i = 0; i < registry.size(); ++i)
      if (registry[i] == name) return Expression::variable(static_cast<int>(i));
    throw DataError("expression: unknown feature '" + name + "'");
  }
  const std::string op = node.at("op").get<std::string>();
  Expression lhs = tree_from_json(node.at("lhs"), registry);
  Expression rhs = tree_from_json(node.at("rhs"), registry);
  if (op == "+") return Expression::binary(ExprOp::kAdd, lhs, rhs);
  if (op == "-") return Expression::binary(ExprOp::kSub, lhs, rhs);
  if (op == "*") return Expression::binary(ExprOp::kMul, lhs, rhs);
  throw DataError("expression: unknown operator '" + op + "'");
}

}  // namespace

std::string expression_to_json(const Expression& expr,
                               const std::vector<std::string>& registry) {
  json doc;
  doc["infix"] = render(expr, registry);
  doc["tree"] = tree_to_json(expr.nodes(), expr.nodes().size() - 1, registry);
  return doc.dump(2);
}

Expression expression_from_json(const std::string& text,
                                const std::vector<std::string>& registry) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::exception& e) {
    throw DataError(std::string("expression: invalid JSON: ") + e.what());
  }
  if (doc.contains("tree")) return tree_from_json(doc["tree"], registry);
  return tree_from_json(doc, registry);
}

}  // namespace residyn
