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

#include "residyn/numdiff.hpp"

namespace residyn {

void DiffConfig::validate() const {
  if (!(alpha_tv > 0)) throw ConfigError("diff: alpha must be > 0");
  if (iterations < 1) throw ConfigError("diff: iterations must be >= 1");
  if (!(delta > 0)) throw ConfigError("diff: delta must be > 0");
}

std::string DiffConfig::method_name() const {
  return method == DiffMethod::kFinite ? "finite" : "tvr";
}

DiffConfig DiffConfig::from_name(const std::string& name) {
  DiffConfig cfg;
  if (name == "finite") {
    cfg.method = DiffMethod::kFinite;
  } else if (name == "tvr") {
    cfg.method = DiffMethod::kTvr;
  } else {
    throw ConfigError("diff: unknown method '" + name + "' (finite|tvr)");
  }
  return cfg;
}

Vec finite_difference(const Vec& signal, double dt) {
  const Eigen::Index n = signal.size();
  if (n < 3) throw DataError("finite_difference: need at least 3 samples");
  if (!(dt > 0)) throw ConfigError("finite_difference: dt must be > 0");
  // One-sided second-order stencils written in difference form so constants
  // differentiate to exactly zero.
  Vec u(n);
  u[0] = (4 * (signal[1] - signal[0]) - (signal[2] - signal[0])) / (2 * dt);
  for (Eigen::Index k = 1; k + 1 < n; ++k)
    u[k] = (signal[k + 1] - signal[k - 1]) / (2 * dt);
  u[n - 1] = (4 * (signal[n - 1] - signal[n - 2]) -
              (signal[n - 1] - signal[n - 3])) /
             (2 * dt);
  return u;
}

namespace {

// Cumulative trapezoid integral, (Au)_0 = 0.
Vec apply_A(const Vec& u, double dt) {
  Vec out(u.size());
  out[0] = 0.0;
  for (Eigen::Index k = 1; k < u.size(); ++k)
    out[k] = out[k - 1] + 0.5 * dt * (u[k - 1] + u[k]);
  return out;
}

// Transpose of the trapezoid operator via suffix sums.
Vec apply_At(const Vec& r, double dt) {
  const Eigen::Index n = r.size();
  Vec out(n);
  double suffix = 0.0;  // sum of r[k] for k > j
  out[n - 1] = 0.5 * dt * r[n - 1];
  for (Eigen::Index j = n - 2; j >= 1; --j) {
    suffix += r[j + 1];
    out[j] = dt * (0.5 * r[j] + suffix);
  }
  suffix += r[1];
  out[0] = 0.5 * dt * suffix;
  return out;
}

// alpha * dt * D^T W D u with D the forward difference quotient; tridiagonal.
Vec apply_tv(const Vec& u, const Vec& w, double alpha, double dt) {
  const Eigen::Index n = u.size();
  Vec out = Vec::Zero(n);
  const double c = alpha / dt;  // alpha * dt / dt^2
  for (Eigen::Index k = 0; k + 1 < n; ++k) {
    const double g = c * w[k] * (u[k + 1] - u[k]);
    out[k] -= g;
    out[k + 1] += g;
  }
  return out;
}

struct Tridiag {
  Vec diag, lower, upper;

  Vec solve(const Vec& b) const {
    const Eigen::Index n = diag.size();
    Vec c(n), d(n);
    c[0] = upper[0] / diag[0];
    d[0] = b[0] / diag[0];
    for (Eigen::Index i = 1; i < n; ++i) {
      const double m = diag[i] - lower[i] * c[i - 1];
      c[i] = (i + 1 < n) ? upper[i] / m : 0.0;
      d[i] = (b[i] - lower[i] * d[i - 1]) / m;
    }
    Vec x(n);
    x[n - 1] = d[n - 1];
    for (Eigen::Index i = n - 2; i >= 0; --i) x[i] = d[i] - c[i] * x[i + 1];
    return x;
  }
};

// Preconditioner: the tridiagonal TV part plus the diagonal of A^T A.
Tridiag make_preconditioner(const Vec& w, double alpha, double dt, Eigen::Index n) {
  Tridiag P;
  P.diag = Vec(n);
  P.lower = Vec::Zero(n);
  P.upper = Vec::Zero(n);
  const double c = alpha / dt;
  for (Eigen::Index j = 0; j < n; ++j) {
    double ata;  // (A^T A)_jj for the trapezoid operator
    if (j == 0) {
      ata = dt * dt * 0.25 * static_cast<double>(n - 1);
    } else {
      ata = dt * dt * (static_cast<double>(n - 1 - j) + 0.25);
    }
    double tv = 0.0;
    if (j + 1 < n) tv += c * w[j];
    if (j > 0) tv += c * w[j - 1];
    P.diag[j] = ata + tv;
  }
  for (Eigen::Index j = 1; j < n; ++j) {
    P.lower[j] = -c * w[j - 1];
    P.upper[j - 1] = -c * w[j - 1];
  }
  return P;
}

double tv_objective(const Vec& u, const Vec& b, double alpha, double dt,
                    double delta) {
  double tv = 0.0;
  for (Eigen::Index k = 0; k + 1 < u.size(); ++k) {
    const double du = (u[k + 1] - u[k]) / dt;
    tv += std::sqrt(du * du + delta * delta);
  }
  const double fit = 0.5 * (apply_A(u, dt) - b).squaredNorm();
  return alpha * dt * tv + fit;
}

// Preconditioned conjugate gradient on (A^T A + alpha dt D^T W D) x = rhs.
Vec solve_normal_system(const Vec& rhs, const Vec& w, double alpha, double dt,
                        const Vec& x0) {
  const Eigen::Index n = rhs.size();
  const Tridiag P = make_preconditioner(w, alpha, dt, n);
  const auto apply = [&](const Vec& x) -> Vec {
    return apply_At(apply_A(x, dt), dt) + apply_tv(x, w, alpha, dt);
  };

  Vec x = x0;
  Vec r = rhs - apply(x);
  Vec z = P.solve(r);
  Vec p = z;
  double rz = r.dot(z);
  const double tol2 = 1e-24 * std::max(1.0, rhs.squaredNorm());
  const int max_iter = static_cast<int>(std::min<Eigen::Index>(4 * n, 40000));
  for (int it = 0; it < max_iter && r.squaredNorm() > tol2; ++it) {
    const Vec Ap = apply(p);
    const double denom = p.dot(Ap);
    if (!(denom > 0)) break;
    const double step = rz / denom;
    x += step * p;
    r -= step * Ap;
    z = P.solve(r);
    const double rz_next = r.dot(z);
    p = z + (rz_next / rz) * p;
    rz = rz_next;
  }
  return x;
}

TvrResult tvr_window(const Vec& signal, double dt, const DiffConfig& cfg) {
  const Eigen::Index n = signal.size();
  const Vec b = signal - Vec::Constant(n, signal[0]);
  const double alpha = cfg.alpha_tv;
  const double delta = cfg.delta;

  // Start from the naive derivative.
  Vec u = finite_difference(signal, dt);
  double objective = tv_objective(u, b, alpha, dt, delta);

  TvrResult out;
  out.converged = true;
  for (int it = 0; it < cfg.iterations; ++it) {
    // Lagged-diffusivity weights 1/sqrt((Du)^2 + delta^2).
    Vec w(n - 1);
    for (Eigen::Index k = 0; k + 1 < n; ++k) {
      const double du = (u[k + 1] - u[k]) / dt;
      w[k] = 1.0 / std::sqrt(du * du + delta * delta);
    }
    const Vec rhs = apply_At(b, dt);
    const Vec u_next = solve_normal_system(rhs, w, alpha, dt, u);
    const double next_objective = tv_objective(u_next, b, alpha, dt, delta);
    // Majorize-minimize guarantees descent up to solver tolerance.
    if (next_objective > objective * (1 + 1e-9) + 1e-12)
      throw NumericError("tvr_differentiate: objective increased (iteration " +
                         std::to_string(it) + ")");
    const double moved = (u_next - u).cwiseAbs().maxCoeff();
    u = u_next;
    objective = next_objective;
    if (moved < 1e-11 * (1.0 + u.cwiseAbs().maxCoeff())) break;
    if (it == cfg.iterations - 1) out.converged = false;
  }
  out.derivative = u;
  out.objective = objective;
  return out;
}

}  // namespace

TvrResult tvr_differentiate(const Vec& signal, double dt, const DiffConfig& cfg) {
  cfg.validate();
  if (signal.size() < 3) throw DataError("tvr_differentiate: need at least 3 samples");
  if (!(dt > 0)) throw ConfigError("tvr_differentiate: dt must be > 0");
  if (!signal.allFinite()) throw NumericError("tvr_differentiate: non-finite input");

  // Long signals are processed in overlapping windows, averaged where they
  // overlap (the normal system is solved per window).
  constexpr Eigen::Index kWindowThreshold = 100000;
  constexpr Eigen::Index kWindow = 10000;
  const Eigen::Index n = signal.size();
  if (n <= kWindowThreshold) return tvr_window(signal, dt, cfg);

  const Eigen::Index overlap = kWindow / 10;
  Vec acc = Vec::Zero(n);
  Vec weight = Vec::Zero(n);
  TvrResult out;
  out.converged = true;
  Eigen::Index start = 0;
  while (true) {
    const Eigen::Index len = std::min(kWindow, n - start);
    TvrResult piece = tvr_window(signal.segment(start, len), dt, cfg);
    out.converged = out.converged && piece.converged;
    acc.segment(start, len) += piece.derivative;
    weight.segment(start, len) += Vec::Ones(len);
    out.objective += piece.objective;
    if (start + len >= n) break;
    start += kWindow - overlap;
    if (start + kWindow > n) start = std::max<Eigen::Index>(0, n - kWindow);
  }
  out.derivative = acc.cwiseQuotient(weight);
  return out;
}

Vec differentiate(const Vec& signal, double dt, const DiffConfig& cfg) {
  if (cfg.method == DiffMethod::kFinite) return finite_difference(signal, dt);
  return tvr_differentiate(signal, dt, cfg).derivative;
}

DerivativeChain derive_chain(const Mat& series, double dt, const DiffConfig& cfg) {
  DerivativeChain out;
  out.d1 = Mat(series.rows(), series.cols());
  out.d2 = Mat(series.rows(), series.cols());
  out.d3 = Mat(series.rows(), series.cols());
  for (Eigen::Index j = 0; j < series.cols(); ++j) {
    const Vec d1 = differentiate(series.col(j), dt, cfg);
    const Vec d2 = differentiate(d1, dt, cfg);
    const Vec d3 = differentiate(d2, dt, cfg);
    out.d1.col(j) = d1;
    out.d2.col(j) = d2;
    out.d3.col(j) = d3;
  }
  if (!out.d1.allFinite() || !out.d2.allFinite() || !out.d3.allFinite())
    throw NumericError("derive_chain: non-finite derivatives");
  return out;
}

}  // namespace residyn
