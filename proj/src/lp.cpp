// Copyright 2026 The OGS Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "ogs/lp.h"

#include <cmath>
#include <cstddef>
#include <limits>
#include <stdexcept>

namespace ogs {
namespace {

constexpr double kReducedCostEps = 1e-10;
constexpr double kPivotEps = 1e-11;
constexpr double kPhase1Eps = 1e-8;

// Tableau with rows [m x (n+1)], last column is the rhs. basis[i] is the
// variable index that is basic in row i.
struct Tableau {
  int m = 0;
  int n = 0;
  std::vector<double> a;  // (m) x (n+1), row-major
  std::vector<int> basis;

  double& at(int r, int c) { return a[static_cast<size_t>(r) * (n + 1) + c]; }
  double at(int r, int c) const {
    return a[static_cast<size_t>(r) * (n + 1) + c];
  }

  void pivot(int row, int col) {
    const double piv = at(row, col);
    const double inv = 1.0 / piv;
    for (int c = 0; c <= n; ++c) at(row, c) *= inv;
    at(row, col) = 1.0;
    for (int r = 0; r < m; ++r) {
      if (r == row) continue;
      const double f = at(r, col);
      if (std::fabs(f) < kPivotEps) {
        at(r, col) = 0.0;
        continue;
      }
      for (int c = 0; c <= n; ++c) at(r, c) -= f * at(row, c);
      at(r, col) = 0.0;
    }
    basis[row] = col;
  }
};

// Runs primal simplex with Bland's rule on `t` for objective `obj`
// (maximization, expressed over all tableau columns). `allowed` marks
// columns eligible to enter. Returns false on iteration limit.
bool simplex(Tableau& t, std::vector<double>& obj, double& obj_value,
             const std::vector<bool>& allowed, bool& unbounded,
             long max_iters) {
  unbounded = false;
  // Reduced costs: price out the basic columns.
  for (int r = 0; r < t.m; ++r) {
    const int b = t.basis[r];
    const double cb = obj[b];
    if (cb == 0.0) continue;
    for (int c = 0; c <= t.n; ++c) {
      if (c < t.n)
        obj[c] -= cb * t.at(r, c);
      else
        obj_value += cb * t.at(r, c);
    }
  }
  // Dantzig's rule for speed; after a run of non-improving pivots switch to
  // Bland's rule, whose anti-cycling guarantee ensures termination.
  long stalled = 0;
  constexpr long kStallLimit = 64;
  for (long iter = 0; iter < max_iters; ++iter) {
    const bool bland = stalled >= kStallLimit;
    int enter = -1;
    if (bland) {
      for (int c = 0; c < t.n; ++c) {
        if (allowed[c] && obj[c] > kReducedCostEps) {
          enter = c;
          break;
        }
      }
    } else {
      double best = kReducedCostEps;
      for (int c = 0; c < t.n; ++c) {
        if (allowed[c] && obj[c] > best) {
          best = obj[c];
          enter = c;
        }
      }
    }
    if (enter < 0) return true;
    // Ratio test; ties broken by lowest basic variable index (Bland).
    int leave = -1;
    double best_ratio = std::numeric_limits<double>::infinity();
    for (int r = 0; r < t.m; ++r) {
      const double coeff = t.at(r, enter);
      if (coeff > kPivotEps) {
        const double ratio = t.at(r, t.n) / coeff;
        if (ratio < best_ratio - kPivotEps ||
            (ratio < best_ratio + kPivotEps &&
             (leave < 0 || t.basis[r] < t.basis[leave]))) {
          best_ratio = ratio;
          leave = r;
        }
      }
    }
    if (leave < 0) {
      unbounded = true;
      return true;
    }
    stalled = best_ratio > kPivotEps ? 0 : stalled + 1;
    t.pivot(leave, enter);
    // Update the objective row.
    const double f = obj[enter];
    if (f != 0.0) {
      for (int c = 0; c < t.n; ++c) obj[c] -= f * t.at(leave, c);
      obj_value += f * t.at(leave, t.n);
      obj[enter] = 0.0;
    }
  }
  return false;
}

}  // namespace

int LpProblem::add_var(double obj_coeff) {
  objective.push_back(obj_coeff);
  for (auto& row : eq_rows) row.push_back(0.0);
  for (auto& row : ub_rows) row.push_back(0.0);
  return num_vars++;
}

void LpProblem::add_eq(std::vector<double> row, double rhs) {
  row.resize(num_vars, 0.0);
  eq_rows.push_back(std::move(row));
  eq_rhs.push_back(rhs);
}

void LpProblem::add_ub(std::vector<double> row, double rhs) {
  row.resize(num_vars, 0.0);
  ub_rows.push_back(std::move(row));
  ub_rhs.push_back(rhs);
}

LpResult lp_solve_max(const LpProblem& p) {
  const int n_orig = p.num_vars;
  const int m = static_cast<int>(p.eq_rows.size() + p.ub_rows.size());
  const int n_slack = static_cast<int>(p.ub_rows.size());

  // Assemble rows with nonnegative rhs; slack for <= rows, artificial for
  // equality rows and for rows whose slack got a negative sign.
  Tableau t;
  t.m = m;
  std::vector<std::vector<double>> rows(m);
  std::vector<double> rhs(m);
  std::vector<int> slack_sign(m, 0);
  int idx = 0;
  for (size_t i = 0; i < p.eq_rows.size(); ++i, ++idx) {
    rows[idx] = p.eq_rows[i];
    rows[idx].resize(n_orig, 0.0);
    rhs[idx] = p.eq_rhs[i];
  }
  for (size_t i = 0; i < p.ub_rows.size(); ++i, ++idx) {
    rows[idx] = p.ub_rows[i];
    rows[idx].resize(n_orig, 0.0);
    rhs[idx] = p.ub_rhs[i];
    slack_sign[idx] = 1;
  }
  for (int r = 0; r < m; ++r) {
    if (rhs[r] < 0) {
      for (auto& v : rows[r]) v = -v;
      rhs[r] = -rhs[r];
      slack_sign[r] = -slack_sign[r];
    }
  }

  // Column layout: original vars, slacks, artificials.
  std::vector<int> artificial_col(m, -1);
  int n_art = 0;
  for (int r = 0; r < m; ++r) {
    if (slack_sign[r] != 1) artificial_col[r] = n_art++;
  }
  const int n_total = n_orig + n_slack + n_art;
  t.n = n_total;
  t.a.assign(static_cast<size_t>(m) * (n_total + 1), 0.0);
  t.basis.assign(m, -1);

  int slack_idx = 0;
  for (int r = 0; r < m; ++r) {
    for (int c = 0; c < n_orig; ++c) t.at(r, c) = rows[r][c];
    if (r >= static_cast<int>(p.eq_rows.size())) {
      const int sc = n_orig + slack_idx++;
      t.at(r, sc) = static_cast<double>(slack_sign[r]);
      if (slack_sign[r] == 1) t.basis[r] = sc;
    }
    if (artificial_col[r] >= 0) {
      const int ac = n_orig + n_slack + artificial_col[r];
      t.at(r, ac) = 1.0;
      t.basis[r] = ac;
    }
    t.at(r, n_total) = rhs[r];
  }

  const long max_iters = 2000L * (n_total + m + 16);
  LpResult res;

  // Phase 1: maximize -(sum of artificials).
  if (n_art > 0) {
    std::vector<double> obj(n_total, 0.0);
    for (int c = n_orig + n_slack; c < n_total; ++c) obj[c] = -1.0;
    std::vector<bool> allowed(n_total, true);
    double val = 0.0;
    bool unbounded = false;
    if (!simplex(t, obj, val, allowed, unbounded, max_iters)) {
      res.status = LpStatus::kIterationLimit;
      return res;
    }
    if (val < -kPhase1Eps) {
      res.status = LpStatus::kInfeasible;
      return res;
    }
    // Drive any leftover artificial out of the basis.
    for (int r = 0; r < m; ++r) {
      if (t.basis[r] < n_orig + n_slack) continue;
      int enter = -1;
      for (int c = 0; c < n_orig + n_slack; ++c) {
        if (std::fabs(t.at(r, c)) > kPivotEps) {
          enter = c;
          break;
        }
      }
      if (enter >= 0) {
        t.pivot(r, enter);
      } else {
        // Redundant row; keep the artificial basic at zero level.
        t.at(r, n_total) = 0.0;
      }
    }
  }

  // Phase 2: original objective, artificials locked out.
  {
    std::vector<double> obj(n_total, 0.0);
    for (int c = 0; c < n_orig; ++c) obj[c] = p.objective[c];
    std::vector<bool> allowed(n_total, true);
    for (int c = n_orig + n_slack; c < n_total; ++c) allowed[c] = false;
    double val = 0.0;
    bool unbounded = false;
    if (!simplex(t, obj, val, allowed, unbounded, max_iters)) {
      res.status = LpStatus::kIterationLimit;
      return res;
    }
    if (unbounded) {
      res.status = LpStatus::kUnbounded;
      return res;
    }
    res.status = LpStatus::kOptimal;
    res.value = val;
    res.x.assign(n_orig, 0.0);
    for (int r = 0; r < m; ++r) {
      if (t.basis[r] < n_orig) res.x[t.basis[r]] = t.at(r, n_total);
    }
  }
  return res;
}

}  // namespace ogs
