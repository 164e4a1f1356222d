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

#pragma once

#include <iosfwd>
#include <optional>
#include <vector>

#include "ogs/bounds.h"
#include "ogs/strategy.h"

namespace ogs {

enum class SolverTag { kTerminalLp, kNestedDoo, kGrid };

struct LocalSolution {
  DecisionRule beta1, beta2;
  double value_lo = 0.0;
  double value_hi = 0.0;
  SolverTag solver_tag = SolverTag::kNestedDoo;
  bool budget_exceeded = false;
  long nodes_expanded = 0;
};

// The one-stage game Q(o, beta1, beta2) = r(o, beta) + gamma * B(T(o, beta))
// where B is one side of the value sandwich evaluated at depth tau+1 (or the
// zero function at terminal depth). Precomputes the occupancy-weighted
// payoff tensors so solver evaluations stay cheap.
class LocalGame {
 public:
  // `bound` may be nullptr for a zero continuation. The bound is read at
  // depth o.depth()+1 and must outlive the game.
  LocalGame(const PosgModel& m, OccupancyState o, const ValueBound* bound,
            double gamma);

  const PosgModel& model() const { return *m_; }
  const OccupancyState& occupancy() const { return o_; }
  const ValueBound* bound() const { return bound_; }
  double gamma() const { return gamma_; }

  bool terminal() const;  // continuation identically zero
  // Terminal, or the continuation bound carries no cones at tau+1; the
  // payoff is then bilinear in the decision rules and the stage LP is exact.
  bool bilinear() const;

  // lambda_r + gamma * (Lipschitz constant of the continuation envelope);
  // the payoff is this-Lipschitz in each rule under the occupancy-weighted
  // L1 metric d(b, b') = sum_h w(h) ||b(h) - b'(h)||_1.
  double lipschitz_q() const { return lipschitz_q_; }

  double payoff(const DecisionRule& b1, const DecisionRule& b2) const;

  // Same value computed straight off the precomputed tensors, rows indexed
  // by support position; no occupancy materialization. Not thread-safe
  // (shares a scratch buffer).
  using RuleRows = std::vector<std::vector<double>>;
  double payoff_rows(const RuleRows& rows1, const RuleRows& rows2) const;

  // Support and marginal weights of one player's private histories.
  const std::vector<int>& support(int player) const {
    return player == 1 ? supp1_ : supp2_;
  }
  const std::vector<double>& weights(int player) const {
    return player == 1 ? w1_ : w2_;
  }

  // Internal tensors, exposed for the solvers.
  struct Atom {
    int c1, c2, s2;      // successor occupancy key
    int i1, a1, i2, a2;  // driving support indices and actions
    double coeff;        // sum_s P(s',z1,z2|s,a1,a2) o(s,h1,h2)
  };
  const std::vector<Atom>& atoms() const { return atoms_; }
  double reward_tensor(int i1, int a1, int i2, int a2) const {
    return gr_[idx(i1, a1, i2, a2)];
  }
  // Continuation through the initial linear bound (zero when terminal).
  double init_tensor(int i1, int a1, int i2, int a2) const {
    return gc_.empty() ? 0.0 : gc_[idx(i1, a1, i2, a2)];
  }

  DecisionRule make_rule(int player,
                         const std::vector<std::vector<double>>& rows) const;

 private:
  size_t idx(int i1, int a1, int i2, int a2) const {
    return ((static_cast<size_t>(i1) * na1_ + a1) * supp2_.size() + i2) *
               na2_ +
           a2;
  }

  const PosgModel* m_;
  OccupancyState o_;
  const ValueBound* bound_;
  double gamma_;
  int na1_, na2_;
  double lipschitz_q_ = 0.0;
  std::vector<int> supp1_, supp2_;
  std::vector<double> w1_, w2_;
  std::vector<double> gr_, gc_;
  std::vector<Atom> atoms_;  // sorted by successor occupancy key
  mutable std::vector<double> scratch_;
};

struct LocalSolveOptions {
  double tol = 1e-3;
  long budget = 20000;          // outer DOO node budget
  long inner_budget = 4000;     // inner DOO node budget per outer evaluation
  std::ostream* trace = nullptr;  // optional node_id,depth,radius,lo,hi CSV
  // Warm-start candidate for the outer player (rows for uncovered histories
  // fall back to uniform).
  const DecisionRule* seed = nullptr;
  // After the search, prefer a sparser rule whenever one still certifies a
  // value within tol of the optimistic bound; keeps successor occupancy
  // supports from ballooning trial over trial.
  bool sparsify = true;
};

// Maximin: beta1 guarantees min_{beta2} payoff >= value_lo, and the true
// maximin value lies in [value_lo, value_hi] with value_hi - value_lo <= tol
// unless the budget ran out (then the honest bracket is returned and
// budget_exceeded is set). Bilinear games route to the exact stage LP.
LocalSolution solve_maximin(const LocalGame& g, const LocalSolveOptions& opt);
// Mirror for the minimizer: max_{beta1} payoff vs beta2 <= value_hi.
LocalSolution solve_minimax(const LocalGame& g, const LocalSolveOptions& opt);

// Exact maximin/minimax of the pure reward stage game at o (zero
// continuation), via one LP per player.
LocalSolution solve_terminal_lp(const PosgModel& m, const OccupancyState& o);

// Forces the deterministic-optimistic-optimization path regardless of
// payoff structure (maximin orientation).
LocalSolution nested_doo(const LocalGame& g, const LocalSolveOptions& opt);

// Exhaustive maximin over per-history simplices discretized with denominator
// `resolution`; test-only cross-check. value_hi = value_lo plus twice the
// grid covering radius times lambda_Q.
LocalSolution grid_solve(const LocalGame& g, int resolution);

}  // namespace ogs
