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

#include "ogs/localgame.h"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <map>
#include <ostream>
#include <queue>

#include "ogs/lp.h"

namespace ogs {

namespace {

using Rows = std::vector<std::vector<double>>;

constexpr double kTiny = 1e-12;

}  // namespace

LocalGame::LocalGame(const PosgModel& m, OccupancyState o,
                     const ValueBound* bound, double gamma)
    : m_(&m),
      o_(std::move(o)),
      bound_(bound),
      gamma_(gamma),
      na1_(m.na1()),
      na2_(m.na2()) {
  std::map<int, double> marg1 = marginal_private_histories(o_, 1);
  std::map<int, double> marg2 = marginal_private_histories(o_, 2);
  std::map<int, int> pos1, pos2;
  for (const auto& [h, w] : marg1) {
    pos1[h] = static_cast<int>(supp1_.size());
    supp1_.push_back(h);
    w1_.push_back(w);
  }
  for (const auto& [h, w] : marg2) {
    pos2[h] = static_cast<int>(supp2_.size());
    supp2_.push_back(h);
    w2_.push_back(w);
  }
  const int next_depth = o_.depth() + 1;
  const std::vector<double>* next_init = nullptr;
  if (bound_ != nullptr) next_init = &bound_->init_values(next_depth);

  gr_.assign(supp1_.size() * na1_ * supp2_.size() * na2_, 0.0);
  if (bound_ != nullptr) gc_.assign(gr_.size(), 0.0);
  std::map<OccupancyKey, Atom> atom_map;
  HistorySpace& space = *o_.space();
  for (const auto& [k, p] : o_.entries()) {
    const int i1 = pos1[k.h1];
    const int i2 = pos2[k.h2];
    for (int a1 = 0; a1 < na1_; ++a1) {
      for (int a2 = 0; a2 < na2_; ++a2) {
        gr_[idx(i1, a1, i2, a2)] += p * m.reward(k.state, a1, a2);
        for (const NextEntry& e : m.next(k.state, a1, a2)) {
          if (e.p <= 0.0) continue;
          if (next_init != nullptr)
            gc_[idx(i1, a1, i2, a2)] += p * e.p * (*next_init)[e.s2];
          if (bound_ != nullptr) {
            const int c1 = space.pool1.child(k.h1, a1, e.z1);
            const int c2 = space.pool2.child(k.h2, a2, e.z2);
            const OccupancyKey key{c1, c2, e.s2};
            auto it = atom_map.find(key);
            if (it == atom_map.end())
              atom_map.emplace(key,
                               Atom{c1, c2, e.s2, i1, a1, i2, a2, p * e.p});
            else
              it->second.coeff += p * e.p;
          }
        }
      }
    }
  }
  atoms_.reserve(atom_map.size());
  for (auto& [key, atom] : atom_map) atoms_.push_back(atom);

  const double lambda_r = reward_bounds(m).lambda_r;
  lipschitz_q_ = lambda_r;
  if (bound_ != nullptr)
    lipschitz_q_ += gamma_ * bound_->lipschitz_at(next_depth);
}

bool LocalGame::terminal() const { return bound_ == nullptr; }

bool LocalGame::bilinear() const {
  return bound_ == nullptr || bound_->cones(o_.depth() + 1).empty();
}

DecisionRule LocalGame::make_rule(int player, const Rows& rows) const {
  DecisionRule rule;
  rule.player = player;
  rule.depth = o_.depth();
  const auto& supp = support(player);
  for (size_t i = 0; i < supp.size(); ++i) rule.table[supp[i]] = rows[i];
  return rule;
}

double LocalGame::payoff(const DecisionRule& b1, const DecisionRule& b2) const {
  DecisionRuleProfile d{b1, b2};
  double v = expected_reward(*m_, o_, d);
  if (bound_ != nullptr) v += gamma_ * bound_->eval(transition(*m_, o_, d));
  return v;
}

double LocalGame::payoff_rows(const RuleRows& rows1,
                              const RuleRows& rows2) const {
  const int n1 = static_cast<int>(supp1_.size());
  const int n2 = static_cast<int>(supp2_.size());
  double reward = 0.0, cont_init = 0.0;
  for (int i1 = 0; i1 < n1; ++i1) {
    for (int a1 = 0; a1 < na1_; ++a1) {
      const double p1 = rows1[i1][a1];
      if (p1 <= 0.0) continue;
      for (int i2 = 0; i2 < n2; ++i2) {
        for (int a2 = 0; a2 < na2_; ++a2) {
          const double p2 = rows2[i2][a2];
          if (p2 <= 0.0) continue;
          const size_t k = idx(i1, a1, i2, a2);
          reward += p1 * p2 * gr_[k];
          if (!gc_.empty()) cont_init += p1 * p2 * gc_[k];
        }
      }
    }
  }
  if (bound_ == nullptr) return reward;
  scratch_.resize(atoms_.size());
  for (size_t k = 0; k < atoms_.size(); ++k) {
    const Atom& at = atoms_[k];
    scratch_[k] = rows1[at.i1][at.a1] * rows2[at.i2][at.a2] * at.coeff;
  }
  const bool upper = bound_->side() == BoundSide::kUpper;
  double env = cont_init;
  for (const Cone& cone : bound_->cones(o_.depth() + 1)) {
    // ||omega - T||_1 by a merge walk over the sorted keys; unmatched next
    // mass folds into the constant via sum_k T_k = 1.
    double matched_abs = 0.0, matched_t = 0.0, unmatched_omega = 0.0;
    size_t ai = 0;
    for (const auto& [key, omega] : cone.vertex.entries()) {
      while (ai < atoms_.size() &&
             OccupancyKey{atoms_[ai].c1, atoms_[ai].c2, atoms_[ai].s2} < key)
        ++ai;
      if (ai < atoms_.size() &&
          OccupancyKey{atoms_[ai].c1, atoms_[ai].c2, atoms_[ai].s2} == key) {
        matched_abs += std::fabs(omega - scratch_[ai]);
        matched_t += scratch_[ai];
      } else {
        unmatched_omega += omega;
      }
    }
    const double dist = 1.0 - matched_t + matched_abs + unmatched_omega;
    const double cand =
        upper ? cone.value + cone.slope * dist : cone.value - cone.slope * dist;
    env = upper ? std::min(env, cand) : std::max(env, cand);
  }
  return reward + gamma_ * env;
}

namespace {

// ---------------------------------------------------------------------------
// Exact stage LP on a bilinear payoff tensor G = Gr + gamma * Gc.
// ---------------------------------------------------------------------------

struct StageLpResult {
  double value = 0.0;
  Rows rows;
};

double stage_tensor(const LocalGame& g, int i1, int a1, int i2, int a2) {
  return g.reward_tensor(i1, a1, i2, a2) +
         g.gamma() * g.init_tensor(i1, a1, i2, a2);
}

LpResult solve_with_retry(LpProblem& p) {
  LpResult r = lp_solve_max(p);
  if (r.status == LpStatus::kIterationLimit) {
    // Degeneracy fallback: deterministically perturb the objective and
    // retry once.
    for (size_t i = 0; i < p.objective.size(); ++i)
      p.objective[i] += 1e-11 * static_cast<double>(i + 1);
    r = lp_solve_max(p);
  }
  if (!r.ok()) throw std::runtime_error("stage LP did not reach optimality");
  return r;
}

// Maximin LP over player 1's per-history simplices:
//   max sum_{i2} t_{i2}  s.t.  t_{i2} <= sum_{i1,a1} x(i1,a1) G(.,i2,a2).
StageLpResult stage_maximin_lp(const LocalGame& g) {
  const int n1 = static_cast<int>(g.support(1).size());
  const int n2 = static_cast<int>(g.support(2).size());
  const int na1 = g.model().na1();
  const int na2 = g.model().na2();
  LpProblem p;
  for (int i = 0; i < n1 * na1; ++i) p.add_var(0.0);
  std::vector<int> tp(n2), tm(n2);
  for (int j = 0; j < n2; ++j) {
    tp[j] = p.add_var(1.0);
    tm[j] = p.add_var(-1.0);
  }
  for (int i2 = 0; i2 < n2; ++i2) {
    for (int a2 = 0; a2 < na2; ++a2) {
      std::vector<double> row(p.num_vars, 0.0);
      row[tp[i2]] = 1.0;
      row[tm[i2]] = -1.0;
      for (int i1 = 0; i1 < n1; ++i1)
        for (int a1 = 0; a1 < na1; ++a1)
          row[i1 * na1 + a1] = -stage_tensor(g, i1, a1, i2, a2);
      p.add_ub(std::move(row), 0.0);
    }
  }
  for (int i1 = 0; i1 < n1; ++i1) {
    std::vector<double> row(p.num_vars, 0.0);
    for (int a1 = 0; a1 < na1; ++a1) row[i1 * na1 + a1] = 1.0;
    p.add_eq(std::move(row), 1.0);
  }
  LpResult r = solve_with_retry(p);
  StageLpResult out;
  out.value = r.value;
  out.rows.assign(n1, std::vector<double>(na1, 0.0));
  for (int i1 = 0; i1 < n1; ++i1) {
    double sum = 0.0;
    for (int a1 = 0; a1 < na1; ++a1) {
      out.rows[i1][a1] = std::max(0.0, r.x[i1 * na1 + a1]);
      sum += out.rows[i1][a1];
    }
    for (int a1 = 0; a1 < na1; ++a1) out.rows[i1][a1] /= sum;
  }
  return out;
}

StageLpResult stage_minimax_lp(const LocalGame& g) {
  const int n1 = static_cast<int>(g.support(1).size());
  const int n2 = static_cast<int>(g.support(2).size());
  const int na1 = g.model().na1();
  const int na2 = g.model().na2();
  LpProblem p;
  for (int j = 0; j < n2 * na2; ++j) p.add_var(0.0);
  std::vector<int> up(n1), um(n1);
  for (int i = 0; i < n1; ++i) {
    up[i] = p.add_var(-1.0);
    um[i] = p.add_var(1.0);
  }
  for (int i1 = 0; i1 < n1; ++i1) {
    for (int a1 = 0; a1 < na1; ++a1) {
      std::vector<double> row(p.num_vars, 0.0);
      row[up[i1]] = -1.0;
      row[um[i1]] = 1.0;
      for (int i2 = 0; i2 < n2; ++i2)
        for (int a2 = 0; a2 < na2; ++a2)
          row[i2 * na2 + a2] = stage_tensor(g, i1, a1, i2, a2);
      p.add_ub(std::move(row), 0.0);
    }
  }
  for (int i2 = 0; i2 < n2; ++i2) {
    std::vector<double> row(p.num_vars, 0.0);
    for (int a2 = 0; a2 < na2; ++a2) row[i2 * na2 + a2] = 1.0;
    p.add_eq(std::move(row), 1.0);
  }
  LpResult r = solve_with_retry(p);
  StageLpResult out;
  out.value = -r.value;
  out.rows.assign(n2, std::vector<double>(na2, 0.0));
  for (int i2 = 0; i2 < n2; ++i2) {
    double sum = 0.0;
    for (int a2 = 0; a2 < na2; ++a2) {
      out.rows[i2][a2] = std::max(0.0, r.x[i2 * na2 + a2]);
      sum += out.rows[i2][a2];
    }
    for (int a2 = 0; a2 < na2; ++a2) out.rows[i2][a2] /= sum;
  }
  return out;
}

LocalSolution stage_lp_solution(const LocalGame& g) {
  StageLpResult mx = stage_maximin_lp(g);
  StageLpResult mn = stage_minimax_lp(g);
  LocalSolution sol;
  sol.solver_tag = SolverTag::kTerminalLp;
  sol.beta1 = g.make_rule(1, mx.rows);
  sol.beta2 = g.make_rule(2, mn.rows);
  sol.value_lo = std::min(mx.value, mn.value);
  sol.value_hi = std::max(mx.value, mn.value);
  return sol;
}

// ---------------------------------------------------------------------------
// Exact inner optimization. When the inner player minimizes against an
// upper-bound continuation (or maximizes against a lower-bound one), the
// piece-wise envelope commutes with the inner optimum:
//   min_y min_p piece_p(y) = min_p min_y piece_p(y),
// so the init piece decomposes per history and each cone piece is one small
// LP over the inner player's simplices plus |vertex support| auxiliaries.
// ---------------------------------------------------------------------------

struct InnerExact {
  double value = 0.0;
  Rows rows;
};

InnerExact inner_exact(const LocalGame& g, int inner_player,
                       const Rows& other_rows, bool minimize) {
  const int n_in = static_cast<int>(g.support(inner_player).size());
  const int n_out = static_cast<int>(g.support(inner_player == 1 ? 2 : 1).size());
  const int na_in =
      inner_player == 1 ? g.model().na1() : g.model().na2();
  const int na_out =
      inner_player == 1 ? g.model().na2() : g.model().na1();
  const double gamma = g.gamma();
  const double sgn = minimize ? 1.0 : -1.0;

  // Contract the tensors over the fixed opponent.
  std::vector<double> ar(n_in * na_in, 0.0), ac(n_in * na_in, 0.0);
  for (int ii = 0; ii < n_in; ++ii) {
    for (int ai = 0; ai < na_in; ++ai) {
      double r = 0.0, c = 0.0;
      for (int io = 0; io < n_out; ++io) {
        for (int ao = 0; ao < na_out; ++ao) {
          const double w = other_rows[io][ao];
          if (w <= 0.0) continue;
          if (inner_player == 2) {
            r += w * g.reward_tensor(io, ao, ii, ai);
            c += w * g.init_tensor(io, ao, ii, ai);
          } else {
            r += w * g.reward_tensor(ii, ai, io, ao);
            c += w * g.init_tensor(ii, ai, io, ao);
          }
        }
      }
      ar[ii * na_in + ai] = r;
      ac[ii * na_in + ai] = c;
    }
  }

  // Initial linear piece: decomposes per inner history.
  InnerExact best;
  best.rows.assign(n_in, std::vector<double>(na_in, 0.0));
  double v_init = 0.0;
  for (int ii = 0; ii < n_in; ++ii) {
    int arg = 0;
    double b = ar[ii * na_in] + gamma * ac[ii * na_in];
    for (int ai = 1; ai < na_in; ++ai) {
      const double q = ar[ii * na_in + ai] + gamma * ac[ii * na_in + ai];
      if (minimize ? q < b - kTiny : q > b + kTiny) {
        b = q;
        arg = ai;
      }
    }
    v_init += b;
    best.rows[ii][arg] = 1.0;
  }
  best.value = v_init;
  if (g.terminal()) return best;

  // Cheap per-piece floor (distance term dropped) used to skip LPs.
  double ar_opt = 0.0;
  for (int ii = 0; ii < n_in; ++ii) {
    double b = ar[ii * na_in];
    for (int ai = 1; ai < na_in; ++ai)
      b = minimize ? std::min(b, ar[ii * na_in + ai])
                   : std::max(b, ar[ii * na_in + ai]);
    ar_opt += b;
  }

  const auto& cones = g.bound()->cones(g.occupancy().depth() + 1);
  // Most promising summits first so the floor test skips the rest.
  std::vector<size_t> order(cones.size());
  for (size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::sort(order.begin(), order.end(), [&](size_t a, size_t b) {
    return minimize ? cones[a].value < cones[b].value
                    : cones[a].value > cones[b].value;
  });
  for (const size_t cone_idx : order) {
    const Cone& cone = cones[cone_idx];
    if (minimize) {
      const double floor = ar_opt + gamma * cone.value;
      if (floor >= best.value - kTiny) continue;
    } else {
      const double ceil = ar_opt + gamma * cone.value;
      if (ceil <= best.value + kTiny) continue;
    }
    // Walk the sorted atoms against the sorted vertex support.
    struct Matched {
      double omega, d;
      int ii, ai;
    };
    std::vector<Matched> kappa;
    double unmatched_omega = 0.0;
    const auto& atoms = g.atoms();
    const auto& verts = cone.vertex.entries();
    size_t ai_idx = 0;
    for (const auto& [key, omega] : verts) {
      while (ai_idx < atoms.size() &&
             OccupancyKey{atoms[ai_idx].c1, atoms[ai_idx].c2,
                          atoms[ai_idx].s2} < key)
        ++ai_idx;
      bool matched = false;
      if (ai_idx < atoms.size()) {
        const auto& at = atoms[ai_idx];
        if (OccupancyKey{at.c1, at.c2, at.s2} == key) {
          const double d = inner_player == 2
                               ? other_rows[at.i1][at.a1] * at.coeff
                               : other_rows[at.i2][at.a2] * at.coeff;
          if (d > 0.0) {
            kappa.push_back(
                Matched{omega, d, inner_player == 2 ? at.i2 : at.i1,
                        inner_player == 2 ? at.a2 : at.a1});
            matched = true;
          }
        }
      }
      if (!matched) unmatched_omega += omega;
    }
    const double const_dist = 1.0 + unmatched_omega;

    // Each matched key's mass D_k * y depends on a single inner variable,
    // so the piece objective is separable per history and piecewise linear
    // per variable; a greedy slope-fill over each history's simplex solves
    // it exactly without an LP.
    //   phi_{i,a}(t) = ar(i,a) t - gs * sum_k D_k t + gs * sum_k |w_k - D_k t|
    // with slope jumps of +/- 2 gs D_k at t = w_k / D_k.
    const double gs = gamma * cone.slope;
    struct Segment {
      double slope;
      double width;
      int action;
      int order;  // position within the action's sorted breakpoints
    };
    Rows rows(n_in, std::vector<double>(na_in, 0.0));
    double piece_value = gamma * cone.value + sgn * gs * const_dist;
    for (int ii = 0; ii < n_in; ++ii) {
      std::vector<Segment> segs;
      for (int ai = 0; ai < na_in; ++ai) {
        std::vector<std::pair<double, double>> bps;  // (breakpoint, D_k)
        double dsum = 0.0;
        for (const Matched& mk : kappa) {
          if (mk.ii != ii || mk.ai != ai) continue;
          bps.emplace_back(mk.omega / mk.d, mk.d);
          dsum += mk.d;
        }
        std::sort(bps.begin(), bps.end());
        const double base = ar[ii * na_in + ai];
        // Initial slope below the first breakpoint; each |w - D t| kink
        // raises (minimize) or lowers (maximize) it by 2 gs D.
        double slope = base - 2.0 * sgn * gs * dsum;
        double prev = 0.0;
        int order = 0;
        for (const auto& [bp, d] : bps) {
          if (bp > prev)
            segs.push_back(Segment{slope, bp - prev, ai, order++});
          prev = std::max(prev, bp);
          slope += 2.0 * sgn * gs * d;
          if (prev >= 1.0) break;
        }
        if (prev < 1.0) segs.push_back(Segment{slope, 1.0, ai, order});
      }
      std::sort(segs.begin(), segs.end(), [&](const Segment& a,
                                              const Segment& b) {
        const double sa = minimize ? a.slope : -a.slope;
        const double sb = minimize ? b.slope : -b.slope;
        if (sa != sb) return sa < sb;
        if (a.action != b.action) return a.action < b.action;
        return a.order < b.order;
      });
      double mass = 1.0;
      for (const Segment& s : segs) {
        if (mass <= 0.0) break;
        // Segments of one action arrive in feasible order: convexity makes
        // later segments never cheaper (mirrored for concave maximization).
        const double take = std::min(mass, s.width);
        rows[ii][s.action] += take;
        mass -= take;
      }
      // Evaluate phi_i at the chosen point.
      for (int ai = 0; ai < na_in; ++ai)
        piece_value += ar[ii * na_in + ai] * rows[ii][ai];
    }
    for (const Matched& mk : kappa) {
      const double t = mk.d * rows[mk.ii][mk.ai];
      piece_value += sgn * gs * (std::fabs(mk.omega - t) - t);
    }

    const bool better =
        minimize ? piece_value < best.value - kTiny
                 : piece_value > best.value + kTiny;
    if (better) {
      best.value = piece_value;
      best.rows = rows;
    }
  }
  return best;
}

// ---------------------------------------------------------------------------
// DOO over a product of per-history simplices with the occupancy-weighted
// L1 metric. Pure maximization; minimization runs through negation.
// ---------------------------------------------------------------------------

double l1(const std::vector<double>& a, const std::vector<double>& b) {
  double d = 0.0;
  for (size_t i = 0; i < a.size(); ++i) d += std::fabs(a[i] - b[i]);
  return d;
}

struct Cell {
  // verts[hist][vertex][coord]
  std::vector<std::vector<std::vector<double>>> verts;
  Rows center;
  double radius = 0.0;
  double f_lo = 0.0, f_hi = 0.0;
  long id = 0;
  int tree_depth = 0;
  // 0 = cheap bracket, 1 = refined (exact) bracket, 2 = split/retired.
  int state = 0;

  void finish(const std::vector<double>& weights) {
    center.clear();
    radius = 0.0;
    for (size_t h = 0; h < verts.size(); ++h) {
      const auto& vs = verts[h];
      std::vector<double> c(vs[0].size(), 0.0);
      for (const auto& v : vs)
        for (size_t i = 0; i < v.size(); ++i) c[i] += v[i] / vs.size();
      double r = 0.0;
      for (const auto& v : vs) r = std::max(r, l1(v, c));
      radius += weights[h] * r;
      center.push_back(std::move(c));
    }
  }
};

struct DooOutcome {
  double best_lo = -std::numeric_limits<double>::infinity();
  double global_hi = std::numeric_limits<double>::infinity();
  Rows best_rows;
  long expansions = 0;
  bool budget_exceeded = false;
};

struct EvalBracket {
  double lo, hi;
};
using PointEval = std::function<EvalBracket(const Rows&)>;

struct QueueEntry {
  double ucb;
  double radius;
  long id;
  size_t slot;
  bool operator<(const QueueEntry& o) const {
    if (ucb != o.ucb) return ucb < o.ucb;
    if (radius != o.radius) return radius < o.radius;
    return id > o.id;
  }
};

// `eval` must return a sound bracket on f at the point; `refine` (optional)
// returns a tighter (ideally exact) bracket and is charged only when a cell
// reaches the top of the queue — the lazy-evaluation pattern keeps
// expensive inner solves off never-promising cells.
DooOutcome doo_maximize(const std::vector<double>& weights, int num_actions,
                        const PointEval& eval, const PointEval* refine,
                        double lipschitz, double tol, long budget,
                        const std::vector<Rows>& seeds, double stick_margin,
                        std::optional<double> cap, std::ostream* trace) {
  DooOutcome out;
  // A positive stick_margin makes the incumbent sticky: a challenger must
  // beat its certified value by the margin to displace it. Warm-started
  // solves then return stable near-optimal points, which keeps the driver's
  // trajectories revisiting already-covered occupancy balls. Stopping
  // compares the optimistic bound against the incumbent, so the returned
  // bracket still closes to tol.
  auto offer = [&](double lo, const Rows& rows) {
    if (out.best_rows.empty() || lo > out.best_lo + stick_margin) {
      out.best_lo = lo;
      out.best_rows = rows;
    }
  };
  for (const Rows& s : seeds) {
    const EvalBracket b = refine != nullptr ? (*refine)(s) : eval(s);
    offer(b.lo, s);
  }

  std::vector<Cell> cells;
  cells.reserve(256);
  std::priority_queue<QueueEntry> queue;
  long next_id = 0;
  double resolved_hi = -std::numeric_limits<double>::infinity();

  auto push_cell = [&](Cell&& c) {
    c.id = next_id++;
    c.finish(weights);
    const EvalBracket b = eval(c.center);
    c.f_lo = b.lo;
    c.f_hi = b.hi;
    c.state = refine == nullptr ? 1 : 0;
    offer(b.lo, c.center);
    if (trace != nullptr)
      *trace << c.id << "," << c.tree_depth << "," << c.radius << "," << c.f_lo
             << "," << c.f_hi << "\n";
    const double ucb = c.f_hi + lipschitz * c.radius;
    cells.push_back(std::move(c));
    queue.push(QueueEntry{ucb, cells.back().radius, cells.back().id,
                          cells.size() - 1});
  };

  // Root cell: the full standard simplex per history.
  {
    Cell root;
    for (size_t h = 0; h < weights.size(); ++h) {
      std::vector<std::vector<double>> vs;
      for (int a = 0; a < num_actions; ++a) {
        std::vector<double> v(num_actions, 0.0);
        v[a] = 1.0;
        vs.push_back(std::move(v));
      }
      root.verts.push_back(std::move(vs));
    }
    push_cell(std::move(root));
  }

  auto capped = [&](double v) { return cap ? std::min(v, *cap) : v; };

  while (!queue.empty()) {
    const QueueEntry top = queue.top();
    if (cells[top.slot].state == 2) {  // stale entry of a split cell
      queue.pop();
      continue;
    }
    const double hi = capped(std::max(top.ucb, resolved_hi));
    if (hi - out.best_lo <= tol) {
      out.global_hi = std::max(hi, out.best_lo);
      return out;
    }
    if (out.expansions >= budget) {
      out.global_hi = std::max(hi, out.best_lo);
      out.budget_exceeded = true;
      return out;
    }
    queue.pop();
    if (cells[top.slot].state == 0) {
      Cell& c = cells[top.slot];
      const EvalBracket b = (*refine)(c.center);
      c.f_lo = b.lo;
      c.f_hi = b.hi;
      c.state = 1;
      offer(b.lo, c.center);
      queue.push(QueueEntry{c.f_hi + lipschitz * c.radius, c.radius, c.id,
                            top.slot});
      continue;
    }
    cells[top.slot].state = 2;
    Cell cell = std::move(cells[top.slot]);

    // Split the history whose weighted simplex diameter is largest along
    // its longest edge.
    int best_h = -1;
    double best_measure = 0.0;
    int ei = 0, ej = 0;
    for (size_t h = 0; h < cell.verts.size(); ++h) {
      const auto& vs = cell.verts[h];
      double diam = 0.0;
      int bi = 0, bj = 0;
      for (size_t i = 0; i < vs.size(); ++i) {
        for (size_t j = i + 1; j < vs.size(); ++j) {
          const double d = l1(vs[i], vs[j]);
          if (d > diam + kTiny) {
            diam = d;
            bi = static_cast<int>(i);
            bj = static_cast<int>(j);
          }
        }
      }
      const double measure = weights[h] * diam;
      if (measure > best_measure + kTiny) {
        best_measure = measure;
        best_h = static_cast<int>(h);
        ei = bi;
        ej = bj;
      }
    }
    if (best_h < 0 || best_measure <= kTiny) {
      // Point cell; its bracket is final.
      resolved_hi = std::max(resolved_hi, cell.f_hi);
      continue;
    }
    ++out.expansions;
    std::vector<double> mid(cell.verts[best_h][ei].size());
    for (size_t i = 0; i < mid.size(); ++i)
      mid[i] =
          0.5 * (cell.verts[best_h][ei][i] + cell.verts[best_h][ej][i]);
    Cell left = cell;
    left.tree_depth = cell.tree_depth + 1;
    left.verts[best_h][ei] = mid;
    Cell right = std::move(cell);
    right.tree_depth = left.tree_depth;
    right.verts[best_h][ej] = mid;
    push_cell(std::move(left));
    push_cell(std::move(right));
  }
  out.global_hi = capped(std::max(resolved_hi, out.best_lo));
  return out;
}

// Inner evaluation for the outer DOO: exact piecewise solve when the inner
// player's orientation matches the bound side, inner DOO otherwise.
bool inner_is_exact(const LocalGame& g, int outer_player) {
  if (g.bilinear()) return true;
  const BoundSide side = g.bound()->side();
  return (outer_player == 1 && side == BoundSide::kUpper) ||
         (outer_player == 2 && side == BoundSide::kLower);
}

// Sound but cheap inner bracket for exactly-solvable orientations: the init
// piece in closed form, per-cone floors for the lower side, and previously
// seen punishing rules for the upper side.
EvalBracket cheap_inner_bracket(const LocalGame& g, int outer_player,
                                const Rows& outer_rows,
                                const std::vector<Rows>& punishers) {
  const int inner_player = outer_player == 1 ? 2 : 1;
  const bool minimize = outer_player == 1;
  const int n_in = static_cast<int>(g.support(inner_player).size());
  const int na_in = inner_player == 1 ? g.model().na1() : g.model().na2();
  const int n_out =
      static_cast<int>(g.support(inner_player == 1 ? 2 : 1).size());
  const int na_out = inner_player == 1 ? g.model().na2() : g.model().na1();
  const double gamma = g.gamma();

  double value_init = 0.0;
  double ar_opt = 0.0;
  for (int ii = 0; ii < n_in; ++ii) {
    double best_full = 0.0, best_r = 0.0;
    for (int ai = 0; ai < na_in; ++ai) {
      double r = 0.0, c = 0.0;
      for (int io = 0; io < n_out; ++io) {
        for (int ao = 0; ao < na_out; ++ao) {
          const double w = outer_rows[io][ao];
          if (w <= 0.0) continue;
          if (inner_player == 2) {
            r += w * g.reward_tensor(io, ao, ii, ai);
            c += w * g.init_tensor(io, ao, ii, ai);
          } else {
            r += w * g.reward_tensor(ii, ai, io, ao);
            c += w * g.init_tensor(ii, ai, io, ao);
          }
        }
      }
      const double full = r + gamma * c;
      if (ai == 0 || (minimize ? full < best_full : full > best_full))
        best_full = full;
      if (ai == 0 || (minimize ? r < best_r : r > best_r)) best_r = r;
    }
    value_init += best_full;
    ar_opt += best_r;
  }

  double lo, hi;
  if (g.terminal() || g.bilinear()) {
    lo = hi = value_init;
  } else {
    // Piece floors/ceilings: distance term dropped.
    double extreme = value_init;
    for (const Cone& cone : g.bound()->cones(g.occupancy().depth() + 1)) {
      const double bound = ar_opt + gamma * cone.value;
      extreme = minimize ? std::min(extreme, bound)
                         : std::max(extreme, bound);
    }
    double achieved = value_init;
    for (const Rows& p : punishers) {
      const double v = outer_player == 1 ? g.payoff_rows(outer_rows, p)
                                         : g.payoff_rows(p, outer_rows);
      achieved = minimize ? std::min(achieved, v) : std::max(achieved, v);
    }
    lo = minimize ? extreme : achieved;
    hi = minimize ? achieved : extreme;
  }
  return {lo, hi};
}

EvalBracket exact_inner_bracket(const LocalGame& g, int outer_player,
                                const Rows& outer_rows,
                                std::vector<Rows>* punishers) {
  const InnerExact in =
      inner_exact(g, outer_player == 1 ? 2 : 1, outer_rows,
                  /*minimize=*/outer_player == 1);
  if (punishers != nullptr) {
    bool known = false;
    for (const Rows& p : *punishers)
      if (p == in.rows) known = true;
    if (!known) {
      punishers->push_back(in.rows);
      if (punishers->size() > 8) punishers->erase(punishers->begin());
    }
  }
  return {in.value, in.value};
}

EvalBracket evaluate_inner(const LocalGame& g, int outer_player,
                           const Rows& outer_rows,
                           const LocalSolveOptions& opt) {
  const int inner_player = outer_player == 1 ? 2 : 1;
  if (inner_is_exact(g, outer_player))
    return exact_inner_bracket(g, outer_player, outer_rows, nullptr);
  // Inner DOO with exact point evaluations of the payoff.
  const auto& weights = g.weights(inner_player);
  const int na = inner_player == 1 ? g.model().na1() : g.model().na2();
  const bool inner_minimizes = outer_player == 1;
  PointEval ev = [&](const Rows& rows) -> EvalBracket {
    const double v = outer_player == 1 ? g.payoff_rows(outer_rows, rows)
                                       : g.payoff_rows(rows, outer_rows);
    const double s = inner_minimizes ? -v : v;
    return {s, s};
  };
  std::vector<Rows> seeds;
  seeds.push_back(Rows(weights.size(),
                       std::vector<double>(na, 1.0 / na)));
  DooOutcome in =
      doo_maximize(weights, na, ev, nullptr, g.lipschitz_q(), opt.tol / 2,
                   opt.inner_budget, seeds, 0.0, std::nullopt, nullptr);
  // in brackets max of (sign-adjusted) payoff; translate back.
  if (inner_minimizes) return {-in.global_hi, -in.best_lo};
  return {in.best_lo, in.global_hi};
}

Rows rows_from_rule(const LocalGame& g, int player, const DecisionRule& rule,
                    int na) {
  const auto& supp = g.support(player);
  Rows rows(supp.size(), std::vector<double>(na, 1.0 / na));
  for (size_t i = 0; i < supp.size(); ++i) {
    const std::vector<double>* row = rule.row(supp[i]);
    if (row != nullptr && static_cast<int>(row->size()) == na) rows[i] = *row;
  }
  return rows;
}

int row_support(const Rows& rows) {
  int n = 0;
  for (const auto& r : rows)
    for (double v : r)
      if (v > 0.0) ++n;
  return n;
}

Rows thresholded(const Rows& rows, double cut) {
  Rows out = rows;
  for (auto& r : out) {
    double sum = 0.0;
    double mx = 0.0;
    for (double v : r) mx = std::max(mx, v);
    for (double& v : r) {
      if (v < cut && v < mx) v = 0.0;
      sum += v;
    }
    for (double& v : r) v /= sum;
  }
  return out;
}

Rows argmax_rounded(const Rows& rows) {
  Rows out = rows;
  for (auto& r : out) {
    size_t arg = 0;
    for (size_t i = 1; i < r.size(); ++i)
      if (r[i] > r[arg]) arg = i;
    std::fill(r.begin(), r.end(), 0.0);
    r[arg] = 1.0;
  }
  return out;
}

LocalSolution solve_outer(const LocalGame& g, int outer_player,
                          const LocalSolveOptions& opt) {
  const int na =
      outer_player == 1 ? g.model().na1() : g.model().na2();
  const auto& weights = g.weights(outer_player);
  const bool maximizing = outer_player == 1;
  const bool exact_dir = inner_is_exact(g, outer_player);

  std::vector<Rows> punishers;
  PointEval cheap = [&](const Rows& rows) -> EvalBracket {
    const EvalBracket b =
        exact_dir ? cheap_inner_bracket(g, outer_player, rows, punishers)
                  : evaluate_inner(g, outer_player, rows, opt);
    return maximizing ? b : EvalBracket{-b.hi, -b.lo};
  };
  PointEval refine = [&](const Rows& rows) -> EvalBracket {
    const EvalBracket b =
        exact_inner_bracket(g, outer_player, rows, &punishers);
    return maximizing ? b : EvalBracket{-b.hi, -b.lo};
  };

  std::vector<Rows> seeds;
  seeds.push_back(Rows(weights.size(), std::vector<double>(na, 1.0 / na)));
  if (opt.seed != nullptr)
    seeds.push_back(rows_from_rule(g, outer_player, *opt.seed, na));
  std::optional<double> cap;
  {
    // The cone-free relaxation seeds a strong candidate and, when the
    // envelope tightens the payoff one-sidedly, caps the optimistic bound.
    const StageLpResult lp =
        maximizing ? stage_maximin_lp(g) : stage_minimax_lp(g);
    seeds.push_back(lp.rows);
    if (exact_dir) cap = maximizing ? lp.value : -lp.value;
  }

  DooOutcome out =
      doo_maximize(weights, na, cheap, exact_dir ? &refine : nullptr,
                   g.lipschitz_q(), opt.tol, opt.budget, seeds,
                   opt.seed != nullptr ? opt.tol / 4 : 0.0, cap, opt.trace);

  auto exact_at = [&](const Rows& rows) -> EvalBracket {
    if (exact_dir) return refine(rows);
    return cheap(rows);  // inner-DOO bracket; already its tightest form
  };

  // Pin the returned guarantee to a fresh evaluation at the chosen point.
  {
    const EvalBracket b = exact_at(out.best_rows);
    out.best_lo = b.lo;
  }

  if (opt.sparsify && !out.budget_exceeded) {
    // Adopt a sparser near-optimal rule when it keeps the bracket intact.
    std::vector<Rows> candidates = {argmax_rounded(out.best_rows),
                                    thresholded(out.best_rows, 0.05)};
    for (const Rows& cand : candidates) {
      if (row_support(cand) >= row_support(out.best_rows)) continue;
      const EvalBracket b = exact_at(cand);
      if (b.lo >= out.global_hi - opt.tol) {
        out.best_rows = cand;
        out.best_lo = b.lo;
        break;
      }
    }
  }

  LocalSolution sol;
  sol.solver_tag = SolverTag::kNestedDoo;
  sol.budget_exceeded = out.budget_exceeded;
  sol.nodes_expanded = out.expansions;
  const DecisionRule outer_rule = g.make_rule(outer_player, out.best_rows);
  // Recover the punishing inner rule at the final point.
  const int inner_player = outer_player == 1 ? 2 : 1;
  DecisionRule inner_rule;
  if (exact_dir) {
    const InnerExact in = inner_exact(g, inner_player, out.best_rows,
                                      /*minimize=*/outer_player == 1);
    inner_rule = g.make_rule(inner_player, in.rows);
  } else {
    const auto& iw = g.weights(inner_player);
    const int ina = inner_player == 1 ? g.model().na1() : g.model().na2();
    PointEval iev = [&](const Rows& rows) -> EvalBracket {
      const double v = outer_player == 1 ? g.payoff_rows(out.best_rows, rows)
                                         : g.payoff_rows(rows, out.best_rows);
      const double s = outer_player == 1 ? -v : v;
      return {s, s};
    };
    std::vector<Rows> iseeds;
    iseeds.push_back(Rows(iw.size(), std::vector<double>(ina, 1.0 / ina)));
    DooOutcome in = doo_maximize(iw, ina, iev, nullptr, g.lipschitz_q(),
                                 opt.tol / 2, opt.inner_budget, iseeds, 0.0,
                                 std::nullopt, nullptr);
    inner_rule = g.make_rule(inner_player, in.best_rows);
  }
  if (outer_player == 1) {
    sol.beta1 = outer_rule;
    sol.beta2 = inner_rule;
    sol.value_lo = out.best_lo;
    sol.value_hi = std::max(out.global_hi, out.best_lo);
  } else {
    sol.beta1 = inner_rule;
    sol.beta2 = outer_rule;
    sol.value_hi = -out.best_lo;
    sol.value_lo = std::min(-out.global_hi, -out.best_lo);
  }
  return sol;
}

}  // namespace

LocalSolution solve_maximin(const LocalGame& g, const LocalSolveOptions& opt) {
  if (g.bilinear()) return stage_lp_solution(g);
  return solve_outer(g, 1, opt);
}

LocalSolution solve_minimax(const LocalGame& g, const LocalSolveOptions& opt) {
  if (g.bilinear()) return stage_lp_solution(g);
  return solve_outer(g, 2, opt);
}

LocalSolution solve_terminal_lp(const PosgModel& m, const OccupancyState& o) {
  LocalGame g(m, o, nullptr, m.gamma);
  return stage_lp_solution(g);
}

LocalSolution nested_doo(const LocalGame& g, const LocalSolveOptions& opt) {
  return solve_outer(g, 1, opt);
}

LocalSolution grid_solve(const LocalGame& g, int resolution) {
  const int na = g.model().na1();
  const auto& weights = g.weights(1);
  const int n1 = static_cast<int>(weights.size());

  // Count grid points: compositions of `resolution` into `na` parts, per
  // history.
  auto compositions = [&]() {
    std::vector<std::vector<double>> pts;
    std::vector<int> cur(na, 0);
    std::function<void(int, int)> rec = [&](int pos, int left) {
      if (pos == na - 1) {
        cur[pos] = left;
        std::vector<double> p(na);
        for (int i = 0; i < na; ++i)
          p[i] = static_cast<double>(cur[i]) / resolution;
        pts.push_back(std::move(p));
        return;
      }
      for (int v = 0; v <= left; ++v) {
        cur[pos] = v;
        rec(pos + 1, left - v);
      }
    };
    rec(0, resolution);
    return pts;
  }();

  double total = 1.0;
  for (int h = 0; h < n1; ++h) total *= static_cast<double>(compositions.size());
  if (total > 1e6)
    throw GuardError("grid_solve would exceed 10^6 joint grid points");

  LocalSolveOptions opt;
  opt.tol = 1e-3;
  double best_lo = -std::numeric_limits<double>::infinity();
  double best_hi = -std::numeric_limits<double>::infinity();
  Rows best_rows;
  std::vector<size_t> pick(n1, 0);
  while (true) {
    Rows rows;
    rows.reserve(n1);
    for (int h = 0; h < n1; ++h) rows.push_back(compositions[pick[h]]);
    const EvalBracket b = evaluate_inner(g, 1, rows, opt);
    if (b.lo > best_lo) {
      best_lo = b.lo;
      best_rows = rows;
    }
    best_hi = std::max(best_hi, b.hi);
    int h = 0;
    for (; h < n1; ++h) {
      if (++pick[h] < compositions.size()) break;
      pick[h] = 0;
    }
    if (h == n1) break;
  }

  double cover = 0.0;
  for (int h = 0; h < n1; ++h)
    cover += weights[h] *
             std::min(2.0, static_cast<double>(na) / resolution);

  LocalSolution sol;
  sol.solver_tag = SolverTag::kGrid;
  sol.beta1 = g.make_rule(1, best_rows);
  if (inner_is_exact(g, 1)) {
    const InnerExact punish = inner_exact(g, 2, best_rows, true);
    sol.beta2 = g.make_rule(2, punish.rows);
  } else {
    sol.beta2 = uniform_rule(g.model(), g.occupancy(), 2);
  }
  sol.value_lo = best_lo;
  sol.value_hi = best_hi + 2.0 * g.lipschitz_q() * cover;
  return sol;
}

}  // namespace ogs
