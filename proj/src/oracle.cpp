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

#include "ogs/oracle.h"

#include <cmath>
#include <stdexcept>

#include "json.hpp"
#include "ogs/lp.h"

namespace ogs {

namespace {

std::vector<int> marginal_support(const OccupancyState& o, int player) {
  std::vector<int> roots;
  for (const auto& [h, p] : marginal_private_histories(o, player))
    roots.push_back(h);
  return roots;
}

}  // namespace

MatrixGame normal_form(const PosgModel& m, const OccupancyState& o,
                       int horizon) {
  HistorySpace& space = *o.space();
  const auto pures1 = enumerate_pure_from(m, space, 1, marginal_support(o, 1),
                                          o.depth(), horizon);
  const auto pures2 = enumerate_pure_from(m, space, 2, marginal_support(o, 2),
                                          o.depth(), horizon);
  // The dense simplex is validated on desk-scale matrices; larger reductions
  // trip the guard rather than risk drifting pivots.
  if (static_cast<long>(pures1.size()) * static_cast<long>(pures2.size()) >
      200000L)
    throw GuardError("normal-form matrix exceeds the desk-scale size guard");
  MatrixGame g;
  g.rows = static_cast<int>(pures1.size());
  g.cols = static_cast<int>(pures2.size());
  g.payoff.resize(static_cast<size_t>(g.rows) * g.cols);
  std::vector<BehavioralStrategy> b1, b2;
  b1.reserve(pures1.size());
  b2.reserve(pures2.size());
  for (const auto& p : pures1) b1.push_back(pure_to_behavioral(m, space, p));
  for (const auto& p : pures2) b2.push_back(pure_to_behavioral(m, space, p));
  for (int i = 0; i < g.rows; ++i)
    for (int j = 0; j < g.cols; ++j)
      g.at(i, j) = evaluate_profile(m, o, b1[i], b2[j]);
  return g;
}

OracleSolution solve_matrix_game(const MatrixGame& g) {
  if (g.rows <= 0 || g.cols <= 0)
    throw ValidationError("matrix game must be nonempty");
  OracleSolution sol;

  // Row player: max v subject to sum_i x_i A(i,j) >= v for all j.
  {
    LpProblem p;
    for (int i = 0; i < g.rows; ++i) p.add_var(0.0);
    const int vp = p.add_var(1.0);
    const int vm = p.add_var(-1.0);
    for (int j = 0; j < g.cols; ++j) {
      std::vector<double> row(p.num_vars, 0.0);
      for (int i = 0; i < g.rows; ++i) row[i] = -g.at(i, j);
      row[vp] = 1.0;
      row[vm] = -1.0;
      p.add_ub(std::move(row), 0.0);
    }
    std::vector<double> simplex_row(p.num_vars, 0.0);
    for (int i = 0; i < g.rows; ++i) simplex_row[i] = 1.0;
    p.add_eq(std::move(simplex_row), 1.0);
    LpResult r = lp_solve_max(p);
    if (!r.ok()) throw std::runtime_error("row-player LP failed");
    sol.value = r.value;
    sol.row_mix.assign(r.x.begin(), r.x.begin() + g.rows);
  }

  // Column player: min u subject to sum_j y_j A(i,j) <= u for all i.
  {
    LpProblem p;
    for (int j = 0; j < g.cols; ++j) p.add_var(0.0);
    const int up = p.add_var(-1.0);
    const int um = p.add_var(1.0);
    for (int i = 0; i < g.rows; ++i) {
      std::vector<double> row(p.num_vars, 0.0);
      for (int j = 0; j < g.cols; ++j) row[j] = g.at(i, j);
      row[up] = -1.0;
      row[um] = 1.0;
      p.add_ub(std::move(row), 0.0);
    }
    std::vector<double> simplex_row(p.num_vars, 0.0);
    for (int j = 0; j < g.cols; ++j) simplex_row[j] = 1.0;
    p.add_eq(std::move(simplex_row), 1.0);
    LpResult r = lp_solve_max(p);
    if (!r.ok()) throw std::runtime_error("column-player LP failed");
    const double col_value = -r.value;
    if (std::fabs(col_value - sol.value) > 1e-7)
      throw std::runtime_error("matrix game LP duality gap exceeds tolerance");
    sol.col_mix.assign(r.x.begin(), r.x.begin() + g.cols);
  }
  return sol;
}

double oracle_value(const PosgModel& m, const OccupancyState& o, int horizon) {
  return solve_matrix_game(normal_form(m, o, horizon)).value;
}

double best_response_value(const PosgModel& m, const OccupancyState& o,
                           const BehavioralStrategy& opponent, int responder,
                           int horizon) {
  HistorySpace& space = *o.space();
  const auto pures = enumerate_pure_from(
      m, space, responder, marginal_support(o, responder), o.depth(), horizon);
  bool first = true;
  double best = 0.0;
  for (const auto& p : pures) {
    const BehavioralStrategy b = pure_to_behavioral(m, space, p);
    const double v = responder == 1 ? evaluate_profile(m, o, b, opponent)
                                    : evaluate_profile(m, o, opponent, b);
    if (first || (responder == 1 ? v > best : v < best)) {
      best = v;
      first = false;
    }
  }
  return best;
}

double exploitability(const PosgModel& m, const OccupancyState& o,
                      const BehavioralStrategy& s1,
                      const BehavioralStrategy& s2, int horizon) {
  return best_response_value(m, o, s2, 1, horizon) -
         best_response_value(m, o, s1, 2, horizon);
}

std::string golden_to_json(const PosgModel& m, int horizon,
                           const OracleSolution& sol) {
  nlohmann::ordered_json j;
  j["model"] = m.name;
  j["horizon"] = horizon;
  j["value"] = sol.value;
  j["row_mix"] = sol.row_mix;
  j["col_mix"] = sol.col_mix;
  return j.dump(2) + "\n";
}

}  // namespace ogs
