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

#include <string>
#include <vector>

#include "ogs/strategy.h"

namespace ogs {

// Dense payoff matrix: rows are player-1 pure strategies, columns player-2
// pure strategies, entries are payoffs to player 1.
struct MatrixGame {
  int rows = 0;
  int cols = 0;
  std::vector<double> payoff;  // row-major

  double at(int i, int j) const { return payoff[i * cols + j]; }
  double& at(int i, int j) { return payoff[i * cols + j]; }
};

struct OracleSolution {
  double value = 0.0;
  std::vector<double> row_mix;
  std::vector<double> col_mix;
};

// Normal-form reduction of the subgame rooted at `o`, evaluated to absolute
// depth `horizon`: entry (i,j) = evaluate_profile(m, o, pure_i, pure_j).
// Throws GuardError when pure-strategy enumeration would explode.
MatrixGame normal_form(const PosgModel& m, const OccupancyState& o,
                       int horizon);

// Exact value and optimal mixes via two dense-simplex LPs (one per player).
OracleSolution solve_matrix_game(const MatrixGame& g);

// NEV of the subgame at `o`: solve_matrix_game(normal_form(...)).value.
double oracle_value(const PosgModel& m, const OccupancyState& o, int horizon);

// Best payoff (to player 1) the responder can force against the fixed
// opponent strategy: max over pure strategies for responder 1, min for
// responder 2.
double best_response_value(const PosgModel& m, const OccupancyState& o,
                           const BehavioralStrategy& opponent, int responder,
                           int horizon);

// BR1(vs s2) - BR2(vs s1); zero exactly at a Nash equilibrium.
double exploitability(const PosgModel& m, const OccupancyState& o,
                      const BehavioralStrategy& s1,
                      const BehavioralStrategy& s2, int horizon);

// Golden fixture files: JSON {model, horizon, value, row_mix, col_mix}.
std::string golden_to_json(const PosgModel& m, int horizon,
                           const OracleSolution& sol);

}  // namespace ogs
