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

#include <map>
#include <string>
#include <vector>

#include "ogs/occupancy.h"

namespace ogs {

class GuardError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Behavioral decision rule at one depth: private history id -> distribution
// over the player's actions. Rows are only stored for histories the rule
// actually covers.
struct DecisionRule {
  int player = 1;
  int depth = 0;
  std::map<int, std::vector<double>> table;

  const std::vector<double>* row(int history) const {
    auto it = table.find(history);
    return it == table.end() ? nullptr : &it->second;
  }
  void validate() const;  // rows are distributions within 1e-9
};

struct DecisionRuleProfile {
  DecisionRule beta1, beta2;
  int depth() const { return beta1.depth; }
};

// Consecutive decision rules for one player covering depths
// [first_depth, first_depth + rules.size()). When `complete_with_uniform`
// is set, histories without a stored row act uniformly (the convention for
// extracted strategies; unreached histories get uniform rules).
struct BehavioralStrategy {
  int player = 1;
  int first_depth = 0;
  bool complete_with_uniform = false;
  std::vector<DecisionRule> rules;

  const DecisionRule& rule_at(int depth) const;
  bool covers(int depth) const {
    return depth >= first_depth &&
           depth < first_depth + static_cast<int>(rules.size());
  }
};

// Reduced pure strategy: a single action for every private history reachable
// under the strategy itself, over depths [first_depth, horizon).
struct PureStrategy {
  int player = 1;
  int first_depth = 0;
  int horizon = 0;
  std::map<int, int> table;  // history id -> action
};

// Uniform rule over every history with positive marginal in `o`.
DecisionRule uniform_rule(const PosgModel& m, const OccupancyState& o,
                          int player);

// Rule for `player` at `o.depth()` taken from `s`, with uniform rows filled
// in for positive-marginal histories the strategy does not cover (only when
// s.complete_with_uniform, otherwise CoverageError).
DecisionRule rule_for_occupancy(const PosgModel& m, const OccupancyState& o,
                                const BehavioralStrategy& s);

// Value of the profile from o.depth() to the end of both strategies'
// coverage: V(o) = r(o, beta) + gamma * V(T(o, beta)).
double evaluate_profile(const PosgModel& m, const OccupancyState& o,
                        const BehavioralStrategy& s1,
                        const BehavioralStrategy& s2);

// All reduced pure strategies for `player` over depths [0, horizon), rooted
// at the empty history. Guarded at 10^6 strategies.
std::vector<PureStrategy> enumerate_pure(const PosgModel& m,
                                         HistorySpace& space, int player,
                                         int horizon);

// As above but rooted at the given history set at depth `first_depth`
// (the marginal support of some occupancy state).
std::vector<PureStrategy> enumerate_pure_from(const PosgModel& m,
                                              HistorySpace& space, int player,
                                              const std::vector<int>& roots,
                                              int first_depth, int horizon);

BehavioralStrategy pure_to_behavioral(const PosgModel& m,
                                      const HistorySpace& space,
                                      const PureStrategy& p);

// JSON strategy exchange format: {player, first_depth, complete_with_uniform,
// rules: [depth -> {rendered history -> distribution}]}.
std::string strategy_to_json(const PosgModel& m, const HistorySpace& space,
                             const BehavioralStrategy& s);
BehavioralStrategy strategy_from_json(const PosgModel& m, HistorySpace& space,
                                      const std::string& text);

}  // namespace ogs
