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

#include "ogs/strategy.h"

#include <algorithm>
#include <cmath>

#include "json.hpp"

namespace ogs {

namespace {
constexpr long kEnumerationGuard = 1000000;

using Json = nlohmann::ordered_json;
}  // namespace

void DecisionRule::validate() const {
  for (const auto& [h, row] : table) {
    double sum = 0.0;
    for (double p : row) {
      if (p < 0.0)
        throw ValidationError("decision rule row has a negative probability");
      sum += p;
    }
    if (std::fabs(sum - 1.0) > 1e-9)
      throw ValidationError("decision rule row does not sum to 1");
  }
}

const DecisionRule& BehavioralStrategy::rule_at(int depth) const {
  if (!covers(depth))
    throw CoverageError("strategy does not cover depth " +
                        std::to_string(depth));
  return rules[depth - first_depth];
}

DecisionRule uniform_rule(const PosgModel& m, const OccupancyState& o,
                          int player) {
  const int na = player == 1 ? m.na1() : m.na2();
  DecisionRule rule;
  rule.player = player;
  rule.depth = o.depth();
  const std::vector<double> row(na, 1.0 / na);
  for (const auto& [h, p] : marginal_private_histories(o, player))
    rule.table[h] = row;
  return rule;
}

DecisionRule rule_for_occupancy(const PosgModel& m, const OccupancyState& o,
                                const BehavioralStrategy& s) {
  const int na = s.player == 1 ? m.na1() : m.na2();
  const DecisionRule& stored = s.rule_at(o.depth());
  DecisionRule rule;
  rule.player = s.player;
  rule.depth = o.depth();
  for (const auto& [h, p] : marginal_private_histories(o, s.player)) {
    const std::vector<double>* row = stored.row(h);
    if (row != nullptr) {
      rule.table[h] = *row;
    } else if (s.complete_with_uniform) {
      rule.table[h] = std::vector<double>(na, 1.0 / na);
    } else {
      throw CoverageError(
          "strategy for player " + std::to_string(s.player) +
          " misses reachable history '" +
          o.space()->pool(s.player).render(h) + "' at depth " +
          std::to_string(o.depth()));
    }
  }
  return rule;
}

double evaluate_profile(const PosgModel& m, const OccupancyState& o,
                        const BehavioralStrategy& s1,
                        const BehavioralStrategy& s2) {
  const int end1 = s1.first_depth + static_cast<int>(s1.rules.size());
  const int end2 = s2.first_depth + static_cast<int>(s2.rules.size());
  if (end1 != end2)
    throw ValidationError("strategies end at different depths");
  const int end = end1;
  if (o.depth() >= end) return 0.0;
  DecisionRuleProfile d{rule_for_occupancy(m, o, s1),
                        rule_for_occupancy(m, o, s2)};
  double value = expected_reward(m, o, d);
  if (o.depth() + 1 < end)
    value += m.gamma * evaluate_profile(m, transition(m, o, d), s1, s2);
  return value;
}

namespace {

// Reduced strategy count depends only on depth: c(t) = |A| * c(t+1)^|Z|.
long count_per_root(int na, int nz, int depth, int horizon) {
  long c = 1;
  for (int t = horizon - 1; t >= depth; --t) {
    double projected = static_cast<double>(na) * std::pow(static_cast<double>(c), nz);
    if (projected > 2.0 * kEnumerationGuard) return 2 * kEnumerationGuard;
    c = na * static_cast<long>(std::llround(std::pow(static_cast<double>(c), nz)));
  }
  return c;
}

std::vector<std::map<int, int>> enum_subtree(HistoryPool& pool, int na, int nz,
                                             int h, int depth, int horizon) {
  if (depth >= horizon) return {{}};
  std::vector<std::map<int, int>> out;
  for (int a = 0; a < na; ++a) {
    std::vector<std::map<int, int>> partial = {{{h, a}}};
    for (int z = 0; z < nz; ++z) {
      const int child = pool.child(h, a, z);
      auto sub = enum_subtree(pool, na, nz, child, depth + 1, horizon);
      std::vector<std::map<int, int>> merged;
      merged.reserve(partial.size() * sub.size());
      for (const auto& lhs : partial) {
        for (const auto& rhs : sub) {
          std::map<int, int> combo = lhs;
          combo.insert(rhs.begin(), rhs.end());
          merged.push_back(std::move(combo));
        }
      }
      partial = std::move(merged);
    }
    for (auto& t : partial) out.push_back(std::move(t));
  }
  return out;
}

}  // namespace

std::vector<PureStrategy> enumerate_pure_from(const PosgModel& m,
                                              HistorySpace& space, int player,
                                              const std::vector<int>& roots,
                                              int first_depth, int horizon) {
  const int na = player == 1 ? m.na1() : m.na2();
  const int nz = player == 1 ? m.nz1() : m.nz2();
  HistoryPool& pool = space.pool(player);

  double total = 1.0;
  const long per_root = count_per_root(na, nz, first_depth, horizon);
  for (size_t i = 0; i < roots.size(); ++i) total *= per_root;
  if (total > kEnumerationGuard)
    throw GuardError("pure-strategy enumeration would exceed 10^6 strategies");

  std::vector<std::vector<std::map<int, int>>> per_root_tables;
  for (int root : roots)
    per_root_tables.push_back(
        enum_subtree(pool, na, nz, root, first_depth, horizon));

  std::vector<std::map<int, int>> tables = {{}};
  for (const auto& options : per_root_tables) {
    std::vector<std::map<int, int>> merged;
    merged.reserve(tables.size() * options.size());
    for (const auto& lhs : tables) {
      for (const auto& rhs : options) {
        std::map<int, int> combo = lhs;
        combo.insert(rhs.begin(), rhs.end());
        merged.push_back(std::move(combo));
      }
    }
    tables = std::move(merged);
  }

  std::vector<PureStrategy> out;
  out.reserve(tables.size());
  for (auto& t : tables) {
    PureStrategy p;
    p.player = player;
    p.first_depth = first_depth;
    p.horizon = horizon;
    p.table = std::move(t);
    out.push_back(std::move(p));
  }
  return out;
}

std::vector<PureStrategy> enumerate_pure(const PosgModel& m,
                                         HistorySpace& space, int player,
                                         int horizon) {
  return enumerate_pure_from(m, space, player, {HistoryPool::kRoot}, 0,
                             horizon);
}

BehavioralStrategy pure_to_behavioral(const PosgModel& m,
                                      const HistorySpace& space,
                                      const PureStrategy& p) {
  const int na = p.player == 1 ? m.na1() : m.na2();
  const HistoryPool& pool = space.pool(p.player);
  BehavioralStrategy s;
  s.player = p.player;
  s.first_depth = p.first_depth;
  s.rules.resize(p.horizon - p.first_depth);
  for (int t = 0; t < static_cast<int>(s.rules.size()); ++t) {
    s.rules[t].player = p.player;
    s.rules[t].depth = p.first_depth + t;
  }
  for (const auto& [h, a] : p.table) {
    std::vector<double> row(na, 0.0);
    row[a] = 1.0;
    s.rules[pool.depth(h) - p.first_depth].table[h] = std::move(row);
  }
  return s;
}

std::string strategy_to_json(const PosgModel& /*m*/, const HistorySpace& space,
                             const BehavioralStrategy& s) {
  Json j;
  j["player"] = s.player;
  j["first_depth"] = s.first_depth;
  j["complete_with_uniform"] = s.complete_with_uniform;
  Json rules = Json::array();
  const HistoryPool& pool = space.pool(s.player);
  for (const DecisionRule& r : s.rules) {
    Json table = Json::object();
    for (const auto& [h, row] : r.table) table[pool.render(h)] = row;
    Json rec;
    rec["depth"] = r.depth;
    rec["table"] = table;
    rules.push_back(rec);
  }
  j["rules"] = rules;
  return j.dump(2) + "\n";
}

BehavioralStrategy strategy_from_json(const PosgModel& m, HistorySpace& space,
                                      const std::string& text) {
  Json j;
  try {
    j = Json::parse(text);
  } catch (const std::exception& e) {
    throw ParseError(std::string("malformed strategy JSON: ") + e.what());
  }
  BehavioralStrategy s;
  try {
    s.player = j.at("player").get<int>();
    s.first_depth = j.value("first_depth", 0);
    s.complete_with_uniform = j.value("complete_with_uniform", false);
    const int na = s.player == 1 ? m.na1() : m.na2();
    HistoryPool& pool = space.pool(s.player);
    for (const Json& rec : j.at("rules")) {
      DecisionRule r;
      r.player = s.player;
      r.depth = rec.at("depth").get<int>();
      for (const auto& [key, row] : rec.at("table").items()) {
        auto dist = row.get<std::vector<double>>();
        if (static_cast<int>(dist.size()) != na)
          throw ParseError("strategy row has wrong arity");
        r.table[pool.intern_rendered(key)] = std::move(dist);
      }
      r.validate();
      s.rules.push_back(std::move(r));
    }
  } catch (const Json::exception& e) {
    throw ParseError(std::string("strategy schema violation: ") + e.what());
  }
  std::sort(s.rules.begin(), s.rules.end(),
            [](const DecisionRule& a, const DecisionRule& b) {
              return a.depth < b.depth;
            });
  for (size_t i = 0; i < s.rules.size(); ++i) {
    if (s.rules[i].depth != s.first_depth + static_cast<int>(i))
      throw ParseError("strategy rules do not cover consecutive depths");
  }
  return s;
}

}  // namespace ogs
