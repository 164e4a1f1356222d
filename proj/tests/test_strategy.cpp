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

#include <cmath>
#include <random>

#include "doctest.h"
#include "ogs/bounds.h"
#include "testutil.h"

using namespace ogs;
using namespace ogs::testutil;

TEST_SUITE_BEGIN("strategy");

namespace {

BehavioralStrategy constant_strategy(const PosgModel& m,
                                     const OccupancyState& root, int player,
                                     int action, int horizon) {
  // Point-mass rules over every history reachable at each depth; built by
  // rolling forward against a uniform opponent.
  BehavioralStrategy s;
  s.player = player;
  s.first_depth = 0;
  OccupancyState o = root;
  const int na = player == 1 ? m.na1() : m.na2();
  for (int t = 0; t < horizon; ++t) {
    DecisionRule r = uniform_rule(m, o, player);
    for (auto& [h, row] : r.table) {
      row.assign(na, 0.0);
      row[action] = 1.0;
    }
    s.rules.push_back(r);
    if (t + 1 < horizon) {
      DecisionRuleProfile d{player == 1 ? r : uniform_rule(m, o, 1),
                            player == 2 ? r : uniform_rule(m, o, 2)};
      o = transition(m, o, d);
    }
  }
  // Off-path histories act the same constant way.
  s.complete_with_uniform = false;
  return s;
}

BehavioralStrategy uniform_strategy(const PosgModel& m,
                                    const OccupancyState& root, int player,
                                    int horizon) {
  BehavioralStrategy s;
  s.player = player;
  s.first_depth = 0;
  s.complete_with_uniform = true;
  OccupancyState o = root;
  for (int t = 0; t < horizon; ++t) {
    s.rules.push_back(uniform_rule(m, o, player));
    if (t + 1 < horizon)
      o = transition(m, o, DecisionRuleProfile{uniform_rule(m, o, 1),
                                               uniform_rule(m, o, 2)});
  }
  return s;
}

}  // namespace

TEST_CASE("uniform_rule") {
  PosgModel m = builtin("matching-pennies");
  OccupancyState o0 = initial_occupancy(m);
  DecisionRule r = uniform_rule(m, o0, 1);
  REQUIRE(r.table.size() == 1);
  CHECK(r.table.at(HistoryPool::kRoot) ==
        std::vector<double>{0.5, 0.5});
  CHECK_NOTHROW(r.validate());

  // Two-history support gives two uniform rows.
  DecisionRuleProfile d{uniform_rule(m, o0, 1), uniform_rule(m, o0, 2)};
  OccupancyState o1 = transition(m, o0, d);
  CHECK(uniform_rule(m, o1, 1).table.size() == 2);
}

TEST_CASE("evaluate_profile on matching pennies") {
  PosgModel m = builtin("matching-pennies");
  OccupancyState o0 = initial_occupancy(m);
  CHECK(evaluate_profile(m, o0, uniform_strategy(m, o0, 1, 1),
                         uniform_strategy(m, o0, 2, 1)) == doctest::Approx(0.0));
  CHECK(evaluate_profile(m, o0, constant_strategy(m, o0, 1, 0, 1),
                         constant_strategy(m, o0, 2, 0, 1)) ==
        doctest::Approx(1.0));
}

TEST_CASE("evaluate_profile on the 2-step game, uniform vs uniform") {
  PosgModel m = builtin("matching-pennies-2step");
  OccupancyState o0 = initial_occupancy(m);
  // Each stage reward vanishes by symmetry, so the discounted sum does too.
  CHECK(evaluate_profile(m, o0, uniform_strategy(m, o0, 1, 2),
                         uniform_strategy(m, o0, 2, 2)) ==
        doctest::Approx(0.0).epsilon(1e-12));
}

TEST_CASE("enumerate_pure counts reduced strategies") {
  PosgModel mp = builtin("matching-pennies");
  {
    HistorySpace space;
    CHECK(enumerate_pure(mp, space, 1, 1).size() == 2);
  }
  {
    // H=2 with |Z|=1: 2 root choices x 2 at the single successor.
    PosgModel m = mp;
    m.horizon = 2;
    HistorySpace space;
    CHECK(enumerate_pure(m, space, 1, 2).size() == 4);
  }
  {
    // H=2 with |Z|=2: 2 * 2^2 = 8.
    PosgModel m = builtin("matching-pennies-2step");
    HistorySpace space;
    CHECK(enumerate_pure(m, space, 1, 2).size() == 8);
  }
}

TEST_CASE("enumeration guard trips on deep horizons") {
  PosgModel m = builtin("matching-pennies-2step");
  m.horizon = 12;
  HistorySpace space;
  CHECK_THROWS_AS(enumerate_pure(m, space, 1, 12), GuardError);
}

TEST_CASE("pure strategies convert to point-mass behavioral strategies") {
  PosgModel m = builtin("matching-pennies");
  OccupancyState o0 = initial_occupancy(m);
  HistorySpace& space = *o0.space();
  auto pures = enumerate_pure(m, space, 1, 1);
  REQUIRE(pures.size() == 2);
  for (const PureStrategy& p : pures) {
    BehavioralStrategy b = pure_to_behavioral(m, space, p);
    REQUIRE(b.rules.size() == 1);
    for (const auto& [h, row] : b.rules[0].table) {
      CHECK((row == std::vector<double>{1.0, 0.0} ||
             row == std::vector<double>{0.0, 1.0}));
    }
    // Evaluation agrees with a direct reward lookup.
    const double v =
        evaluate_profile(m, o0, b, uniform_strategy(m, o0, 2, 1));
    CHECK(v == doctest::Approx(0.0));
  }
}

TEST_CASE("mixing two pure strategies evaluates to the mean (linearity)") {
  PosgModel m = builtin("matching-pennies");
  OccupancyState o0 = initial_occupancy(m);
  HistorySpace& space = *o0.space();
  auto pures = enumerate_pure(m, space, 1, 1);
  BehavioralStrategy b0 = pure_to_behavioral(m, space, pures[0]);
  BehavioralStrategy b1 = pure_to_behavioral(m, space, pures[1]);
  BehavioralStrategy opp = constant_strategy(m, o0, 2, 0, 1);
  const double v0 = evaluate_profile(m, o0, b0, opp);
  const double v1 = evaluate_profile(m, o0, b1, opp);
  BehavioralStrategy mix50 = b0;
  for (auto& [h, row] : mix50.rules[0].table) {
    const auto& other = *b1.rules[0].row(h);
    for (size_t i = 0; i < row.size(); ++i) row[i] = 0.5 * (row[i] + other[i]);
  }
  CHECK(evaluate_profile(m, o0, mix50, opp) ==
        doctest::Approx(0.5 * (v0 + v1)));
}

TEST_CASE("property: value is linear in one depth's rule") {
  std::mt19937 rng(46);
  PosgModel m = builtin("matching-pennies-2step");
  OccupancyState o0 = initial_occupancy(m);
  for (int rep = 0; rep < 20; ++rep) {
    BehavioralStrategy s2 = uniform_strategy(m, o0, 2, 2);
    BehavioralStrategy sa = uniform_strategy(m, o0, 1, 2);
    BehavioralStrategy sb = sa;
    // Randomize the depth-1 rule in both copies.
    OccupancyState o1 = transition(
        m, o0, DecisionRuleProfile{sa.rules[0], s2.rules[0]});
    sa.rules[1] = random_rule(rng, m, o1, 1);
    sb.rules[1] = random_rule(rng, m, o1, 1);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    const double alpha = u(rng);
    BehavioralStrategy sm = sa;
    for (auto& [h, row] : sm.rules[1].table) {
      const auto& other = *sb.rules[1].row(h);
      for (size_t i = 0; i < row.size(); ++i)
        row[i] = alpha * row[i] + (1 - alpha) * other[i];
    }
    const double va = evaluate_profile(m, o0, sa, s2);
    const double vb = evaluate_profile(m, o0, sb, s2);
    const double vm = evaluate_profile(m, o0, sm, s2);
    CHECK(std::fabs(vm - (alpha * va + (1 - alpha) * vb)) <= 1e-9);
  }
}

TEST_CASE("property: value is linear in the root occupancy") {
  std::mt19937 rng(47);
  PosgModel m = builtin("adversarial-tiger");
  for (int rep = 0; rep < 10; ++rep) {
    OccupancyState a = random_occupancy(rng, m, 1);
    OccupancyState b = perturb_occupancy(rng, a);
    // Strategies over depths 1..2 built on a's support (same as b's).
    BehavioralStrategy s1, s2;
    s1.player = 1;
    s2.player = 2;
    s1.first_depth = s2.first_depth = 1;
    s1.complete_with_uniform = s2.complete_with_uniform = true;
    OccupancyState cur = a;
    for (int t = 1; t < 3; ++t) {
      s1.rules.push_back(uniform_rule(m, cur, 1));
      s2.rules.push_back(uniform_rule(m, cur, 2));
      if (t + 1 < 3)
        cur = transition(m, cur,
                         DecisionRuleProfile{s1.rules.back(), s2.rules.back()});
    }
    std::uniform_real_distribution<double> u(0.0, 1.0);
    const double alpha = u(rng);
    const double va = evaluate_profile(m, a, s1, s2);
    const double vb = evaluate_profile(m, b, s1, s2);
    const double vm = evaluate_profile(m, mix(alpha, a, b), s1, s2);
    CHECK(std::fabs(vm - (alpha * va + (1 - alpha) * vb)) <= 1e-9);
  }
}

TEST_CASE("property: profile values respect the discounted reward sandwich") {
  std::mt19937 rng(48);
  for (const std::string& name : builtin_names()) {
    PosgModel m = builtin(name);
    const RewardBounds rb = reward_bounds(m);
    OccupancyState o0 = initial_occupancy(m);
    const double vmax =
        rb.r_max * discounted_range_factor(m.gamma, m.horizon);
    const double vmin =
        rb.r_min * discounted_range_factor(m.gamma, m.horizon);
    for (int rep = 0; rep < 10; ++rep) {
      BehavioralStrategy s1, s2;
      s1.player = 1;
      s2.player = 2;
      OccupancyState cur = o0;
      for (int t = 0; t < m.horizon; ++t) {
        s1.rules.push_back(random_rule(rng, m, cur, 1));
        s2.rules.push_back(random_rule(rng, m, cur, 2));
        if (t + 1 < m.horizon)
          cur = transition(
              m, cur, DecisionRuleProfile{s1.rules.back(), s2.rules.back()});
      }
      const double v = evaluate_profile(m, o0, s1, s2);
      CHECK(v <= vmax + 1e-9);
      CHECK(v >= vmin - 1e-9);
    }
  }
}

TEST_CASE("strategy JSON round-trip") {
  PosgModel m = builtin("matching-pennies-2step");
  OccupancyState o0 = initial_occupancy(m);
  BehavioralStrategy s = uniform_strategy(m, o0, 1, 2);
  const std::string text = strategy_to_json(m, *o0.space(), s);
  BehavioralStrategy back = strategy_from_json(m, *o0.space(), text);
  CHECK(back.player == 1);
  CHECK(back.complete_with_uniform);
  REQUIRE(back.rules.size() == 2);
  CHECK(strategy_to_json(m, *o0.space(), back) == text);
}

TEST_CASE("coverage gaps are reported unless uniform completion is set") {
  PosgModel m = builtin("matching-pennies");
  OccupancyState o0 = initial_occupancy(m);
  BehavioralStrategy s1;
  s1.player = 1;
  s1.rules.push_back(DecisionRule{1, 0, {}});
  BehavioralStrategy s2 = uniform_strategy(m, o0, 2, 1);
  CHECK_THROWS_AS(evaluate_profile(m, o0, s1, s2), CoverageError);
  s1.complete_with_uniform = true;
  CHECK(evaluate_profile(m, o0, s1, s2) == doctest::Approx(0.0));
}

TEST_SUITE_END();
