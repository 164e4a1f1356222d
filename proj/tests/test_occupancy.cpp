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

#include "ogs/occupancy.h"

#include <cmath>
#include <random>

#include "doctest.h"
#include "ogs/strategy.h"
#include "testutil.h"

using namespace ogs;
using namespace ogs::testutil;

TEST_SUITE_BEGIN("occupancy");

namespace {

DecisionRule const_rule(const PosgModel& m, const OccupancyState& o,
                        int player, int action) {
  const int na = player == 1 ? m.na1() : m.na2();
  DecisionRule r = uniform_rule(m, o, player);
  for (auto& [h, row] : r.table) {
    row.assign(na, 0.0);
    row[action] = 1.0;
  }
  return r;
}

}  // namespace

TEST_CASE("initial occupancy is b0 on the empty history") {
  PosgModel m = builtin("matching-pennies");
  OccupancyState o = initial_occupancy(m);
  CHECK(o.depth() == 0);
  REQUIRE(o.support_size() == 1);
  CHECK(o.entries()[0].second == doctest::Approx(1.0));

  PosgModel tiger = builtin("adversarial-tiger");
  OccupancyState ot = initial_occupancy(tiger);
  REQUIRE(ot.support_size() == 2);
  CHECK(ot.entries()[0].second == doctest::Approx(0.5));
  CHECK(ot.entries()[1].second == doctest::Approx(0.5));

  // A zero b0 component must be absent.
  PosgModel skew = tiger;
  skew.b0 = {1.0, 0.0};
  OccupancyState os = initial_occupancy(skew);
  CHECK(os.support_size() == 1);
  CHECK(os.entries()[0].first.state == 0);
}

TEST_CASE("matching pennies uniform step gives four quarter entries") {
  PosgModel m = builtin("matching-pennies");
  OccupancyState o0 = initial_occupancy(m);
  DecisionRuleProfile d{uniform_rule(m, o0, 1), uniform_rule(m, o0, 2)};
  OccupancyState o1 = transition(m, o0, d);
  CHECK(o1.depth() == 1);
  REQUIRE(o1.support_size() == 4);
  for (const auto& [k, p] : o1.entries()) {
    CHECK(p == doctest::Approx(0.25));
    CHECK(k.state == 0);
  }
}

TEST_CASE("deterministic profile with deterministic observations collapses") {
  PosgModel m = builtin("matching-pennies");
  OccupancyState o0 = initial_occupancy(m);
  DecisionRuleProfile d{const_rule(m, o0, 1, 0), const_rule(m, o0, 2, 1)};
  OccupancyState o1 = transition(m, o0, d);
  CHECK(o1.support_size() == 1);
  CHECK(o1.entries()[0].second == doctest::Approx(1.0));
}

TEST_CASE("tiger listen/quiet step splits hearing 0.85/0.15 per state") {
  PosgModel m = builtin("adversarial-tiger");
  OccupancyState o0 = initial_occupancy(m);
  DecisionRuleProfile d{const_rule(m, o0, 1, 0), const_rule(m, o0, 2, 0)};
  OccupancyState o1 = transition(m, o0, d);
  // Two states times {correct, incorrect} hearing; z2 is deterministic.
  REQUIRE(o1.support_size() == 4);
  const auto& pool1 = o1.space()->pool1;
  for (const auto& [k, p] : o1.entries()) {
    const bool heard_right = pool1.obs(k.h1) == k.state;
    CHECK(p == doctest::Approx(heard_right ? 0.5 * 0.85 : 0.5 * 0.15));
  }
}

TEST_CASE("expected reward examples") {
  PosgModel m = builtin("matching-pennies");
  OccupancyState o0 = initial_occupancy(m);
  DecisionRuleProfile uniform{uniform_rule(m, o0, 1), uniform_rule(m, o0, 2)};
  CHECK(expected_reward(m, o0, uniform) == doctest::Approx(0.0));
  DecisionRuleProfile heads{const_rule(m, o0, 1, 0), const_rule(m, o0, 2, 0)};
  CHECK(expected_reward(m, o0, heads) == doctest::Approx(1.0));

  PosgModel tiger = builtin("adversarial-tiger");
  OccupancyState t0 = initial_occupancy(tiger);
  DecisionRuleProfile open_left{const_rule(tiger, t0, 1, 1),
                                const_rule(tiger, t0, 2, 0)};
  const double expected =
      0.5 * tiger.reward(0, 1, 0) + 0.5 * tiger.reward(1, 1, 0);
  CHECK(expected_reward(tiger, t0, open_left) == doctest::Approx(expected));
}

TEST_CASE("missing decision-rule rows raise CoverageError") {
  PosgModel m = builtin("matching-pennies");
  OccupancyState o0 = initial_occupancy(m);
  DecisionRule empty;
  empty.player = 1;
  empty.depth = 0;
  DecisionRuleProfile d{empty, uniform_rule(m, o0, 2)};
  CHECK_THROWS_AS(transition(m, o0, d), CoverageError);
  CHECK_THROWS_AS(expected_reward(m, o0, d), CoverageError);
}

TEST_CASE("l1 distance") {
  PosgModel m = builtin("matching-pennies");
  OccupancyState o0 = initial_occupancy(m);
  CHECK(l1_distance(o0, o0) == doctest::Approx(0.0));

  // Disjoint supports at equal depth.
  std::mt19937 rng(7);
  OccupancyState a = random_occupancy(rng, m, 1);
  auto entries = a.entries();
  // Shift all mass to one key vs a different single key.
  std::vector<OccupancyState::Entry> ea = {{entries[0].first, 1.0}};
  std::vector<OccupancyState::Entry> eb = {{entries[1].first, 1.0}};
  OccupancyState pa(1, a.space(), ea);
  OccupancyState pb(1, a.space(), eb);
  CHECK(l1_distance(pa, pb) == doctest::Approx(2.0));

  std::vector<OccupancyState::Entry> e1 = {{entries[0].first, 0.7},
                                           {entries[1].first, 0.3}};
  std::vector<OccupancyState::Entry> e2 = {{entries[0].first, 0.4},
                                           {entries[1].first, 0.6}};
  CHECK(l1_distance(OccupancyState(1, a.space(), e1),
                    OccupancyState(1, a.space(), e2)) == doctest::Approx(0.6));

  CHECK_THROWS_AS(l1_distance(o0, a), ValidationError);
}

TEST_CASE("marginal private histories") {
  PosgModel m = builtin("matching-pennies");
  OccupancyState o0 = initial_occupancy(m);
  auto marg = marginal_private_histories(o0, 1);
  REQUIRE(marg.size() == 1);
  CHECK(marg[HistoryPool::kRoot] == doctest::Approx(1.0));

  DecisionRuleProfile uniform{uniform_rule(m, o0, 1), uniform_rule(m, o0, 2)};
  OccupancyState o1 = transition(m, o0, uniform);
  auto marg1 = marginal_private_histories(o1, 1);
  REQUIRE(marg1.size() == 2);
  for (const auto& [h, p] : marg1) CHECK(p == doctest::Approx(0.5));
}

TEST_CASE("debug dump format") {
  PosgModel m = builtin("matching-pennies");
  OccupancyState o0 = initial_occupancy(m);
  CHECK(o0.debug_dump(m) == "s0\t\t\t1\n");
  DecisionRuleProfile d{uniform_rule(m, o0, 1), uniform_rule(m, o0, 2)};
  OccupancyState o1 = transition(m, o0, d);
  const std::string dump = o1.debug_dump(m);
  CHECK(dump.find("s0\ta0z0\ta0z0\t0.25\n") != std::string::npos);
  CHECK(dump.find("a1z0") != std::string::npos);
}

TEST_CASE("property: mass conservation over random trajectories") {
  std::mt19937 rng(42);
  for (const std::string& name : builtin_names()) {
    PosgModel m = builtin(name);
    for (int rep = 0; rep < 50; ++rep) {
      OccupancyState o = initial_occupancy(m);
      const int depth = m.horizon;
      for (int t = 0; t < depth; ++t) {
        o = transition(m, o, random_profile(rng, m, o));
        CHECK(std::fabs(o.mass() - 1.0) <= 1e-9);
      }
    }
  }
}

TEST_CASE("property: transition is 1-Lipschitz in the occupancy (1-norm)") {
  std::mt19937 rng(43);
  for (const std::string& name : builtin_names()) {
    PosgModel m = builtin(name);
    for (int rep = 0; rep < 30; ++rep) {
      OccupancyState o = random_occupancy(rng, m, 1);
      OccupancyState o2 = perturb_occupancy(rng, o);
      DecisionRuleProfile d = random_profile(rng, m, o);
      const double before = l1_distance(o, o2);
      const double after =
          l1_distance(transition(m, o, d), transition(m, o2, d));
      CHECK(after <= before + 1e-9);
    }
  }
}

TEST_CASE("property: transition and reward are linear in the occupancy") {
  std::mt19937 rng(44);
  PosgModel m = builtin("matching-pennies-2step");
  for (int rep = 0; rep < 30; ++rep) {
    OccupancyState a = random_occupancy(rng, m, 1);
    OccupancyState b = perturb_occupancy(rng, a);
    DecisionRuleProfile d = random_profile(rng, m, a);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    const double alpha = u(rng);
    const OccupancyState mixed = mix(alpha, a, b);
    const OccupancyState lhs = transition(m, mixed, d);
    const OccupancyState rhs =
        mix(alpha, transition(m, a, d), transition(m, b, d));
    CHECK(l1_distance(lhs, rhs) <= 1e-9);
    const double r_lhs = expected_reward(m, mixed, d);
    const double r_rhs = alpha * expected_reward(m, a, d) +
                         (1 - alpha) * expected_reward(m, b, d);
    CHECK(std::fabs(r_lhs - r_rhs) <= 1e-9);
  }
}

TEST_CASE("property: transition and reward are linear in each decision rule") {
  std::mt19937 rng(45);
  for (const std::string& name : builtin_names()) {
    PosgModel m = builtin(name);
    for (int rep = 0; rep < 30; ++rep) {
      OccupancyState o = random_occupancy(rng, m, 1);
      DecisionRule b1a = random_rule(rng, m, o, 1);
      DecisionRule b1b = random_rule(rng, m, o, 1);
      DecisionRule b2 = random_rule(rng, m, o, 2);
      std::uniform_real_distribution<double> u(0.0, 1.0);
      const double alpha = u(rng);
      DecisionRule mixed_rule = b1a;
      for (auto& [h, row] : mixed_rule.table) {
        const auto& other = *b1b.row(h);
        for (size_t i = 0; i < row.size(); ++i)
          row[i] = alpha * row[i] + (1 - alpha) * other[i];
      }
      const OccupancyState lhs =
          transition(m, o, DecisionRuleProfile{mixed_rule, b2});
      const OccupancyState rhs =
          mix(alpha, transition(m, o, DecisionRuleProfile{b1a, b2}),
              transition(m, o, DecisionRuleProfile{b1b, b2}));
      CHECK(l1_distance(lhs, rhs) <= 1e-9);
      const double r_lhs =
          expected_reward(m, o, DecisionRuleProfile{mixed_rule, b2});
      const double r_rhs =
          alpha * expected_reward(m, o, DecisionRuleProfile{b1a, b2}) +
          (1 - alpha) * expected_reward(m, o, DecisionRuleProfile{b1b, b2});
      CHECK(std::fabs(r_lhs - r_rhs) <= 1e-9);
    }
  }
}

TEST_SUITE_END();
