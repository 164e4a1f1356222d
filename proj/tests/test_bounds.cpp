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

#include "ogs/bounds.h"

#include <cmath>
#include <random>

#include "doctest.h"
#include "ogs/oracle.h"
#include "testutil.h"

using namespace ogs;
using namespace ogs::testutil;

TEST_SUITE_BEGIN("bounds");

namespace {

// Independent reference for the cooperative relaxation: plain nested loops,
// no shared code with bounds.cpp beyond the model accessors.
std::vector<std::vector<double>> reference_backup(const PosgModel& m,
                                                  bool maximize) {
  const int h = m.horizon;
  std::vector<std::vector<double>> v(h + 1, std::vector<double>(m.ns(), 0.0));
  for (int t = h - 1; t >= 0; --t) {
    for (int s = 0; s < m.ns(); ++s) {
      double best = maximize ? -1e18 : 1e18;
      for (int a1 = 0; a1 < m.na1(); ++a1) {
        for (int a2 = 0; a2 < m.na2(); ++a2) {
          double q = m.reward(s, a1, a2);
          for (const NextEntry& e : m.next(s, a1, a2))
            q += m.gamma * e.p * v[t + 1][e.s2];
          best = maximize ? std::max(best, q) : std::min(best, q);
        }
      }
      v[t][s] = best;
    }
  }
  return v;
}

}  // namespace

TEST_CASE("init_upper on matching pennies is the one-step max") {
  PosgModel m = builtin("matching-pennies");
  ValueBound u = init_upper(m, 1, 0);
  CHECK(u.init_values(0)[0] == doctest::Approx(1.0));
  CHECK(u.init_values(1)[0] == doctest::Approx(0.0));
  OccupancyState o0 = initial_occupancy(m);
  CHECK(u.eval(o0) == doctest::Approx(1.0));

  ValueBound l = init_lower(m, 1, 0);
  CHECK(l.eval(o0) == doctest::Approx(-1.0));
}

TEST_CASE("constant-reward game collapses both bounds") {
  PosgModel m = builtin("matching-pennies");
  for (double& r : m.rewards) r = 2.5;
  OccupancyState o0 = initial_occupancy(m);
  CHECK(init_upper(m, 1, 0).eval(o0) == doctest::Approx(2.5));
  CHECK(init_lower(m, 1, 0).eval(o0) == doctest::Approx(2.5));
}

TEST_CASE("tiger init bounds match an independent backward induction") {
  PosgModel m = builtin("adversarial-tiger");
  ValueBound u = init_upper(m, 3, 0);
  ValueBound l = init_lower(m, 3, 0);
  const auto ref_u = reference_backup(m, true);
  const auto ref_l = reference_backup(m, false);
  for (int t = 0; t <= 3; ++t) {
    for (int s = 0; s < m.ns(); ++s) {
      CHECK(u.init_values(t)[s] == doctest::Approx(ref_u[t][s]).epsilon(1e-12));
      CHECK(l.init_values(t)[s] == doctest::Approx(ref_l[t][s]).epsilon(1e-12));
    }
  }
}

TEST_CASE("init bounds sandwich the oracle value on every builtin") {
  for (const std::string& name : builtin_names()) {
    PosgModel m = builtin(name);
    OccupancyState o0 = initial_occupancy(m);
    const int h = std::min(m.horizon, 2);
    const double v = oracle_value(m, o0, h);
    PosgModel truncated = m;
    truncated.horizon = h;
    ValueBound u = init_upper(truncated, h, 0);
    ValueBound l = init_lower(truncated, h, 0);
    CHECK(l.eval(o0) <= v + 1e-9);
    CHECK(u.eval(o0) >= v - 1e-9);
  }
}

TEST_CASE("eval_bound envelope arithmetic") {
  PosgModel m = builtin("matching-pennies");
  OccupancyState o0 = initial_occupancy(m);
  ValueBound u = init_upper(m, 1, 0);
  // No cones: initial value.
  CHECK(u.eval(o0) == doctest::Approx(1.0));
  // Zero-distance cone caps the envelope at its summit.
  u.add_cone(o0, 0.5, 1.0);
  CHECK(u.eval(o0) == doctest::Approx(0.5));
}

TEST_CASE("cone at distance combines summit and slope") {
  PosgModel m = builtin("adversarial-tiger");
  OccupancyState o0 = initial_occupancy(m);
  // Make the initial bound irrelevant.
  std::vector<std::vector<double>> init(1, std::vector<double>(m.ns(), 10.0));
  ValueBound u(BoundSide::kUpper, std::move(init));
  std::vector<OccupancyState::Entry> entries = o0.entries();
  entries[0].second = 0.35;
  entries[1].second = 0.65;
  OccupancyState shifted(0, o0.space(), std::move(entries));
  REQUIRE(l1_distance(o0, shifted) == doctest::Approx(0.3));
  u.add_cone(shifted, 0.5, 1.0);
  CHECK(u.eval(o0) == doctest::Approx(0.8));  // 0.5 + 1.0 * 0.3
}

TEST_CASE("dominated insertions leave the envelope unchanged") {
  PosgModel m = builtin("matching-pennies");
  OccupancyState o0 = initial_occupancy(m);
  ValueBound u = init_upper(m, 1, 0);
  u.add_cone(o0, 0.5, 1.0);
  const double before = u.eval(o0);
  u.add_cone(o0, 0.9, 1.0);  // above the current envelope at its own vertex
  CHECK(u.eval(o0) == doctest::Approx(before));
}

TEST_CASE("property: add_cone caps the envelope exactly per definition") {
  std::mt19937 rng(60);
  PosgModel m = builtin("matching-pennies-2step");
  ValueBound u = init_upper(m, 2, 0);
  for (int rep = 0; rep < 40; ++rep) {
    OccupancyState vertex = random_occupancy(rng, m, 1);
    std::uniform_real_distribution<double> val(-1.5, 1.5);
    const double v = val(rng);
    const double slope = 1.0;
    OccupancyState probe = perturb_occupancy(rng, random_occupancy(rng, m, 1));
    const double before = u.eval(probe);
    u.add_cone(vertex, v, slope);
    const double expected =
        std::min(before, v + slope * l1_distance(vertex, probe));
    CHECK(u.eval(probe) == doctest::Approx(expected).epsilon(1e-12));
    CHECK(u.eval(vertex) <= v + 1e-12);
  }
}

TEST_CASE("property: envelope is Lipschitz in the occupancy") {
  std::mt19937 rng(61);
  PosgModel m = builtin("adversarial-tiger");
  ValueBound u = init_upper(m, 3, 0);
  ValueBound l = init_lower(m, 3, 0);
  for (int rep = 0; rep < 10; ++rep) {
    OccupancyState vertex = random_occupancy(rng, m, 1);
    u.add_cone(vertex, u.eval(vertex) - 0.05, u.lipschitz_at(1));
    l.add_cone(vertex, l.eval(vertex) + 0.05, l.lipschitz_at(1));
  }
  for (int rep = 0; rep < 50; ++rep) {
    OccupancyState a = random_occupancy(rng, m, 1);
    OccupancyState b = perturb_occupancy(rng, a);
    const double d = l1_distance(a, b);
    CHECK(std::fabs(u.eval(a) - u.eval(b)) <= u.lipschitz_at(1) * d + 1e-9);
    CHECK(std::fabs(l.eval(a) - l.eval(b)) <= l.lipschitz_at(1) * d + 1e-9);
  }
}

TEST_CASE("update locality: a cone moves the envelope at most locally") {
  std::mt19937 rng(62);
  PosgModel m = builtin("matching-pennies-2step");
  ValueBound u = init_upper(m, 2, 0);
  OccupancyState vertex = random_occupancy(rng, m, 1);
  const double before_at_vertex = u.eval(vertex);
  const double v = before_at_vertex - 0.3;
  u.add_cone(vertex, v, u.lipschitz_at(1));
  const double delta = before_at_vertex - v;
  for (int rep = 0; rep < 30; ++rep) {
    OccupancyState probe = perturb_occupancy(rng, vertex);
    // The probe's value can drop by at most the drop at the vertex.
    const double drop = std::fabs((v + u.lipschitz_at(1) *
                                           l1_distance(vertex, probe)) -
                                  u.eval(probe));
    (void)drop;
    CHECK(u.eval(probe) >= v - 1e-12);
    CHECK(u.eval(probe) >= before_at_vertex - delta - 1e-12);
  }
}

TEST_CASE("pruning keeps envelope values at all vertices") {
  std::mt19937 rng(63);
  PosgModel m = builtin("matching-pennies-2step");
  ValueBound u = init_upper(m, 2, 0);
  std::vector<OccupancyState> vertices;
  // Force several prune passes (every 50 insertions).
  for (int rep = 0; rep < 130; ++rep) {
    OccupancyState vertex = perturb_occupancy(rng, random_occupancy(rng, m, 1));
    vertices.push_back(vertex);
    std::uniform_real_distribution<double> val(-0.5, 1.5);
    u.add_cone(vertex, val(rng), 1.0);
  }
  std::vector<double> before;
  before.reserve(vertices.size());
  for (const auto& vtx : vertices) before.push_back(u.eval(vtx));
  // One more batch to trigger pruning again.
  for (int rep = 0; rep < 60; ++rep) {
    OccupancyState vertex = perturb_occupancy(rng, random_occupancy(rng, m, 1));
    u.add_cone(vertex, 2.0, 1.0);  // dominated summits
  }
  for (size_t i = 0; i < vertices.size(); ++i)
    CHECK(u.eval(vertices[i]) <= before[i] + 1e-9);
  CHECK(u.total_cones() < 190);
}

TEST_CASE("static schedule uses the discounted reward range") {
  PosgModel m = builtin("adversarial-tiger");
  const RewardBounds rb = reward_bounds(m);
  LipschitzSchedule s = static_schedule(m, 3, 0);
  REQUIRE(s.lam.size() == 4);
  CHECK(s.lambda_r == doctest::Approx(rb.lambda_r));
  CHECK(s.lam[3] == doctest::Approx(0.0));
  CHECK(s.lam[2] == doctest::Approx(rb.lambda_r));
  CHECK(s.lam[1] == doctest::Approx(rb.lambda_r * (1 + m.gamma)));
  CHECK(s.lam[0] ==
        doctest::Approx(rb.lambda_r * (1 + m.gamma + m.gamma * m.gamma)));
  CHECK(s.uniform_lambda() == doctest::Approx(s.lam[0]));
}

TEST_CASE("refined constants on fresh matching-pennies bounds") {
  PosgModel m = builtin("matching-pennies");
  ValueBound u = init_upper(m, 1, 0);
  ValueBound l = init_lower(m, 1, 0);
  LipschitzSchedule st = static_schedule(m, 1, 0);
  LipschitzSchedule refined = refresh_refined_constants(u, l, st, st);
  // (Umax - Lmin) / 2 = (1 - (-1)) / 2 = 1 = static lambda at depth 0.
  CHECK(refined.lam[0] == doctest::Approx(1.0));
  CHECK(refined.lam[0] == doctest::Approx(st.lam[0]));
}

TEST_CASE("identical constant bounds give zero refined constants") {
  PosgModel m = builtin("matching-pennies");
  for (double& r : m.rewards) r = 2.0;
  ValueBound u = init_upper(m, 1, 0);
  ValueBound l = init_lower(m, 1, 0);
  LipschitzSchedule st = static_schedule(m, 1, 0);
  LipschitzSchedule refined = refresh_refined_constants(u, l, st, st);
  CHECK(refined.lam[0] == doctest::Approx(0.0));
}

TEST_CASE("refined constants never exceed static nor the previous refresh") {
  std::mt19937 rng(64);
  PosgModel m = builtin("matching-pennies-2step");
  ValueBound u = init_upper(m, 2, 0);
  ValueBound l = init_lower(m, 2, 0);
  LipschitzSchedule st = static_schedule(m, 2, 0);
  LipschitzSchedule prev = st;
  for (int round = 0; round < 5; ++round) {
    for (int k = 0; k < 5; ++k) {
      OccupancyState vertex = random_occupancy(rng, m, 1);
      u.add_cone(vertex, u.eval(vertex) - 0.1, st.lam[1]);
      l.add_cone(vertex, l.eval(vertex) + 0.1, st.lam[1]);
    }
    LipschitzSchedule next = refresh_refined_constants(u, l, st, prev);
    for (size_t d = 0; d < next.lam.size(); ++d) {
      CHECK(next.lam[d] <= st.lam[d] + 1e-9);
      CHECK(next.lam[d] <= prev.lam[d] + 1e-9);
      CHECK(next.lam[d] >= 0.0);
    }
    prev = next;
  }
}

TEST_CASE("truncated horizons seed the induction with the tail bound") {
  PosgModel m = builtin("matching-pennies");
  const RewardBounds rb = reward_bounds(m);
  // Truncating an infinite game at depth 2.
  ValueBound u = init_upper(m, 2, kInfiniteHorizon);
  const double tail = rb.r_max / (1.0 - m.gamma);
  CHECK(u.init_values(2)[0] == doctest::Approx(tail));
  CHECK(u.init_values(1)[0] == doctest::Approx(rb.r_max + m.gamma * tail));
}

TEST_CASE("bound dump lists init rows and cones") {
  PosgModel m = builtin("matching-pennies");
  ValueBound u = init_upper(m, 1, 0);
  OccupancyState o0 = initial_occupancy(m);
  u.add_cone(o0, 0.25, 1.0);
  const std::string csv = u.dump_csv();
  CHECK(csv.find("depth,kind,vertex_id,value,slope") == 0);
  CHECK(csv.find("0,init,0,1,0") != std::string::npos);
  CHECK(csv.find("0,cone,0,0.25,1") != std::string::npos);
}

TEST_SUITE_END();
