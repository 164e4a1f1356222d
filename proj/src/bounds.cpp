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

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace ogs {

namespace {
constexpr int kPruneEvery = 50;
constexpr double kDominanceMargin = 1e-12;

std::vector<double> range_lc(const std::vector<std::vector<double>>& values) {
  std::vector<double> lc;
  lc.reserve(values.size());
  for (const auto& row : values) {
    const auto [mn, mx] = std::minmax_element(row.begin(), row.end());
    lc.push_back((*mx - *mn) / 2.0);
  }
  return lc;
}

}  // namespace

double LipschitzSchedule::uniform_lambda() const {
  double best = 0.0;
  for (double v : lam) best = std::max(best, v);
  return best;
}

double discounted_range_factor(double gamma, int remaining) {
  if (remaining == 0) return 0.0;
  if (remaining < 0) return 1.0 / (1.0 - gamma);
  if (gamma == 0.0) return 1.0;
  return (1.0 - std::pow(gamma, remaining)) / (1.0 - gamma);
}

LipschitzSchedule static_schedule(const PosgModel& m, int depth_cap,
                                  int remaining_at_cap) {
  LipschitzSchedule s;
  s.mode = LipschitzMode::kStatic;
  s.lambda_r = reward_bounds(m).lambda_r;
  s.lam.resize(depth_cap + 1);
  for (int tau = 0; tau <= depth_cap; ++tau) {
    const int remaining = remaining_at_cap < 0
                              ? kInfiniteHorizon
                              : remaining_at_cap + (depth_cap - tau);
    s.lam[tau] =
        s.lambda_r * discounted_range_factor(m.gamma, remaining);
  }
  return s;
}

ValueBound::ValueBound(BoundSide side,
                       std::vector<std::vector<double>> init_values)
    : side_(side),
      init_values_(std::move(init_values)),
      init_lc_(range_lc(init_values_)),
      cones_(init_values_.size()),
      inserts_since_prune_(init_values_.size(), 0) {}

double ValueBound::eval_init(const OccupancyState& o) const {
  const auto& vals = init_values_[o.depth()];
  double v = 0.0;
  for (const auto& [k, p] : o.entries()) v += p * vals[k.state];
  return v;
}

double ValueBound::cone_eval(const Cone& c, const OccupancyState& o) const {
  const double d = l1_distance(c.vertex, o);
  return side_ == BoundSide::kUpper ? c.value + c.slope * d
                                    : c.value - c.slope * d;
}

double ValueBound::eval(const OccupancyState& o) const {
  double v = eval_init(o);
  for (const Cone& c : cones_[o.depth()]) {
    const double cv = cone_eval(c, o);
    v = side_ == BoundSide::kUpper ? std::min(v, cv) : std::max(v, cv);
  }
  return v;
}

void ValueBound::add_cone(const OccupancyState& o, double value,
                          double slope) {
  auto& list = cones_[o.depth()];
  const bool upper = side_ == BoundSide::kUpper;
  for (auto it = list.begin(); it != list.end(); ++it) {
    if (!it->vertex.approx_equal(o)) continue;
    const bool new_tighter = upper ? value <= it->value : value >= it->value;
    if (new_tighter && slope <= it->slope) {
      it->value = value;
      it->slope = slope;
      return;
    }
    if (!new_tighter && slope >= it->slope) return;  // dominated at birth
  }
  list.push_back(Cone{o, value, slope});
  if (++inserts_since_prune_[o.depth()] >= kPruneEvery) {
    inserts_since_prune_[o.depth()] = 0;
    prune(o.depth());
  }
}

void ValueBound::prune(int depth) {
  auto& list = cones_[depth];
  const bool upper = side_ == BoundSide::kUpper;
  // A cone is dropped if, at its own vertex and at every other cone's
  // vertex, the rest of the envelope already beats it by a margin. This is
  // a sufficient condition only; cones binding strictly between vertices
  // survive until a vertex lands near them.
  bool removed = true;
  while (removed && list.size() > 1) {
    removed = false;
    for (size_t i = 0; i < list.size(); ++i) {
      bool dominated = true;
      for (size_t v = 0; v < list.size() && dominated; ++v) {
        const OccupancyState& x = list[v].vertex;
        double rest = eval_init(x);
        for (size_t j = 0; j < list.size(); ++j) {
          if (j == i) continue;
          const double cv = cone_eval(list[j], x);
          rest = upper ? std::min(rest, cv) : std::max(rest, cv);
        }
        const double own = cone_eval(list[i], x);
        dominated = upper ? rest <= own - kDominanceMargin
                          : rest >= own + kDominanceMargin;
      }
      if (dominated) {
        list.erase(list.begin() + i);
        removed = true;
        break;
      }
    }
  }
}

double ValueBound::lipschitz_at(int depth) const {
  double lc = init_lc_[depth];
  for (const Cone& c : cones_[depth]) lc = std::max(lc, c.slope);
  return lc;
}

int ValueBound::total_cones() const {
  int n = 0;
  for (const auto& list : cones_) n += static_cast<int>(list.size());
  return n;
}

std::string ValueBound::dump_csv() const {
  std::ostringstream os;
  os.precision(12);
  os << "depth,kind,vertex_id,value,slope\n";
  for (int d = 0; d <= depth_cap(); ++d) {
    for (size_t s = 0; s < init_values_[d].size(); ++s)
      os << d << ",init," << s << "," << init_values_[d][s] << ",0\n";
    for (size_t k = 0; k < cones_[d].size(); ++k)
      os << d << ",cone," << k << "," << cones_[d][k].value << ","
         << cones_[d][k].slope << "\n";
  }
  return os.str();
}

namespace {

std::vector<std::vector<double>> cooperative_backup(const PosgModel& m,
                                                    int depth_cap,
                                                    int remaining_at_cap,
                                                    bool maximize) {
  const RewardBounds rb = reward_bounds(m);
  const double tail_reward = maximize ? rb.r_max : rb.r_min;
  std::vector<std::vector<double>> values(
      depth_cap + 1, std::vector<double>(m.ns(), 0.0));
  const double tail =
      tail_reward * discounted_range_factor(m.gamma, remaining_at_cap);
  for (int s = 0; s < m.ns(); ++s) values[depth_cap][s] = tail;
  for (int tau = depth_cap - 1; tau >= 0; --tau) {
    for (int s = 0; s < m.ns(); ++s) {
      double best = 0.0;
      bool first = true;
      for (int a1 = 0; a1 < m.na1(); ++a1) {
        for (int a2 = 0; a2 < m.na2(); ++a2) {
          double q = m.reward(s, a1, a2);
          for (const NextEntry& e : m.next(s, a1, a2))
            q += m.gamma * e.p * values[tau + 1][e.s2];
          if (first || (maximize ? q > best : q < best)) {
            best = q;
            first = false;
          }
        }
      }
      values[tau][s] = best;
    }
  }
  return values;
}

}  // namespace

ValueBound init_upper(const PosgModel& m, int depth_cap,
                      int remaining_at_cap) {
  return ValueBound(BoundSide::kUpper,
                    cooperative_backup(m, depth_cap, remaining_at_cap, true));
}

ValueBound init_lower(const PosgModel& m, int depth_cap,
                      int remaining_at_cap) {
  return ValueBound(BoundSide::kLower,
                    cooperative_backup(m, depth_cap, remaining_at_cap, false));
}

LipschitzSchedule refresh_refined_constants(
    const ValueBound& upper, const ValueBound& lower,
    const LipschitzSchedule& static_sched, const LipschitzSchedule& previous) {
  LipschitzSchedule s;
  s.mode = LipschitzMode::kRefined;
  s.lambda_r = static_sched.lambda_r;
  s.lam.resize(static_sched.lam.size());
  for (int d = 0; d < static_cast<int>(s.lam.size()); ++d) {
    double u_max = *std::max_element(upper.init_values(d).begin(),
                                     upper.init_values(d).end());
    for (const Cone& c : upper.cones(d)) u_max = std::max(u_max, c.value);
    double l_min = *std::min_element(lower.init_values(d).begin(),
                                     lower.init_values(d).end());
    for (const Cone& c : lower.cones(d)) l_min = std::min(l_min, c.value);
    const double lam_lu = std::max(0.0, (u_max - l_min) / 2.0);
    s.lam[d] = std::min({static_sched.lam[d], previous.lam[d], lam_lu});
  }
  return s;
}

}  // namespace ogs
