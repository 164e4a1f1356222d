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

#include "ogs/occupancy.h"

namespace ogs {

enum class BoundSide { kUpper, kLower };
enum class LipschitzMode { kStatic, kRefined };

// Per-depth Lipschitz constants for the optimal value function. Static mode
// uses lambda_tau = (Vmax_tau - Vmin_tau)/2 from the discounted reward range
// over the remaining horizon; refined mode tightens with
// lambda^{LU}_tau = (Umax_tau - Lmin_tau)/2, never above static and never
// increasing across refreshes.
struct LipschitzSchedule {
  LipschitzMode mode = LipschitzMode::kStatic;
  double lambda_r = 0.0;
  std::vector<double> lam;  // indexed by depth, 0..depth_cap

  double at(int depth) const { return lam[depth]; }
  int depth_cap() const { return static_cast<int>(lam.size()) - 1; }
  // The depth-independent constant used by thresholds and radii.
  double uniform_lambda() const;
};

// (1 - gamma^h) / (1 - gamma); h < 0 means an unbounded remaining horizon.
double discounted_range_factor(double gamma, int remaining);

// `remaining_at_cap` is the number of steps left beyond depth_cap (0 when the
// game truly ends there, kInfiniteHorizon when truncating an infinite game).
LipschitzSchedule static_schedule(const PosgModel& m, int depth_cap,
                                  int remaining_at_cap);

// L1 cone: value +/- slope * ||vertex - o||_1, downward for upper bounds and
// upward for lower bounds.
struct Cone {
  OccupancyState vertex;
  double value = 0.0;
  double slope = 0.0;
};

// One side of the sandwich on V*: a per-depth linear initial bound (state
// values lifted linearly to occupancy space) tightened by a growing set of
// L1 cones. Point-based updates only ever tighten the envelope.
class ValueBound {
 public:
  ValueBound() = default;
  ValueBound(BoundSide side, std::vector<std::vector<double>> init_values);

  BoundSide side() const { return side_; }
  int depth_cap() const { return static_cast<int>(init_values_.size()) - 1; }

  double eval(const OccupancyState& o) const;
  double eval_init(const OccupancyState& o) const;

  // Appends the cone <o, value, slope>; a cone at an (approximately) equal
  // vertex is replaced or skipped when one of the two dominates the other
  // everywhere. Runs dominated-cone pruning every 50 insertions.
  void add_cone(const OccupancyState& o, double value, double slope);

  const std::vector<Cone>& cones(int depth) const { return cones_[depth]; }
  const std::vector<double>& init_values(int depth) const {
    return init_values_[depth];
  }
  // Lipschitz constant of the envelope at `depth`: the max of the initial
  // piece's constant and all cone slopes there.
  double lipschitz_at(int depth) const;
  int total_cones() const;

  // CSV dump: depth,kind,vertex_id,value,slope.
  std::string dump_csv() const;

 private:
  double cone_eval(const Cone& c, const OccupancyState& o) const;
  void prune(int depth);

  BoundSide side_ = BoundSide::kUpper;
  std::vector<std::vector<double>> init_values_;  // [depth][state]
  std::vector<double> init_lc_;                   // [depth]
  std::vector<std::vector<Cone>> cones_;          // [depth]
  std::vector<int> inserts_since_prune_;
};

// Cooperative-MDP relaxation: finite-horizon backward induction of
//   V(s) = max_{a1,a2} [ r + gamma * sum P V' ]   (min for the lower bound)
// lifted linearly to occupancy space. `remaining_at_cap` as above; truncated
// horizons seed the induction with the discounted reward-range tail.
ValueBound init_upper(const PosgModel& m, int depth_cap, int remaining_at_cap);
ValueBound init_lower(const PosgModel& m, int depth_cap, int remaining_at_cap);

// Refined constants lambda^{LU}_tau = (Umax_tau - Lmin_tau)/2 with Umax/Lmin
// estimated from initial state values and cone summits (upper bounds on the
// true extrema). Result is clamped by both the static schedule and the
// previous one, so entries never increase across refreshes.
LipschitzSchedule refresh_refined_constants(const ValueBound& upper,
                                            const ValueBound& lower,
                                            const LipschitzSchedule& static_sched,
                                            const LipschitzSchedule& previous);

}  // namespace ogs
