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

#include <functional>
#include <optional>
#include <vector>

#include "ogs/localgame.h"

namespace ogs {

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct SolverConfig {
  double epsilon = 0.01;
  // Ball radius; must lie in (0, (1-gamma) * epsilon / (2 lambda)). Default
  // is half of that limit.
  std::optional<double> rho;
  // Local-game tolerance; defaults to epsilon / 10.
  std::optional<double> local_tol;
  int max_trials = 10000;
  LipschitzMode lipschitz_mode = LipschitzMode::kStatic;
  unsigned long long seed = 0;
  long doo_budget = 20000;
  long inner_budget = 4000;
};

struct TrialStep {
  int trial = 0;
  int depth = 0;
  double width = 0.0;
  double threshold = 0.0;
  double u_value = 0.0;
  double l_value = 0.0;
  int occupancy_support = 0;
};

// Fired on every node visit and after every backward update; tests hook in
// here to check the contraction and ball-coverage laws in flight.
struct TrialEvent {
  enum class Kind { kVisit, kBackwardUpdate };
  Kind kind = Kind::kVisit;
  int trial = 0;
  int depth = 0;
  const OccupancyState* o = nullptr;
  double width = 0.0;
  double threshold = 0.0;
  bool penultimate = false;
  const ValueBound* upper = nullptr;
  const ValueBound* lower = nullptr;
};
using TrialObserver = std::function<void(const TrialEvent&)>;

struct SolveResult {
  double lower = 0.0;
  double upper = 0.0;
  double gap = 0.0;
  bool converged = false;
  bool budget_warning = false;
  int trials_run = 0;
  int max_trial_length = 0;
  int t_max = 0;
  int depth_cap = 0;
  double rho = 0.0;
  double local_tol = 0.0;
  double epsilon = 0.0;
  double lambda_uniform = 0.0;
  double initial_width = 0.0;
  int contraction_violations = 0;
  long wallclock_ms = 0;

  std::vector<TrialStep> trace;
  // Schedule in force after each trial (one row per trial; static mode
  // repeats the static row).
  std::vector<std::vector<double>> schedule_history;
  LipschitzSchedule schedule;
  ValueBound upper_bound, lower_bound;
  std::vector<OccupancyState> visited;  // deduplicated, every depth
  std::shared_ptr<HistorySpace> space;  // interner behind visited/strategies
  BehavioralStrategy strategy1, strategy2;
};

// thr(tau) = gamma^-tau * eps - 2 rho lambda (gamma^-tau - 1) / (1 - gamma),
// the closed form of the per-step recursion gamma thr(tau) = thr(tau-1)
// - 2 rho lambda. thr(0) = eps.
double threshold(double epsilon, double gamma, double rho, double lambda,
                 int tau);

// Open upper limit (1-gamma) eps / (2 lambda) for the ball radius; +inf when
// lambda == 0.
double max_rho(double epsilon, double gamma, double lambda);

// Trial-length bound ceil(log_gamma((eps - 2 rho lambda/(1-gamma)) /
// (W - 2 rho lambda/(1-gamma)))); 0 when W <= eps.
int t_max(double epsilon, double gamma, double rho, double lambda, double w);

// Effective default radius for a solve on `m` (half the max_rho limit).
double default_rho(const PosgModel& m, double epsilon);

SolveResult solve(const PosgModel& m, const SolverConfig& cfg,
                  const TrialObserver& observer = nullptr);

// Pessimistic strategy extraction: forward pass from o_0 where player 1
// plays the maximin rule of the lower-bound game and player 2 the minimax
// rule of the upper-bound game; unreached histories act uniformly.
std::pair<BehavioralStrategy, BehavioralStrategy> extract_strategies(
    const PosgModel& m, const SolveResult& result);

}  // namespace ogs
