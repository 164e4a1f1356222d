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

#include "ogs/hsvi.h"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>

namespace ogs {

double threshold(double epsilon, double gamma, double rho, double lambda,
                 int tau) {
  if (tau == 0) return epsilon;
  if (gamma == 0.0) return std::numeric_limits<double>::infinity();
  const double g = std::pow(gamma, -tau);
  return g * epsilon - 2.0 * rho * lambda * (g - 1.0) / (1.0 - gamma);
}

double max_rho(double epsilon, double gamma, double lambda) {
  if (lambda <= 0.0) return std::numeric_limits<double>::infinity();
  return (1.0 - gamma) * epsilon / (2.0 * lambda);
}

int t_max(double epsilon, double gamma, double rho, double lambda, double w) {
  if (w <= epsilon) return 0;
  const double c = gamma < 1.0 ? 2.0 * rho * lambda / (1.0 - gamma) : 0.0;
  if (w <= c) return 1;
  if (gamma == 0.0) return 1;
  const double num = epsilon - c;
  if (num <= 0.0)
    throw ConfigError("rho violates the positivity limit (Lemma MaxRadius)");
  const double ratio = num / (w - c);
  return static_cast<int>(
      std::ceil(std::log(ratio) / std::log(gamma) - 1e-12));
}

double default_rho(const PosgModel& m, double epsilon) {
  const RewardBounds rb = reward_bounds(m);
  const double lambda =
      rb.lambda_r * discounted_range_factor(
                        m.gamma, m.infinite_horizon() ? -1 : m.horizon);
  const double limit = max_rho(epsilon, m.gamma, lambda);
  return std::isfinite(limit) ? 0.5 * limit : 1.0;
}

namespace {

struct UpdateOutcome {
  DecisionRule beta_u1, beta_l2;
  double width_after = 0.0;
  bool budget_exceeded = false;
};

// Algorithm-1 Update(o): one point-based backup of both bounds. The U-side
// maximin solve also yields the optimistic exploration rule for player 1,
// the L-side minimax solve the one for player 2.
UpdateOutcome update_at(const PosgModel& m, const OccupancyState& o,
                        ValueBound& upper, ValueBound& lower, bool terminal,
                        const LipschitzSchedule& sched,
                        const LocalSolveOptions& opt,
                        const DecisionRule* seed_u1,
                        const DecisionRule* seed_l2) {
  UpdateOutcome out;
  const double slope = sched.at(o.depth());
  if (terminal) {
    const LocalSolution sol = solve_terminal_lp(m, o);
    upper.add_cone(o, sol.value_hi, slope);
    lower.add_cone(o, sol.value_lo, slope);
    out.beta_u1 = sol.beta1;
    out.beta_l2 = sol.beta2;
  } else {
    LocalSolveOptions opt_u = opt;
    opt_u.seed = seed_u1;
    LocalGame game_u(m, o, &upper, m.gamma);
    const LocalSolution su = solve_maximin(game_u, opt_u);
    LocalSolveOptions opt_l = opt;
    opt_l.seed = seed_l2;
    LocalGame game_l(m, o, &lower, m.gamma);
    const LocalSolution sl = solve_minimax(game_l, opt_l);
    upper.add_cone(o, su.value_hi, slope);
    lower.add_cone(o, sl.value_lo, slope);
    out.beta_u1 = su.beta1;
    out.beta_l2 = sl.beta2;
    out.budget_exceeded = su.budget_exceeded || sl.budget_exceeded;
  }
  out.width_after = upper.eval(o) - lower.eval(o);
  return out;
}

class Driver {
 public:
  Driver(const PosgModel& m, const SolverConfig& cfg,
         const TrialObserver& observer)
      : m_(m), cfg_(cfg), observer_(observer) {}

  SolveResult run();

 private:
  // Returns the trial's stop depth.
  int trial_recurse(const OccupancyState& o, int tau, int trial_index);
  bool is_terminal_depth(int tau) const {
    return !m_.infinite_horizon() && tau == m_.horizon - 1;
  }
  double width_at(const OccupancyState& o) const {
    return upper_.eval(o) - lower_.eval(o);
  }
  void note_visited(const OccupancyState& o);
  void emit(TrialEvent::Kind kind, int trial, int depth,
            const OccupancyState& o, double width, double thr,
            bool penultimate) {
    if (!observer_) return;
    TrialEvent ev;
    ev.kind = kind;
    ev.trial = trial;
    ev.depth = depth;
    ev.o = &o;
    ev.width = width;
    ev.threshold = thr;
    ev.penultimate = penultimate;
    ev.upper = &upper_;
    ev.lower = &lower_;
    observer_(ev);
  }

  const PosgModel& m_;
  SolverConfig cfg_;
  TrialObserver observer_;

  int bound_depth_ = 0;  // deepest depth carried by the bounds
  int trial_cap_ = 0;    // deepest depth a trial may reach
  // Previous trial's exploring rules per depth; warm starts for the local
  // solvers.
  std::map<int, DecisionRule> seed_u1_, seed_l2_;
  double rho_ = 0.0;
  double local_tol_ = 0.0;
  double lambda_uniform_ = 0.0;
  LipschitzSchedule static_sched_, sched_;
  ValueBound upper_, lower_;
  LocalSolveOptions opt_;
  SolveResult result_;
};

void Driver::note_visited(const OccupancyState& o) {
  for (const OccupancyState& v : result_.visited) {
    if (v.depth() == o.depth() && v.approx_equal(o, 1e-9)) return;
  }
  result_.visited.push_back(o);
}

int Driver::trial_recurse(const OccupancyState& o, int tau, int trial_index) {
  const double width = width_at(o);
  const double thr =
      threshold(cfg_.epsilon, m_.gamma, rho_, lambda_uniform_, tau);
  result_.trace.push_back(TrialStep{trial_index, tau, width, thr,
                                    upper_.eval(o), lower_.eval(o),
                                    o.support_size()});
  note_visited(o);
  emit(TrialEvent::Kind::kVisit, trial_index, tau, o, width, thr, false);
  if (tau >= trial_cap_ || width <= thr) return tau;

  const bool terminal = is_terminal_depth(tau);
  const auto su = seed_u1_.find(tau);
  const auto sl = seed_l2_.find(tau);
  UpdateOutcome first = update_at(
      m_, o, upper_, lower_, terminal, sched_, opt_,
      su == seed_u1_.end() ? nullptr : &su->second,
      sl == seed_l2_.end() ? nullptr : &sl->second);
  result_.budget_warning |= first.budget_exceeded;
  seed_u1_[tau] = first.beta_u1;
  seed_l2_[tau] = first.beta_l2;
  const OccupancyState next =
      transition(m_, o, DecisionRuleProfile{first.beta_u1, first.beta_l2});
  const int stop_depth = trial_recurse(next, tau + 1, trial_index);

  UpdateOutcome second =
      update_at(m_, o, upper_, lower_, terminal, sched_, opt_,
                &seed_u1_[tau], &seed_l2_[tau]);
  result_.budget_warning |= second.budget_exceeded;
  seed_u1_[tau] = second.beta_u1;
  seed_l2_[tau] = second.beta_l2;
  const bool penultimate = (tau == stop_depth - 1);
  emit(TrialEvent::Kind::kBackwardUpdate, trial_index, tau, o,
       second.width_after,
       threshold(cfg_.epsilon, m_.gamma, rho_, lambda_uniform_, tau),
       penultimate);
  if (penultimate) {
    // Theorem lem|thr item 1 with solver-tolerance slack: the backward
    // update at the penultimate state must contract below
    // thr(tau) - 2 rho lambda.
    const double bound = threshold(cfg_.epsilon, m_.gamma, rho_,
                                   lambda_uniform_, tau) -
                         2.0 * rho_ * lambda_uniform_ + 2.0 * local_tol_ +
                         1e-9;
    if (second.width_after > bound) ++result_.contraction_violations;
  }
  return stop_depth;
}

SolveResult Driver::run() {
  const auto t0 = std::chrono::steady_clock::now();
  if (cfg_.epsilon <= 0.0) throw ConfigError("epsilon must be positive");
  if (m_.gamma >= 1.0)
    throw ConfigError("gamma = 1 is rejected; the Lipschitz constants "
                      "assume gamma < 1");
  local_tol_ = cfg_.local_tol.value_or(cfg_.epsilon / 10.0);
  if (local_tol_ <= 0.0) throw ConfigError("local_tol must be positive");

  const RewardBounds rb = reward_bounds(m_);
  const double lambda_coarse =
      rb.lambda_r *
      discounted_range_factor(m_.gamma,
                              m_.infinite_horizon() ? -1 : m_.horizon);
  const double rho_limit = max_rho(cfg_.epsilon, m_.gamma, lambda_coarse);
  rho_ = cfg_.rho.value_or(std::isfinite(rho_limit) ? 0.5 * rho_limit : 1.0);
  if (rho_ <= 0.0 || rho_ >= rho_limit)
    throw ConfigError("rho must lie in (0, " + std::to_string(rho_limit) +
                      ") (Lemma MaxRadius)");

  // Bound depth: the model horizon, or the coarse trial-length bound for
  // unbounded models.
  int remaining_at_cap = 0;
  if (m_.infinite_horizon()) {
    const double w_coarse = (rb.r_max - rb.r_min) *
                            discounted_range_factor(m_.gamma, -1);
    bound_depth_ = std::max(
        1, t_max(cfg_.epsilon, m_.gamma, rho_, lambda_coarse, w_coarse));
    remaining_at_cap = kInfiniteHorizon;
  } else {
    bound_depth_ = m_.horizon;
    remaining_at_cap = 0;
  }

  upper_ = init_upper(m_, bound_depth_, remaining_at_cap);
  lower_ = init_lower(m_, bound_depth_, remaining_at_cap);
  static_sched_ = static_schedule(m_, bound_depth_, remaining_at_cap);
  sched_ = static_sched_;
  lambda_uniform_ = sched_.uniform_lambda();

  double w = 0.0;
  for (int d = 0; d <= bound_depth_; ++d) {
    for (int s = 0; s < m_.ns(); ++s)
      w = std::max(w, upper_.init_values(d)[s] - lower_.init_values(d)[s]);
  }
  result_.t_max = t_max(cfg_.epsilon, m_.gamma, rho_, lambda_uniform_, w);
  trial_cap_ = std::min(bound_depth_, std::max(result_.t_max, 1));

  opt_.tol = local_tol_;
  opt_.budget = cfg_.doo_budget;
  opt_.inner_budget = cfg_.inner_budget;

  result_.epsilon = cfg_.epsilon;
  result_.rho = rho_;
  result_.local_tol = local_tol_;
  result_.depth_cap = trial_cap_;

  const OccupancyState o0 = initial_occupancy(m_);
  result_.space = o0.space();
  result_.initial_width = width_at(o0);

  int trials = 0;
  while (width_at(o0) > cfg_.epsilon && trials < cfg_.max_trials) {
    ++trials;
    const int len = trial_recurse(o0, 0, trials);
    result_.max_trial_length = std::max(result_.max_trial_length, len);
    if (cfg_.lipschitz_mode == LipschitzMode::kRefined) {
      sched_ = refresh_refined_constants(upper_, lower_, static_sched_, sched_);
      lambda_uniform_ = sched_.uniform_lambda();
    }
    result_.schedule_history.push_back(sched_.lam);
  }

  result_.trials_run = trials;
  result_.lower = lower_.eval(o0);
  result_.upper = upper_.eval(o0);
  result_.gap = result_.upper - result_.lower;
  result_.converged = result_.gap <= cfg_.epsilon;
  result_.lambda_uniform = lambda_uniform_;
  result_.schedule = sched_;
  result_.upper_bound = upper_;
  result_.lower_bound = lower_;

  auto strategies = extract_strategies(m_, result_);
  result_.strategy1 = std::move(strategies.first);
  result_.strategy2 = std::move(strategies.second);

  result_.wallclock_ms = std::chrono::duration_cast<std::chrono::milliseconds>(
                             std::chrono::steady_clock::now() - t0)
                             .count();
  return result_;
}

}  // namespace

SolveResult solve(const PosgModel& m, const SolverConfig& cfg,
                  const TrialObserver& observer) {
  Driver driver(m, cfg, observer);
  return driver.run();
}

std::pair<BehavioralStrategy, BehavioralStrategy> extract_strategies(
    const PosgModel& m, const SolveResult& result) {
  BehavioralStrategy s1, s2;
  s1.player = 1;
  s2.player = 2;
  s1.complete_with_uniform = true;
  s2.complete_with_uniform = true;

  LocalSolveOptions opt;
  opt.tol = result.local_tol;

  OccupancyState o = result.space != nullptr
                         ? initial_occupancy(m, result.space)
                         : initial_occupancy(m);
  for (int tau = 0; tau < result.depth_cap; ++tau) {
    DecisionRule r1, r2;
    const bool terminal = !m.infinite_horizon() && tau == m.horizon - 1;
    if (terminal) {
      const LocalSolution sol = solve_terminal_lp(m, o);
      r1 = sol.beta1;
      r2 = sol.beta2;
    } else {
      LocalGame game_l(m, o, &result.lower_bound, m.gamma);
      r1 = solve_maximin(game_l, opt).beta1;
      LocalGame game_u(m, o, &result.upper_bound, m.gamma);
      r2 = solve_minimax(game_u, opt).beta2;
    }
    s1.rules.push_back(r1);
    s2.rules.push_back(r2);
    if (tau + 1 < result.depth_cap)
      o = transition(m, o, DecisionRuleProfile{r1, r2});
  }
  return {std::move(s1), std::move(s2)};
}

}  // namespace ogs
