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

#include <stdexcept>
#include <string>
#include <vector>

namespace ogs {

class ParseError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class ValidationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// One possible outcome of a joint action: next state plus the private
// observations handed to each player.
struct NextEntry {
  int s2 = 0;
  int z1 = 0;
  int z2 = 0;
  double p = 0.0;
};

constexpr int kInfiniteHorizon = -1;

// A 2-player zero-sum partially observable stochastic game
// <S, A1, A2, Z1, Z2, P, r, H, gamma, b0>. Rewards are payoffs to
// player 1 (the maximizer). Immutable after construction/validation;
// safe to share read-only across threads.
struct PosgModel {
  std::string name;
  std::vector<std::string> states;
  std::vector<std::string> actions1, actions2;
  std::vector<std::string> obs1, obs2;
  int horizon = 1;  // kInfiniteHorizon for unbounded
  double gamma = 0.0;
  std::vector<double> b0;

  // Indexed by s * na1 * na2 + a1 * na2 + a2.
  std::vector<std::vector<NextEntry>> transitions;
  std::vector<double> rewards;

  int ns() const { return static_cast<int>(states.size()); }
  int na1() const { return static_cast<int>(actions1.size()); }
  int na2() const { return static_cast<int>(actions2.size()); }
  int nz1() const { return static_cast<int>(obs1.size()); }
  int nz2() const { return static_cast<int>(obs2.size()); }
  bool infinite_horizon() const { return horizon == kInfiniteHorizon; }

  int joint_index(int s, int a1, int a2) const {
    return (s * na1() + a1) * na2() + a2;
  }
  const std::vector<NextEntry>& next(int s, int a1, int a2) const {
    return transitions[joint_index(s, a1, a2)];
  }
  double reward(int s, int a1, int a2) const {
    return rewards[joint_index(s, a1, a2)];
  }

  // Throws ValidationError naming the first violated invariant.
  void validate() const;
};

struct RewardBounds {
  double r_min = 0.0;
  double r_max = 0.0;
  double lambda_r = 0.0;  // (r_max - r_min) / 2
};

RewardBounds reward_bounds(const PosgModel& m);

// Loads and validates a model from the JSON schema described in the README.
PosgModel load_model(const std::string& path);
PosgModel parse_model(const std::string& json_text);

// Canonical serialization; save(load(f)) is byte-stable.
std::string save_model(const PosgModel& m);

// Builtin instances: "matching-pennies", "matching-pennies-2step",
// "adversarial-tiger". Throws ValidationError on unknown names.
PosgModel builtin(const std::string& name);
std::vector<std::string> builtin_names();

}  // namespace ogs
