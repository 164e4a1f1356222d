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

#include <compare>
#include <map>
#include <memory>
#include <string>
#include <tuple>
#include <utility>
#include <vector>

#include "ogs/model.h"

namespace ogs {

struct DecisionRule;
struct DecisionRuleProfile;

class CoverageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Interns one player's action-observation histories into dense integer ids.
// Id 0 is the empty history; every other id is (parent, action, observation).
// Occupancy supports grow as (|A||Z|)^tau, so keys must stay small.
class HistoryPool {
 public:
  static constexpr int kRoot = 0;

  HistoryPool() { nodes_.push_back(Node{-1, -1, -1, 0}); }

  int child(int parent, int action, int obs) {
    auto key = std::make_tuple(parent, action, obs);
    auto it = index_.find(key);
    if (it != index_.end()) return it->second;
    const int id = static_cast<int>(nodes_.size());
    nodes_.push_back(Node{parent, action, obs, nodes_[parent].depth + 1});
    index_.emplace(key, id);
    return id;
  }

  int depth(int id) const { return nodes_[id].depth; }
  int parent(int id) const { return nodes_[id].parent; }
  int action(int id) const { return nodes_[id].action; }
  int obs(int id) const { return nodes_[id].obs; }
  int size() const { return static_cast<int>(nodes_.size()); }

  // The (action, observation) steps from the root down to `id`.
  std::vector<std::pair<int, int>> decode(int id) const;
  // Rendered as an "a1z0.a0z1" chain; the empty history renders as "".
  std::string render(int id) const;
  // Inverse of render(); interns the chain. Throws ParseError on bad input.
  int intern_rendered(const std::string& text);

 private:
  struct Node {
    int parent, action, obs, depth;
  };
  std::vector<Node> nodes_;
  std::map<std::tuple<int, int, int>, int> index_;
};

struct HistorySpace {
  HistoryPool pool1, pool2;
  HistoryPool& pool(int player) { return player == 1 ? pool1 : pool2; }
  const HistoryPool& pool(int player) const {
    return player == 1 ? pool1 : pool2;
  }
};

struct OccupancyKey {
  int h1 = HistoryPool::kRoot;
  int h2 = HistoryPool::kRoot;
  int state = 0;
  auto operator<=>(const OccupancyKey&) const = default;
};

// Sparse distribution over (state, joint history) pairs at a fixed depth.
// Entries are strictly positive, sorted by key, and sum to 1. Immutable
// after construction.
class OccupancyState {
 public:
  using Entry = std::pair<OccupancyKey, double>;

  OccupancyState() = default;
  OccupancyState(int depth, std::shared_ptr<HistorySpace> space,
                 std::vector<Entry> entries);

  int depth() const { return depth_; }
  const std::vector<Entry>& entries() const { return entries_; }
  const std::shared_ptr<HistorySpace>& space() const { return space_; }
  int support_size() const { return static_cast<int>(entries_.size()); }

  double mass() const;
  std::vector<double> state_marginal(int num_states) const;
  // Same key set and probabilities agreeing within `tol` (the equality
  // notion used for caching and test comparisons).
  bool approx_equal(const OccupancyState& other, double tol = 1e-12) const;

  // One line per entry: state<TAB>theta1<TAB>theta2<TAB>prob.
  std::string debug_dump(const PosgModel& m) const;

 private:
  int depth_ = 0;
  std::shared_ptr<HistorySpace> space_;
  std::vector<Entry> entries_;
};

// Depth-0 occupancy: b0 lifted onto the empty joint history; zero-probability
// states are absent.
OccupancyState initial_occupancy(const PosgModel& m);
// Same, but sharing an existing interner (histories interned by different
// spaces are not comparable).
OccupancyState initial_occupancy(const PosgModel& m,
                                 std::shared_ptr<HistorySpace> space);

// Deterministic zs-OMG dynamics: the next occupancy assigns
//   beta1(h1,a1) * beta2(h2,a2) * sum_s P(s',z1,z2|s,a1,a2) * o(s,h1,h2)
// to (s', (h1,a1,z1), (h2,a2,z2)). Entries below 1e-12 are pruned and the
// result renormalized. Throws CoverageError when a rule misses a history
// that has positive marginal in `o`.
OccupancyState transition(const PosgModel& m, const OccupancyState& o,
                          const DecisionRuleProfile& d);

// Expected one-step reward sum_{s,theta} o(s,theta) * E_beta[r(s,a1,a2)].
double expected_reward(const PosgModel& m, const OccupancyState& o,
                       const DecisionRuleProfile& d);

// L1 distance over the union of supports; lies in [0, 2]. Throws
// ValidationError on depth mismatch.
double l1_distance(const OccupancyState& a, const OccupancyState& b);

// Marginal over one player's private histories; positive entries only.
std::map<int, double> marginal_private_histories(const OccupancyState& o,
                                                 int player);

// Convex combination alpha*a + (1-alpha)*b of two same-depth occupancies
// sharing one history space.
OccupancyState mix(double alpha, const OccupancyState& a,
                   const OccupancyState& b);

}  // namespace ogs
