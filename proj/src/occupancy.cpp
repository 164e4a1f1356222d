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

#include <algorithm>
#include <cmath>
#include <sstream>

#include "ogs/strategy.h"

namespace ogs {

namespace {
constexpr double kPruneTol = 1e-12;
}

std::vector<std::pair<int, int>> HistoryPool::decode(int id) const {
  if (id < 0 || id >= size())
    throw ValidationError("history id " + std::to_string(id) +
                          " does not belong to this pool");
  std::vector<std::pair<int, int>> steps;
  for (int cur = id; cur != kRoot; cur = nodes_[cur].parent)
    steps.emplace_back(nodes_[cur].action, nodes_[cur].obs);
  std::reverse(steps.begin(), steps.end());
  return steps;
}

std::string HistoryPool::render(int id) const {
  std::ostringstream os;
  bool first = true;
  for (const auto& [a, z] : decode(id)) {
    if (!first) os << '.';
    os << 'a' << a << 'z' << z;
    first = false;
  }
  return os.str();
}

int HistoryPool::intern_rendered(const std::string& text) {
  int id = kRoot;
  if (text.empty()) return id;
  std::istringstream is(text);
  std::string step;
  while (std::getline(is, step, '.')) {
    size_t zpos = step.find('z');
    if (step.size() < 4 || step[0] != 'a' || zpos == std::string::npos)
      throw ParseError("bad history step: '" + step + "'");
    const int a = std::stoi(step.substr(1, zpos - 1));
    const int z = std::stoi(step.substr(zpos + 1));
    id = child(id, a, z);
  }
  return id;
}

OccupancyState::OccupancyState(int depth, std::shared_ptr<HistorySpace> space,
                               std::vector<Entry> entries)
    : depth_(depth), space_(std::move(space)), entries_(std::move(entries)) {
  std::sort(entries_.begin(), entries_.end(),
            [](const Entry& a, const Entry& b) { return a.first < b.first; });
}

double OccupancyState::mass() const {
  double m = 0.0;
  for (const auto& [k, p] : entries_) m += p;
  return m;
}

std::vector<double> OccupancyState::state_marginal(int num_states) const {
  std::vector<double> marg(num_states, 0.0);
  for (const auto& [k, p] : entries_) marg[k.state] += p;
  return marg;
}

bool OccupancyState::approx_equal(const OccupancyState& other,
                                  double tol) const {
  if (depth_ != other.depth_ || entries_.size() != other.entries_.size())
    return false;
  for (size_t i = 0; i < entries_.size(); ++i) {
    if (entries_[i].first != other.entries_[i].first) return false;
    if (std::fabs(entries_[i].second - other.entries_[i].second) > tol)
      return false;
  }
  return true;
}

std::string OccupancyState::debug_dump(const PosgModel& m) const {
  std::ostringstream os;
  os.precision(12);
  for (const auto& [k, p] : entries_) {
    os << m.states[k.state] << '\t' << space_->pool1.render(k.h1) << '\t'
       << space_->pool2.render(k.h2) << '\t' << p << '\n';
  }
  return os.str();
}

OccupancyState initial_occupancy(const PosgModel& m,
                                 std::shared_ptr<HistorySpace> space) {
  std::vector<OccupancyState::Entry> entries;
  for (int s = 0; s < m.ns(); ++s) {
    if (m.b0[s] > 0.0)
      entries.push_back({OccupancyKey{HistoryPool::kRoot, HistoryPool::kRoot, s},
                         m.b0[s]});
  }
  return OccupancyState(0, std::move(space), std::move(entries));
}

OccupancyState initial_occupancy(const PosgModel& m) {
  return initial_occupancy(m, std::make_shared<HistorySpace>());
}

namespace {

const std::vector<double>& rule_row_or_throw(const DecisionRule& rule, int h,
                                             const HistoryPool& pool,
                                             int player) {
  const std::vector<double>* row = rule.row(h);
  if (row == nullptr)
    throw CoverageError("decision rule for player " + std::to_string(player) +
                        " misses supported history '" + pool.render(h) + "'");
  return *row;
}

}  // namespace

OccupancyState transition(const PosgModel& m, const OccupancyState& o,
                          const DecisionRuleProfile& d) {
  if (d.depth() != o.depth())
    throw ValidationError("decision rule depth does not match occupancy depth");
  auto space = o.space();
  std::map<OccupancyKey, double> acc;
  for (const auto& [k, p] : o.entries()) {
    const auto& row1 = rule_row_or_throw(d.beta1, k.h1, space->pool1, 1);
    const auto& row2 = rule_row_or_throw(d.beta2, k.h2, space->pool2, 2);
    for (int a1 = 0; a1 < m.na1(); ++a1) {
      const double p1 = row1[a1];
      if (p1 <= 0.0) continue;
      for (int a2 = 0; a2 < m.na2(); ++a2) {
        const double p2 = row2[a2];
        if (p2 <= 0.0) continue;
        const double base = p * p1 * p2;
        for (const NextEntry& e : m.next(k.state, a1, a2)) {
          const int h1 = space->pool1.child(k.h1, a1, e.z1);
          const int h2 = space->pool2.child(k.h2, a2, e.z2);
          acc[OccupancyKey{h1, h2, e.s2}] += base * e.p;
        }
      }
    }
  }
  std::vector<OccupancyState::Entry> entries;
  entries.reserve(acc.size());
  double total = 0.0;
  for (const auto& [k, p] : acc) {
    if (p < kPruneTol) continue;
    entries.push_back({k, p});
    total += p;
  }
  if (entries.empty())
    throw ValidationError("transition produced an empty occupancy state");
  for (auto& [k, p] : entries) p /= total;
  return OccupancyState(o.depth() + 1, space, std::move(entries));
}

double expected_reward(const PosgModel& m, const OccupancyState& o,
                       const DecisionRuleProfile& d) {
  if (d.depth() != o.depth())
    throw ValidationError("decision rule depth does not match occupancy depth");
  const auto& space = *o.space();
  double value = 0.0;
  for (const auto& [k, p] : o.entries()) {
    const auto& row1 = rule_row_or_throw(d.beta1, k.h1, space.pool1, 1);
    const auto& row2 = rule_row_or_throw(d.beta2, k.h2, space.pool2, 2);
    for (int a1 = 0; a1 < m.na1(); ++a1) {
      if (row1[a1] <= 0.0) continue;
      for (int a2 = 0; a2 < m.na2(); ++a2) {
        if (row2[a2] <= 0.0) continue;
        value += p * row1[a1] * row2[a2] * m.reward(k.state, a1, a2);
      }
    }
  }
  return value;
}

double l1_distance(const OccupancyState& a, const OccupancyState& b) {
  if (a.depth() != b.depth())
    throw ValidationError("l1_distance on occupancy states of unequal depth");
  const auto& ea = a.entries();
  const auto& eb = b.entries();
  size_t i = 0, j = 0;
  double dist = 0.0;
  while (i < ea.size() || j < eb.size()) {
    if (j >= eb.size() || (i < ea.size() && ea[i].first < eb[j].first)) {
      dist += std::fabs(ea[i].second);
      ++i;
    } else if (i >= ea.size() || eb[j].first < ea[i].first) {
      dist += std::fabs(eb[j].second);
      ++j;
    } else {
      dist += std::fabs(ea[i].second - eb[j].second);
      ++i;
      ++j;
    }
  }
  return dist;
}

std::map<int, double> marginal_private_histories(const OccupancyState& o,
                                                 int player) {
  std::map<int, double> marg;
  for (const auto& [k, p] : o.entries())
    marg[player == 1 ? k.h1 : k.h2] += p;
  return marg;
}

OccupancyState mix(double alpha, const OccupancyState& a,
                   const OccupancyState& b) {
  if (a.depth() != b.depth())
    throw ValidationError("mix on occupancy states of unequal depth");
  std::map<OccupancyKey, double> acc;
  for (const auto& [k, p] : a.entries()) acc[k] += alpha * p;
  for (const auto& [k, p] : b.entries()) acc[k] += (1.0 - alpha) * p;
  std::vector<OccupancyState::Entry> entries;
  for (const auto& [k, p] : acc)
    if (p > 0.0) entries.push_back({k, p});
  return OccupancyState(a.depth(), a.space(), std::move(entries));
}

}  // namespace ogs
