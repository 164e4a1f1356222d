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

#include "ogs/model.h"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include "json.hpp"

namespace ogs {
namespace {

using Json = nlohmann::ordered_json;

constexpr double kProbTol = 1e-9;

std::string joint_name(const PosgModel& m, int s, int a1, int a2) {
  std::ostringstream os;
  os << "(" << s << "," << a1 << "," << a2 << ")";
  (void)m;
  return os.str();
}

int lookup(const std::vector<std::string>& names, const std::string& v,
           const std::string& what) {
  auto it = std::find(names.begin(), names.end(), v);
  if (it == names.end())
    throw ParseError("unknown " + what + " name: '" + v + "'");
  return static_cast<int>(it - names.begin());
}

std::vector<std::string> parse_name_list(const Json& j, const std::string& key) {
  if (!j.is_array() || j.empty())
    throw ParseError("'" + key + "' must be a non-empty list of names");
  std::vector<std::string> out;
  for (const auto& v : j) {
    if (!v.is_string()) throw ParseError("'" + key + "' entries must be strings");
    out.push_back(v.get<std::string>());
  }
  return out;
}

}  // namespace

void PosgModel::validate() const {
  if (states.empty()) throw ValidationError("model has no states");
  if (actions1.empty() || actions2.empty())
    throw ValidationError("each player needs at least one action");
  if (obs1.empty() || obs2.empty())
    throw ValidationError("each player needs at least one observation");
  if (!(gamma >= 0.0 && gamma < 1.0))
    throw ValidationError("gamma must lie in [0,1)");
  if (horizon != kInfiniteHorizon && horizon <= 0)
    throw ValidationError("horizon must be positive or \"infinite\"");
  if (static_cast<int>(b0.size()) != ns())
    throw ValidationError("b0 has wrong length");
  double b0_sum = 0.0;
  for (int s = 0; s < ns(); ++s) {
    if (b0[s] < 0.0)
      throw ValidationError("b0(" + std::to_string(s) + ") is negative");
    b0_sum += b0[s];
  }
  if (std::fabs(b0_sum - 1.0) > kProbTol) {
    std::ostringstream os;
    os << "b0 sums to " << b0_sum;
    throw ValidationError(os.str());
  }
  if (transitions.size() != static_cast<size_t>(ns() * na1() * na2()) ||
      rewards.size() != transitions.size())
    throw ValidationError("transition/reward tables have wrong size");
  for (int s = 0; s < ns(); ++s) {
    for (int a1 = 0; a1 < na1(); ++a1) {
      for (int a2 = 0; a2 < na2(); ++a2) {
        double sum = 0.0;
        for (const NextEntry& e : next(s, a1, a2)) {
          if (e.s2 < 0 || e.s2 >= ns() || e.z1 < 0 || e.z1 >= nz1() ||
              e.z2 < 0 || e.z2 >= nz2())
            throw ValidationError("transition" + joint_name(*this, s, a1, a2) +
                                  " references an out-of-range index");
          if (e.p < 0.0)
            throw ValidationError("transition" + joint_name(*this, s, a1, a2) +
                                  " has a negative probability");
          sum += e.p;
        }
        if (std::fabs(sum - 1.0) > kProbTol) {
          std::ostringstream os;
          os << "transition" << joint_name(*this, s, a1, a2) << " sums to "
             << sum;
          throw ValidationError(os.str());
        }
        if (!std::isfinite(reward(s, a1, a2)))
          throw ValidationError("reward" + joint_name(*this, s, a1, a2) +
                                " is not finite");
      }
    }
  }
}

RewardBounds reward_bounds(const PosgModel& m) {
  RewardBounds rb;
  rb.r_min = m.rewards.front();
  rb.r_max = m.rewards.front();
  for (double r : m.rewards) {
    rb.r_min = std::min(rb.r_min, r);
    rb.r_max = std::max(rb.r_max, r);
  }
  rb.lambda_r = (rb.r_max - rb.r_min) / 2.0;
  return rb;
}

PosgModel parse_model(const std::string& json_text) {
  Json j;
  try {
    j = Json::parse(json_text);
  } catch (const std::exception& e) {
    throw ParseError(std::string("malformed JSON: ") + e.what());
  }
  PosgModel m;
  try {
    m.name = j.value("name", std::string("unnamed"));
    m.states = parse_name_list(j.at("states"), "states");
    const Json& acts = j.at("actions");
    if (!acts.is_array() || acts.size() != 2)
      throw ParseError("'actions' must hold exactly two lists");
    m.actions1 = parse_name_list(acts[0], "actions");
    m.actions2 = parse_name_list(acts[1], "actions");
    const Json& obs = j.at("observations");
    if (!obs.is_array() || obs.size() != 2)
      throw ParseError("'observations' must hold exactly two lists");
    m.obs1 = parse_name_list(obs[0], "observations");
    m.obs2 = parse_name_list(obs[1], "observations");
    const Json& h = j.at("horizon");
    if (h.is_string()) {
      if (h.get<std::string>() != "infinite")
        throw ParseError("horizon must be an integer or \"infinite\"");
      m.horizon = kInfiniteHorizon;
    } else {
      m.horizon = h.get<int>();
    }
    m.gamma = j.at("gamma").get<double>();
    m.b0 = j.at("b0").get<std::vector<double>>();

    const int cells = m.ns() * m.na1() * m.na2();
    m.transitions.assign(cells, {});
    m.rewards.assign(cells, 0.0);
    std::vector<bool> seen(cells, false);
    for (const Json& rec : j.at("transition")) {
      const int s = lookup(m.states, rec.at("s"), "state");
      const int a1 = lookup(m.actions1, rec.at("a1"), "player-1 action");
      const int a2 = lookup(m.actions2, rec.at("a2"), "player-2 action");
      const int idx = m.joint_index(s, a1, a2);
      if (seen[idx])
        throw ParseError("duplicate transition record for (" + std::string(rec.at("s")) +
                         "," + std::string(rec.at("a1")) + "," + std::string(rec.at("a2")) + ")");
      seen[idx] = true;
      for (const Json& nx : rec.at("next")) {
        NextEntry e;
        e.s2 = lookup(m.states, nx.at("s2"), "state");
        e.z1 = lookup(m.obs1, nx.at("z1"), "player-1 observation");
        e.z2 = lookup(m.obs2, nx.at("z2"), "player-2 observation");
        e.p = nx.at("p").get<double>();
        m.transitions[idx].push_back(e);
      }
    }
    for (int idx = 0; idx < cells; ++idx) {
      if (!seen[idx]) {
        const int a2 = idx % m.na2();
        const int a1 = (idx / m.na2()) % m.na1();
        const int s = idx / (m.na1() * m.na2());
        throw ParseError("missing transition record for (" + m.states[s] + "," +
                         m.actions1[a1] + "," + m.actions2[a2] + ")");
      }
    }
    if (j.contains("reward")) {
      for (const Json& rec : j.at("reward")) {
        const int s = lookup(m.states, rec.at("s"), "state");
        const int a1 = lookup(m.actions1, rec.at("a1"), "player-1 action");
        const int a2 = lookup(m.actions2, rec.at("a2"), "player-2 action");
        m.rewards[m.joint_index(s, a1, a2)] = rec.at("r").get<double>();
      }
    }
  } catch (const Json::exception& e) {
    throw ParseError(std::string("model schema violation: ") + e.what());
  }
  m.validate();
  return m;
}

PosgModel load_model(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open model file: " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_model(buf.str());
}

std::string save_model(const PosgModel& m) {
  Json j;
  j["name"] = m.name;
  j["states"] = m.states;
  j["actions"] = Json::array({m.actions1, m.actions2});
  j["observations"] = Json::array({m.obs1, m.obs2});
  if (m.infinite_horizon())
    j["horizon"] = "infinite";
  else
    j["horizon"] = m.horizon;
  j["gamma"] = m.gamma;
  j["b0"] = m.b0;
  Json trans = Json::array();
  for (int s = 0; s < m.ns(); ++s) {
    for (int a1 = 0; a1 < m.na1(); ++a1) {
      for (int a2 = 0; a2 < m.na2(); ++a2) {
        Json rec;
        rec["s"] = m.states[s];
        rec["a1"] = m.actions1[a1];
        rec["a2"] = m.actions2[a2];
        Json nexts = Json::array();
        for (const NextEntry& e : m.next(s, a1, a2)) {
          Json nx;
          nx["s2"] = m.states[e.s2];
          nx["z1"] = m.obs1[e.z1];
          nx["z2"] = m.obs2[e.z2];
          nx["p"] = e.p;
          nexts.push_back(nx);
        }
        rec["next"] = nexts;
        trans.push_back(rec);
      }
    }
  }
  j["transition"] = trans;
  Json rew = Json::array();
  for (int s = 0; s < m.ns(); ++s) {
    for (int a1 = 0; a1 < m.na1(); ++a1) {
      for (int a2 = 0; a2 < m.na2(); ++a2) {
        if (m.reward(s, a1, a2) == 0.0) continue;
        Json rec;
        rec["s"] = m.states[s];
        rec["a1"] = m.actions1[a1];
        rec["a2"] = m.actions2[a2];
        rec["r"] = m.reward(s, a1, a2);
        rew.push_back(rec);
      }
    }
  }
  j["reward"] = rew;
  return j.dump(2) + "\n";
}

namespace {

PosgModel make_matching_pennies() {
  PosgModel m;
  m.name = "matching-pennies";
  m.states = {"s0"};
  m.actions1 = {"heads", "tails"};
  m.actions2 = {"heads", "tails"};
  m.obs1 = {"none"};
  m.obs2 = {"none"};
  m.horizon = 1;
  m.gamma = 0.5;
  m.b0 = {1.0};
  m.transitions.assign(4, {NextEntry{0, 0, 0, 1.0}});
  m.rewards.assign(4, 0.0);
  for (int a1 = 0; a1 < 2; ++a1)
    for (int a2 = 0; a2 < 2; ++a2)
      m.rewards[m.joint_index(0, a1, a2)] = (a1 == a2) ? 1.0 : -1.0;
  return m;
}

PosgModel make_matching_pennies_2step() {
  PosgModel m;
  m.name = "matching-pennies-2step";
  m.states = {"s0"};
  m.actions1 = {"heads", "tails"};
  m.actions2 = {"heads", "tails"};
  m.obs1 = {"saw-heads", "saw-tails"};
  m.obs2 = {"saw-heads", "saw-tails"};
  m.horizon = 2;
  m.gamma = 0.5;
  m.b0 = {1.0};
  const int cells = 4;
  m.transitions.assign(cells, {});
  m.rewards.assign(cells, 0.0);
  // Each player's observation reports the opponent's previous action,
  // correct with probability 0.8.
  const double kAcc = 0.8;
  for (int a1 = 0; a1 < 2; ++a1) {
    for (int a2 = 0; a2 < 2; ++a2) {
      auto& cell = m.transitions[m.joint_index(0, a1, a2)];
      for (int z1 = 0; z1 < 2; ++z1) {
        for (int z2 = 0; z2 < 2; ++z2) {
          const double p1 = (z1 == a2) ? kAcc : 1.0 - kAcc;
          const double p2 = (z2 == a1) ? kAcc : 1.0 - kAcc;
          cell.push_back(NextEntry{0, z1, z2, p1 * p2});
        }
      }
      m.rewards[m.joint_index(0, a1, a2)] = (a1 == a2) ? 1.0 : -1.0;
    }
  }
  return m;
}

PosgModel make_adversarial_tiger() {
  PosgModel m;
  m.name = "adversarial-tiger";
  m.states = {"tiger-left", "tiger-right"};
  m.actions1 = {"listen", "open-left", "open-right"};
  m.actions2 = {"quiet", "scream"};
  m.obs1 = {"hear-left", "hear-right"};
  m.obs2 = {"growl-left", "growl-right"};
  m.horizon = 3;
  m.gamma = 0.9;
  m.b0 = {0.5, 0.5};
  const int cells = m.ns() * m.na1() * m.na2();
  m.transitions.assign(cells, {});
  m.rewards.assign(cells, 0.0);
  const int kListen = 0;
  for (int s = 0; s < 2; ++s) {
    for (int a1 = 0; a1 < 3; ++a1) {
      for (int a2 = 0; a2 < 2; ++a2) {
        auto& cell = m.transitions[m.joint_index(s, a1, a2)];
        const bool listening = (a1 == kListen);
        // Listening keeps the tiger in place; opening a door resets it
        // uniformly at random.
        std::vector<std::pair<int, double>> state_dist;
        if (listening)
          state_dist = {{s, 1.0}};
        else
          state_dist = {{0, 0.5}, {1, 0.5}};
        // Player 1 hears the tiger with accuracy 0.85 while listening under
        // a quiet opponent; a scream drops that to 0.5 (pure noise).
        // Opening doors drowns everything out.
        double acc1 = 0.5;
        if (listening) acc1 = (a2 == 0) ? 0.85 : 0.5;
        for (const auto& [s2, ps] : state_dist) {
          for (int z1 = 0; z1 < 2; ++z1) {
            // Player 2 is the tiger's keeper and sees its position exactly.
            const int z2 = s2;
            const double pz1 = (z1 == s2) ? acc1 : 1.0 - acc1;
            const double p = ps * pz1;
            if (p > 0.0) cell.push_back(NextEntry{s2, z1, z2, p});
          }
        }
        // Rewards to player 1: classic tiger payoffs, plus a 0.5 penalty
        // transferred from player 2 whenever it screams.
        double base = 0.0;
        if (a1 == kListen) {
          base = -0.1;
        } else {
          const bool opened_tiger = (a1 == 1 && s == 0) || (a1 == 2 && s == 1);
          base = opened_tiger ? -1.0 : 1.0;
        }
        m.rewards[m.joint_index(s, a1, a2)] = base + (a2 == 1 ? 0.5 : 0.0);
      }
    }
  }
  return m;
}

}  // namespace

std::vector<std::string> builtin_names() {
  return {"matching-pennies", "matching-pennies-2step", "adversarial-tiger"};
}

PosgModel builtin(const std::string& name) {
  PosgModel m;
  if (name == "matching-pennies") {
    m = make_matching_pennies();
  } else if (name == "matching-pennies-2step") {
    m = make_matching_pennies_2step();
  } else if (name == "adversarial-tiger") {
    m = make_adversarial_tiger();
  } else {
    throw ValidationError("unknown builtin model: '" + name + "'");
  }
  m.validate();
  return m;
}

}  // namespace ogs
