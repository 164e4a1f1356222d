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

#include <cstdint>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "ogs/hsvi.h"
#include "ogs/oracle.h"

namespace {

using Json = nlohmann::ordered_json;

// Exit codes: 0 success, 1 parse/validation, 2 config violation, 3 solver
// budget exhausted, 4 enumeration guard, 5 strategy coverage gap.
enum ExitCode {
  kOk = 0,
  kParseError = 1,
  kConfigError = 2,
  kBudgetExhausted = 3,
  kGuardTripped = 4,
  kCoverageGap = 5,
};

// Minimal SHA-1, used for git-style blob hashes in run manifests.
class Sha1 {
 public:
  void update(const unsigned char* data, size_t len) {
    for (size_t i = 0; i < len; ++i) {
      buf_[buf_len_++] = data[i];
      total_ += 1;
      if (buf_len_ == 64) {
        process();
        buf_len_ = 0;
      }
    }
  }
  std::string hex() {
    const uint64_t bits = total_ * 8;
    unsigned char pad = 0x80;
    update(&pad, 1);
    unsigned char zero = 0;
    while (buf_len_ != 56) update(&zero, 1);
    unsigned char len_bytes[8];
    for (int i = 0; i < 8; ++i)
      len_bytes[i] = static_cast<unsigned char>(bits >> (56 - 8 * i));
    update(len_bytes, 8);
    std::ostringstream os;
    for (uint32_t v : h_) {
      os << std::hex << std::setw(8) << std::setfill('0') << v;
    }
    return os.str();
  }

 private:
  static uint32_t rol(uint32_t v, int s) { return (v << s) | (v >> (32 - s)); }
  void process() {
    uint32_t w[80];
    for (int i = 0; i < 16; ++i)
      w[i] = (buf_[4 * i] << 24) | (buf_[4 * i + 1] << 16) |
             (buf_[4 * i + 2] << 8) | buf_[4 * i + 3];
    for (int i = 16; i < 80; ++i)
      w[i] = rol(w[i - 3] ^ w[i - 8] ^ w[i - 14] ^ w[i - 16], 1);
    uint32_t a = h_[0], b = h_[1], c = h_[2], d = h_[3], e = h_[4];
    for (int i = 0; i < 80; ++i) {
      uint32_t f, k;
      if (i < 20) {
        f = (b & c) | (~b & d);
        k = 0x5A827999;
      } else if (i < 40) {
        f = b ^ c ^ d;
        k = 0x6ED9EBA1;
      } else if (i < 60) {
        f = (b & c) | (b & d) | (c & d);
        k = 0x8F1BBCDC;
      } else {
        f = b ^ c ^ d;
        k = 0xCA62C1D6;
      }
      const uint32_t t = rol(a, 5) + f + e + k + w[i];
      e = d;
      d = c;
      c = rol(b, 30);
      b = a;
      a = t;
    }
    h_[0] += a;
    h_[1] += b;
    h_[2] += c;
    h_[3] += d;
    h_[4] += e;
  }

  uint32_t h_[5] = {0x67452301, 0xEFCDAB89, 0x98BADCFE, 0x10325476,
                    0xC3D2E1F0};
  unsigned char buf_[64];
  size_t buf_len_ = 0;
  uint64_t total_ = 0;
};

std::string git_blob_hash(const std::string& content) {
  Sha1 sha;
  const std::string header = "blob " + std::to_string(content.size());
  sha.update(reinterpret_cast<const unsigned char*>(header.data()),
             header.size());
  const unsigned char nul = 0;
  sha.update(&nul, 1);
  sha.update(reinterpret_cast<const unsigned char*>(content.data()),
             content.size());
  return sha.hex();
}

struct ModelArgs {
  std::string path;
  std::string builtin_name;
};

ogs::PosgModel resolve_model(const ModelArgs& args) {
  if (!args.builtin_name.empty()) return ogs::builtin(args.builtin_name);
  if (!args.path.empty()) return ogs::load_model(args.path);
  throw ogs::ParseError("one of --model or --builtin is required");
}

void write_file(const std::string& path, const std::string& content) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << content;
}

void emit_manifest(const std::string& command, const ModelArgs& margs,
                   const ogs::PosgModel& m, const Json& config,
                   const std::vector<std::string>& outputs,
                   const std::string& manifest_path) {
  Json j;
  j["command"] = command;
  if (!margs.builtin_name.empty())
    j["model"] = "builtin:" + margs.builtin_name;
  else
    j["model"] = margs.path;
  j["model_hash"] = git_blob_hash(ogs::save_model(m));
  j["config"] = config;
  j["outputs"] = outputs;
  const std::string text = j.dump(2) + "\n";
  if (manifest_path.empty())
    std::cout << text;
  else
    write_file(manifest_path, text);
}

std::string trace_csv(const ogs::SolveResult& res) {
  std::ostringstream os;
  os.precision(12);
  os << "trial,depth,width,threshold,u_value,l_value,occupancy_support\n";
  for (const ogs::TrialStep& s : res.trace)
    os << s.trial << "," << s.depth << "," << s.width << "," << s.threshold
       << "," << s.u_value << "," << s.l_value << "," << s.occupancy_support
       << "\n";
  return os.str();
}

Json summary_json(const ogs::SolveResult& res, unsigned long long seed) {
  Json j;
  j["lower"] = res.lower;
  j["upper"] = res.upper;
  j["gap"] = res.gap;
  j["converged"] = res.converged;
  j["trials"] = res.trials_run;
  j["max_trial_len"] = res.max_trial_length;
  j["t_max"] = res.t_max;
  j["epsilon"] = res.epsilon;
  j["rho"] = res.rho;
  j["local_tol"] = res.local_tol;
  j["seed"] = seed;
  j["budget_warning"] = res.budget_warning;
  j["contraction_violations"] = res.contraction_violations;
  j["wallclock_ms"] = res.wallclock_ms;
  return j;
}

int cmd_solve(const ModelArgs& margs, ogs::SolverConfig cfg,
              const std::string& out_path, const std::string& trace_path,
              const std::string& strategy_prefix) {
  ogs::PosgModel m;
  try {
    m = resolve_model(margs);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kParseError;
  }
  ogs::SolveResult res;
  try {
    res = ogs::solve(m, cfg);
  } catch (const ogs::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kConfigError;
  }

  Json config;
  config["epsilon"] = cfg.epsilon;
  config["rho"] = res.rho;
  config["local_tol"] = res.local_tol;
  config["max_trials"] = cfg.max_trials;
  config["lipschitz"] =
      cfg.lipschitz_mode == ogs::LipschitzMode::kRefined ? "refined" : "static";
  config["seed"] = cfg.seed;

  std::vector<std::string> outputs;
  const Json summary = summary_json(res, cfg.seed);
  if (!out_path.empty()) {
    write_file(out_path, summary.dump(2) + "\n");
    outputs.push_back(out_path);
  }
  if (!trace_path.empty()) {
    write_file(trace_path, trace_csv(res));
    outputs.push_back(trace_path);
  }
  if (!strategy_prefix.empty() && res.space != nullptr) {
    const std::string p1 = strategy_prefix + ".p1.json";
    const std::string p2 = strategy_prefix + ".p2.json";
    write_file(p1, ogs::strategy_to_json(m, *res.space, res.strategy1));
    write_file(p2, ogs::strategy_to_json(m, *res.space, res.strategy2));
    outputs.push_back(p1);
    outputs.push_back(p2);
  }
  std::cout << summary.dump(2) << "\n";

  emit_manifest("solve", margs, m, config, outputs,
                out_path.empty() ? "" : out_path + ".manifest.json");
  return res.converged ? kOk : kBudgetExhausted;
}

int cmd_oracle(const ModelArgs& margs, std::optional<int> horizon,
               const std::string& golden_path) {
  ogs::PosgModel m;
  try {
    m = resolve_model(margs);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kParseError;
  }
  int h = horizon.value_or(m.horizon);
  if (m.infinite_horizon() && !horizon.has_value()) {
    std::cerr << "error: --horizon is required for infinite-horizon models\n";
    return kConfigError;
  }
  ogs::OracleSolution sol;
  try {
    const ogs::OccupancyState o0 = ogs::initial_occupancy(m);
    sol = ogs::solve_matrix_game(ogs::normal_form(m, o0, h));
  } catch (const ogs::GuardError& e) {
    std::cerr << "guard: " << e.what() << "\n";
    return kGuardTripped;
  }
  Json j;
  j["model"] = m.name;
  j["horizon"] = h;
  j["value"] = sol.value;
  j["row_mix"] = sol.row_mix;
  j["col_mix"] = sol.col_mix;
  std::cout << j.dump(2) << "\n";
  std::vector<std::string> outputs;
  if (!golden_path.empty()) {
    write_file(golden_path, ogs::golden_to_json(m, h, sol));
    outputs.push_back(golden_path);
  }
  Json config;
  config["horizon"] = h;
  emit_manifest("oracle", margs, m, config, outputs,
                golden_path.empty() ? "" : golden_path + ".manifest.json");
  return kOk;
}

int cmd_eval(const ModelArgs& margs, const std::string& s1_path,
             const std::string& s2_path, bool with_exploitability,
             std::optional<int> horizon) {
  ogs::PosgModel m;
  ogs::BehavioralStrategy s1, s2;
  ogs::OccupancyState o0;
  try {
    m = resolve_model(margs);
    o0 = ogs::initial_occupancy(m);
    std::ifstream f1(s1_path), f2(s2_path);
    if (!f1 || !f2) throw ogs::ParseError("cannot open strategy file");
    std::stringstream b1, b2;
    b1 << f1.rdbuf();
    b2 << f2.rdbuf();
    s1 = ogs::strategy_from_json(m, *o0.space(), b1.str());
    s2 = ogs::strategy_from_json(m, *o0.space(), b2.str());
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kParseError;
  }
  const int h = horizon.value_or(
      s1.first_depth + static_cast<int>(s1.rules.size()));
  Json j;
  try {
    j["value"] = ogs::evaluate_profile(m, o0, s1, s2);
    if (with_exploitability) {
      const double br1 = ogs::best_response_value(m, o0, s2, 1, h);
      const double br2 = ogs::best_response_value(m, o0, s1, 2, h);
      j["best_response_1"] = br1;
      j["best_response_2"] = br2;
      j["exploitability"] = br1 - br2;
    }
  } catch (const ogs::CoverageError& e) {
    std::cerr << "coverage: " << e.what() << "\n";
    return kCoverageGap;
  } catch (const ogs::GuardError& e) {
    std::cerr << "guard: " << e.what() << "\n";
    return kGuardTripped;
  }
  std::cout << j.dump(2) << "\n";
  Json config;
  config["horizon"] = h;
  config["exploitability"] = with_exploitability;
  emit_manifest("eval", margs, m, config, {}, "");
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Occupancy-game solver for 2-player zero-sum POSGs"};
  app.require_subcommand(1);

  ModelArgs margs;
  ogs::SolverConfig cfg;
  double rho_flag = -1.0;
  double local_tol_flag = -1.0;
  std::string lipschitz = "static";
  std::string out_path, trace_path, strategy_prefix;

  CLI::App* solve = app.add_subcommand("solve", "run the HSVI solver");
  solve->add_option("--model", margs.path, "model JSON file");
  solve->add_option("--builtin", margs.builtin_name, "builtin model name");
  solve->add_option("--epsilon", cfg.epsilon, "target gap at o0");
  solve->add_option("--rho", rho_flag, "ball radius");
  solve->add_option("--local-tol", local_tol_flag, "local game tolerance");
  solve->add_option("--max-trials", cfg.max_trials, "trial budget");
  solve->add_option("--lipschitz", lipschitz, "static|refined");
  solve->add_option("--seed", cfg.seed, "rng seed echoed into outputs");
  solve->add_option("--trace", trace_path, "trial trace CSV path");
  solve->add_option("--out", out_path, "summary JSON path");
  solve->add_option("--strategies", strategy_prefix,
                    "write extracted strategies to PREFIX.p{1,2}.json");

  ModelArgs oracle_margs;
  int oracle_horizon = -1;
  std::string golden_path;
  CLI::App* oracle = app.add_subcommand("oracle", "exact normal-form value");
  oracle->add_option("--model", oracle_margs.path, "model JSON file");
  oracle->add_option("--builtin", oracle_margs.builtin_name, "builtin name");
  oracle->add_option("--horizon", oracle_horizon, "evaluation horizon");
  oracle->add_option("--write-golden", golden_path, "golden fixture path");

  ModelArgs eval_margs;
  std::string s1_path, s2_path;
  bool with_exploitability = false;
  int eval_horizon = -1;
  CLI::App* eval = app.add_subcommand("eval", "evaluate a strategy profile");
  eval->add_option("--model", eval_margs.path, "model JSON file");
  eval->add_option("--builtin", eval_margs.builtin_name, "builtin name");
  eval->add_option("--s1", s1_path, "player 1 strategy JSON")->required();
  eval->add_option("--s2", s2_path, "player 2 strategy JSON")->required();
  eval->add_flag("--exploitability", with_exploitability,
                 "also compute best-response gaps");
  eval->add_option("--horizon", eval_horizon, "evaluation horizon");

  CLI11_PARSE(app, argc, argv);

  try {
    if (solve->parsed()) {
      if (rho_flag >= 0.0) cfg.rho = rho_flag;
      if (local_tol_flag > 0.0) cfg.local_tol = local_tol_flag;
      if (lipschitz == "refined")
        cfg.lipschitz_mode = ogs::LipschitzMode::kRefined;
      else if (lipschitz != "static") {
        std::cerr << "config error: --lipschitz must be static or refined\n";
        return kConfigError;
      }
      return cmd_solve(margs, cfg, out_path, trace_path, strategy_prefix);
    }
    if (oracle->parsed()) {
      return cmd_oracle(oracle_margs,
                        oracle_horizon > 0 ? std::optional<int>(oracle_horizon)
                                           : std::nullopt,
                        golden_path);
    }
    if (eval->parsed()) {
      return cmd_eval(eval_margs, s1_path, s2_path, with_exploitability,
                      eval_horizon > 0 ? std::optional<int>(eval_horizon)
                                       : std::nullopt);
    }
  } catch (const ogs::ValidationError& e) {
    std::cerr << "validation error: " << e.what() << "\n";
    return kParseError;
  } catch (const ogs::ParseError& e) {
    std::cerr << "parse error: " << e.what() << "\n";
    return kParseError;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kParseError;
  }
  return kOk;
}
