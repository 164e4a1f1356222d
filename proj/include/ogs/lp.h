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

#include <vector>

namespace ogs {

// Dense linear program in the form
//   maximize    c . x
//   subject to  eq_rows  x  = eq_rhs
//               ub_rows  x <= ub_rhs
//               x >= 0
// Free variables must be encoded by the caller as differences of two
// nonnegative variables.
struct LpProblem {
  int num_vars = 0;
  std::vector<double> objective;
  std::vector<std::vector<double>> eq_rows;
  std::vector<double> eq_rhs;
  std::vector<std::vector<double>> ub_rows;
  std::vector<double> ub_rhs;

  int add_var(double obj_coeff = 0.0);
  void add_eq(std::vector<double> row, double rhs);
  void add_ub(std::vector<double> row, double rhs);
};

enum class LpStatus { kOptimal, kInfeasible, kUnbounded, kIterationLimit };

struct LpResult {
  LpStatus status = LpStatus::kIterationLimit;
  double value = 0.0;
  std::vector<double> x;
  bool ok() const { return status == LpStatus::kOptimal; }
};

// Two-phase primal simplex on a dense tableau, Bland's rule throughout
// (anti-cycling). Intended for the small stage and matrix games this
// project solves; sizes beyond a few hundred rows are out of scope.
LpResult lp_solve_max(const LpProblem& p);

}  // namespace ogs
