// Copyright 2026 The MT-CRL Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

namespace mtcrl {

struct OracleCheckOptions {
  int seeds = 100;
  std::uint64_t base_seed = 0;
  // Monte-Carlo draws per generalization-gap case.
  int gap_draws = 100;
};

struct OracleCheckRow {
  std::string check;
  int cases = 0;
  int failures = 0;
  double max_error = 0.0;
  double tolerance = 0.0;
  bool pass() const { return failures == 0; }
};

// Every closed-form oracle against its numerical counterpart.
std::vector<OracleCheckRow> run_oracle_checks(const OracleCheckOptions& options);
bool all_passed(const std::vector<OracleCheckRow>& rows);

// Header: check,cases,failures,max_error,tolerance,pass
std::string oracle_check_csv(const std::vector<OracleCheckRow>& rows);

}  // namespace mtcrl
