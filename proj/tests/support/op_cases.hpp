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

#include <random>
#include <string>
#include <vector>

#include "tensor/grad.hpp"

namespace mtcrl::testing {

// A randomized scalar objective exercising one op.
struct OpCase {
  std::string op;
  ScalarFn f;
  std::vector<Array> params;
  // Relative tolerance: tight for smooth ops, looser at piecewise-linear ones.
  double tolerance = 1e-6;
};

const std::vector<std::string>& supported_op_cases();
OpCase make_op_case(const std::string& op, std::mt19937_64& rng);

// Small random routed model. `penalty` is ||d risk / d routing||^2 with
// routing = sigmoid(theta), as a function of (theta, encoder, head).
struct PenaltyCase {
  ScalarFn penalty;
  std::vector<Array> params;
};
PenaltyCase make_penalty_case(std::mt19937_64& rng);

}  // namespace mtcrl::testing
