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
#include <string>
#include <vector>

#include <json.hpp>

#include "tensor/array.hpp"

namespace mtcrl {

struct EpochRecord {
  std::size_t epoch = 0;
  std::vector<double> train_risk;  // per task, full training slice
  std::vector<double> valid_risk;  // per task, valid slice
  double acc_train = 0.0;
  double acc_valid_env = 0.0;
};

// Metrics of one run. acc_val is measured on the held-out evaluation split
// (the shifted test distribution); acc_valid_env on the valid environment.
struct RunReport {
  std::string config_hash;
  std::uint64_t seed = 0;
  std::string mode;
  std::string dataset;
  std::size_t tasks = 0;
  std::vector<EpochRecord> history;
  std::size_t epochs_run = 0;
  std::size_t selected_epoch = 0;
  bool early_stopped = false;

  std::vector<double> acc_train_per_task;
  std::vector<double> acc_valid_env_per_task;
  std::vector<double> acc_val_per_task;
  std::vector<double> rho_spur_per_task;
  double acc_train = 0.0;
  double acc_valid_env = 0.0;
  double acc_val = 0.0;
  double rho_spur = 0.0;

  Array routing;     // T x K
  Array similarity;  // T x T
  double similarity_threshold = 0.1;
  // Largest |corr| between dims of different modules, on training rows
  // and on test rows.
  double max_cross_module_corr = 0.0;
  double max_cross_module_corr_test = 0.0;
  std::vector<std::vector<double>> saliency;  // per task Grad(F)

  double wall_clock_seconds = 0.0;
};

nlohmann::json report_to_json(const RunReport& report, bool include_timing = true);
RunReport report_from_json(const nlohmann::json& j);

double mean(const std::vector<double>& v);
// Sample standard deviation; 0 for fewer than two values.
double stddev(const std::vector<double>& v);
// "0.915 ± 0.018"
std::string mean_pm_std(const std::vector<double>& v, int digits = 3);
// Spearman rank correlation with average ranks for ties; 0 when either
// side is constant.
double spearman(const std::vector<double>& x, const std::vector<double>& y);

}  // namespace mtcrl
