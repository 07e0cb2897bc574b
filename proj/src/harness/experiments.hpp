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

#include "harness/config.hpp"
#include "harness/report.hpp"

namespace mtcrl {

struct MethodRow {
  std::string method;
  std::string dataset;
  std::uint64_t seed = 0;
  double acc_train = 0.0;
  double acc_val = 0.0;
  double rho_spur = 0.0;
};

struct Table2Result {
  std::vector<MethodRow> per_seed;
  // Means over seeds, one row per method and dataset.
  std::vector<MethodRow> summary;
  std::vector<RunReport> reports;
};

// STL against multi-task training without regularizers on each base config,
// for every seed. Both methods of a seed share the dataset.
Table2Result run_table2(const std::vector<TrainConfig>& bases, const std::vector<std::uint64_t>& seeds,
                        std::size_t workers);
// Header: method,dataset,acc_train,acc_val,rho_spur
std::string table2_csv(const std::vector<MethodRow>& rows);
// Header: method,dataset,seed,acc_train,acc_val,rho_spur
std::string table2_seeds_csv(const std::vector<MethodRow>& rows);

struct SweepPoint {
  std::size_t tasks = 0;
  std::vector<double> mtl_acc_val, mtl_rho_spur, stl_acc_val, stl_rho_spur;
};

struct SweepResult {
  std::vector<SweepPoint> points;
  // Spearman correlation of T against the seed-mean MTL metric.
  double mtl_rho_trend = 0.0;
  double mtl_acc_trend = 0.0;
  bool rho_rises = false;
  bool acc_falls = false;
  bool stl_below_mtl_everywhere = false;
  std::vector<RunReport> reports;
};

SweepResult run_task_sweep(const TrainConfig& base, const std::vector<std::size_t>& task_counts,
                           const std::vector<std::uint64_t>& seeds, std::size_t workers);
// Header: tasks,method,acc_val_mean,acc_val_std,rho_spur_mean,rho_spur_std
std::string sweep_csv(const SweepResult& result);

struct AblationRow {
  std::string name;
  std::vector<double> acc_val;
  std::vector<double> rho_spur;
  std::vector<double> max_cross_module_corr;
};

struct AblationResult {
  std::vector<AblationRow> rows;
  std::vector<std::uint64_t> seeds;
  std::vector<RunReport> reports;
  const AblationRow& row(const std::string& name) const;
};

// Named variants of an mtcrl config; see ablation_variants.
std::vector<std::pair<std::string, TrainConfig>> ablation_variants(const TrainConfig& base);
AblationResult run_ablation(const TrainConfig& base, const std::vector<std::uint64_t>& seeds,
                            std::size_t workers,
                            const std::vector<std::string>& only = {});
// Header: variant,acc_val,rho_spur,acc_val_mean,acc_val_std,rho_spur_mean,rho_spur_std
std::string ablation_csv(const AblationResult& result);

}  // namespace mtcrl
