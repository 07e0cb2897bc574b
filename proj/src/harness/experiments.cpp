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

#include "harness/experiments.hpp"

#include <map>
#include <sstream>

#include "common/error.hpp"
#include "harness/parallel.hpp"
#include "harness/trainer.hpp"

namespace mtcrl {

namespace {

std::ostringstream csv_stream() {
  std::ostringstream out;
  out.precision(10);
  return out;
}

MethodRow row_of(const std::string& method, const RunReport& r) {
  return {method, r.dataset, r.seed, r.acc_train, r.acc_val, r.rho_spur};
}

std::vector<RunReport> run_all(const std::vector<TrainConfig>& configs, std::size_t workers) {
  return parallel_map<RunReport>(configs.size(), workers, [&](std::size_t i) { return train(configs[i]); });
}

void require_seeds(const std::vector<std::uint64_t>& seeds) {
  if (seeds.empty()) throw ConfigError("at least one seed is required");
}

}  // namespace

Table2Result run_table2(const std::vector<TrainConfig>& bases, const std::vector<std::uint64_t>& seeds,
                        std::size_t workers) {
  require_seeds(seeds);
  std::vector<TrainConfig> configs;
  std::vector<std::string> methods;
  for (const auto& base : bases) {
    for (std::uint64_t seed : seeds) {
      for (TrainMode mode : {TrainMode::kStl, TrainMode::kMtlVanilla}) {
        TrainConfig c = base;
        c.mode = mode;
        c.seed = seed;
        configs.push_back(c);
        methods.push_back(mode == TrainMode::kStl ? "stl" : "mtl");
      }
    }
  }
  Table2Result out;
  out.reports = run_all(configs, workers);
  std::map<std::pair<std::string, std::string>, std::vector<const MethodRow*>> groups;
  for (std::size_t i = 0; i < configs.size(); ++i) out.per_seed.push_back(row_of(methods[i], out.reports[i]));
  std::vector<std::pair<std::string, std::string>> order;
  for (const auto& r : out.per_seed) {
    auto key = std::make_pair(r.dataset, r.method);
    if (!groups.count(key)) order.push_back(key);
    groups[key].push_back(&r);
  }
  for (const auto& key : order) {
    std::vector<double> tr, va, rho;
    for (const MethodRow* r : groups[key]) {
      tr.push_back(r->acc_train);
      va.push_back(r->acc_val);
      rho.push_back(r->rho_spur);
    }
    out.summary.push_back({key.second, key.first, 0, mean(tr), mean(va), mean(rho)});
  }
  return out;
}

std::string table2_csv(const std::vector<MethodRow>& rows) {
  auto out = csv_stream();
  out << "method,dataset,acc_train,acc_val,rho_spur\n";
  for (const auto& r : rows) {
    out << r.method << ',' << r.dataset << ',' << r.acc_train << ',' << r.acc_val << ',' << r.rho_spur << '\n';
  }
  return out.str();
}

std::string table2_seeds_csv(const std::vector<MethodRow>& rows) {
  auto out = csv_stream();
  out << "method,dataset,seed,acc_train,acc_val,rho_spur\n";
  for (const auto& r : rows) {
    out << r.method << ',' << r.dataset << ',' << r.seed << ',' << r.acc_train << ',' << r.acc_val << ','
        << r.rho_spur << '\n';
  }
  return out.str();
}

SweepResult run_task_sweep(const TrainConfig& base, const std::vector<std::size_t>& task_counts,
                           const std::vector<std::uint64_t>& seeds, std::size_t workers) {
  require_seeds(seeds);
  if (task_counts.empty()) throw ConfigError("task sweep needs at least one task count");
  if (base.dataset != DatasetKind::kMultiSem) throw ConfigError("task sweep requires multisem data");
  std::vector<TrainConfig> configs;
  for (std::size_t t : task_counts) {
    if (t < 2) throw ConfigError("task sweep counts must be at least 2");
    for (std::uint64_t seed : seeds) {
      for (TrainMode mode : {TrainMode::kMtlVanilla, TrainMode::kStl}) {
        TrainConfig c = base;
        c.sem.tasks = t;
        c.mode = mode;
        c.seed = seed;
        if (!c.data_seed_fixed) c.sem.seed = seed;
        configs.push_back(c);
      }
    }
  }
  SweepResult out;
  out.reports = run_all(configs, workers);
  std::size_t k = 0;
  std::vector<double> ts, rho_means, acc_means;
  out.stl_below_mtl_everywhere = true;
  for (std::size_t t : task_counts) {
    SweepPoint p;
    p.tasks = t;
    for (std::size_t s = 0; s < seeds.size(); ++s) {
      const RunReport& mtl = out.reports[k++];
      const RunReport& stl = out.reports[k++];
      p.mtl_acc_val.push_back(mtl.acc_val);
      p.mtl_rho_spur.push_back(mtl.rho_spur);
      p.stl_acc_val.push_back(stl.acc_val);
      p.stl_rho_spur.push_back(stl.rho_spur);
    }
    ts.push_back(static_cast<double>(t));
    rho_means.push_back(mean(p.mtl_rho_spur));
    acc_means.push_back(mean(p.mtl_acc_val));
    if (!(mean(p.stl_rho_spur) < mean(p.mtl_rho_spur))) out.stl_below_mtl_everywhere = false;
    out.points.push_back(std::move(p));
  }
  out.mtl_rho_trend = spearman(ts, rho_means);
  out.mtl_acc_trend = spearman(ts, acc_means);
  out.rho_rises = out.mtl_rho_trend > 0;
  out.acc_falls = out.mtl_acc_trend < 0;
  return out;
}

std::string sweep_csv(const SweepResult& result) {
  auto out = csv_stream();
  out << "tasks,method,acc_val_mean,acc_val_std,rho_spur_mean,rho_spur_std\n";
  for (const auto& p : result.points) {
    out << p.tasks << ",mtl," << mean(p.mtl_acc_val) << ',' << stddev(p.mtl_acc_val) << ','
        << mean(p.mtl_rho_spur) << ',' << stddev(p.mtl_rho_spur) << '\n';
    out << p.tasks << ",stl," << mean(p.stl_acc_val) << ',' << stddev(p.stl_acc_val) << ','
        << mean(p.stl_rho_spur) << ',' << stddev(p.stl_rho_spur) << '\n';
  }
  return out.str();
}

const AblationRow& AblationResult::row(const std::string& name) const {
  for (const auto& r : rows) {
    if (r.name == name) return r;
  }
  throw ConfigError("no ablation row named '" + name + "'");
}

std::vector<std::pair<std::string, TrainConfig>> ablation_variants(const TrainConfig& base) {
  TrainConfig full = base;
  full.mode = TrainMode::kMtcrl;
  std::vector<std::pair<std::string, TrainConfig>> v;
  v.emplace_back("full", full);
  TrainConfig c = full;
  c.weights.lambda_decor = 0;
  v.emplace_back("no-decor", c);
  c = full;
  c.weights.lambda_sps = 0;
  v.emplace_back("no-sps", c);
  c = full;
  c.weights.lambda_bal = 0;
  v.emplace_back("no-bal", c);
  c = full;
  c.weights.lambda_sps = c.weights.lambda_bal = 0;
  v.emplace_back("no-graph-reg", c);
  c = full;
  c.weights.girm_variant = GirmVariant::kNone;
  v.emplace_back("no-girm", c);
  c = full;
  c.weights.girm_variant = GirmVariant::kNorm;
  v.emplace_back("girm-norm", c);
  c = full;
  c.weights.girm_variant = GirmVariant::kIrmBaseline;
  v.emplace_back("irm-baseline", c);
  c = full;
  c.mode = TrainMode::kMtlVanilla;
  c.mtl_architecture = MtlArchitecture::kMmoe;
  v.emplace_back("vanilla", c);
  return v;
}

AblationResult run_ablation(const TrainConfig& base, const std::vector<std::uint64_t>& seeds,
                            std::size_t workers, const std::vector<std::string>& only) {
  require_seeds(seeds);
  auto variants = ablation_variants(base);
  if (!only.empty()) {
    std::vector<std::pair<std::string, TrainConfig>> kept;
    for (const auto& name : only) {
      auto it = std::find_if(variants.begin(), variants.end(), [&](const auto& v) { return v.first == name; });
      if (it == variants.end()) throw ConfigError("unknown ablation variant '" + name + "'");
      kept.push_back(*it);
    }
    variants = std::move(kept);
  }
  std::vector<TrainConfig> configs;
  for (const auto& [name, cfg] : variants) {
    for (std::uint64_t seed : seeds) {
      TrainConfig c = cfg;
      c.seed = seed;
      configs.push_back(c);
    }
  }
  AblationResult out;
  out.seeds = seeds;
  out.reports = run_all(configs, workers);
  std::size_t k = 0;
  for (const auto& v : variants) {
    AblationRow row;
    row.name = v.first;
    for (std::size_t s = 0; s < seeds.size(); ++s) {
      const RunReport& r = out.reports[k++];
      row.acc_val.push_back(r.acc_val);
      row.rho_spur.push_back(r.rho_spur);
      row.max_cross_module_corr.push_back(r.max_cross_module_corr);
    }
    out.rows.push_back(std::move(row));
  }
  return out;
}

std::string ablation_csv(const AblationResult& result) {
  auto out = csv_stream();
  out << "variant,acc_val,rho_spur,acc_val_mean,acc_val_std,rho_spur_mean,rho_spur_std\n";
  for (const auto& r : result.rows) {
    out << r.name << ',' << mean_pm_std(r.acc_val) << ',' << mean_pm_std(r.rho_spur) << ','
        << mean(r.acc_val) << ',' << stddev(r.acc_val) << ',' << mean(r.rho_spur) << ','
        << stddev(r.rho_spur) << '\n';
  }
  return out.str();
}

}  // namespace mtcrl
