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

#include <atomic>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>
#include <numeric>
#include <stdexcept>
#include <vector>

#include <gtest/gtest.h>

#include "common/error.hpp"
#include "data/environment.hpp"
#include "harness/config.hpp"
#include "harness/experiments.hpp"
#include "harness/optimizer.hpp"
#include "harness/parallel.hpp"
#include "harness/report.hpp"
#include "harness/trainer.hpp"

namespace mtcrl {
namespace {

TrainConfig tiny_config(TrainMode mode = TrainMode::kMtcrl) {
  TrainConfig c;
  c.mode = mode;
  c.mtl_architecture = MtlArchitecture::kMmoe;
  c.sem.d_factor = 3;
  c.sem.n_train = 60;
  c.sem.n_valid = 40;
  c.sem.n_test = 50;
  c.sem.mu_norm = 1.5;
  c.model.modules = 3;
  c.model.module_dim = 2;
  c.model.encoder_hidden = {4};
  c.epochs = 3;
  c.batch_size = 32;
  c.saliency_rows = 50;
  c.seed = 5;
  return c;
}

struct StepFixture {
  TrainConfig config = tiny_config();
  SplitData data = load_dataset(config);
  ModularModel model{config.model_spec(data.train.dim(), {1, 1}), 3};
  std::vector<Environment> envs = split_environments(data.train, data.valid);

  StepOptions options(bool detach = true) const { return {config.weights, detach}; }
};

double max_abs(const Array& a) {
  double m = 0;
  for (double v : a.values()) m = std::max(m, std::abs(v));
  return m;
}

double max_diff(const Array& a, const Array& b) {
  double m = 0;
  for (std::size_t i = 0; i < a.values().size(); ++i) m = std::max(m, std::abs(a.values()[i] - b.values()[i]));
  return m;
}

// Config

TEST(ConfigTest, DefaultsMatchDocumentedValues) {
  TrainConfig c;
  EXPECT_EQ(c.mode, TrainMode::kMtcrl);
  EXPECT_EQ(c.optimizer.kind, OptimizerKind::kAdam);
  EXPECT_DOUBLE_EQ(c.optimizer.lr, 1e-3);
  EXPECT_EQ(c.epochs, 200u);
  EXPECT_EQ(c.patience, 10u);
  EXPECT_EQ(c.model.modules, 8u);
  EXPECT_DOUBLE_EQ(c.weights.lambda_decor, 20.0);
  EXPECT_DOUBLE_EQ(c.weights.lambda_sps, 0.2);
  EXPECT_DOUBLE_EQ(c.weights.lambda_bal, 5.0);
  EXPECT_DOUBLE_EQ(c.weights.lambda_girm, 5.0);
  EXPECT_EQ(c.weights.girm_variant, GirmVariant::kVar);
  EXPECT_NO_THROW(c.validate());
}

TEST(ConfigTest, JsonRoundTripPreservesHash) {
  TrainConfig c = tiny_config();
  c.weights.girm_variant = GirmVariant::kNorm;
  c.optimizer.kind = OptimizerKind::kSgd;
  c.optimizer.momentum = 0.5;
  TrainConfig back = config_from_json(config_to_json(c));
  EXPECT_EQ(config_to_json(back), config_to_json(c));
  EXPECT_EQ(config_hash(back), config_hash(c));
  EXPECT_EQ(config_hash(c).size(), 16u);
}

TEST(ConfigTest, HashChangesWithAnyField) {
  TrainConfig a = tiny_config(), b = tiny_config();
  b.weights.lambda_decor = 19.0;
  EXPECT_NE(config_hash(a), config_hash(b));
  b = tiny_config();
  b.seed = 6;
  EXPECT_NE(config_hash(a), config_hash(b));
}

TEST(ConfigTest, UnknownKeysAreRejected) {
  EXPECT_THROW(config_from_json(nlohmann::json{{"epochz", 3}}), ConfigError);
  EXPECT_THROW(config_from_json(nlohmann::json{{"weights", {{"decorr", 1}}}}), ConfigError);
  EXPECT_THROW(config_from_json(nlohmann::json{{"mode", "multi"}}), ConfigError);
}

TEST(ConfigTest, InvalidValuesAreRejected) {
  EXPECT_THROW(config_from_json(nlohmann::json{{"weights", {{"girm", -1}}}}), ConfigError);
  EXPECT_THROW(config_from_json(nlohmann::json{{"optimizer", {{"lr", 0}}}}), ConfigError);
  EXPECT_THROW(config_from_json(nlohmann::json{{"model", {{"modules", 0}}}}), ConfigError);
}

TEST(ConfigTest, MissingFileIsAnIoError) {
  EXPECT_THROW(load_config("/nonexistent/cfg.json"), IoError);
  auto path = std::filesystem::temp_directory_path() / "mtcrl_bad_cfg.json";
  std::ofstream(path) << "{not json";
  EXPECT_THROW(load_config(path), ConfigError);
  std::filesystem::remove(path);
}

TEST(ConfigTest, DataSeedFollowsRunSeedUnlessFixed) {
  TrainConfig c = config_from_json(nlohmann::json{{"seed", 7}});
  EXPECT_EQ(c.data_seed(), 7u);
  TrainConfig f = config_from_json(nlohmann::json{{"seed", 7}, {"dataset", {{"seed", 2}}}});
  EXPECT_EQ(f.data_seed(), 2u);
}

TEST(ConfigTest, RegularizersAreOffOutsideMtcrl) {
  TrainConfig c = tiny_config(TrainMode::kMtlVanilla);
  PenaltyWeights w = c.effective_weights();
  EXPECT_EQ(w.lambda_decor, 0.0);
  EXPECT_EQ(w.lambda_sps, 0.0);
  EXPECT_EQ(w.lambda_bal, 0.0);
  EXPECT_EQ(w.lambda_girm, 0.0);
  EXPECT_EQ(tiny_config().effective_weights().lambda_decor, 20.0);
}

TEST(ConfigTest, ModeSelectsArchitecture) {
  TrainConfig stl = tiny_config(TrainMode::kStl);
  ModelSpec s = stl.model_spec(6, {1, 1});
  EXPECT_EQ(s.modules, 2u);
  EXPECT_EQ(s.routing, RoutingMode::kFixedIdentity);

  TrainConfig sb = tiny_config(TrainMode::kMtlVanilla);
  sb.mtl_architecture = MtlArchitecture::kSharedBottom;
  ModelSpec b = sb.model_spec(6, {1, 1});
  EXPECT_EQ(b.modules, 1u);
  EXPECT_EQ(b.routing, RoutingMode::kFixedOnes);

  ModelSpec m = tiny_config().model_spec(6, {1, 1});
  EXPECT_EQ(m.modules, 3u);
  EXPECT_EQ(m.routing, RoutingMode::kLearned);
  EXPECT_EQ(m.rep_dim, 6u);
}

// Optimizer

TEST(OptimizerTest, SgdStepMatchesHandComputation) {
  OptimizerConfig c;
  c.kind = OptimizerKind::kSgd;
  c.lr = 0.1;
  c.momentum = 0.5;
  Optimizer opt(c);
  std::vector<Parameter> p{{"w", ParamGroup::kHead, 0, Array({2}, {1.0, -2.0})}};
  std::vector<Array> g{Array({2}, {0.5, 1.0})};
  opt.step(p, g);
  EXPECT_NEAR(p[0].value.values()[0], 0.95, 1e-12);
  EXPECT_NEAR(p[0].value.values()[1], -2.1, 1e-12);
  opt.step(p, g);
  // velocity = 0.5 * g + g
  EXPECT_NEAR(p[0].value.values()[0], 0.95 - 0.075, 1e-12);
  EXPECT_NEAR(p[0].value.values()[1], -2.1 - 0.15, 1e-12);
}

TEST(OptimizerTest, AdamFirstStepHasLearningRateMagnitude) {
  OptimizerConfig c;
  c.lr = 0.01;
  Optimizer opt(c);
  std::vector<Parameter> p{{"w", ParamGroup::kHead, 0, Array({3}, {0.0, 0.0, 0.0})}};
  opt.step(p, {Array({3}, {3.0, -1e-3, 0.0})});
  EXPECT_NEAR(p[0].value.values()[0], -0.01, 1e-9);
  EXPECT_NEAR(p[0].value.values()[1], 0.01, 1e-6);
  EXPECT_EQ(p[0].value.values()[2], 0.0);
  EXPECT_EQ(opt.steps(), 1u);
}

TEST(OptimizerTest, MinimizesConvexQuadratic) {
  for (OptimizerKind k : {OptimizerKind::kSgd, OptimizerKind::kAdam}) {
    OptimizerConfig c;
    c.kind = k;
    c.lr = 0.05;
    Optimizer opt(c);
    std::vector<Parameter> p{{"w", ParamGroup::kHead, 0, Array({2}, {3.0, -4.0})}};
    auto loss = [&] {
      const auto& v = p[0].value.values();
      return v[0] * v[0] + 2 * v[1] * v[1];
    };
    double prev = loss();
    for (int i = 0; i < 20; ++i) {
      const auto& v = p[0].value.values();
      opt.step(p, {Array({2}, {2 * v[0], 4 * v[1]})});
      double now = loss();
      EXPECT_LT(now, prev);
      prev = now;
    }
  }
}

TEST(OptimizerTest, ShapeMismatchThrows) {
  Optimizer opt(OptimizerConfig{});
  std::vector<Parameter> p{{"w", ParamGroup::kHead, 0, Array({2}, {0.0, 0.0})}};
  EXPECT_THROW(opt.step(p, {Array({3}, {0.0, 0.0, 0.0})}), ShapeError);
  EXPECT_THROW(opt.step(p, {}), ShapeError);
}

// Training step

TEST(TrainStepTest, DetachedPenaltyNeverReachesHeads) {
  StepFixture f;
  StepGradients g = compute_step_gradients(f.model, {}, f.envs, f.options());
  ASSERT_GT(g.metrics.penalty, 0.0);
  double theta = 0, head = 0;
  for (std::size_t i = 0; i < g.penalty.size(); ++i) {
    if (f.model.parameters()[i].group == ParamGroup::kHead) head = std::max(head, max_abs(g.penalty[i]));
    if (i == f.model.theta_index()) theta = max_abs(g.penalty[i]);
  }
  EXPECT_EQ(head, 0.0);
  EXPECT_GT(theta, 0.0);
}

TEST(TrainStepTest, DisablingDetachChangesHeadGradients) {
  StepFixture f;
  StepGradients on = compute_step_gradients(f.model, {}, f.envs, f.options(true));
  StepGradients off = compute_step_gradients(f.model, {}, f.envs, f.options(false));
  double head_diff = 0;
  for (std::size_t i = 0; i < on.penalty.size(); ++i) {
    if (f.model.parameters()[i].group != ParamGroup::kHead) continue;
    head_diff = std::max(head_diff, max_diff(on.penalty[i], off.penalty[i]));
  }
  EXPECT_GT(head_diff, 1e-8);
  for (std::size_t i = 0; i < on.main.size(); ++i) EXPECT_EQ(max_diff(on.main[i], off.main[i]), 0.0);
}

TEST(TrainStepTest, IrmBaselineUpdatesHeads) {
  StepFixture f;
  StepOptions o = f.options();
  o.weights.girm_variant = GirmVariant::kIrmBaseline;
  StepGradients g = compute_step_gradients(f.model, {}, f.envs, o);
  double head = 0;
  for (std::size_t i = 0; i < g.penalty.size(); ++i) {
    if (f.model.parameters()[i].group == ParamGroup::kHead) head = std::max(head, max_abs(g.penalty[i]));
  }
  EXPECT_GT(head, 0.0);
}

TEST(TrainStepTest, ValidLabelsNeverEnterTheTaskRisk) {
  StepFixture f;
  Dataset flipped = f.data.valid;
  for (auto& t : flipped.targets) {
    for (double& y : t.y) y = -y;
  }
  auto envs2 = split_environments(f.data.train, flipped);
  StepGradients a = compute_step_gradients(f.model, {}, f.envs, f.options());
  StepGradients b = compute_step_gradients(f.model, {}, envs2, f.options());
  for (std::size_t i = 0; i < a.main.size(); ++i) EXPECT_EQ(max_diff(a.main[i], b.main[i]), 0.0);
  EXPECT_EQ(a.metrics.risks, b.metrics.risks);
  EXPECT_NE(a.metrics.penalty, b.metrics.penalty);
}

TEST(TrainStepTest, BatchRowsSelectTheRiskSlice) {
  StepFixture f;
  std::vector<std::size_t> all(f.data.train.rows());
  std::iota(all.begin(), all.end(), 0);
  StepGradients full = compute_step_gradients(f.model, {}, f.envs, f.options());
  StepGradients listed = compute_step_gradients(f.model, all, f.envs, f.options());
  for (std::size_t t = 0; t < full.metrics.risks.size(); ++t) {
    EXPECT_NEAR(full.metrics.risks[t], listed.metrics.risks[t], 1e-12);
  }
  std::vector<std::size_t> half(all.begin(), all.begin() + 20);
  StepGradients part = compute_step_gradients(f.model, half, f.envs, f.options());
  EXPECT_NE(part.metrics.risks[0], full.metrics.risks[0]);
  EXPECT_EQ(part.metrics.penalty, full.metrics.penalty);
}

TEST(TrainStepTest, FirstEnvironmentMustBeTheTrainingSlice) {
  StepFixture f;
  std::vector<Environment> envs = f.envs;
  envs[0].id = 1;
  envs[1].id = 0;
  EXPECT_THROW(compute_step_gradients(f.model, {}, envs, f.options()), DataError);
}

TEST(TrainStepTest, StepsReduceTheTrainingObjective) {
  StepFixture f;
  StepOptions o = f.options();
  o.weights.lambda_girm = 0.0;
  OptimizerConfig oc;
  oc.lr = 0.01;
  Optimizer opt(oc);
  double first = compute_step_gradients(f.model, {}, f.envs, o).metrics.total;
  for (int i = 0; i < 30; ++i) train_step(f.model, opt, {}, f.envs, o);
  double last = compute_step_gradients(f.model, {}, f.envs, o).metrics.total;
  EXPECT_LT(last, first);
}

TEST(TrainStepTest, NonFiniteParametersAbortWithSnapshot) {
  StepFixture f;
  f.model.parameters()[f.model.theta_index()].value.values()[0] = std::numeric_limits<double>::quiet_NaN();
  Optimizer opt(OptimizerConfig{});
  try {
    train_step(f.model, opt, {}, f.envs, f.options());
    FAIL() << "expected TrainingAborted";
  } catch (const NumericError&) {
  }
}

// Runs

TEST(TrainRunTest, ZeroEpochsReportsInitialModel) {
  TrainConfig c = tiny_config();
  c.epochs = 0;
  RunReport r = train(c);
  EXPECT_EQ(r.epochs_run, 0u);
  EXPECT_EQ(r.selected_epoch, 0u);
  ASSERT_EQ(r.history.size(), 1u);
  EXPECT_EQ(r.acc_val_per_task.size(), 2u);
}

TEST(TrainRunTest, IdenticalConfigAndSeedGiveIdenticalReports) {
  TrainConfig c = tiny_config();
  EXPECT_EQ(report_to_json(train(c), false).dump(), report_to_json(train(c), false).dump());
}

TEST(TrainRunTest, SeedChangesTheRun) {
  TrainConfig a = tiny_config(), b = tiny_config();
  b.seed = 6;
  EXPECT_NE(report_to_json(train(a), false).dump(), report_to_json(train(b), false).dump());
}

TEST(TrainRunTest, EveryModeTrains) {
  for (TrainMode m : {TrainMode::kStl, TrainMode::kMtlVanilla, TrainMode::kMtcrl}) {
    RunReport r = train(tiny_config(m));
    EXPECT_EQ(r.mode, train_mode_name(m));
    EXPECT_GE(r.acc_val, 0.0);
    EXPECT_LE(r.acc_val, 1.0);
    EXPECT_GE(r.rho_spur, 0.0);
    EXPECT_LE(r.rho_spur, 1.0);
    EXPECT_EQ(r.routing.rows(), 2u);
  }
}

TEST(TrainRunTest, SelectedEpochHasBestValidAccuracy) {
  TrainConfig c = tiny_config();
  c.epochs = 6;
  c.patience = 0;
  RunReport r = train(c);
  double best = 0;
  for (const auto& h : r.history) best = std::max(best, h.acc_valid_env);
  EXPECT_EQ(r.history[r.selected_epoch].acc_valid_env, best);
}

TEST(TrainRunTest, ExplodingLearningRateAbortsWithSnapshot) {
  TrainConfig c = tiny_config();
  c.optimizer.kind = OptimizerKind::kSgd;
  c.optimizer.lr = 1e30;
  c.epochs = 30;
  c.patience = 0;
  try {
    train(c);
    FAIL() << "expected TrainingAborted";
  } catch (const TrainingAborted& e) {
    EXPECT_TRUE(e.snapshot().contains("epoch"));
  }
}

// Parallel map

TEST(ParallelTest, ResultsAreIndexOrdered) {
  for (std::size_t w : {1u, 3u}) {
    auto out = parallel_map<std::size_t>(50, w, [](std::size_t i) { return i * i; });
    for (std::size_t i = 0; i < out.size(); ++i) EXPECT_EQ(out[i], i * i);
  }
}

TEST(ParallelTest, FirstErrorByIndexIsRethrown) {
  std::atomic<int> ran{0};
  try {
    parallel_for(20, 4, [&](std::size_t i) {
      ++ran;
      if (i == 7) throw std::runtime_error("seven");
      if (i == 12) throw std::runtime_error("twelve");
    });
    FAIL() << "expected an exception";
  } catch (const std::runtime_error& e) {
    EXPECT_STREQ(e.what(), "seven");
  }
}

TEST(ParallelTest, WorkerCountReadsEnvironment) {
  setenv("MTCRL_WORKERS", "3", 1);
  EXPECT_EQ(worker_count(), 3u);
  setenv("MTCRL_WORKERS", "zero", 1);
  EXPECT_THROW(worker_count(), ConfigError);
  unsetenv("MTCRL_WORKERS");
  EXPECT_EQ(worker_count(), 1u);
}

// Reports

TEST(ReportTest, JsonRoundTrip) {
  RunReport r = train(tiny_config());
  RunReport back = report_from_json(report_to_json(r));
  EXPECT_EQ(report_to_json(back).dump(), report_to_json(r).dump());
  EXPECT_FALSE(report_to_json(r, false).contains("wall_clock_seconds"));
}

TEST(ReportTest, Statistics) {
  EXPECT_DOUBLE_EQ(mean({1, 2, 3, 6}), 3.0);
  EXPECT_NEAR(stddev({1, 2, 3, 6}), std::sqrt(14.0 / 3.0), 1e-12);
  EXPECT_EQ(mean_pm_std({0.9, 0.91, 0.92}), "0.910 ± 0.010");
  EXPECT_DOUBLE_EQ(spearman({1, 2, 3, 4}, {10, 20, 30, 40}), 1.0);
  EXPECT_DOUBLE_EQ(spearman({1, 2, 3, 4}, {4, 3, 2, 1}), -1.0);
  EXPECT_DOUBLE_EQ(spearman({1, 2, 3}, {5, 5, 5}), 0.0);
  // Ties take average ranks: ranks (1, 2.5, 2.5, 4) against (1, 2, 3, 4).
  EXPECT_NEAR(spearman({1, 2, 2, 3}, {1, 2, 3, 4}), 4.5 / std::sqrt(4.5 * 5.0), 1e-12);
}

// Experiments

TEST(ExperimentTest, Table2IsDeterministicAndHasFixedHeader) {
  TrainConfig c = tiny_config();
  Table2Result a = run_table2({c}, {1, 2}, 1);
  Table2Result b = run_table2({c}, {1, 2}, 2);
  std::string csv = table2_csv(a.summary);
  EXPECT_EQ(csv.substr(0, csv.find('\n')), "method,dataset,acc_train,acc_val,rho_spur");
  EXPECT_EQ(csv, table2_csv(b.summary));
  EXPECT_EQ(table2_seeds_csv(a.per_seed), table2_seeds_csv(b.per_seed));
  ASSERT_EQ(a.summary.size(), 2u);
  EXPECT_EQ(a.summary[0].method, "stl");
  EXPECT_EQ(a.summary[1].method, "mtl");
  EXPECT_EQ(a.per_seed.size(), 4u);
}

TEST(ExperimentTest, SweepPointMatchesDirectRun) {
  TrainConfig c = tiny_config();
  SweepResult s = run_task_sweep(c, {3}, {4}, 1);
  ASSERT_EQ(s.points.size(), 1u);
  TrainConfig direct = c;
  direct.sem.tasks = 3;
  direct.mode = TrainMode::kMtlVanilla;
  direct.seed = 4;
  EXPECT_DOUBLE_EQ(s.points[0].mtl_acc_val[0], train(direct).acc_val);
  std::string csv = sweep_csv(s);
  EXPECT_EQ(csv.substr(0, csv.find('\n')), "tasks,method,acc_val_mean,acc_val_std,rho_spur_mean,rho_spur_std");
}

TEST(ExperimentTest, AblationVariantsToggleOneTermEach) {
  auto v = ablation_variants(tiny_config());
  auto find = [&](const std::string& n) {
    for (const auto& [name, cfg] : v) {
      if (name == n) return cfg;
    }
    throw std::out_of_range(n);
  };
  EXPECT_EQ(find("no-decor").weights.lambda_decor, 0.0);
  EXPECT_EQ(find("no-decor").weights.lambda_girm, 5.0);
  EXPECT_EQ(find("no-graph-reg").weights.lambda_sps, 0.0);
  EXPECT_EQ(find("no-graph-reg").weights.lambda_bal, 0.0);
  EXPECT_EQ(find("no-girm").weights.girm_variant, GirmVariant::kNone);
  EXPECT_EQ(find("girm-norm").weights.girm_variant, GirmVariant::kNorm);
  EXPECT_EQ(find("irm-baseline").weights.girm_variant, GirmVariant::kIrmBaseline);
  EXPECT_EQ(find("vanilla").mode, TrainMode::kMtlVanilla);
}

TEST(ExperimentTest, AblationIsReproducible) {
  TrainConfig c = tiny_config();
  AblationResult a = run_ablation(c, {1}, 1, {"full", "no-decor"});
  AblationResult b = run_ablation(c, {1}, 2, {"full", "no-decor"});
  EXPECT_EQ(ablation_csv(a), ablation_csv(b));
  ASSERT_EQ(a.rows.size(), 2u);
  EXPECT_DOUBLE_EQ(a.row("full").acc_val[0], train([&] {
                     TrainConfig d = c;
                     d.seed = 1;
                     return d;
                   }()).acc_val);
}

}  // namespace
}  // namespace mtcrl
