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

#include "harness/trainer.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <numeric>
#include <random>

#include "analysis/diagnostics.hpp"
#include "analysis/saliency.hpp"
#include "common/error.hpp"
#include "regularizers/regularizers.hpp"
#include "tensor/grad.hpp"
#include "tensor/ops.hpp"

namespace mtcrl {

namespace {

std::uint64_t splitmix(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

constexpr std::uint64_t kModelStream = 1;
constexpr std::uint64_t kShuffleStream = 2;

std::vector<Array> zeros_for(const ModularModel& model) {
  std::vector<Array> out;
  for (const auto& p : model.parameters()) out.emplace_back(p.value.shape());
  return out;
}

bool uses_penalty(const ModularModel& model, const PenaltyWeights& w) {
  return model.theta_index() != ModularModel::npos && w.girm_variant != GirmVariant::kNone &&
         w.lambda_girm > 0.0;
}

std::vector<double> task_risks(const ModularModel& model, const Dataset& data) {
  Tape tape;
  NoGradGuard guard(tape);
  BoundModel bound(model, tape);
  Tensor x = tape.constant(data.x);
  std::vector<double> out;
  for (std::size_t t = 0; t < model.tasks(); ++t) {
    out.push_back(task_risk(bound.predict(t, x), data.targets[t]).item());
  }
  return out;
}

std::vector<double> task_accuracies(const ModularModel& model, const Dataset& data) {
  Tape tape;
  NoGradGuard guard(tape);
  BoundModel bound(model, tape);
  Tensor x = tape.constant(data.x);
  std::vector<double> out;
  for (std::size_t t = 0; t < model.tasks(); ++t) {
    out.push_back(task_accuracy(bound.predict(t, x).value(), data.targets[t]));
  }
  return out;
}

bool all_finite(const std::vector<double>& v) {
  return std::all_of(v.begin(), v.end(), [](double x) { return std::isfinite(x); });
}

EpochRecord epoch_record(const ModularModel& model, const SplitData& data, std::size_t epoch) {
  EpochRecord rec;
  rec.epoch = epoch;
  rec.train_risk = task_risks(model, data.train);
  rec.valid_risk = task_risks(model, data.valid);
  rec.acc_train = mean(task_accuracies(model, data.train));
  rec.acc_valid_env = mean(task_accuracies(model, data.valid));
  return rec;
}

nlohmann::json epoch_json(const EpochRecord& r) {
  return {{"epoch", r.epoch}, {"train_risk", r.train_risk}, {"valid_risk", r.valid_risk}};
}

}  // namespace

StepGradients compute_step_gradients(const ModularModel& model,
                                     std::span<const std::size_t> batch_rows,
                                     std::span<const Environment> envs,
                                     const StepOptions& options) {
  if (envs.empty() || envs[0].data == nullptr) throw DataError("train_step: no training environment");
  // Task risks only ever see the training environment.
  if (envs[0].id != 0) throw DataError("train_step: environment 0 must be the training slice");
  const Dataset& train = *envs[0].data;
  const PenaltyWeights& w = options.weights;
  bool full = batch_rows.empty();

  Tape tape;
  BoundModel bound(model, tape);
  Dataset subset;
  if (!full) subset = train.subset(batch_rows);
  const Dataset& batch = full ? train : subset;
  EnvironmentForward fb = forward_environment(bound, tape.constant(batch.x), batch.targets);

  StepGradients out;
  StepMetrics& m = out.metrics;
  Tensor main;
  for (const auto& r : fb.risks) {
    m.risks.push_back(r.item());
    main = main.defined() ? main + r : r;
  }
  m.risk_sum = main.item();
  if (w.lambda_decor > 0.0 && fb.zs.size() > 1) {
    // One decorrelation term per task, all computed on the shared batch.
    Tensor decor = scale(decorrelation_loss(fb.zs, w.lambda_decor),
                         static_cast<double>(model.tasks()));
    m.decor = decor.item();
    main = main + decor;
  }
  if (fb.routing.defined() && (w.lambda_sps > 0.0 || w.lambda_bal > 0.0)) {
    Tensor graph = graph_reg_loss(fb.routing, w.lambda_sps, w.lambda_bal);
    m.graph = graph.item();
    main = main + graph;
  }
  const std::vector<Tensor>& all = bound.tensors();
  GradMap gm = grad(main, all);
  for (const auto& t : all) out.main.push_back(gm.at(t).value());

  out.penalty = zeros_for(model);
  if (uses_penalty(model, w)) {
    std::vector<EnvironmentForward> fwds;
    for (const auto& env : envs) {
      if (env.id == 0 && full) {
        fwds.push_back(fb);
      } else {
        fwds.push_back(forward_environment(bound, tape.constant(env.data->x), env.data->targets));
      }
    }
    Tensor penalty =
        scale(girm_penalty(bound, fwds, w.girm_variant, options.detach_heads), w.lambda_girm);
    m.penalty = penalty.item();
    bool heads_too = w.girm_variant == GirmVariant::kIrmBaseline || !options.detach_heads;
    const auto& params = model.parameters();
    std::vector<Tensor> wrt;
    for (std::size_t i = 0; i < params.size(); ++i) {
      if (heads_too || params[i].group != ParamGroup::kHead) wrt.push_back(all[i]);
    }
    GradMap gp = grad(penalty, wrt);
    for (std::size_t i = 0; i < params.size(); ++i) {
      if (gp.contains(all[i])) out.penalty[i] = gp.at(all[i]).value();
    }
  }
  m.total = m.risk_sum + m.decor + m.graph + m.penalty;
  if (!std::isfinite(m.total)) {
    throw TrainingAborted("non-finite training loss",
                          {{"risks", m.risks},
                           {"decor", m.decor},
                           {"graph", m.graph},
                           {"penalty", m.penalty}});
  }
  return out;
}

StepMetrics train_step(ModularModel& model, Optimizer& optimizer,
                       std::span<const std::size_t> batch_rows,
                       std::span<const Environment> envs, const StepOptions& options) {
  StepGradients g = compute_step_gradients(model, batch_rows, envs, options);
  std::vector<Array> total = std::move(g.main);
  for (std::size_t i = 0; i < total.size(); ++i) {
    auto dst = total[i].values();
    auto src = g.penalty[i].values();
    for (std::size_t k = 0; k < dst.size(); ++k) dst[k] += src[k];
    if (!total[i].all_finite()) {
      throw TrainingAborted("non-finite gradient for " + model.parameters()[i].name,
                            {{"parameter", model.parameters()[i].name}, {"total", g.metrics.total}});
    }
  }
  optimizer.step(model.parameters(), total);
  return g.metrics;
}

SplitData load_dataset(const TrainConfig& config) {
  if (config.dataset == DatasetKind::kMultiSem) {
    SemSpec spec = config.sem;
    spec.seed = config.data_seed();
    return gen_multisem(spec).splits;
  }
  MnistPairSpec spec = config.mnist;
  spec.split_seed = config.data_seed();
  return compose_multimnist(spec).splits;
}

void evaluate_into(const ModularModel& model, const SplitData& data, const TrainConfig& config,
                   RunReport& r) {
  r.acc_train_per_task = task_accuracies(model, data.train);
  r.acc_valid_env_per_task = task_accuracies(model, data.valid);
  r.acc_val_per_task = task_accuracies(model, data.test);
  r.acc_train = mean(r.acc_train_per_task);
  r.acc_valid_env = mean(r.acc_valid_env_per_task);
  r.acc_val = mean(r.acc_val_per_task);

  const Dataset probe = config.saliency_rows > 0 && config.saliency_rows < data.test.rows()
                            ? data.test.first_rows(config.saliency_rows)
                            : data.test;
  SaliencyReport sal = saliency_report(model, probe);
  r.saliency = sal.grads;
  r.rho_spur_per_task = sal.rho_spur;
  r.rho_spur = sal.mean_rho_spur;

  r.routing = model.routing_weights();
  SimilarityGraph sim = task_similarity(r.routing);
  r.similarity = sim.similarity;
  r.similarity_threshold = sim.threshold;
  const Dataset train_probe = config.saliency_rows > 0 && config.saliency_rows < data.train.rows()
                                  ? data.train.first_rows(config.saliency_rows)
                                  : data.train;
  auto cross = [&](const Dataset& d) {
    return model.modules() > 1 && d.rows() >= 2 ? module_corr_heatmap(model, d.x).max_cross_block() : 0.0;
  };
  r.max_cross_module_corr = cross(train_probe);
  r.max_cross_module_corr_test = cross(probe);
  if (!all_finite(r.acc_val_per_task) || !all_finite(r.rho_spur_per_task)) {
    throw TrainingAborted("non-finite evaluation metric", report_to_json(r, false));
  }
}

RunOutput train_on(const TrainConfig& config, SplitData data) {
  auto start = std::chrono::steady_clock::now();
  config.validate();
  data.train.validate();
  data.valid.validate();
  data.test.validate();
  std::vector<std::size_t> outputs;
  for (const auto& t : data.train.targets) outputs.push_back(t.output_dim());
  ModelSpec spec = config.model_spec(data.train.dim(), outputs);
  ModularModel model(spec, splitmix(config.seed ^ splitmix(kModelStream)));
  Optimizer optimizer(config.optimizer);
  StepOptions options{config.effective_weights(), config.detach_heads};

  RunReport r;
  r.config_hash = config_hash(config);
  r.seed = config.seed;
  r.mode = std::string(train_mode_name(config.mode));
  r.dataset = std::string(dataset_kind_name(config.dataset));
  r.tasks = spec.tasks;

  std::mt19937_64 shuffle_rng(splitmix(config.seed ^ splitmix(kShuffleStream)));
  std::vector<std::size_t> order(data.train.rows());
  std::iota(order.begin(), order.end(), 0);

  r.history.push_back(epoch_record(model, data, 0));
  double best_acc = r.history[0].acc_valid_env;
  std::vector<Parameter> best = model.parameters();
  std::size_t best_epoch = 0;
  double best_risk = mean(r.history[0].train_risk);
  std::size_t stall = 0;

  {
    auto envs = split_environments(data.train, data.valid);
    for (std::size_t epoch = 1; epoch <= config.epochs; ++epoch) {
      std::shuffle(order.begin(), order.end(), shuffle_rng);
      std::size_t bs = config.batch_size == 0 ? order.size() : config.batch_size;
      for (std::size_t begin = 0; begin < order.size(); begin += bs) {
        std::size_t end = std::min(order.size(), begin + bs);
        std::span<const std::size_t> rows =
            config.batch_size == 0 ? std::span<const std::size_t>()
                                   : std::span<const std::size_t>(order).subspan(begin, end - begin);
        try {
          train_step(model, optimizer, rows, envs, options);
        } catch (const TrainingAborted& e) {
          nlohmann::json snap = e.snapshot();
          snap["epoch"] = epoch;
          snap["last_epoch"] = epoch_json(r.history.back());
          throw TrainingAborted(e.what(), snap);
        } catch (const NumericError& e) {
          nlohmann::json snap{{"epoch", epoch}, {"batch_begin", begin},
                              {"last_epoch", epoch_json(r.history.back())}};
          throw TrainingAborted(e.what(), snap);
        }
      }
      EpochRecord rec;
      try {
        rec = epoch_record(model, data, epoch);
      } catch (const NumericError& e) {
        throw TrainingAborted(e.what(), {{"epoch", epoch}, {"last_epoch", epoch_json(r.history.back())}});
      }
      if (!all_finite(rec.train_risk) || !all_finite(rec.valid_risk)) {
        throw TrainingAborted("non-finite risk after epoch " + std::to_string(epoch), epoch_json(rec));
      }
      r.history.push_back(rec);
      r.epochs_run = epoch;
      if (config.select_on_valid && rec.acc_valid_env > best_acc) {
        best_acc = rec.acc_valid_env;
        best = model.parameters();
        best_epoch = epoch;
      }
      double risk = mean(rec.train_risk);
      if (risk < best_risk * (1.0 - config.min_delta)) {
        best_risk = risk;
        stall = 0;
      } else if (config.patience > 0 && ++stall >= config.patience) {
        r.early_stopped = true;
        break;
      }
    }
  }
  if (config.select_on_valid) {
    model.parameters() = best;
    r.selected_epoch = best_epoch;
  } else {
    r.selected_epoch = r.epochs_run;
  }
  evaluate_into(model, data, config, r);
  r.wall_clock_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return RunOutput{std::move(r), std::move(model), std::move(data)};
}

RunOutput train_run(const TrainConfig& config) {
  config.validate();
  return train_on(config, load_dataset(config));
}

RunReport train(const TrainConfig& config) { return train_run(config).report; }

}  // namespace mtcrl
