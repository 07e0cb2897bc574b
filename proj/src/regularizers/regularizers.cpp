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

#include "regularizers/regularizers.hpp"

#include <string>

#include "common/error.hpp"
#include "tensor/grad.hpp"
#include "tensor/ops.hpp"

namespace mtcrl {

std::string_view girm_variant_name(GirmVariant v) {
  switch (v) {
    case GirmVariant::kNone:
      return "none";
    case GirmVariant::kNorm:
      return "norm";
    case GirmVariant::kVar:
      return "var";
    case GirmVariant::kIrmBaseline:
      return "irm-baseline";
  }
  return "none";
}

GirmVariant parse_girm_variant(std::string_view name) {
  if (name == "none") return GirmVariant::kNone;
  if (name == "norm") return GirmVariant::kNorm;
  if (name == "var") return GirmVariant::kVar;
  if (name == "irm-baseline" || name == "irm") return GirmVariant::kIrmBaseline;
  throw ConfigError("unknown girm variant: " + std::string(name));
}

void PenaltyWeights::validate() const {
  for (double v : {lambda_decor, lambda_sps, lambda_bal, lambda_girm}) {
    if (!(v >= 0)) throw ConfigError("penalty weights must be non-negative");
  }
}

Tensor pearson_corr(const Tensor& zi, const Tensor& zj, const PearsonOptions& options) {
  if (zi.rank() != 2 || zj.rank() != 2 || zi.shape()[0] != zj.shape()[0]) {
    throw ShapeError("pearson_corr: incompatible shapes " + shape_string(zi.shape()) + " and " +
                     shape_string(zj.shape()));
  }
  if (zi.shape()[0] < 2) throw DegenerateError("pearson_corr: needs at least 2 rows");
  Tensor ci = zi - mean(zi, 0);
  Tensor cj = zj - mean(zj, 0);
  Tensor vi = sum(square(ci), 0);
  Tensor vj = sum(square(cj), 0);
  if (options.strict) {
    for (const Tensor* v : {&vi, &vj}) {
      for (double x : v->value().values()) {
        if (x < options.variance_floor) {
          throw DegenerateError("pearson_corr: column variance below floor");
        }
      }
    }
  }
  Tensor si = sqrt(add_scalar(vi, options.epsilon));
  Tensor sj = sqrt(add_scalar(vj, options.epsilon));
  return matmul(ci, cj, true, false) / matmul(si, sj, true, false);
}

Tensor decorrelation_loss(std::span<const Tensor> zs, double lambda,
                          const PearsonOptions& options) {
  if (zs.empty()) throw ShapeError("decorrelation_loss: no module outputs");
  Tensor total;
  for (std::size_t i = 0; i < zs.size(); ++i) {
    for (std::size_t j = i + 1; j < zs.size(); ++j) {
      Tensor term = l2_norm_squared(pearson_corr(zs[i], zs[j], options));
      total = total.defined() ? total + term : term;
    }
  }
  if (!total.defined()) return constant_like(zs[0], Array::scalar(0.0));
  return scale(total, lambda);
}

Tensor routing_entropy(const Tensor& a) {
  if (a.rank() != 2) throw ShapeError("routing_entropy: A must be rank 2");
  Tensor columns = sum(a, 0);
  Tensor mass = columns / sum(columns);
  Tensor entropy;
  for (std::size_t i = 0; i < a.shape()[1]; ++i) {
    if (mass.value()[i] <= 0) continue;
    Tensor m = slice(mass, 1, i, i + 1);
    Tensor term = sum(m * log(m));
    entropy = entropy.defined() ? entropy + term : term;
  }
  return neg(entropy);
}

Tensor graph_reg_loss(const Tensor& a, double lambda_sps, double lambda_bal, bool* degenerate) {
  if (a.rank() != 2) throw ShapeError("graph_reg_loss: A must be rank 2");
  double total = 0.0;
  for (double v : a.value().values()) {
    if (v < 0 || v > 1) throw DomainError("graph_reg_loss: A entries must lie in [0, 1]");
    total += v;
  }
  if (degenerate) *degenerate = total == 0.0;
  if (total == 0.0) return constant_like(a, Array::scalar(0.0));
  return scale(l1_norm(a), lambda_sps) - scale(routing_entropy(a), lambda_bal);
}

EnvironmentForward forward_environment(const BoundModel& model, const Tensor& x,
                                       std::span<const TaskTargets> targets) {
  if (targets.size() != model.model().tasks()) {
    throw DataError("environment has " + std::to_string(targets.size()) + " tasks, model has " +
                    std::to_string(model.model().tasks()));
  }
  EnvironmentForward f;
  f.targets = targets;
  bool learned = model.theta().defined();
  f.zs = model.model().spec().routing == RoutingMode::kFixedIdentity
             ? std::vector<Tensor>{}
             : model.encode(x);
  if (learned) f.routing = model.routing();
  for (std::size_t t = 0; t < targets.size(); ++t) {
    Tensor fused;
    if (f.zs.empty()) {
      fused = model.encode_module(t, x);
    } else {
      Tensor row = learned ? slice(f.routing, 0, t, t + 1) : Tensor();
      f.rows.push_back(row);
      fused = model.fuse(t, f.zs, row);
    }
    Tensor out = model.head(t, fused);
    f.fused.push_back(fused);
    f.outputs.push_back(out);
    f.risks.push_back(task_risk(out, targets[t]));
  }
  return f;
}

Tensor env_task_risk(const BoundModel& model, const Tensor& x, const TaskTargets& targets,
                     std::size_t task) {
  return task_risk(model.predict(task, x), targets);
}

Tensor detached_head_risk(const BoundModel& model, const EnvironmentForward& env,
                          std::size_t task) {
  std::vector<Tensor> head;
  for (const auto& h : model.head_tensors(task)) head.push_back(h.detach());
  Tensor out = mlp_forward(model.model().spec().head_spec(task), head, env.fused.at(task));
  return task_risk(out, env.targets[task]);
}

EnvGradientSet env_gradients(const BoundModel& model, std::span<const EnvironmentForward> envs,
                             bool detach_heads) {
  if (envs.empty()) throw DataError("env_gradients: no environments");
  std::size_t tasks = envs[0].risks.size();
  EnvGradientSet grads(tasks);
  for (const auto& env : envs) {
    if (env.rows.size() != tasks || env.risks.size() != tasks) {
      throw DataError("env_gradients: environments need a learned routing row per task");
    }
    for (std::size_t t = 0; t < tasks; ++t) {
      Tensor risk = detach_heads ? detached_head_risk(model, env, t) : env.risks[t];
      grads[t].push_back(grad(risk, {env.rows[t]}, true).at(env.rows[t]));
    }
  }
  return grads;
}

namespace {

Tensor accumulate(const Tensor& total, const Tensor& term) {
  return total.defined() ? total + term : term;
}

}  // namespace

Tensor girm_norm_penalty(const EnvGradientSet& grads) {
  Tensor total;
  for (const auto& task : grads) {
    for (const auto& g : task) total = accumulate(total, l2_norm_squared(g));
  }
  if (!total.defined()) throw DataError("girm_norm_penalty: empty gradient set");
  return total;
}

Tensor girm_var_penalty(const EnvGradientSet& grads) {
  Tensor total;
  for (const auto& task : grads) {
    if (task.empty()) throw DataError("girm_var_penalty: task without environments");
    double inv = 1.0 / static_cast<double>(task.size());
    Tensor avg;
    for (const auto& g : task) avg = accumulate(avg, g);
    avg = scale(avg, inv);
    for (const auto& g : task) total = accumulate(total, scale(l2_norm_squared(g - avg), inv));
  }
  if (!total.defined()) throw DataError("girm_var_penalty: empty gradient set");
  return total;
}

Tensor irm_baseline_penalty(const BoundModel& model, std::span<const EnvironmentForward> envs) {
  Tensor total;
  for (const auto& env : envs) {
    for (std::size_t t = 0; t < env.risks.size(); ++t) {
      std::vector<Tensor> wrt{env.rows.at(t)};
      for (const auto& h : model.head_tensors(t)) wrt.push_back(h);
      total = accumulate(total, gradient_norm_penalty(env.risks[t], wrt));
    }
  }
  if (!total.defined()) throw DataError("irm_baseline_penalty: no environments");
  return total;
}

Tensor girm_penalty(const BoundModel& model, std::span<const EnvironmentForward> envs,
                    GirmVariant variant, bool detach_heads) {
  switch (variant) {
    case GirmVariant::kNone:
      throw ConfigError("girm_penalty: no variant selected");
    case GirmVariant::kNorm:
      return girm_norm_penalty(env_gradients(model, envs, detach_heads));
    case GirmVariant::kVar:
      return girm_var_penalty(env_gradients(model, envs, detach_heads));
    case GirmVariant::kIrmBaseline:
      return irm_baseline_penalty(model, envs);
  }
  throw ConfigError("unknown girm variant");
}

LossTerms total_regularized_loss(const BoundModel& model,
                                 std::span<const EnvironmentForward> envs,
                                 const PenaltyWeights& weights, bool include_penalty,
                                 bool detach_heads) {
  weights.validate();
  if (envs.empty()) throw DataError("total_regularized_loss: no environments");
  const EnvironmentForward& train = envs[0];
  LossTerms terms;
  terms.risks = train.risks;
  for (const auto& r : train.risks) terms.risk_sum = accumulate(terms.risk_sum, r);
  terms.total = terms.risk_sum;
  bool learned = model.theta().defined();
  if (!train.zs.empty() && weights.lambda_decor > 0 && train.zs.size() > 1) {
    terms.decor = decorrelation_loss(train.zs, weights.lambda_decor);
    terms.total = terms.total + terms.decor;
  }
  if (learned && (weights.lambda_sps > 0 || weights.lambda_bal > 0)) {
    terms.graph = graph_reg_loss(train.routing, weights.lambda_sps, weights.lambda_bal,
                                 &terms.graph_degenerate);
    terms.total = terms.total + terms.graph;
  }
  if (include_penalty && learned && weights.girm_variant != GirmVariant::kNone &&
      weights.lambda_girm > 0) {
    terms.penalty = scale(girm_penalty(model, envs, weights.girm_variant, detach_heads),
                          weights.lambda_girm);
    terms.total = terms.total + terms.penalty;
  }
  return terms;
}

}  // namespace mtcrl
