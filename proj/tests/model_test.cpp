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

#include <cmath>
#include <random>
#include <vector>

#include <gtest/gtest.h>

#include "common/error.hpp"
#include "model/checkpoint.hpp"
#include "model/modular_model.hpp"
#include "tensor/grad.hpp"
#include "tensor/ops.hpp"

namespace mtcrl {
namespace {

ModelSpec small_spec(std::size_t tasks = 2, std::size_t modules = 3) {
  ModelSpec s;
  s.input_dim = 5;
  s.tasks = tasks;
  s.modules = modules;
  s.rep_dim = 2 * modules;
  s.encoder_hidden = {4};
  s.head_hidden = {3};
  s.task_output_dims.assign(tasks, 1);
  return s;
}

Array random_input(std::size_t rows, std::size_t cols, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> n(0.0, 1.0);
  Array x(Shape{rows, cols});
  for (double& v : x.values()) v = n(rng);
  return x;
}

TEST(Model, EncodeShapes) {
  ModularModel model(small_spec(), 1);
  Tape tape;
  BoundModel bound(model, tape);
  auto zs = bound.encode(tape.constant(random_input(4, 5, 2)));
  ASSERT_EQ(zs.size(), 3u);
  for (const auto& z : zs) EXPECT_EQ(z.shape(), (Shape{4, 2}));
}

TEST(Model, SingleModuleIsSharedEncoder) {
  ModelSpec spec = small_spec(2, 1);
  ModularModel model(spec, 1);
  Tape tape;
  BoundModel bound(model, tape);
  auto zs = bound.encode(tape.constant(random_input(4, 5, 2)));
  ASSERT_EQ(zs.size(), 1u);
  EXPECT_EQ(zs[0].shape(), (Shape{4, 2}));
}

TEST(Model, ZeroEncoderGivesZeroOutputs) {
  ModularModel model(small_spec(), 1);
  for (auto& p : model.parameters()) {
    if (p.group == ParamGroup::kEncoder) p.value = Array(p.value.shape(), 0.0);
  }
  Tape tape;
  BoundModel bound(model, tape);
  for (const auto& z : bound.encode(tape.constant(random_input(4, 5, 3)))) {
    EXPECT_EQ(z.value(), Array(Shape{4, 2}, 0.0));
  }
}

TEST(Model, RouteSelectsAndAnnihilates) {
  Tape tape;
  std::vector<Tensor> zs{tape.parameter(random_input(3, 2, 1)),
                         tape.parameter(random_input(3, 2, 2)),
                         tape.parameter(random_input(3, 2, 3))};
  EXPECT_EQ(route(tape.constant(Array::row({0, 1, 0})), zs).value(), zs[1].value());
  EXPECT_EQ(route(tape.constant(Array::row({0, 0, 0})), zs).value(), Array(Shape{3, 2}, 0.0));
  Tensor z = zs[0];
  std::vector<Tensor> pair{z, neg(z)};
  EXPECT_EQ(route(tape.constant(Array::row({0.5, 0.5})), pair).value(),
            Array(Shape{3, 2}, 0.0));
  EXPECT_THROW(route(tape.constant(Array::row({1, 0})), zs), ShapeError);
}

TEST(Model, IdentityHeadWithOneHotRoutingReturnsModuleOutput) {
  ModelSpec spec = small_spec();
  spec.identity_heads = true;
  spec.task_output_dims.assign(spec.tasks, spec.module_dim());
  ModularModel model(spec, 4);
  Tape tape;
  BoundModel bound(model, tape);
  auto zs = bound.encode(tape.constant(random_input(4, 5, 5)));
  Tensor fused = bound.fuse(1, zs, tape.constant(Array::row({0, 0, 1})));
  EXPECT_EQ(bound.head(1, fused).value(), zs[2].value());
}

TEST(Model, RoutingWeightsAreSigmoidOfTheta) {
  EXPECT_EQ(routing_weights(Array(Shape{2, 3}, 0.0)), Array(Shape{2, 3}, 0.5));
  Array a = routing_weights(Array::matrix({{-2.0, 2.0}}));
  EXPECT_NEAR(a[0], 0.1192, 5e-5);
  EXPECT_NEAR(a[1], 0.8808, 5e-5);
  double previous = 0.0;
  for (double theta : {-5.0, -1.0, 0.0, 1.0, 5.0, 20.0}) {
    double v = routing_weights(Array::row({theta}))[0];
    EXPECT_GT(v, previous);
    EXPECT_GT(v, 0.0);
    EXPECT_LE(v, 1.0);
    previous = v;
  }
}

TEST(Model, FreshModelHasUninformativeRouting) {
  ModularModel model(small_spec(), 9);
  EXPECT_EQ(model.routing_weights(), Array(Shape{2, 3}, 0.5));
}

TEST(Model, RoutingIsRecomputedFromTheta) {
  ModularModel model(small_spec(), 9);
  model.parameters()[model.theta_index()].value.at(1, 2) = 3.0;
  Tape tape;
  BoundModel bound(model, tape);
  EXPECT_NEAR(bound.routing().value().at(1, 2), 1.0 / (1.0 + std::exp(-3.0)), 1e-15);
}

TEST(Model, PredictIsLinearInConvexRouting) {
  ModularModel model(small_spec(), 6);
  Tape tape;
  BoundModel bound(model, tape);
  Tensor x = tape.constant(random_input(4, 5, 7));
  auto zs = bound.encode(x);
  Array w = Array::row({0.2, 0.5, 0.3});
  Tensor manual = scale(zs[0], 0.2) + scale(zs[1], 0.5) + scale(zs[2], 0.3);
  Tensor routed = bound.fuse(0, zs, tape.constant(w));
  for (std::size_t i = 0; i < manual.numel(); ++i) {
    EXPECT_NEAR(routed.value()[i], manual.value()[i], 1e-15);
  }
  Tensor a = bound.head(0, routed);
  Tensor b = bound.head(0, manual);
  for (std::size_t i = 0; i < a.numel(); ++i) EXPECT_NEAR(a.value()[i], b.value()[i], 1e-14);
}

TEST(Model, ThetaReceivesGradient) {
  ModularModel model(small_spec(), 8);
  Tape tape;
  BoundModel bound(model, tape);
  Tensor loss = mean(square(bound.predict(1, tape.constant(random_input(6, 5, 9)))));
  Tensor g = grad(loss, {bound.theta()}).at(bound.theta());
  double mass = 0.0;
  for (std::size_t k = 0; k < 3; ++k) mass += std::fabs(g.value().at(1, k));
  EXPECT_GT(mass, 0.0);
  for (std::size_t k = 0; k < 3; ++k) EXPECT_EQ(g.value().at(0, k), 0.0);
}

TEST(Model, SingleTaskSingleModuleEqualsPlainNetwork) {
  ModelSpec spec = small_spec(1, 1);
  spec.routing = RoutingMode::kFixedOnes;
  ModularModel model(spec, 10);
  Tape tape;
  BoundModel bound(model, tape);
  Tensor x = tape.constant(random_input(4, 5, 11));
  auto enc = bound.group(ParamGroup::kEncoder);
  auto head = bound.group(ParamGroup::kHead);
  Tensor plain = mlp_forward(spec.head_spec(0), head, mlp_forward(spec.encoder_spec(), enc, x));
  EXPECT_EQ(bound.predict(0, x).value(), plain.value());
}

TEST(Model, IndependentModelsUseOnlyTheirOwnEncoder) {
  ModelSpec spec = small_spec(3, 3);
  spec.routing = RoutingMode::kFixedIdentity;
  ModularModel model(spec, 12);
  EXPECT_EQ(model.theta_index(), ModularModel::npos);
  Tape tape;
  BoundModel bound(model, tape);
  Tensor x = tape.constant(random_input(4, 5, 13));
  for (std::size_t t = 0; t < 3; ++t) {
    Tensor out = bound.predict(t, x);
    std::vector<Tensor> enc;
    for (std::size_t i : model.encoder_indices(t)) enc.push_back(bound.tensors()[i]);
    Tensor plain = mlp_forward(spec.head_spec(t), bound.head_tensors(t),
                               mlp_forward(spec.encoder_spec(), enc, x));
    EXPECT_EQ(out.value(), plain.value());
    Tensor loss = sum(out);
    std::vector<Tensor> all = bound.group(ParamGroup::kEncoder);
    GradMap g = grad(loss, all);
    for (std::size_t i = 0; i < model.modules(); ++i) {
      for (std::size_t idx : model.encoder_indices(i)) {
        const Tensor& p = bound.tensors()[idx];
        double mass = 0.0;
        for (double v : g.at(p).value().values()) mass += std::fabs(v);
        if (i == t) {
          EXPECT_GT(mass, 0.0);
        } else {
          EXPECT_EQ(mass, 0.0);
        }
      }
    }
  }
}

TEST(Model, UnknownTaskIsRejected) {
  ModularModel model(small_spec(), 1);
  Tape tape;
  BoundModel bound(model, tape);
  EXPECT_THROW(bound.predict(2, tape.constant(random_input(2, 5, 1))), DomainError);
}

TEST(Model, InputWidthMismatchIsShapeError) {
  ModularModel model(small_spec(), 1);
  Tape tape;
  BoundModel bound(model, tape);
  EXPECT_THROW(bound.encode(tape.constant(random_input(2, 4, 1))), ShapeError);
}

TEST(Model, RejectsIndivisibleRepresentation) {
  ModelSpec spec = small_spec();
  spec.rep_dim = 7;
  EXPECT_THROW(ModularModel(spec, 1), ConfigError);
}

TEST(Model, EncodersShareArchitecture) {
  ModularModel model(small_spec(), 1);
  for (std::size_t i = 1; i < model.modules(); ++i) {
    const auto& a = model.encoder_indices(0);
    const auto& b = model.encoder_indices(i);
    ASSERT_EQ(a.size(), b.size());
    for (std::size_t j = 0; j < a.size(); ++j) {
      EXPECT_EQ(model.parameters()[a[j]].value.shape(), model.parameters()[b[j]].value.shape());
      EXPECT_NE(model.parameters()[a[j]].value, model.parameters()[b[j]].value);
    }
  }
}

TEST(Model, InitializationIsBoundedBySqrtFanIn) {
  ModularModel model(small_spec(), 3);
  for (const auto& p : model.parameters()) {
    if (p.group == ParamGroup::kRouting) continue;
    std::size_t fan_in = p.value.shape()[0];
    if (p.name.find(".b") != std::string::npos) continue;
    for (double v : p.value.values()) EXPECT_LE(std::fabs(v), 1.0 / std::sqrt(fan_in));
  }
}

TEST(Checkpoint, RoundTripPreservesWeightsAndHash) {
  ModularModel model(small_spec(), 21);
  model.parameters()[model.theta_index()].value.at(0, 1) = 0.123456789012345678;
  std::string hash;
  ModularModel restored = checkpoint_from_json(checkpoint_to_json(model, "abc123"), &hash);
  EXPECT_EQ(hash, "abc123");
  ASSERT_EQ(restored.parameters().size(), model.parameters().size());
  for (std::size_t i = 0; i < model.parameters().size(); ++i) {
    EXPECT_EQ(restored.parameters()[i].value, model.parameters()[i].value);
  }
}

TEST(Checkpoint, RejectsMismatchedShapes) {
  ModularModel model(small_spec(), 21);
  auto j = checkpoint_to_json(model, "h");
  j["parameters"][1]["shape"] = {1, 1};
  EXPECT_THROW(checkpoint_from_json(j), DataError);
}

}  // namespace
}  // namespace mtcrl
