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

#include "model/checkpoint.hpp"

#include <fstream>

#include "common/error.hpp"

namespace mtcrl {

namespace {

constexpr const char* kFormat = "mtcrl-checkpoint-1";

}  // namespace

nlohmann::json model_spec_to_json(const ModelSpec& spec) {
  return {
      {"input_dim", spec.input_dim},
      {"tasks", spec.tasks},
      {"modules", spec.modules},
      {"rep_dim", spec.rep_dim},
      {"encoder_hidden", spec.encoder_hidden},
      {"encoder_activation", activation_name(spec.encoder_activation)},
      {"encoder_output_activation", spec.encoder_output_activation},
      {"head_hidden", spec.head_hidden},
      {"head_activation", activation_name(spec.head_activation)},
      {"task_output_dims", spec.task_output_dims},
      {"routing", routing_mode_name(spec.routing)},
      {"identity_heads", spec.identity_heads},
  };
}

ModelSpec model_spec_from_json(const nlohmann::json& j) {
  try {
    ModelSpec s;
    s.input_dim = j.at("input_dim").get<std::size_t>();
    s.tasks = j.at("tasks").get<std::size_t>();
    s.modules = j.at("modules").get<std::size_t>();
    s.rep_dim = j.at("rep_dim").get<std::size_t>();
    s.encoder_hidden = j.at("encoder_hidden").get<std::vector<std::size_t>>();
    s.encoder_activation = parse_activation(j.at("encoder_activation").get<std::string>());
    s.encoder_output_activation = j.value("encoder_output_activation", false);
    s.head_hidden = j.at("head_hidden").get<std::vector<std::size_t>>();
    s.head_activation = parse_activation(j.at("head_activation").get<std::string>());
    s.task_output_dims = j.at("task_output_dims").get<std::vector<std::size_t>>();
    s.routing = parse_routing_mode(j.value("routing", std::string("learned")));
    s.identity_heads = j.value("identity_heads", false);
    return s;
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("invalid model spec: ") + e.what());
  }
}

nlohmann::json checkpoint_to_json(const ModularModel& model, const std::string& config_hash) {
  nlohmann::json params = nlohmann::json::array();
  for (const auto& p : model.parameters()) {
    params.push_back({{"name", p.name},
                      {"shape", p.value.shape()},
                      {"values", p.value.storage()}});
  }
  return {{"format", kFormat},
          {"config_hash", config_hash},
          {"spec", model_spec_to_json(model.spec())},
          {"parameters", std::move(params)}};
}

ModularModel checkpoint_from_json(const nlohmann::json& j, std::string* config_hash) {
  try {
    if (j.at("format").get<std::string>() != kFormat) {
      throw DataError("unsupported checkpoint format");
    }
    ModularModel model(model_spec_from_json(j.at("spec")), 0);
    const auto& params = j.at("parameters");
    if (params.size() != model.parameters().size()) {
      throw DataError("checkpoint parameter count does not match its spec");
    }
    for (std::size_t i = 0; i < params.size(); ++i) {
      auto& dst = model.parameters()[i];
      Shape shape = params[i].at("shape").get<Shape>();
      if (params[i].at("name").get<std::string>() != dst.name || shape != dst.value.shape()) {
        throw DataError("checkpoint parameter " + dst.name + " does not match its spec");
      }
      dst.value = Array(shape, params[i].at("values").get<std::vector<double>>());
    }
    if (config_hash) *config_hash = j.at("config_hash").get<std::string>();
    return model;
  } catch (const nlohmann::json::exception& e) {
    throw DataError(std::string("malformed checkpoint: ") + e.what());
  }
}

void save_checkpoint(const std::filesystem::path& path, const ModularModel& model,
                     const std::string& config_hash) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path.string());
  out << checkpoint_to_json(model, config_hash).dump() << '\n';
  if (!out) throw IoError("failed writing " + path.string());
}

ModularModel load_checkpoint(const std::filesystem::path& path, std::string* config_hash) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot read " + path.string());
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw DataError("malformed checkpoint " + path.string() + ": " + e.what());
  }
  return checkpoint_from_json(j, config_hash);
}

}  // namespace mtcrl
