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

#include <filesystem>
#include <string>

#include <json.hpp>

#include "model/modular_model.hpp"

namespace mtcrl {

nlohmann::json model_spec_to_json(const ModelSpec& spec);
ModelSpec model_spec_from_json(const nlohmann::json& j);

// Shapes and flat weight arrays plus the hash of the producing config.
nlohmann::json checkpoint_to_json(const ModularModel& model, const std::string& config_hash);
ModularModel checkpoint_from_json(const nlohmann::json& j, std::string* config_hash = nullptr);

void save_checkpoint(const std::filesystem::path& path, const ModularModel& model,
                     const std::string& config_hash);
ModularModel load_checkpoint(const std::filesystem::path& path,
                             std::string* config_hash = nullptr);

}  // namespace mtcrl
