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

#include "harness/config.hpp"

#include <cstdio>
#include <fstream>
#include <set>

#include "common/error.hpp"

namespace mtcrl {

using nlohmann::json;

namespace {

template <typename Enum, std::size_t N>
Enum parse_enum(std::string_view s, const std::pair<std::string_view, Enum> (&table)[N],
                const char* what) {
  for (const auto& [name, value] : table) {
    if (name == s) return value;
  }
  throw ConfigError(std::string("unknown ") + what + " '" + std::string(s) + "'");
}

constexpr std::pair<std::string_view, DatasetKind> kDatasets[] = {
    {"multisem", DatasetKind::kMultiSem}, {"multimnist", DatasetKind::kMultiMnist}};
constexpr std::pair<std::string_view, TrainMode> kModes[] = {
    {"stl", TrainMode::kStl}, {"mtl-vanilla", TrainMode::kMtlVanilla}, {"mtcrl", TrainMode::kMtcrl}};
constexpr std::pair<std::string_view, MtlArchitecture> kArchs[] = {
    {"shared-bottom", MtlArchitecture::kSharedBottom}, {"mmoe", MtlArchitecture::kMmoe}};
constexpr std::pair<std::string_view, OptimizerKind> kOptimizers[] = {
    {"sgd", OptimizerKind::kSgd}, {"adam", OptimizerKind::kAdam}};
constexpr std::pair<std::string_view, MnistVariant> kVariants[] = {
    {"analysis", MnistVariant::kAnalysis}, {"benchmark", MnistVariant::kBenchmark}};

template <typename Enum, std::size_t N>
std::string_view enum_name(Enum v, const std::pair<std::string_view, Enum> (&table)[N]) {
  for (const auto& [name, value] : table) {
    if (value == v) return name;
  }
  return "?";
}

void check_keys(const json& j, std::initializer_list<const char*> allowed, const char* where) {
  if (!j.is_object()) throw ConfigError(std::string(where) + " must be a JSON object");
  std::set<std::string> ok(allowed.begin(), allowed.end());
  for (const auto& [key, value] : j.items()) {
    if (!ok.count(key)) throw ConfigError("unknown key '" + key + "' in " + where);
  }
}

template <typename T>
void read(const json& j, const char* key, T& out) {
  if (!j.contains(key)) return;
  try {
    out = j.at(key).get<T>();
  } catch (const json::exception& e) {
    throw ConfigError(std::string("bad value for '") + key + "': " + e.what());
  }
}

template <typename Enum, std::size_t N>
void read_enum(const json& j, const char* key, Enum& out,
               const std::pair<std::string_view, Enum> (&table)[N]) {
  std::string s;
  read(j, key, s);
  if (!s.empty()) out = parse_enum(s, table, key);
}

}  // namespace

std::string_view dataset_kind_name(DatasetKind k) { return enum_name(k, kDatasets); }
std::string_view train_mode_name(TrainMode m) { return enum_name(m, kModes); }
std::string_view mtl_architecture_name(MtlArchitecture a) { return enum_name(a, kArchs); }
std::string_view optimizer_kind_name(OptimizerKind k) { return enum_name(k, kOptimizers); }
DatasetKind parse_dataset_kind(std::string_view s) { return parse_enum(s, kDatasets, "dataset kind"); }
TrainMode parse_train_mode(std::string_view s) { return parse_enum(s, kModes, "mode"); }
MtlArchitecture parse_mtl_architecture(std::string_view s) {
  return parse_enum(s, kArchs, "mtl architecture");
}
OptimizerKind parse_optimizer_kind(std::string_view s) {
  return parse_enum(s, kOptimizers, "optimizer");
}

void TrainConfig::validate() const {
  if (dataset == DatasetKind::kMultiSem) {
    try {
      sem.validate();
    } catch (const Error& e) {
      throw ConfigError(std::string("dataset: ") + e.what());
    }
  } else if (mnist.images.empty() || mnist.labels.empty()) {
    throw ConfigError("dataset: multimnist needs 'images' and 'labels' paths");
  }
  if (model.modules == 0 || model.module_dim == 0) {
    throw ConfigError("model: modules and module_dim must be positive");
  }
  weights.validate();
  if (!(optimizer.lr > 0)) throw ConfigError("optimizer: lr must be positive");
  if (!(optimizer.beta1 >= 0 && optimizer.beta1 < 1 && optimizer.beta2 >= 0 && optimizer.beta2 < 1)) {
    throw ConfigError("optimizer: betas must lie in [0, 1)");
  }
  if (!(optimizer.eps > 0)) throw ConfigError("optimizer: eps must be positive");
  if (!(optimizer.momentum >= 0 && optimizer.momentum < 1)) {
    throw ConfigError("optimizer: momentum must lie in [0, 1)");
  }
  if (!(min_delta >= 0)) throw ConfigError("min_delta must be non-negative");
  if (epochs > 100000) throw ConfigError("epochs must not exceed 100000");
}

std::uint64_t TrainConfig::data_seed() const {
  if (data_seed_fixed) return dataset == DatasetKind::kMultiSem ? sem.seed : mnist.split_seed;
  return seed;
}

PenaltyWeights TrainConfig::effective_weights() const {
  if (mode == TrainMode::kMtcrl) return weights;
  PenaltyWeights none;
  none.lambda_decor = none.lambda_sps = none.lambda_bal = none.lambda_girm = 0.0;
  none.girm_variant = GirmVariant::kNone;
  return none;
}

ModelSpec TrainConfig::model_spec(std::size_t input_dim,
                                  const std::vector<std::size_t>& output_dims) const {
  ModelSpec spec;
  spec.input_dim = input_dim;
  spec.tasks = output_dims.size();
  spec.task_output_dims = output_dims;
  spec.encoder_hidden = model.encoder_hidden;
  spec.encoder_activation = model.encoder_activation;
  spec.encoder_output_activation = model.encoder_output_activation;
  spec.head_hidden = model.head_hidden;
  spec.head_activation = model.head_activation;
  bool single = mode == TrainMode::kStl ||
                (mode == TrainMode::kMtlVanilla && mtl_architecture == MtlArchitecture::kSharedBottom);
  if (mode == TrainMode::kStl) {
    spec.modules = spec.tasks;
    spec.routing = RoutingMode::kFixedIdentity;
  } else if (single) {
    spec.modules = 1;
    spec.routing = RoutingMode::kFixedOnes;
  } else {
    spec.modules = model.modules;
    spec.routing = RoutingMode::kLearned;
  }
  spec.rep_dim = model.module_dim * spec.modules;
  spec.validate();
  return spec;
}

json config_to_json(const TrainConfig& c) {
  json dataset;
  dataset["kind"] = dataset_kind_name(c.dataset);
  if (c.dataset == DatasetKind::kMultiSem) {
    const SemSpec& s = c.sem;
    dataset["tasks"] = s.tasks;
    dataset["d_factor"] = s.d_factor;
    dataset["nuisance_dims"] = s.nuisance_dims;
    dataset["mu_norm"] = s.mu_norm;
    if (!s.mu.empty()) dataset["mu"] = s.mu;
    if (!s.sigma.empty()) dataset["sigma"] = s.sigma;
    dataset["m_train"] = s.m_train;
    dataset["m_valid"] = s.m_valid;
    dataset["m_test"] = s.m_test;
    dataset["n_train"] = s.n_train;
    dataset["n_valid"] = s.n_valid;
    dataset["n_test"] = s.n_test;
  } else {
    const MnistPairSpec& m = c.mnist;
    dataset["images"] = m.images.string();
    dataset["labels"] = m.labels.string();
    dataset["variant"] = enum_name(m.variant, kVariants);
    dataset["pairs_per_class_pair"] = m.pairs_per_class_pair;
  }
  if (c.data_seed_fixed) dataset["seed"] = c.data_seed();

  json j;
  j["dataset"] = dataset;
  j["mode"] = train_mode_name(c.mode);
  j["mtl_architecture"] = mtl_architecture_name(c.mtl_architecture);
  j["model"] = {{"modules", c.model.modules},
                {"module_dim", c.model.module_dim},
                {"encoder_hidden", c.model.encoder_hidden},
                {"encoder_activation", activation_name(c.model.encoder_activation)},
                {"encoder_output_activation", c.model.encoder_output_activation},
                {"head_hidden", c.model.head_hidden},
                {"head_activation", activation_name(c.model.head_activation)}};
  j["weights"] = {{"decor", c.weights.lambda_decor},
                  {"sps", c.weights.lambda_sps},
                  {"bal", c.weights.lambda_bal},
                  {"girm", c.weights.lambda_girm},
                  {"girm_variant", girm_variant_name(c.weights.girm_variant)}};
  j["optimizer"] = {{"kind", optimizer_kind_name(c.optimizer.kind)},
                    {"lr", c.optimizer.lr},
                    {"beta1", c.optimizer.beta1},
                    {"beta2", c.optimizer.beta2},
                    {"eps", c.optimizer.eps},
                    {"momentum", c.optimizer.momentum}};
  j["epochs"] = c.epochs;
  j["patience"] = c.patience;
  j["min_delta"] = c.min_delta;
  j["batch_size"] = c.batch_size;
  j["detach_heads"] = c.detach_heads;
  j["select_on_valid"] = c.select_on_valid;
  j["saliency_rows"] = c.saliency_rows;
  j["seed"] = c.seed;
  return j;
}

TrainConfig config_from_json(const json& j) {
  check_keys(j, {"dataset", "mode", "mtl_architecture", "model", "weights", "optimizer", "epochs",
                 "patience", "min_delta", "batch_size", "detach_heads", "select_on_valid",
                 "saliency_rows", "seed"},
             "config");
  TrainConfig c;
  read(j, "seed", c.seed);
  if (j.contains("dataset")) {
    const json& d = j.at("dataset");
    check_keys(d, {"kind", "tasks", "d_factor", "nuisance_dims", "mu_norm", "mu", "sigma", "m_train",
                   "m_valid", "m_test", "n_train", "n_valid", "n_test", "seed", "images", "labels",
                   "variant", "pairs_per_class_pair"},
               "dataset");
    read_enum(d, "kind", c.dataset, kDatasets);
    SemSpec& s = c.sem;
    read(d, "tasks", s.tasks);
    read(d, "d_factor", s.d_factor);
    read(d, "nuisance_dims", s.nuisance_dims);
    read(d, "mu_norm", s.mu_norm);
    read(d, "mu", s.mu);
    read(d, "sigma", s.sigma);
    read(d, "m_train", s.m_train);
    read(d, "m_valid", s.m_valid);
    read(d, "m_test", s.m_test);
    read(d, "n_train", s.n_train);
    read(d, "n_valid", s.n_valid);
    read(d, "n_test", s.n_test);
    std::string images, labels;
    read(d, "images", images);
    read(d, "labels", labels);
    c.mnist.images = images;
    c.mnist.labels = labels;
    read_enum(d, "variant", c.mnist.variant, kVariants);
    read(d, "pairs_per_class_pair", c.mnist.pairs_per_class_pair);
    if (d.contains("seed")) {
      c.data_seed_fixed = true;
      read(d, "seed", s.seed);
      c.mnist.split_seed = s.seed;
    }
  }
  if (!c.data_seed_fixed) {
    c.sem.seed = c.seed;
    c.mnist.split_seed = c.seed;
  }
  read_enum(j, "mode", c.mode, kModes);
  read_enum(j, "mtl_architecture", c.mtl_architecture, kArchs);
  if (j.contains("model")) {
    const json& m = j.at("model");
    check_keys(m, {"modules", "module_dim", "encoder_hidden", "encoder_activation",
                   "encoder_output_activation", "head_hidden", "head_activation"},
               "model");
    read(m, "modules", c.model.modules);
    read(m, "module_dim", c.model.module_dim);
    read(m, "encoder_hidden", c.model.encoder_hidden);
    read(m, "encoder_output_activation", c.model.encoder_output_activation);
    read(m, "head_hidden", c.model.head_hidden);
    std::string act;
    read(m, "encoder_activation", act);
    if (!act.empty()) c.model.encoder_activation = parse_activation(act);
    act.clear();
    read(m, "head_activation", act);
    if (!act.empty()) c.model.head_activation = parse_activation(act);
  }
  if (j.contains("weights")) {
    const json& w = j.at("weights");
    check_keys(w, {"decor", "sps", "bal", "girm", "girm_variant"}, "weights");
    read(w, "decor", c.weights.lambda_decor);
    read(w, "sps", c.weights.lambda_sps);
    read(w, "bal", c.weights.lambda_bal);
    read(w, "girm", c.weights.lambda_girm);
    std::string v;
    read(w, "girm_variant", v);
    if (!v.empty()) c.weights.girm_variant = parse_girm_variant(v);
  }
  if (j.contains("optimizer")) {
    const json& o = j.at("optimizer");
    check_keys(o, {"kind", "lr", "beta1", "beta2", "eps", "momentum"}, "optimizer");
    read_enum(o, "kind", c.optimizer.kind, kOptimizers);
    read(o, "lr", c.optimizer.lr);
    read(o, "beta1", c.optimizer.beta1);
    read(o, "beta2", c.optimizer.beta2);
    read(o, "eps", c.optimizer.eps);
    read(o, "momentum", c.optimizer.momentum);
  }
  read(j, "epochs", c.epochs);
  read(j, "patience", c.patience);
  read(j, "min_delta", c.min_delta);
  read(j, "batch_size", c.batch_size);
  read(j, "detach_heads", c.detach_heads);
  read(j, "select_on_valid", c.select_on_valid);
  read(j, "saliency_rows", c.saliency_rows);
  c.validate();
  return c;
}

TrainConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open config " + path.string());
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw ConfigError("config " + path.string() + " is not valid JSON: " + e.what());
  }
  return config_from_json(j);
}

std::string config_hash(const TrainConfig& config) {
  std::string text = config_to_json(config).dump();
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char ch : text) {
    h ^= ch;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

}  // namespace mtcrl
