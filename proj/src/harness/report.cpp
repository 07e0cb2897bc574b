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

#include "harness/report.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>

#include "common/error.hpp"

namespace mtcrl {

using nlohmann::json;

namespace {

json array_to_json(const Array& a) {
  if (a.rank() != 2) return json::array();
  json rows = json::array();
  for (std::size_t i = 0; i < a.rows(); ++i) {
    json row = json::array();
    for (std::size_t j = 0; j < a.cols(); ++j) row.push_back(a.at(i, j));
    rows.push_back(row);
  }
  return rows;
}

Array array_from_json(const json& j) {
  if (!j.is_array() || j.empty()) return Array();
  std::size_t rows = j.size(), cols = j.at(0).size();
  Array a({rows, cols});
  for (std::size_t i = 0; i < rows; ++i) {
    if (j.at(i).size() != cols) throw DataError("report: ragged matrix");
    for (std::size_t c = 0; c < cols; ++c) a.at(i, c) = j.at(i).at(c).get<double>();
  }
  return a;
}

std::vector<double> ranks(const std::vector<double>& v) {
  std::vector<std::size_t> order(v.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return v[a] < v[b]; });
  std::vector<double> r(v.size());
  for (std::size_t i = 0; i < order.size();) {
    std::size_t j = i;
    while (j + 1 < order.size() && v[order[j + 1]] == v[order[i]]) ++j;
    double avg = 0.5 * static_cast<double>(i + j) + 1.0;
    for (std::size_t k = i; k <= j; ++k) r[order[k]] = avg;
    i = j + 1;
  }
  return r;
}

}  // namespace

json report_to_json(const RunReport& r, bool include_timing) {
  json history = json::array();
  for (const auto& e : r.history) {
    history.push_back({{"epoch", e.epoch},
                       {"train_risk", e.train_risk},
                       {"valid_risk", e.valid_risk},
                       {"acc_train", e.acc_train},
                       {"acc_valid_env", e.acc_valid_env}});
  }
  json j = {{"config_hash", r.config_hash},
            {"seed", r.seed},
            {"mode", r.mode},
            {"dataset", r.dataset},
            {"tasks", r.tasks},
            {"history", history},
            {"epochs_run", r.epochs_run},
            {"selected_epoch", r.selected_epoch},
            {"early_stopped", r.early_stopped},
            {"acc_train_per_task", r.acc_train_per_task},
            {"acc_valid_env_per_task", r.acc_valid_env_per_task},
            {"acc_val_per_task", r.acc_val_per_task},
            {"rho_spur_per_task", r.rho_spur_per_task},
            {"acc_train", r.acc_train},
            {"acc_valid_env", r.acc_valid_env},
            {"acc_val", r.acc_val},
            {"rho_spur", r.rho_spur},
            {"routing", array_to_json(r.routing)},
            {"similarity", array_to_json(r.similarity)},
            {"similarity_threshold", r.similarity_threshold},
            {"max_cross_module_corr", r.max_cross_module_corr},
            {"max_cross_module_corr_test", r.max_cross_module_corr_test},
            {"saliency", r.saliency}};
  if (include_timing) j["wall_clock_seconds"] = r.wall_clock_seconds;
  return j;
}

RunReport report_from_json(const json& j) {
  try {
    RunReport r;
    r.config_hash = j.at("config_hash").get<std::string>();
    r.seed = j.at("seed").get<std::uint64_t>();
    r.mode = j.at("mode").get<std::string>();
    r.dataset = j.at("dataset").get<std::string>();
    r.tasks = j.at("tasks").get<std::size_t>();
    for (const auto& e : j.at("history")) {
      EpochRecord rec;
      rec.epoch = e.at("epoch").get<std::size_t>();
      rec.train_risk = e.at("train_risk").get<std::vector<double>>();
      rec.valid_risk = e.at("valid_risk").get<std::vector<double>>();
      rec.acc_train = e.at("acc_train").get<double>();
      rec.acc_valid_env = e.at("acc_valid_env").get<double>();
      r.history.push_back(rec);
    }
    r.epochs_run = j.at("epochs_run").get<std::size_t>();
    r.selected_epoch = j.at("selected_epoch").get<std::size_t>();
    r.early_stopped = j.at("early_stopped").get<bool>();
    r.acc_train_per_task = j.at("acc_train_per_task").get<std::vector<double>>();
    r.acc_valid_env_per_task = j.at("acc_valid_env_per_task").get<std::vector<double>>();
    r.acc_val_per_task = j.at("acc_val_per_task").get<std::vector<double>>();
    r.rho_spur_per_task = j.at("rho_spur_per_task").get<std::vector<double>>();
    r.acc_train = j.at("acc_train").get<double>();
    r.acc_valid_env = j.at("acc_valid_env").get<double>();
    r.acc_val = j.at("acc_val").get<double>();
    r.rho_spur = j.at("rho_spur").get<double>();
    r.routing = array_from_json(j.at("routing"));
    r.similarity = array_from_json(j.at("similarity"));
    r.similarity_threshold = j.at("similarity_threshold").get<double>();
    r.max_cross_module_corr = j.at("max_cross_module_corr").get<double>();
    r.max_cross_module_corr_test = j.at("max_cross_module_corr_test").get<double>();
    r.saliency = j.at("saliency").get<std::vector<std::vector<double>>>();
    if (j.contains("wall_clock_seconds")) r.wall_clock_seconds = j.at("wall_clock_seconds").get<double>();
    return r;
  } catch (const json::exception& e) {
    throw DataError(std::string("malformed run report: ") + e.what());
  }
}

double mean(const std::vector<double>& v) {
  if (v.empty()) return 0.0;
  return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

double stddev(const std::vector<double>& v) {
  if (v.size() < 2) return 0.0;
  double m = mean(v), s = 0.0;
  for (double x : v) s += (x - m) * (x - m);
  return std::sqrt(s / static_cast<double>(v.size() - 1));
}

std::string mean_pm_std(const std::vector<double>& v, int digits) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f \xC2\xB1 %.*f", digits, mean(v), digits, stddev(v));
  return buf;
}

double spearman(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size()) throw ShapeError("spearman: length mismatch");
  if (x.size() < 2) return 0.0;
  std::vector<double> rx = ranks(x), ry = ranks(y);
  double mx = mean(rx), my = mean(ry), sxy = 0, sxx = 0, syy = 0;
  for (std::size_t i = 0; i < rx.size(); ++i) {
    sxy += (rx[i] - mx) * (ry[i] - my);
    sxx += (rx[i] - mx) * (rx[i] - mx);
    syy += (ry[i] - my) * (ry[i] - my);
  }
  if (sxx == 0 || syy == 0) return 0.0;
  return sxy / std::sqrt(sxx * syy);
}

}  // namespace mtcrl
