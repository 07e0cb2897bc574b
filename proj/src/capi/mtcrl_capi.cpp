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

#include "mtcrl/mtcrl.h"

#include <cstdlib>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "analysis/diagnostics.hpp"
#include "analysis/export.hpp"
#include "analysis/saliency.hpp"
#include "common/error.hpp"
#include "data/container.hpp"
#include "harness/config.hpp"
#include "harness/experiments.hpp"
#include "harness/parallel.hpp"
#include "harness/trainer.hpp"
#include "model/checkpoint.hpp"
#include "oracles/oracle_check.hpp"

struct mtcrl_config {
  mtcrl::TrainConfig config;
};

struct mtcrl_run {
  mtcrl::RunOutput output;
  mtcrl::TrainConfig config;
};

namespace {

using nlohmann::json;
namespace fs = std::filesystem;

thread_local std::string g_last_error;
thread_local json g_last_error_json = json::object();

char* dup_string(const std::string& s) {
  char* out = static_cast<char*>(std::malloc(s.size() + 1));
  if (out == nullptr) throw std::bad_alloc();
  std::memcpy(out, s.c_str(), s.size() + 1);
  return out;
}

mtcrl_status fail(mtcrl_status status, const std::string& message, json detail = json::object()) {
  g_last_error = message;
  g_last_error_json = {{"status", mtcrl_status_name(status)}, {"message", message}};
  if (!detail.empty()) g_last_error_json["snapshot"] = std::move(detail);
  return status;
}

// Runs `body`, translating exceptions into status codes.
template <typename F>
mtcrl_status guarded(F&& body) {
  g_last_error.clear();
  g_last_error_json = json::object();
  try {
    body();
    return MTCRL_OK;
  } catch (const mtcrl::TrainingAborted& e) {
    return fail(MTCRL_ERR_NUMERIC, e.what(), e.snapshot());
  } catch (const mtcrl::ShapeError& e) {
    return fail(MTCRL_ERR_SHAPE, e.what());
  } catch (const mtcrl::DomainError& e) {
    return fail(MTCRL_ERR_DOMAIN, e.what());
  } catch (const mtcrl::StaleTapeError& e) {
    return fail(MTCRL_ERR_STALE_TAPE, e.what());
  } catch (const mtcrl::NumericError& e) {
    return fail(MTCRL_ERR_NUMERIC, e.what());
  } catch (const mtcrl::DegenerateError& e) {
    return fail(MTCRL_ERR_DEGENERATE, e.what());
  } catch (const mtcrl::ConfigError& e) {
    return fail(MTCRL_ERR_CONFIG, e.what());
  } catch (const mtcrl::DataError& e) {
    return fail(MTCRL_ERR_DATA, e.what());
  } catch (const mtcrl::IoError& e) {
    return fail(MTCRL_ERR_IO, e.what());
  } catch (const std::invalid_argument& e) {
    return fail(MTCRL_ERR_INVALID_ARGUMENT, e.what());
  } catch (const std::exception& e) {
    return fail(MTCRL_ERR_INTERNAL, e.what());
  } catch (...) {
    return fail(MTCRL_ERR_INTERNAL, "unknown failure");
  }
}

void require(bool ok, const char* what) {
  if (!ok) throw std::invalid_argument(what);
}

void write_json(const fs::path& path, const json& j) { mtcrl::write_text_file(path, j.dump(2) + "\n"); }

std::vector<std::uint64_t> seed_list(const uint64_t* seeds, size_t n) {
  require(seeds != nullptr && n > 0, "at least one seed is required");
  return std::vector<std::uint64_t>(seeds, seeds + n);
}

// Saliency of every task as a (tasks x dims) table; Multi-MNIST maps are
// also rendered as images.
void write_saliency(const fs::path& dir, const std::string& stem, const mtcrl::RunReport& r,
                    const mtcrl::TrainConfig& config) {
  if (r.saliency.empty()) return;
  std::size_t dims = r.saliency[0].size();
  mtcrl::Array table({r.saliency.size(), dims});
  for (std::size_t t = 0; t < r.saliency.size(); ++t) {
    for (std::size_t j = 0; j < dims; ++j) table.at(t, j) = r.saliency[t][j];
  }
  mtcrl::write_text_file(dir / (stem + ".csv"), mtcrl::matrix_csv(table, "task", "x"));
  if (config.dataset == mtcrl::DatasetKind::kMultiMnist && dims % 56 == 0) {
    std::size_t rows = dims / 56;
    for (std::size_t t = 0; t < r.saliency.size(); ++t) {
      mtcrl::Array img({rows, 56}, r.saliency[t]);
      double peak = 0;
      for (double v : r.saliency[t]) peak = std::max(peak, v);
      mtcrl::SvgOptions o;
      o.cell_px = 6;
      o.max_abs = peak > 0 ? peak : 1.0;
      o.separators = {28};
      mtcrl::write_text_file(dir / (stem + "_task" + std::to_string(t) + ".svg"), mtcrl::heatmap_svg(img, o));
    }
  }
}

// Module correlation heatmaps on training rows and on test rows.
void write_corr(const fs::path& dir, const mtcrl::ModularModel& model, const mtcrl::SplitData& data) {
  const std::pair<const char*, const mtcrl::Dataset*> probes[] = {{"module_corr", &data.train},
                                                                   {"module_corr_test", &data.test}};
  for (const auto& [stem, d] : probes) {
    mtcrl::Dataset probe = d->first_rows(std::min<std::size_t>(d->rows(), 2000));
    if (probe.rows() < 2) continue;
    mtcrl::CorrHeatmap h = mtcrl::module_corr_heatmap(model, probe.x);
    mtcrl::write_text_file(dir / (std::string(stem) + ".csv"), mtcrl::matrix_csv(h.corr, "dim", "dim"));
    mtcrl::SvgOptions o;
    o.separators = h.block_starts;
    mtcrl::write_text_file(dir / (std::string(stem) + ".svg"), mtcrl::heatmap_svg(h.corr, o));
  }
}

json row_json(const mtcrl::MethodRow& r) {
  return {{"method", r.method}, {"dataset", r.dataset}, {"seed", r.seed},
          {"acc_train", r.acc_train}, {"acc_val", r.acc_val}, {"rho_spur", r.rho_spur}};
}

std::size_t majority(std::size_t n) { return n / 2 + 1; }

}  // namespace

extern "C" {

const char* mtcrl_version(void) { return "0.1.0"; }

const char* mtcrl_status_name(mtcrl_status status) {
  switch (status) {
    case MTCRL_OK: return "ok";
    case MTCRL_ERR_INVALID_ARGUMENT: return "invalid_argument";
    case MTCRL_ERR_SHAPE: return "shape_error";
    case MTCRL_ERR_DOMAIN: return "domain_error";
    case MTCRL_ERR_STALE_TAPE: return "stale_tape";
    case MTCRL_ERR_NUMERIC: return "numeric_error";
    case MTCRL_ERR_DEGENERATE: return "degenerate";
    case MTCRL_ERR_CONFIG: return "config_error";
    case MTCRL_ERR_DATA: return "data_error";
    case MTCRL_ERR_IO: return "io_error";
    case MTCRL_ERR_INTERNAL: return "internal_error";
  }
  return "unknown";
}

const char* mtcrl_last_error(void) { return g_last_error.c_str(); }

char* mtcrl_last_error_json(void) {
  try {
    return dup_string(g_last_error_json.dump());
  } catch (...) {
    return nullptr;
  }
}

void mtcrl_string_free(char* s) { std::free(s); }

mtcrl_status mtcrl_config_load(const char* path, mtcrl_config** out) {
  return guarded([&] {
    require(path != nullptr && out != nullptr, "path and out must not be NULL");
    *out = new mtcrl_config{mtcrl::load_config(path)};
  });
}

mtcrl_status mtcrl_config_parse(const char* text, mtcrl_config** out) {
  return guarded([&] {
    require(text != nullptr && out != nullptr, "json and out must not be NULL");
    json j;
    try {
      j = json::parse(text);
    } catch (const json::exception& e) {
      throw mtcrl::ConfigError(std::string("config is not valid JSON: ") + e.what());
    }
    *out = new mtcrl_config{mtcrl::config_from_json(j)};
  });
}

mtcrl_status mtcrl_config_set_seed(mtcrl_config* config, uint64_t seed) {
  return guarded([&] {
    require(config != nullptr, "config must not be NULL");
    config->config.seed = seed;
    if (!config->config.data_seed_fixed) {
      config->config.sem.seed = seed;
      config->config.mnist.split_seed = seed;
    }
  });
}

mtcrl_status mtcrl_config_to_json(const mtcrl_config* config, char** out) {
  return guarded([&] {
    require(config != nullptr && out != nullptr, "config and out must not be NULL");
    *out = dup_string(mtcrl::config_to_json(config->config).dump(2));
  });
}

mtcrl_status mtcrl_config_hash(const mtcrl_config* config, char** out) {
  return guarded([&] {
    require(config != nullptr && out != nullptr, "config and out must not be NULL");
    *out = dup_string(mtcrl::config_hash(config->config));
  });
}

void mtcrl_config_free(mtcrl_config* config) { delete config; }

mtcrl_status mtcrl_gen_data(const mtcrl_config* config, const char* out_dir, int csv) {
  return guarded([&] {
    require(config != nullptr && out_dir != nullptr, "config and out_dir must not be NULL");
    mtcrl::SplitData data = mtcrl::load_dataset(config->config);
    mtcrl::write_splits(out_dir, data, csv != 0);
    write_json(fs::path(out_dir) / "config.json", mtcrl::config_to_json(config->config));
  });
}

mtcrl_status mtcrl_train(const mtcrl_config* config, mtcrl_run** out) {
  return guarded([&] {
    require(config != nullptr && out != nullptr, "config and out must not be NULL");
    *out = new mtcrl_run{mtcrl::train_run(config->config), config->config};
  });
}

mtcrl_status mtcrl_run_report_json(const mtcrl_run* run, int include_timing, char** out) {
  return guarded([&] {
    require(run != nullptr && out != nullptr, "run and out must not be NULL");
    *out = dup_string(mtcrl::report_to_json(run->output.report, include_timing != 0).dump(2));
  });
}

mtcrl_status mtcrl_run_metric(const mtcrl_run* run, const char* name, double* out) {
  return guarded([&] {
    require(run != nullptr && name != nullptr && out != nullptr, "arguments must not be NULL");
    const mtcrl::RunReport& r = run->output.report;
    std::string n = name;
    if (n == "acc_train") *out = r.acc_train;
    else if (n == "acc_val") *out = r.acc_val;
    else if (n == "acc_valid_env") *out = r.acc_valid_env;
    else if (n == "rho_spur") *out = r.rho_spur;
    else if (n == "max_cross_module_corr") *out = r.max_cross_module_corr;
    else if (n == "max_cross_module_corr_test") *out = r.max_cross_module_corr_test;
    else if (n == "epochs_run") *out = static_cast<double>(r.epochs_run);
    else if (n == "selected_epoch") *out = static_cast<double>(r.selected_epoch);
    else if (n == "wall_clock_seconds") *out = r.wall_clock_seconds;
    else throw std::invalid_argument("unknown metric '" + n + "'");
  });
}

mtcrl_status mtcrl_run_write_artifacts(const mtcrl_run* run, const char* out_dir) {
  return guarded([&] {
    require(run != nullptr && out_dir != nullptr, "run and out_dir must not be NULL");
    fs::path dir(out_dir);
    const mtcrl::RunReport& r = run->output.report;
    write_json(dir / "report.json", mtcrl::report_to_json(r));
    mtcrl::save_checkpoint(dir / "checkpoint.json", run->output.model, r.config_hash);
    write_json(dir / "config.json", mtcrl::config_to_json(run->config));
    mtcrl::write_text_file(dir / "routing.csv", mtcrl::matrix_csv(r.routing, "task", "module"));
    mtcrl::write_text_file(dir / "similarity.csv", mtcrl::matrix_csv(r.similarity, "task", "task"));
    write_saliency(dir, "saliency", r, run->config);
    write_corr(dir, run->output.model, run->output.data);
  });
}

void mtcrl_run_free(mtcrl_run* run) { delete run; }

mtcrl_status mtcrl_table2(const mtcrl_config* const* configs, size_t n_configs, const uint64_t* seeds,
                          size_t n_seeds, const char* out_dir, char** summary) {
  return guarded([&] {
    require(configs != nullptr && n_configs > 0 && out_dir != nullptr, "configs and out_dir are required");
    std::vector<mtcrl::TrainConfig> bases;
    for (size_t i = 0; i < n_configs; ++i) {
      require(configs[i] != nullptr, "config must not be NULL");
      bases.push_back(configs[i]->config);
    }
    auto seed_vec = seed_list(seeds, n_seeds);
    mtcrl::Table2Result res = mtcrl::run_table2(bases, seed_vec, mtcrl::worker_count());
    fs::path dir(out_dir);
    mtcrl::write_text_file(dir / "table2.csv", mtcrl::table2_csv(res.summary));
    mtcrl::write_text_file(dir / "table2_seeds.csv", mtcrl::table2_seeds_csv(res.per_seed));

    json j;
    j["rows"] = json::array();
    for (const auto& r : res.summary) j["rows"].push_back(row_json(r));
    j["per_seed"] = json::array();
    for (const auto& r : res.per_seed) j["per_seed"].push_back(row_json(r));
    // Per dataset: seeds where MTL is more spurious and less accurate than STL.
    json directions = json::object();
    for (size_t i = 0; i + 1 < res.per_seed.size(); i += 2) {
      const auto& stl = res.per_seed[i];
      const auto& mtl = res.per_seed[i + 1];
      json& d = directions[stl.dataset];
      if (d.is_null()) d = {{"seeds", 0}, {"mtl_rho_higher", 0}, {"mtl_acc_lower", 0}, {"both", 0}};
      d["seeds"] = d["seeds"].get<int>() + 1;
      bool rho = mtl.rho_spur > stl.rho_spur, acc = mtl.acc_val < stl.acc_val;
      d["mtl_rho_higher"] = d["mtl_rho_higher"].get<int>() + (rho ? 1 : 0);
      d["mtl_acc_lower"] = d["mtl_acc_lower"].get<int>() + (acc ? 1 : 0);
      d["both"] = d["both"].get<int>() + (rho && acc ? 1 : 0);
    }
    j["directions"] = directions;
    for (size_t i = 0; i < res.reports.size(); ++i) {
      const auto& r = res.reports[i];
      std::string stem = r.dataset + "_" + res.per_seed[i].method + "_seed" + std::to_string(r.seed);
      write_json(dir / "reports" / (stem + ".json"), mtcrl::report_to_json(r));
      if (i < 2 * bases.size() * seed_vec.size() && r.seed == seed_vec.front()) {
        write_saliency(dir / "saliency", stem, r, bases[i / (2 * seed_vec.size())]);
      }
    }
    write_json(dir / "table2_summary.json", j);
    if (summary != nullptr) *summary = dup_string(j.dump(2));
  });
}

mtcrl_status mtcrl_sweep_tasks(const mtcrl_config* config, const size_t* task_counts, size_t n_counts,
                               const uint64_t* seeds, size_t n_seeds, const char* out_dir,
                               char** summary) {
  return guarded([&] {
    require(config != nullptr && out_dir != nullptr, "config and out_dir are required");
    require(task_counts != nullptr && n_counts > 0, "at least one task count is required");
    std::vector<std::size_t> counts(task_counts, task_counts + n_counts);
    mtcrl::SweepResult res =
        mtcrl::run_task_sweep(config->config, counts, seed_list(seeds, n_seeds), mtcrl::worker_count());
    fs::path dir(out_dir);
    mtcrl::write_text_file(dir / "sweep.csv", mtcrl::sweep_csv(res));
    json j;
    j["points"] = json::array();
    for (const auto& p : res.points) {
      j["points"].push_back({{"tasks", p.tasks},
                             {"mtl_acc_val", p.mtl_acc_val},
                             {"mtl_rho_spur", p.mtl_rho_spur},
                             {"stl_acc_val", p.stl_acc_val},
                             {"stl_rho_spur", p.stl_rho_spur}});
    }
    j["mtl_rho_trend"] = res.mtl_rho_trend;
    j["mtl_acc_trend"] = res.mtl_acc_trend;
    j["rho_rises"] = res.rho_rises;
    j["acc_falls"] = res.acc_falls;
    j["stl_below_mtl_everywhere"] = res.stl_below_mtl_everywhere;
    for (const auto& r : res.reports) {
      write_json(dir / "reports" / ("T" + std::to_string(r.tasks) + "_" + r.mode + "_seed" +
                                    std::to_string(r.seed) + ".json"),
                 mtcrl::report_to_json(r));
    }
    write_json(dir / "sweep_summary.json", j);
    if (summary != nullptr) *summary = dup_string(j.dump(2));
  });
}

mtcrl_status mtcrl_ablate(const mtcrl_config* config, const uint64_t* seeds, size_t n_seeds,
                          const char* out_dir, char** summary) {
  return guarded([&] {
    require(config != nullptr && out_dir != nullptr, "config and out_dir are required");
    mtcrl::AblationResult res =
        mtcrl::run_ablation(config->config, seed_list(seeds, n_seeds), mtcrl::worker_count());
    fs::path dir(out_dir);
    mtcrl::write_text_file(dir / "ablation.csv", mtcrl::ablation_csv(res));
    json j;
    j["rows"] = json::array();
    for (const auto& r : res.rows) {
      j["rows"].push_back({{"variant", r.name},
                           {"acc_val", r.acc_val},
                           {"rho_spur", r.rho_spur},
                           {"acc_val_summary", mtcrl::mean_pm_std(r.acc_val)},
                           {"rho_spur_summary", mtcrl::mean_pm_std(r.rho_spur)},
                           {"max_cross_module_corr", r.max_cross_module_corr}});
    }
    // Seeds where the full model beats each variant on acc_val.
    const auto& full = res.row("full");
    json wins = json::object();
    for (const auto& r : res.rows) {
      if (r.name == "full") continue;
      std::size_t w = 0;
      for (std::size_t s = 0; s < r.acc_val.size(); ++s) w += full.acc_val[s] > r.acc_val[s];
      wins[r.name] = {{"full_wins", w}, {"seeds", r.acc_val.size()}, {"majority", w >= majority(r.acc_val.size())}};
    }
    j["full_vs"] = wins;
    std::size_t k = 0;
    for (const auto& r : res.rows) {
      for (std::uint64_t s : res.seeds) {
        write_json(dir / "reports" / (r.name + "_seed" + std::to_string(s) + ".json"),
                   mtcrl::report_to_json(res.reports[k++]));
      }
    }
    write_json(dir / "ablation_summary.json", j);
    if (summary != nullptr) *summary = dup_string(j.dump(2));
  });
}

mtcrl_status mtcrl_oracle_check(int seeds, uint64_t base_seed, const char* out_dir, int* all_passed,
                                char** csv) {
  return guarded([&] {
    require(out_dir != nullptr && all_passed != nullptr, "out_dir and all_passed must not be NULL");
    mtcrl::OracleCheckOptions o;
    o.seeds = seeds;
    o.base_seed = base_seed;
    auto rows = mtcrl::run_oracle_checks(o);
    std::string text = mtcrl::oracle_check_csv(rows);
    mtcrl::write_text_file(fs::path(out_dir) / "oracle_check.csv", text);
    *all_passed = mtcrl::all_passed(rows) ? 1 : 0;
    if (csv != nullptr) *csv = dup_string(text);
  });
}

mtcrl_status mtcrl_analyze(const char* checkpoint_path, const mtcrl_config* config, const char* out_dir,
                           char** summary) {
  return guarded([&] {
    require(checkpoint_path != nullptr && config != nullptr && out_dir != nullptr,
            "checkpoint, config and out_dir are required");
    std::string hash;
    mtcrl::ModularModel model = mtcrl::load_checkpoint(checkpoint_path, &hash);
    mtcrl::SplitData data = mtcrl::load_dataset(config->config);
    if (data.test.dim() != model.spec().input_dim || data.test.tasks() != model.tasks()) {
      throw mtcrl::DataError("checkpoint does not match the configured dataset");
    }
    fs::path dir(out_dir);
    mtcrl::RunReport r;
    r.config_hash = hash;
    r.seed = config->config.seed;
    r.mode = "analyze";
    r.dataset = std::string(mtcrl::dataset_kind_name(config->config.dataset));
    r.tasks = model.tasks();
    mtcrl::evaluate_into(model, data, config->config, r);
    write_saliency(dir, "saliency", r, config->config);
    mtcrl::write_text_file(dir / "similarity.csv", mtcrl::matrix_csv(r.similarity, "task", "task"));
    mtcrl::write_text_file(dir / "routing.csv", mtcrl::matrix_csv(r.routing, "task", "module"));

    auto envs = mtcrl::split_environments(data.train, data.valid);
    mtcrl::TaskModuleGradients tmg = mtcrl::task_module_gradients(model, envs);
    mtcrl::write_text_file(dir / "task_module_grad_train.csv", mtcrl::matrix_csv(tmg.per_env[0], "task", "module"));
    mtcrl::write_text_file(dir / "task_module_grad_valid.csv", mtcrl::matrix_csv(tmg.per_env[1], "task", "module"));
    mtcrl::write_text_file(dir / "task_module_grad_diff.csv", mtcrl::matrix_csv(tmg.difference, "task", "module"));
    mtcrl::SvgOptions diff_svg;
    double peak = 0;
    for (double v : tmg.difference.values()) peak = std::max(peak, std::abs(v));
    diff_svg.max_abs = peak > 0 ? peak : 1.0;
    diff_svg.cell_px = 24;
    mtcrl::write_text_file(dir / "task_module_grad_diff.svg", mtcrl::heatmap_svg(tmg.difference, diff_svg));

    write_corr(dir, model, data);

    json j = mtcrl::report_to_json(r, false);
    j.erase("history");
    j["task_module_grad_diff"] = json::array();
    for (std::size_t t = 0; t < tmg.difference.rows(); ++t) {
      std::vector<double> row;
      for (std::size_t i = 0; i < tmg.difference.cols(); ++i) row.push_back(tmg.difference.at(t, i));
      j["task_module_grad_diff"].push_back(row);
    }
    write_json(dir / "analysis.json", j);
    if (summary != nullptr) *summary = dup_string(j.dump(2));
  });
}

}  // extern "C"
