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

// Command-line front end. Talks to the library only through the C API.

#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "mtcrl/mtcrl.h"

namespace {

using nlohmann::json;

constexpr int kExitOk = 0;
constexpr int kExitFailure = 1;
constexpr int kExitUsage = 2;

struct UsageError {
  std::string message;
};

struct ConfigDeleter {
  void operator()(mtcrl_config* c) const { mtcrl_config_free(c); }
};
using ConfigPtr = std::unique_ptr<mtcrl_config, ConfigDeleter>;

struct RunDeleter {
  void operator()(mtcrl_run* r) const { mtcrl_run_free(r); }
};
using RunPtr = std::unique_ptr<mtcrl_run, RunDeleter>;

// Takes ownership of a library string.
std::string take(char* s) {
  if (s == nullptr) return {};
  std::string out(s);
  mtcrl_string_free(s);
  return out;
}

struct RunFailure {
  std::string command;
  mtcrl_status status;
};

void check(mtcrl_status status, const std::string& command) {
  if (status != MTCRL_OK) throw RunFailure{command, status};
}

struct Common {
  std::vector<std::string> configs;
  std::optional<std::uint64_t> seed;
  std::string out = "out";
};

void add_common(CLI::App* cmd, Common& c, bool many_configs = false) {
  if (many_configs) {
    cmd->add_option("--config", c.configs, "JSON config path (repeat for several datasets)");
  } else {
    cmd->add_option("--config", c.configs, "JSON config path")->expected(1);
  }
  cmd->add_option("--seed", c.seed, "Run seed (base seed for multi-seed commands)");
  cmd->add_option("--out", c.out, "Output directory")->capture_default_str();
}

// Loads the config at `path`, or the built-in defaults when empty.
ConfigPtr load(const std::string& path, std::optional<std::uint64_t> seed) {
  mtcrl_config* raw = nullptr;
  mtcrl_status s = path.empty() ? mtcrl_config_parse("{}", &raw) : mtcrl_config_load(path.c_str(), &raw);
  if (s != MTCRL_OK) throw UsageError{std::string("cannot load config: ") + mtcrl_last_error()};
  ConfigPtr c(raw);
  if (seed) check(mtcrl_config_set_seed(c.get(), *seed), "config");
  return c;
}

ConfigPtr load_required(const Common& c) {
  if (c.configs.empty()) throw UsageError{"--config is required"};
  return load(c.configs.front(), c.seed);
}

std::vector<std::uint64_t> seed_range(const Common& c, std::size_t n) {
  std::vector<std::uint64_t> seeds;
  std::uint64_t base = c.seed.value_or(0);
  for (std::size_t i = 0; i < n; ++i) seeds.push_back(base + i);
  return seeds;
}

int cmd_gen_data(const Common& c, bool csv) {
  ConfigPtr cfg = load_required(c);
  check(mtcrl_gen_data(cfg.get(), c.out.c_str(), csv ? 1 : 0), "gen-data");
  std::cout << "wrote dataset to " << c.out << "\n";
  return kExitOk;
}

int cmd_train(const Common& c) {
  ConfigPtr cfg = load_required(c);
  mtcrl_run* raw = nullptr;
  check(mtcrl_train(cfg.get(), &raw), "train");
  RunPtr run(raw);
  check(mtcrl_run_write_artifacts(run.get(), c.out.c_str()), "train");
  double acc = 0, rho = 0, epochs = 0;
  check(mtcrl_run_metric(run.get(), "acc_val", &acc), "train");
  check(mtcrl_run_metric(run.get(), "rho_spur", &rho), "train");
  check(mtcrl_run_metric(run.get(), "epochs_run", &epochs), "train");
  std::printf("epochs %d  acc_val %.4f  rho_spur %.4f  -> %s\n", static_cast<int>(epochs), acc, rho,
              c.out.c_str());
  return kExitOk;
}

int cmd_table2(const Common& c, std::size_t n_seeds) {
  std::vector<ConfigPtr> owned;
  if (c.configs.empty()) {
    owned.push_back(load("", c.seed));
  } else {
    for (const auto& p : c.configs) owned.push_back(load(p, c.seed));
  }
  std::vector<const mtcrl_config*> ptrs;
  for (const auto& o : owned) ptrs.push_back(o.get());
  auto seeds = seed_range(c, n_seeds);
  char* summary = nullptr;
  check(mtcrl_table2(ptrs.data(), ptrs.size(), seeds.data(), seeds.size(), c.out.c_str(), &summary),
        "table2");
  json j = json::parse(take(summary));
  for (const auto& r : j["rows"]) {
    std::printf("%-4s %-10s acc_train %.3f  acc_val %.3f  rho_spur %.3f\n",
                r["method"].get<std::string>().c_str(), r["dataset"].get<std::string>().c_str(),
                r["acc_train"].get<double>(), r["acc_val"].get<double>(), r["rho_spur"].get<double>());
  }
  return kExitOk;
}

std::vector<std::size_t> parse_tasks(const std::string& text) {
  std::vector<std::size_t> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      std::size_t pos = 0;
      long v = std::stol(item, &pos);
      if (pos != item.size() || v < 1) throw std::invalid_argument(item);
      out.push_back(static_cast<std::size_t>(v));
    } catch (const std::exception&) {
      throw UsageError{"--tasks expects a comma-separated list of positive integers"};
    }
  }
  if (out.empty()) throw UsageError{"--tasks must not be empty"};
  return out;
}

int cmd_sweep(const Common& c, std::size_t n_seeds, const std::string& tasks) {
  auto counts = parse_tasks(tasks);
  ConfigPtr cfg = load(c.configs.empty() ? "" : c.configs.front(), c.seed);
  auto seeds = seed_range(c, n_seeds);
  char* summary = nullptr;
  check(mtcrl_sweep_tasks(cfg.get(), counts.data(), counts.size(), seeds.data(), seeds.size(),
                          c.out.c_str(), &summary),
        "sweep-tasks");
  json j = json::parse(take(summary));
  for (const auto& p : j["points"]) {
    std::printf("T=%-3zu mtl acc %.3f rho %.3f | stl acc %.3f rho %.3f\n", p["tasks"].get<std::size_t>(),
                p["mtl_acc_val"].get<double>(), p["mtl_rho_spur"].get<double>(),
                p["stl_acc_val"].get<double>(), p["stl_rho_spur"].get<double>());
  }
  return kExitOk;
}

int cmd_ablate(const Common& c, std::size_t n_seeds) {
  ConfigPtr cfg = load(c.configs.empty() ? "" : c.configs.front(), c.seed);
  auto seeds = seed_range(c, n_seeds);
  char* summary = nullptr;
  check(mtcrl_ablate(cfg.get(), seeds.data(), seeds.size(), c.out.c_str(), &summary), "ablate");
  json j = json::parse(take(summary));
  for (const auto& r : j["rows"]) {
    std::printf("%-13s acc_val %s  rho_spur %s\n", r["variant"].get<std::string>().c_str(),
                r["acc_val_summary"].get<std::string>().c_str(),
                r["rho_spur_summary"].get<std::string>().c_str());
  }
  return kExitOk;
}

int cmd_oracle_check(const Common& c, std::size_t n_seeds) {
  if (!c.configs.empty()) load(c.configs.front(), c.seed);
  int passed = 0;
  char* csv = nullptr;
  check(mtcrl_oracle_check(static_cast<int>(n_seeds), c.seed.value_or(0), c.out.c_str(), &passed, &csv),
        "oracle-check");
  std::cout << take(csv);
  return passed ? kExitOk : kExitFailure;
}

int cmd_analyze(const Common& c, const std::string& checkpoint) {
  ConfigPtr cfg = load_required(c);
  if (checkpoint.empty()) throw UsageError{"--checkpoint is required"};
  char* summary = nullptr;
  check(mtcrl_analyze(checkpoint.c_str(), cfg.get(), c.out.c_str(), &summary), "analyze");
  json j = json::parse(take(summary));
  std::printf("acc_val %.4f  rho_spur %.4f  max_cross_module_corr %.4f -> %s\n", j["acc_val"].get<double>(),
              j["rho_spur"].get<double>(), j["max_cross_module_corr"].get<double>(), c.out.c_str());
  return kExitOk;
}

void report_failure(const RunFailure& f, const std::string& out_dir) {
  json j;
  try {
    j = json::parse(take(mtcrl_last_error_json()));
  } catch (const json::exception&) {
    j = {{"message", mtcrl_last_error()}};
  }
  j["command"] = f.command;
  j["status"] = mtcrl_status_name(f.status);
  std::string text = j.dump(2);
  std::cerr << text << "\n";
  std::error_code ec;
  std::filesystem::create_directories(out_dir, ec);
  if (!ec) std::ofstream(std::filesystem::path(out_dir) / "error.json") << text << "\n";
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Multi-task causal representation learning toolkit"};
  app.require_subcommand(1);
  app.set_version_flag("--version", mtcrl_version());

  Common gen, train, table2, sweep, ablate, oracle, analyze;
  bool csv = false;
  std::size_t table2_seeds = 5, sweep_seeds = 5, ablate_seeds = 5, oracle_seeds = 100;
  std::string tasks = "2,4,6,8";
  std::string checkpoint;

  auto* c_gen = app.add_subcommand("gen-data", "Generate a dataset and write its splits");
  add_common(c_gen, gen);
  c_gen->add_flag("--csv", csv, "Also write CSV copies of each split");

  auto* c_train = app.add_subcommand("train", "Train one model and write its report and artifacts");
  add_common(c_train, train);

  auto* c_table2 = app.add_subcommand("table2", "Single-task vs multi-task comparison");
  add_common(c_table2, table2, true);
  c_table2->add_option("--seeds", table2_seeds, "Number of seeds")->capture_default_str()->check(CLI::PositiveNumber);

  auto* c_sweep = app.add_subcommand("sweep-tasks", "Sweep the number of tasks");
  add_common(c_sweep, sweep);
  c_sweep->add_option("--seeds", sweep_seeds, "Number of seeds")->capture_default_str()->check(CLI::PositiveNumber);
  c_sweep->add_option("--tasks", tasks, "Comma-separated task counts")->capture_default_str();

  auto* c_ablate = app.add_subcommand("ablate", "Regularizer ablation");
  add_common(c_ablate, ablate);
  c_ablate->add_option("--seeds", ablate_seeds, "Number of seeds")->capture_default_str()->check(CLI::PositiveNumber);

  auto* c_oracle = app.add_subcommand("oracle-check", "Check analytic oracles against numerical solutions");
  add_common(c_oracle, oracle);
  c_oracle->add_option("--seeds", oracle_seeds, "Random cases per check")->capture_default_str()->check(CLI::PositiveNumber);

  auto* c_analyze = app.add_subcommand("analyze", "Diagnostics for a saved checkpoint");
  add_common(c_analyze, analyze);
  c_analyze->add_option("--checkpoint", checkpoint, "Checkpoint written by train");

  try {
    app.parse(argc, argv);
  } catch (const CLI::Success& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    if (e.get_exit_code() != 0) {
      std::cerr << app.help();
      return kExitUsage;
    }
    return kExitOk;
  }

  CLI::App* active = app.get_subcommands().front();
  const Common* common = nullptr;
  try {
    if (active == c_gen) return (common = &gen), cmd_gen_data(gen, csv);
    if (active == c_train) return (common = &train), cmd_train(train);
    if (active == c_table2) return (common = &table2), cmd_table2(table2, table2_seeds);
    if (active == c_sweep) return (common = &sweep), cmd_sweep(sweep, sweep_seeds, tasks);
    if (active == c_ablate) return (common = &ablate), cmd_ablate(ablate, ablate_seeds);
    if (active == c_oracle) return (common = &oracle), cmd_oracle_check(oracle, oracle_seeds);
    if (active == c_analyze) return (common = &analyze), cmd_analyze(analyze, checkpoint);
  } catch (const UsageError& e) {
    std::cerr << "error: " << e.message << "\n\n" << active->help();
    return kExitUsage;
  } catch (const RunFailure& f) {
    report_failure(f, common != nullptr ? common->out : "out");
    return kExitFailure;
  } catch (const std::exception& e) {
    std::cerr << json{{"status", "internal_error"}, {"message", e.what()}}.dump(2) << "\n";
    return kExitFailure;
  }
  return kExitUsage;
}
