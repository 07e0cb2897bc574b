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

// Acceptance gate: one pass/fail line per criterion.
//
//   mtcrl_acceptance [--criterion N]... [--out DIR]
//
// Exit status is 0 when every selected criterion passes.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "analysis/export.hpp"
#include "harness/experiments.hpp"
#include "harness/parallel.hpp"
#include "harness/report.hpp"
#include "harness/trainer.hpp"
#include "oracles/bayes.hpp"
#include "oracles/linear_regression.hpp"
#include "oracles/oracle_check.hpp"
#include "regularizers/regularizers.hpp"
#include "support/op_cases.hpp"
#include "tensor/grad.hpp"
#include "tensor/ops.hpp"

namespace mtcrl {
namespace {

using nlohmann::json;

struct Outcome {
  bool pass = false;
  std::string summary;
  json detail = json::object();
};

struct Criterion {
  int id;
  std::string name;
  double budget_seconds;
  std::function<Outcome()> run;
};

std::string fmt(const char* f, double a) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, a);
  return buf;
}

const std::vector<std::uint64_t> kFiveSeeds{0, 1, 2, 3, 4};

// Multi-SEM: two tasks, 10-dim factors, train/valid/test agreement 0.9/0.7/0.1.
json sem_base() {
  return json::parse(R"({
    "dataset": {"kind": "multisem", "tasks": 2, "d_factor": 10, "mu_norm": 1.5,
                "m_train": 0.9, "m_valid": 0.7, "m_test": 0.1,
                "n_train": 1000, "n_valid": 1000, "n_test": 2000},
    "optimizer": {"kind": "adam", "lr": 0.01},
    "epochs": 300, "patience": 0, "batch_size": 0, "saliency_rows": 2000
  })");
}

// Shared-bottom multi-task network against single-task copies.
TrainConfig shared_bottom_config() {
  json j = sem_base();
  j["mode"] = "mtl-vanilla";
  j["mtl_architecture"] = "shared-bottom";
  j["model"] = {{"modules", 1}, {"module_dim", 16}, {"encoder_hidden", {32}}};
  return config_from_json(j);
}

// Routed K-module model; the regularizer weights were chosen by accuracy on
// the validation environment among configurations with every term enabled.
TrainConfig mtcrl_config() {
  json j = sem_base();
  j["mode"] = "mtcrl";
  j["mtl_architecture"] = "mmoe";
  j["model"] = {{"modules", 4}, {"module_dim", 4}, {"encoder_hidden", {32}}};
  j["weights"] = {{"decor", 0.1}, {"sps", 0.2}, {"bal", 5.0}, {"girm", 500.0}, {"girm_variant", "var"}};
  return config_from_json(j);
}

TrainConfig vanilla_mmoe_config() {
  TrainConfig c = mtcrl_config();
  c.mode = TrainMode::kMtlVanilla;
  return c;
}

TrainConfig with_seed(TrainConfig c, std::uint64_t seed) {
  c.seed = seed;
  return c;
}

std::vector<RunReport> run_seeds(const TrainConfig& c, const std::vector<std::uint64_t>& seeds) {
  return parallel_map<RunReport>(seeds.size(), worker_count(),
                                 [&](std::size_t i) { return train(with_seed(c, seeds[i])); });
}

// 1. First- and second-order gradients against central differences.
Outcome autodiff() {
  std::mt19937_64 rng(20260101);
  const auto& ops = testing::supported_op_cases();
  double worst = 0.0;
  std::string worst_op;
  int failures = 0;
  const int cases = 1000;
  for (int i = 0; i < cases; ++i) {
    const std::string& op = ops[i % ops.size()];
    testing::OpCase c = testing::make_op_case(op, rng);
    double e = finite_diff_check(c.f, c.params).max_rel_error;
    if (e > worst) worst = e, worst_op = op;
    if (!(e < 1e-4)) ++failures;
  }
  double worst2 = 0.0;
  int failures2 = 0;
  const int models = 100;
  for (int i = 0; i < models; ++i) {
    testing::PenaltyCase c = testing::make_penalty_case(rng);
    double e = finite_diff_check(c.penalty, c.params).max_rel_error;
    worst2 = std::max(worst2, e);
    if (!(e < 1e-3)) ++failures2;
  }
  Outcome o;
  o.pass = failures == 0 && failures2 == 0;
  o.summary = std::to_string(cases) + " op cases over " + std::to_string(ops.size()) + " ops, max rel err " +
              fmt("%.2e", worst) + " (" + worst_op + "); " + std::to_string(models) +
              " second-order penalty models, max rel err " + fmt("%.2e", worst2);
  o.detail = {{"first_order_failures", failures}, {"first_order_max_rel_error", worst},
              {"second_order_failures", failures2}, {"second_order_max_rel_error", worst2}};
  return o;
}

// 2. Closed-form oracles against enumeration and numerical solvers.
Outcome oracles() {
  OracleCheckOptions opts;
  opts.seeds = 100;
  auto rows = run_oracle_checks(opts);
  Outcome o;
  o.pass = all_passed(rows);
  int passed = 0;
  for (const auto& r : rows) passed += r.pass();
  o.summary = std::to_string(passed) + "/" + std::to_string(rows.size()) + " oracle checks pass over 100 seeds";
  for (const auto& r : rows) {
    o.detail[r.check] = {{"cases", r.cases}, {"failures", r.failures}, {"max_error", r.max_error},
                         {"tolerance", r.tolerance}};
    if (!r.pass()) o.summary += "; failed " + r.check;
  }
  return o;
}

// 3. A linear multi-task model leans on the other task's factors, and the
// spurious column raises the expected test error.
Outcome spurious_linear_weight() {
  json j = sem_base();
  j["mode"] = "mtl-vanilla";
  j["mtl_architecture"] = "shared-bottom";
  j["model"] = {{"modules", 1}, {"module_dim", 8}, {"encoder_hidden", json::array()},
                {"encoder_output_activation", false}, {"head_hidden", json::array()}};
  TrainConfig c = config_from_json(j);
  RunReport r = train(c);
  double min_mass = 1.0;
  for (double v : r.rho_spur_per_task) min_mass = std::min(min_mass, v);

  GapSpec g;
  g.seed = 7;
  GapResult gap = generalization_gap(g);
  Outcome o;
  o.pass = min_mass > 0.05 && gap.l_s >= gap.l_c;
  o.summary = "non-causal weight mass per task min " + fmt("%.3f", min_mass) + " (> 0.05); L_S " +
              fmt("%.4f", gap.l_s) + " >= L_C " + fmt("%.4f", gap.l_c) + " (gap stderr " +
              fmt("%.4f", gap.gap_stderr) + ")";
  o.detail = {{"noncausal_mass_per_task", r.rho_spur_per_task}, {"l_s", gap.l_s}, {"l_c", gap.l_c},
              {"gap_stderr", gap.gap_stderr}, {"acc_train", r.acc_train}};
  return o;
}

// 4. Single-task models against one shared network under a shifted agreement.
Outcome table2_direction() {
  Table2Result t = run_table2({shared_bottom_config()}, kFiveSeeds, worker_count());
  int rho_higher = 0, acc_lower = 0, both = 0;
  json seeds = json::array();
  for (std::size_t i = 0; i + 1 < t.per_seed.size(); i += 2) {
    const MethodRow& stl = t.per_seed[i];
    const MethodRow& mtl = t.per_seed[i + 1];
    bool rho = mtl.rho_spur > stl.rho_spur, acc = mtl.acc_val < stl.acc_val;
    rho_higher += rho;
    acc_lower += acc;
    both += rho && acc;
    seeds.push_back({{"seed", stl.seed}, {"stl_acc_val", stl.acc_val}, {"mtl_acc_val", mtl.acc_val},
                     {"stl_rho_spur", stl.rho_spur}, {"mtl_rho_spur", mtl.rho_spur}});
  }
  Outcome o;
  o.pass = both >= 4;
  o.summary = "seeds with MTL rho > STL rho and MTL acc < STL acc: " + std::to_string(both) +
              "/5 (rho " + std::to_string(rho_higher) + "/5, acc " + std::to_string(acc_lower) +
              "/5); means STL " + fmt("%.3f", t.summary[0].acc_val) + "/" + fmt("%.3f", t.summary[0].rho_spur) +
              ", MTL " + fmt("%.3f", t.summary[1].acc_val) + "/" + fmt("%.3f", t.summary[1].rho_spur);
  o.detail = {{"per_seed", seeds}, {"both", both}};
  return o;
}

// 5. More tasks sharing one network: more spurious reliance, lower accuracy.
Outcome task_count_trend() {
  SweepResult s = run_task_sweep(shared_bottom_config(), {2, 4, 6, 8}, kFiveSeeds, worker_count());
  Outcome o;
  o.pass = s.rho_rises && s.acc_falls && s.stl_below_mtl_everywhere;
  std::ostringstream ss;
  ss << "spearman(T, MTL rho) " << fmt("%+.2f", s.mtl_rho_trend) << ", spearman(T, MTL acc) "
     << fmt("%+.2f", s.mtl_acc_trend) << ", STL rho < MTL rho at every T: "
     << (s.stl_below_mtl_everywhere ? "yes" : "no") << "; MTL rho by T:";
  json points = json::array();
  for (const auto& p : s.points) {
    ss << " " << fmt("%.3f", mean(p.mtl_rho_spur));
    points.push_back({{"tasks", p.tasks}, {"mtl_acc_val", mean(p.mtl_acc_val)},
                      {"mtl_rho_spur", mean(p.mtl_rho_spur)}, {"stl_acc_val", mean(p.stl_acc_val)},
                      {"stl_rho_spur", mean(p.stl_rho_spur)}});
  }
  o.summary = ss.str();
  o.detail = {{"points", points}, {"mtl_rho_trend", s.mtl_rho_trend}, {"mtl_acc_trend", s.mtl_acc_trend}};
  return o;
}

// 6. Full model against the unregularized routed model, and two ablations.
Outcome efficacy() {
  TrainConfig full = mtcrl_config();
  AblationResult ab = run_ablation(full, kFiveSeeds, worker_count(), {"full", "no-decor", "no-graph-reg", "vanilla"});
  const AblationRow& f = ab.row("full");
  const AblationRow& v = ab.row("vanilla");
  const AblationRow& nd = ab.row("no-decor");
  const AblationRow& ng = ab.row("no-graph-reg");
  int beats = 0, over_nd = 0, over_ng = 0;
  for (std::size_t s = 0; s < kFiveSeeds.size(); ++s) {
    beats += f.acc_val[s] > v.acc_val[s];
    over_nd += f.acc_val[s] > nd.acc_val[s];
    over_ng += f.acc_val[s] > ng.acc_val[s];
  }
  double rho_cut = 1.0 - mean(f.rho_spur) / mean(v.rho_spur);
  Outcome o;
  o.pass = beats >= 4 && rho_cut >= 0.25 && over_nd >= 3 && over_ng >= 3;
  o.summary = "MT-CRL acc > vanilla in " + std::to_string(beats) + "/5 seeds (" + mean_pm_std(f.acc_val) +
              " vs " + mean_pm_std(v.acc_val) + "); mean rho " + fmt("%.3f", mean(f.rho_spur)) + " vs " +
              fmt("%.3f", mean(v.rho_spur)) + " (relative cut " + fmt("%.1f", 100 * rho_cut) +
              "%, need >= 25%); full > no-decor " + std::to_string(over_nd) + "/5 (" + mean_pm_std(nd.acc_val) +
              "), full > no-graph-reg " + std::to_string(over_ng) + "/5 (" + mean_pm_std(ng.acc_val) + ")";
  for (const auto& r : ab.rows) o.detail[r.name] = {{"acc_val", r.acc_val}, {"rho_spur", r.rho_spur}};
  o.detail["rho_relative_cut"] = rho_cut;
  return o;
}

// 7. Graph loss closed form, zero variance penalty, and detached heads.
Outcome regularizer_contracts() {
  int failures = 0;
  double worst_graph = 0.0;
  for (std::size_t t = 1; t <= 8; ++t) {
    for (std::size_t k = 1; k <= 8; ++k) {
      Tape tape;
      Tensor a = tape.parameter(Array(Shape{t, k}, 0.5));
      double expected = 0.2 * static_cast<double>(t * k) / 2.0 - 5.0 * std::log(static_cast<double>(k));
      double err = std::abs(graph_reg_loss(a, 0.2, 5.0).item() - expected);
      worst_graph = std::max(worst_graph, err);
      if (err > 1e-12 * std::max(1.0, std::abs(expected))) ++failures;
    }
  }

  TrainConfig c = mtcrl_config();
  c.sem.n_train = 200;
  c.sem.n_valid = 200;
  c.sem.n_test = 10;
  SplitData data = load_dataset(c);
  double var_identical = 0.0, head_grad = 0.0, theta_grad = 0.0;
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    ModularModel model(c.model_spec(data.train.dim(), {1, 1}), seed);
    Array& theta = model.parameters()[model.theta_index()].value;
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> u(-2.0, 2.0);
    for (double& v : theta.values()) v = u(rng);

    auto twice = split_environments(data.train, data.train);
    StepOptions opts{c.weights, true};
    var_identical = std::max(var_identical, compute_step_gradients(model, {}, twice, opts).metrics.penalty);

    auto envs = split_environments(data.train, data.valid);
    for (GirmVariant v : {GirmVariant::kVar, GirmVariant::kNorm}) {
      opts.weights.girm_variant = v;
      StepGradients g = compute_step_gradients(model, {}, envs, opts);
      for (std::size_t i = 0; i < g.penalty.size(); ++i) {
        double m = 0.0;
        for (double x : g.penalty[i].values()) m = std::max(m, std::abs(x));
        if (model.parameters()[i].group == ParamGroup::kHead) head_grad = std::max(head_grad, m);
        if (i == model.theta_index()) theta_grad = std::max(theta_grad, m);
      }
    }
  }
  Outcome o;
  o.pass = failures == 0 && var_identical == 0.0 && head_grad == 0.0 && theta_grad > 0.0;
  o.summary = "uniform-A graph loss max err " + fmt("%.1e", worst_graph) + " over T,K in 1..8; G-IRM-Var on identical envs " +
              fmt("%.1e", var_identical) + "; max |penalty grad| on heads " + fmt("%.1e", head_grad) +
              " (theta " + fmt("%.2e", theta_grad) + ")";
  o.detail = {{"graph_failures", failures}, {"var_identical", var_identical}, {"head_grad", head_grad},
              {"theta_grad", theta_grad}};
  return o;
}

// 8. Cross-module correlation with and without the decorrelation term.
Outcome disentanglement() {
  const std::vector<std::uint64_t> seeds{0, 1, 2};
  TrainConfig no_decor = mtcrl_config();
  no_decor.weights.lambda_decor = 0.0;
  auto with = run_seeds(mtcrl_config(), seeds);
  auto without = run_seeds(no_decor, seeds);
  auto vanilla = run_seeds(vanilla_mmoe_config(), seeds);
  auto corr = [](const std::vector<RunReport>& rs, bool test) {
    std::vector<double> v;
    for (const auto& r : rs) v.push_back(test ? r.max_cross_module_corr_test : r.max_cross_module_corr);
    return v;
  };
  auto cw = corr(with, false), cn = corr(without, false), cv = corr(vanilla, false);
  double worst = *std::max_element(cw.begin(), cw.end());
  Outcome o;
  o.pass = worst < 0.1 && mean(cn) >= 0.3;
  o.summary = "training-split max cross-module |corr|: MT-CRL max " + fmt("%.3f", worst) + " (< 0.1), no-decor mean " +
              fmt("%.3f", mean(cn)) + " (>= 0.3), vanilla mean " + fmt("%.3f", mean(cv)) +
              "; on the shifted test split MT-CRL mean " + fmt("%.3f", mean(corr(with, true)));
  o.detail = {{"mtcrl_train", cw}, {"no_decor_train", cn}, {"vanilla_train", cv},
              {"mtcrl_test", corr(with, true)}, {"no_decor_test", corr(without, true)},
              {"vanilla_test", corr(vanilla, true)}};
  return o;
}

// 9. Same config and seed, same report.
Outcome determinism() {
  TrainConfig c = mtcrl_config();
  c.sem.n_train = 300;
  c.sem.n_valid = 300;
  c.sem.n_test = 300;
  c.epochs = 40;
  c.batch_size = 64;
  c.seed = 11;
  std::string a = report_to_json(train(c), false).dump();
  std::string b = report_to_json(train(c), false).dump();
  TrainConfig d = c;
  d.seed = 12;
  std::string other = report_to_json(train(d), false).dump();
  Outcome o;
  o.pass = a == b && a != other;
  o.summary = std::string("identical reports for equal seeds: ") + (a == b ? "yes" : "no") +
              "; different seed changes the report: " + (a != other ? "yes" : "no") + " (" +
              std::to_string(a.size()) + " bytes)";
  return o;
}

std::vector<Criterion> criteria() {
  return {
      {1, "autodiff", 60, autodiff},
      {2, "oracles", 60, oracles},
      {3, "spurious-linear-weight", 120, spurious_linear_weight},
      {4, "table2-direction", 600, table2_direction},
      {5, "task-count-trend", 1200, task_count_trend},
      {6, "mtcrl-efficacy", 1800, efficacy},
      {7, "regularizer-contracts", 10, regularizer_contracts},
      {8, "disentanglement", 300, disentanglement},
      {9, "determinism", 120, determinism},
  };
}

}  // namespace
}  // namespace mtcrl

int main(int argc, char** argv) {
  CLI::App app{"Acceptance criteria"};
  std::vector<int> selected;
  std::string out;
  app.add_option("--criterion", selected, "Criterion number (repeatable); default all")->check(CLI::Range(1, 9));
  app.add_option("--out", out, "Directory for per-criterion JSON results");
  CLI11_PARSE(app, argc, argv);

  bool all_pass = true;
  for (const auto& c : mtcrl::criteria()) {
    if (!selected.empty() && std::find(selected.begin(), selected.end(), c.id) == selected.end()) continue;
    auto start = std::chrono::steady_clock::now();
    mtcrl::Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o.pass = false;
      o.summary = std::string("error: ") + e.what();
    }
    double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    bool in_budget = secs < c.budget_seconds;
    bool pass = o.pass && in_budget;
    all_pass = all_pass && pass;
    std::printf("criterion %d [%s]: %s  %s  (%.1fs of %.0fs budget)\n", c.id, c.name.c_str(), pass ? "PASS" : "FAIL",
                o.summary.c_str(), secs, c.budget_seconds);
    std::fflush(stdout);
    if (!out.empty()) {
      nlohmann::json j{{"criterion", c.id}, {"name", c.name}, {"pass", pass}, {"summary", o.summary},
                       {"seconds", secs}, {"budget_seconds", c.budget_seconds}, {"detail", o.detail}};
      mtcrl::write_text_file(std::filesystem::path(out) / ("criterion_" + std::to_string(c.id) + ".json"),
                             j.dump(2) + "\n");
    }
  }
  return all_pass ? 0 : 1;
}
