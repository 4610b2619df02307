// Copyright 2026 The DLG Authors.
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

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "dlg/dlg.hpp"

namespace fs = std::filesystem;

namespace {

// Flag > DLG_RUNS_DIR > "runs".
std::string resolve_runs_dir(const std::string& flag_value) {
  if (!flag_value.empty()) return flag_value;
  if (const char* env = std::getenv("DLG_RUNS_DIR"); env && *env) return env;
  return "runs";
}

// TrainConfig fields exposed as CLI overrides; values land on top of the
// config file.
struct ConfigOverrides {
  std::map<std::string, std::string> values;

  void attach(CLI::App* cmd) {
    static const char* keys[] = {
        "method",       "alpha",         "combiner",   "alpha_d",
        "lr",           "epochs",        "batch_size", "tau",
        "K",            "seed",          "ablation",   "ld_form",
        "detach_qv_target", "layers",    "hidden_dim", "activation",
        "scorer_hidden", "scorer_out",   "validation_fraction",
        "warmup_epochs"};
    for (const char* key : keys) {
      cmd->add_option("--" + std::string(key), values[key]);
    }
  }

  void apply(dlg::TrainConfig& cfg, dlg::BiasSpec& spec) const {
    for (const auto& [key, value] : values) {
      if (value.empty()) continue;
      if (dlg::apply_train_config_field(cfg, key, value)) continue;
      if (dlg::apply_bias_spec_field(spec, key, value)) continue;
      throw dlg::ParameterError("unknown config field '" + key + "'");
    }
  }
};

void load_config_file(const std::string& path, dlg::TrainConfig& cfg,
                      dlg::BiasSpec& spec) {
  if (path.empty()) return;
  dlg::apply_config(dlg::parse_kv_file(path), cfg, spec);
}

dlg::Dataset load_split(const std::string& data_dir, const char* name) {
  fs::path p = fs::path(data_dir) / (std::string(name) + ".jsonl");
  return dlg::load_dataset(p.string());
}

void print_metrics(const dlg::Metrics& m) {
  std::cout << "accuracy = " << dlg::to_shortest(m.accuracy) << "\n";
  std::cout << "per_class_accuracy =";
  for (double v : m.per_class_accuracy) std::cout << " " << dlg::to_shortest(v);
  std::cout << "\nconfusion:\n";
  for (const auto& row : m.confusion) {
    for (std::size_t i = 0; i < row.size(); ++i) {
      std::cout << (i ? " " : "") << row[i];
    }
    std::cout << "\n";
  }
}

std::vector<dlg::Method> parse_methods(const std::string& csv) {
  std::vector<dlg::Method> out;
  for (const std::string& tok : dlg::split(csv, ',')) {
    if (!tok.empty()) out.push_back(dlg::parse_method(tok));
  }
  if (out.empty()) throw dlg::ParameterError("no methods given");
  return out;
}

std::vector<double> parse_biases(const std::string& csv) {
  std::vector<double> out;
  for (const std::string& tok : dlg::split(csv, ',')) {
    if (!tok.empty()) out.push_back(dlg::parse_bias_value(tok));
  }
  if (out.empty()) throw dlg::ParameterError("no biases given");
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Training and evaluation harness for consistency-driven "
               "graph OOD generalization"};
  app.require_subcommand(1);

  // --- generate ---
  auto* gen = app.add_subcommand("generate", "Write synthetic dataset files");
  std::string gen_family = "spmotif", gen_bias = "0.333", gen_out = "data";
  int gen_train = 600, gen_test = 300, gen_dx = 4;
  std::uint64_t gen_seed = 0;
  gen->add_option("--family", gen_family, "spmotif | tpg");
  gen->add_option("--bias", gen_bias, "bias degree (0.333 means 1/3)");
  gen->add_option("--train", gen_train, "training graphs");
  gen->add_option("--test", gen_test, "test graphs");
  gen->add_option("--seed", gen_seed, "generator seed");
  gen->add_option("--feature-dim", gen_dx, "node feature dimension");
  gen->add_option("--out", gen_out, "output directory");

  // --- train ---
  auto* tr = app.add_subcommand("train", "Train one model and persist a run");
  std::string tr_config, tr_data = "data", tr_runs, tr_run_id, tr_resume;
  bool tr_force = false;
  tr->add_option("--config", tr_config, "key-value config file");
  tr->add_option("--data", tr_data, "directory with train.jsonl/test.jsonl");
  tr->add_option("--runs", tr_runs, "runs directory");
  tr->add_option("--run-id", tr_run_id, "override the derived run id");
  tr->add_option("--resume", tr_resume, "checkpoint to continue from");
  tr->add_flag("--force", tr_force, "retrain even if a cached run exists");
  ConfigOverrides tr_over;
  tr_over.attach(tr);

  // --- eval ---
  auto* ev = app.add_subcommand("eval", "Evaluate a checkpoint on a dataset");
  std::string ev_ckpt, ev_data;
  ev->add_option("--checkpoint", ev_ckpt)->required();
  ev->add_option("--data", ev_data, "dataset file")->required();

  // --- ablate ---
  auto* ab = app.add_subcommand(
      "ablate", "Train DLG, DLG w/o L_d, DLG w/o L_c and ERM on shared data");
  std::string ab_config, ab_data = "data", ab_runs, ab_name = "ablation";
  int ab_seeds = 3, ab_jobs = 1;
  std::string ab_reports = "reports";
  ab->add_option("--config", ab_config);
  ab->add_option("--data", ab_data, "directory with train.jsonl/test.jsonl");
  ab->add_option("--seeds", ab_seeds, "number of seeds (base_seed + i)");
  ab->add_option("--jobs", ab_jobs, "parallel runs");
  ab->add_option("--runs", ab_runs, "runs directory");
  ab->add_option("--name", ab_name, "report name");
  ab->add_option("--reports", ab_reports, "reports directory");
  ConfigOverrides ab_over;
  ab_over.attach(ab);

  // --- sweep ---
  auto* sw = app.add_subcommand("sweep",
                                "Bias sweep: methods x biases x seeds");
  std::string sw_config, sw_family = "spmotif", sw_runs;
  std::string sw_biases = "0.333,0.5,0.7,0.9", sw_methods = "erm,dlg";
  std::string sw_name = "sweep", sw_reports = "reports";
  int sw_seeds = 3, sw_jobs = 1, sw_train = 600, sw_test = 300, sw_dx = 4;
  sw->add_option("--config", sw_config);
  sw->add_option("--family", sw_family, "spmotif | tpg");
  sw->add_option("--biases", sw_biases, "comma-separated bias degrees");
  sw->add_option("--methods", sw_methods, "comma-separated: erm,dlg");
  sw->add_option("--seeds", sw_seeds);
  sw->add_option("--jobs", sw_jobs, "parallel runs");
  sw->add_option("--train", sw_train, "training graphs per dataset");
  sw->add_option("--test", sw_test, "test graphs per dataset");
  sw->add_option("--feature-dim", sw_dx);
  sw->add_option("--runs", sw_runs, "runs directory");
  sw->add_option("--name", sw_name, "report name");
  sw->add_option("--reports", sw_reports, "reports directory");
  ConfigOverrides sw_over;
  sw_over.attach(sw);

  // --- extract ---
  auto* ex = app.add_subcommand(
      "extract", "Rank invariant-edge mask weights per graph as CSV");
  std::string ex_ckpt, ex_data, ex_out = "extract.csv";
  double ex_threshold = -1.0;
  ex->add_option("--checkpoint", ex_ckpt)->required();
  ex->add_option("--data", ex_data, "dataset file")->required();
  ex->add_option("--out", ex_out, "output CSV path");
  ex->add_option("--hard-threshold", ex_threshold,
                 "keep only pairs with mask_prob >= threshold");

  // --- report ---
  auto* rp = app.add_subcommand("report",
                                "Fold persisted runs into tables");
  std::string rp_runs, rp_name = "report", rp_reports = "reports";
  rp->add_option("--runs", rp_runs, "runs directory");
  rp->add_option("--name", rp_name, "report name");
  rp->add_option("--reports", rp_reports, "reports directory");

  CLI11_PARSE(app, argc, argv);

  try {
    if (gen->parsed()) {
      dlg::BiasSpec spec;
      spec.family = dlg::parse_family(gen_family);
      spec.bias = dlg::parse_bias_value(gen_bias);
      spec.train_size = gen_train;
      spec.test_size = gen_test;
      spec.feature_dim = gen_dx;
      dlg::Rng rng(gen_seed);
      dlg::GeneratedPair pair = dlg::generate(spec, rng);
      fs::create_directories(gen_out);
      const std::string train_path = (fs::path(gen_out) / "train.jsonl").string();
      const std::string test_path = (fs::path(gen_out) / "test.jsonl").string();
      dlg::save_dataset(pair.train.data, train_path);
      dlg::save_dataset(pair.test.data, test_path);
      std::cout << "wrote " << train_path << " (" << pair.train.data.size()
                << " graphs)\n";
      std::cout << "wrote " << test_path << " (" << pair.test.data.size()
                << " graphs)\n";
      return 0;
    }

    if (tr->parsed()) {
      const std::string runs_dir = resolve_runs_dir(tr_runs);
      dlg::Dataset train_ds = load_split(tr_data, "train");
      dlg::Dataset test_ds = load_split(tr_data, "test");

      if (!tr_resume.empty()) {
        dlg::TrainState st = dlg::load_checkpoint(tr_resume);
        auto [train_split, valid_split] = dlg::split_train_validation(
            train_ds, st.config.validation_fraction, st.config.seed);
        dlg::train_epochs(st, train_split, valid_split);
        dlg::TrainedModel model = dlg::finalize(st);
        dlg::Metrics m = dlg::evaluate(model, test_ds);
        const std::string out_id =
            tr_run_id.empty() ? "resumed" : tr_run_id;
        fs::create_directories(fs::path(runs_dir) / out_id);
        dlg::save_checkpoint(
            st, (fs::path(runs_dir) / out_id / "checkpoint.json").string());
        std::cout << "resumed to epoch " << st.epochs_done << "\n";
        print_metrics(m);
        return 0;
      }

      dlg::TrainConfig cfg;
      dlg::BiasSpec spec;
      load_config_file(tr_config, cfg, spec);
      tr_over.apply(cfg, spec);

      dlg::RunRequest req;
      req.config = cfg;
      req.spec = spec;
      req.data_seed = cfg.seed;
      req.train = &train_ds;
      req.test = &test_ds;
      req.runs_dir = runs_dir;
      req.force = tr_force;
      req.run_id = tr_run_id;
      dlg::ExperimentRecord rec = dlg::run_experiment(req);
      std::cout << "run_id = " << rec.run_id << "\n";
      std::cout << "best_epoch = " << rec.best_epoch << "\n";
      std::cout << "test_accuracy = " << dlg::to_shortest(rec.test_accuracy)
                << "\n";
      return 0;
    }

    if (ev->parsed()) {
      dlg::TrainState st = dlg::load_checkpoint(ev_ckpt);
      dlg::TrainedModel model = dlg::finalize(st);
      dlg::Dataset ds = dlg::load_dataset(ev_data);
      print_metrics(dlg::evaluate(model, ds));
      return 0;
    }

    if (ab->parsed()) {
      const std::string runs_dir = resolve_runs_dir(ab_runs);
      dlg::TrainConfig cfg;
      dlg::BiasSpec spec;
      load_config_file(ab_config, cfg, spec);
      ab_over.apply(cfg, spec);
      dlg::Dataset train_ds = load_split(ab_data, "train");
      dlg::Dataset test_ds = load_split(ab_data, "test");
      dlg::AblationResult res = dlg::run_ablation(
          cfg, spec, train_ds, test_ds, ab_seeds, runs_dir, ab_jobs);
      dlg::write_report(res.table, ab_reports, ab_name);
      std::cout << res.table.to_markdown();
      return 0;
    }

    if (sw->parsed()) {
      const std::string runs_dir = resolve_runs_dir(sw_runs);
      dlg::TrainConfig cfg;
      dlg::BiasSpec spec;
      load_config_file(sw_config, cfg, spec);
      sw_over.apply(cfg, spec);
      spec.family = dlg::parse_family(sw_family);
      spec.train_size = sw_train;
      spec.test_size = sw_test;
      spec.feature_dim = sw_dx;
      dlg::SweepResult res = dlg::run_bias_sweep(
          cfg, spec, parse_biases(sw_biases), parse_methods(sw_methods),
          sw_seeds, runs_dir, sw_jobs);
      dlg::write_report(res.table, sw_reports, sw_name);
      std::cout << res.table.to_markdown();
      return 0;
    }

    if (ex->parsed()) {
      dlg::TrainState st = dlg::load_checkpoint(ex_ckpt);
      dlg::TrainedModel model = dlg::finalize(st);
      dlg::Dataset ds = dlg::load_dataset(ex_data);
      std::ofstream out(ex_out, std::ios::binary);
      if (!out) throw dlg::ParseError("cannot open '" + ex_out + "'");
      out << dlg::extract_edge_csv(model, ds, ex_threshold);
      std::cout << "wrote " << ex_out << "\n";
      return 0;
    }

    if (rp->parsed()) {
      const std::string runs_dir = resolve_runs_dir(rp_runs);
      dlg::ReportTable table = dlg::fold_runs(runs_dir, rp_name);
      dlg::write_report(table, rp_reports, rp_name);
      std::cout << table.to_markdown();
      return 0;
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
