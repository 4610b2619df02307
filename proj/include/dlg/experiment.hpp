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

#pragma once

#include <algorithm>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>
#include <mutex>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "dlg/checkpoint.hpp"
#include "dlg/config.hpp"
#include "dlg/dataset_io.hpp"
#include "dlg/generate.hpp"
#include "dlg/modifier.hpp"
#include "dlg/trainer.hpp"

namespace dlg {

// Display name of a trained variant: the method, with the ablation spelled
// out for ablated runs.
inline std::string variant_name(const TrainConfig& cfg) {
  if (cfg.method == Method::Erm) return "erm";
  switch (cfg.ablation) {
    case AblationMode::None: return "dlg";
    case AblationMode::NoLd: return "dlg_wo_Ld";
    case AblationMode::NoLc: return "dlg_wo_Lc";
  }
  return "dlg";
}

inline std::string variant_display(const std::string& name) {
  if (name == "dlg") return "DLG";
  if (name == "dlg_wo_Ld") return "DLG w/o L_d";
  if (name == "dlg_wo_Lc") return "DLG w/o L_c";
  if (name == "erm") return "ERM";
  return name;
}

// Everything needed to reproduce and report one run.
struct ExperimentRecord {
  std::string run_id;
  TrainConfig config;
  BiasSpec spec;
  std::uint64_t data_seed = 0;
  std::string train_data_hash;
  std::string test_data_hash;
  std::string config_hash;
  int best_epoch = -1;
  double best_val_acc = -1.0;
  double test_accuracy = 0.0;
  std::vector<double> per_class_accuracy;
  std::vector<std::vector<int>> confusion;
  std::vector<EpochStats> history;
  double duration_seconds = 0.0;
};

inline std::string record_to_text(const ExperimentRecord& r) {
  std::ostringstream out;
  out << "run_id = " << r.run_id << "\n";
  out << "variant = " << variant_name(r.config) << "\n";
  for (const auto& [k, v] : train_config_kv(r.config)) {
    out << k << " = " << v << "\n";
  }
  for (const auto& [k, v] : bias_spec_kv(r.spec)) {
    out << k << " = " << v << "\n";
  }
  out << "data_seed = " << r.data_seed << "\n";
  out << "train_data_hash = " << r.train_data_hash << "\n";
  out << "test_data_hash = " << r.test_data_hash << "\n";
  out << "config_hash = " << r.config_hash << "\n";
  out << "best_epoch = " << r.best_epoch << "\n";
  out << "best_val_acc = " << to_shortest(r.best_val_acc) << "\n";
  out << "test_accuracy = " << to_shortest(r.test_accuracy) << "\n";
  out << "per_class_accuracy =";
  for (double v : r.per_class_accuracy) out << " " << to_shortest(v);
  out << "\n";
  out << "confusion =";
  for (const auto& row : r.confusion) {
    for (int v : row) out << " " << v;
    out << " ;";
  }
  out << "\n";
  out << "duration_seconds = " << to_shortest(r.duration_seconds) << "\n";
  for (std::size_t e = 0; e < r.history.size(); ++e) {
    const EpochStats& h = r.history[e];
    out << "history." << e << " = " << to_shortest(h.ld) << ","
        << to_shortest(h.lc) << "," << to_shortest(h.combined) << ","
        << to_shortest(h.train_acc) << "," << to_shortest(h.val_acc) << "\n";
  }
  return out.str();
}

inline ExperimentRecord record_from_text(const std::string& text,
                                         const std::string& origin) {
  ExperimentRecord r;
  std::map<std::size_t, EpochStats> history;
  std::istringstream in(text);
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    std::string_view sv = trim(line);
    if (sv.empty() || sv.front() == '#') continue;
    auto eq = sv.find('=');
    if (eq == std::string_view::npos) {
      throw ParseError(origin + ": line " + std::to_string(line_no) +
                       ": expected 'key = value'");
    }
    std::string key(trim(sv.substr(0, eq)));
    std::string value(trim(sv.substr(eq + 1)));
    if (key == "run_id") r.run_id = value;
    else if (key == "variant") continue;  // derived from config
    else if (apply_train_config_field(r.config, key, value)) continue;
    else if (apply_bias_spec_field(r.spec, key, value)) continue;
    else if (key == "data_seed") r.data_seed = static_cast<std::uint64_t>(parse_int(value));
    else if (key == "train_data_hash") r.train_data_hash = value;
    else if (key == "test_data_hash") r.test_data_hash = value;
    else if (key == "config_hash") r.config_hash = value;
    else if (key == "best_epoch") r.best_epoch = static_cast<int>(parse_int(value));
    else if (key == "best_val_acc") r.best_val_acc = parse_double(value);
    else if (key == "test_accuracy") r.test_accuracy = parse_double(value);
    else if (key == "duration_seconds") r.duration_seconds = parse_double(value);
    else if (key == "per_class_accuracy") {
      for (const std::string& tok : split(value, ' ')) {
        if (!tok.empty()) r.per_class_accuracy.push_back(parse_double(tok));
      }
    } else if (key == "confusion") {
      std::vector<int> row;
      for (const std::string& tok : split(value, ' ')) {
        if (tok == ";") {
          r.confusion.push_back(row);
          row.clear();
        } else if (!tok.empty()) {
          row.push_back(static_cast<int>(parse_int(tok)));
        }
      }
    } else if (key.rfind("history.", 0) == 0) {
      std::size_t idx = static_cast<std::size_t>(parse_int(key.substr(8)));
      auto parts = split(value, ',');
      if (parts.size() != 5) {
        throw ParseError(origin + ": line " + std::to_string(line_no) +
                         ": history entry needs 5 fields");
      }
      EpochStats e;
      e.ld = parse_double(parts[0]);
      e.lc = parse_double(parts[1]);
      e.combined = parse_double(parts[2]);
      e.train_acc = parse_double(parts[3]);
      e.val_acc = parse_double(parts[4]);
      history[idx] = e;
    } else {
      throw ParseError(origin + ": line " + std::to_string(line_no) +
                       ": unknown field '" + key + "'");
    }
  }
  r.history.resize(history.size());
  for (const auto& [idx, e] : history) {
    if (idx >= r.history.size()) {
      throw ParseError(origin + ": non-contiguous history indices");
    }
    r.history[idx] = e;
  }
  return r;
}

// One run request: train on `train` (with a carved validation split), test on
// `test`, persist metrics/record/checkpoint under runs_dir/run_id.
struct RunRequest {
  TrainConfig config;
  BiasSpec spec;
  std::uint64_t data_seed = 0;
  const Dataset* train = nullptr;
  const Dataset* test = nullptr;
  std::string runs_dir = "runs";
  bool force = false;
  std::string run_id;  // derived from config+data when empty
};

inline std::string derive_run_id(const TrainConfig& cfg, const BiasSpec& spec,
                                 const std::string& train_hash,
                                 const std::string& test_hash) {
  std::string key = canonical_config_text(cfg, spec) + train_hash + test_hash;
  return variant_name(cfg) + "-" + family_name(spec.family) + bias_label(spec.bias) +
         "-s" + std::to_string(cfg.seed) + "-" + hash_hex(key).substr(0, 10);
}

// Trains (or loads a cached result for) one configuration. A run directory
// whose record carries the same config hash is reused as-is, so reports and
// repeated experiment commands never retrain needlessly.
inline ExperimentRecord run_experiment(const RunRequest& req) {
  if (req.train == nullptr || req.test == nullptr) {
    throw UsageError("run_experiment: datasets are required");
  }
  validate_train_config(req.config);
  const std::string train_text = dataset_to_string(*req.train);
  const std::string test_text = dataset_to_string(*req.test);
  const std::string train_hash = hash_hex(train_text);
  const std::string test_hash = hash_hex(test_text);
  const std::string run_id =
      req.run_id.empty()
          ? derive_run_id(req.config, req.spec, train_hash, test_hash)
          : req.run_id;
  const std::string chash = config_hash(req.config, req.spec);

  namespace fs = std::filesystem;
  const fs::path dir = fs::path(req.runs_dir) / run_id;
  const fs::path record_path = dir / "record.txt";
  if (!req.force && fs::exists(record_path)) {
    std::ifstream in(record_path, std::ios::binary);
    std::ostringstream buf;
    buf << in.rdbuf();
    ExperimentRecord cached = record_from_text(buf.str(), record_path.string());
    if (cached.config_hash == chash && cached.train_data_hash == train_hash &&
        cached.test_data_hash == test_hash) {
      return cached;
    }
  }
  fs::create_directories(dir);

  const auto t0 = std::chrono::steady_clock::now();
  auto [train_split, valid_split] = split_train_validation(
      *req.train, req.config.validation_fraction, req.config.seed);

  std::ostringstream metrics;
  metrics << "step,L_d,L_c,combined,train_acc\n";
  StepSink sink = [&metrics](long step, const StepStats& s) {
    metrics << step << "," << to_shortest(s.ld) << "," << to_shortest(s.lc)
            << "," << to_shortest(s.combined) << "," << to_shortest(s.acc)
            << "\n";
  };

  TrainState st = init_train_state(req.config, req.train->num_classes,
                                   req.train->feature_dim);
  train_epochs(st, train_split, valid_split, sink);
  TrainedModel model = finalize(st);
  Metrics test_metrics = evaluate(model, *req.test);
  const auto t1 = std::chrono::steady_clock::now();

  ExperimentRecord rec;
  rec.run_id = run_id;
  rec.config = req.config;
  rec.spec = req.spec;
  rec.data_seed = req.data_seed;
  rec.train_data_hash = train_hash;
  rec.test_data_hash = test_hash;
  rec.config_hash = chash;
  rec.best_epoch = model.best_epoch;
  rec.best_val_acc = model.best_val_acc;
  rec.test_accuracy = test_metrics.accuracy;
  rec.per_class_accuracy = test_metrics.per_class_accuracy;
  rec.confusion = test_metrics.confusion;
  rec.history = model.history;
  rec.duration_seconds =
      std::chrono::duration<double>(t1 - t0).count();

  {
    std::ofstream out(dir / "metrics.csv", std::ios::binary);
    out << metrics.str();
  }
  save_checkpoint(st, (dir / "checkpoint.json").string());
  {
    std::ofstream out(record_path, std::ios::binary);
    out << record_to_text(rec);
  }
  return rec;
}

// Runs requests with up to `jobs` worker threads; each run owns its
// directory, so parallel execution is safe.
inline std::vector<ExperimentRecord> run_all(
    const std::vector<RunRequest>& requests, int jobs) {
  std::vector<ExperimentRecord> records(requests.size());
  if (jobs < 1) jobs = 1;
  std::mutex mu;
  std::size_t next = 0;
  std::exception_ptr failure;
  auto worker = [&]() {
    for (;;) {
      std::size_t idx;
      {
        std::lock_guard<std::mutex> lock(mu);
        if (failure || next >= requests.size()) return;
        idx = next++;
      }
      try {
        records[idx] = run_experiment(requests[idx]);
      } catch (...) {
        std::lock_guard<std::mutex> lock(mu);
        if (!failure) failure = std::current_exception();
        return;
      }
    }
  };
  std::vector<std::thread> pool;
  const int n_threads = std::min<int>(jobs, static_cast<int>(requests.size()));
  pool.reserve(static_cast<std::size_t>(n_threads));
  for (int i = 0; i < n_threads; ++i) pool.emplace_back(worker);
  for (auto& th : pool) th.join();
  if (failure) std::rethrow_exception(failure);
  return records;
}

// ----- report tables -----

struct ReportCell {
  std::vector<double> values;
  double mean() const {
    if (values.empty()) return 0.0;
    double s = 0.0;
    for (double v : values) s += v;
    return s / static_cast<double>(values.size());
  }
  double stddev() const {
    if (values.size() < 2) return 0.0;
    const double m = mean();
    double s = 0.0;
    for (double v : values) s += (v - m) * (v - m);
    return std::sqrt(s / static_cast<double>(values.size() - 1));
  }
};

// rows = method/variant, cols = dataset or bias level; cells hold per-seed
// test accuracies in percent.
struct ReportTable {
  std::string title;
  std::vector<std::string> row_labels;
  std::vector<std::string> col_labels;
  std::vector<std::vector<ReportCell>> cells;

  ReportCell& cell(std::size_t r, std::size_t c) { return cells[r][c]; }

  static std::string format_cell(const ReportCell& c) {
    if (c.values.empty()) return "-";
    std::ostringstream os;
    os.setf(std::ios::fixed);
    os.precision(2);
    os << c.mean();
    if (c.values.size() > 1) os << " +- " << c.stddev();
    return os.str();
  }

  std::string to_markdown() const {
    std::ostringstream out;
    if (!title.empty()) out << "# " << title << "\n\n";
    out << "| method |";
    for (const auto& c : col_labels) out << " " << c << " |";
    out << "\n|---|";
    for (std::size_t i = 0; i < col_labels.size(); ++i) out << "---|";
    out << "\n";
    for (std::size_t r = 0; r < row_labels.size(); ++r) {
      out << "| " << variant_display(row_labels[r]) << " |";
      for (std::size_t c = 0; c < col_labels.size(); ++c) {
        out << " " << format_cell(cells[r][c]) << " |";
      }
      out << "\n";
    }
    return out.str();
  }

  std::string to_csv() const {
    std::ostringstream out;
    out << "method,column,n_seeds,mean,std,values\n";
    for (std::size_t r = 0; r < row_labels.size(); ++r) {
      for (std::size_t c = 0; c < col_labels.size(); ++c) {
        const ReportCell& cell = cells[r][c];
        out << row_labels[r] << "," << col_labels[c] << ","
            << cell.values.size() << "," << to_shortest(cell.mean()) << ","
            << to_shortest(cell.stddev()) << ",";
        for (std::size_t i = 0; i < cell.values.size(); ++i) {
          if (i) out << ";";
          out << to_shortest(cell.values[i]);
        }
        out << "\n";
      }
    }
    return out.str();
  }
};

// ----- experiment commands -----

struct AblationResult {
  ReportTable table;
  std::vector<ExperimentRecord> records;
};

// Trains {DLG, DLG w/o L_d, DLG w/o L_c, ERM} for each seed on identical
// data. Seeds are base_seed + i.
inline AblationResult run_ablation(const TrainConfig& base,
                                   const BiasSpec& spec,
                                   const Dataset& train, const Dataset& test,
                                   int seeds, const std::string& runs_dir,
                                   int jobs = 1) {
  if (seeds < 1) throw ParameterError("ablate: seeds must be >= 1");
  struct Variant {
    Method method;
    AblationMode ablation;
  };
  const std::vector<Variant> variants = {
      {Method::Dlg, AblationMode::None},
      {Method::Dlg, AblationMode::NoLd},
      {Method::Dlg, AblationMode::NoLc},
      {Method::Erm, AblationMode::None},
  };
  std::vector<RunRequest> requests;
  for (int s = 0; s < seeds; ++s) {
    for (const Variant& v : variants) {
      TrainConfig cfg = base;
      cfg.method = v.method;
      cfg.ablation = v.ablation;
      cfg.seed = base.seed + static_cast<std::uint64_t>(s);
      RunRequest req;
      req.config = cfg;
      req.spec = spec;
      req.data_seed = base.seed;
      req.train = &train;
      req.test = &test;
      req.runs_dir = runs_dir;
      requests.push_back(std::move(req));
    }
  }
  // Controlled comparison: variants may differ only in method/ablation.
  const std::string base_text =
      canonical_config_text_without_variant(requests.front().config, spec);
  for (const RunRequest& r : requests) {
    if (canonical_config_text_without_variant(r.config, spec) != base_text &&
        r.config.seed == requests.front().config.seed) {
      throw UsageError("ablate: variants diverge beyond method/ablation");
    }
  }

  AblationResult res;
  res.records = run_all(requests, jobs);
  res.table.title = "Ablation";
  res.table.col_labels = {family_name(spec.family) +
                          " bias=" + bias_label(spec.bias)};
  res.table.row_labels = {"dlg", "dlg_wo_Ld", "dlg_wo_Lc", "erm"};
  res.table.cells.assign(4, std::vector<ReportCell>(1));
  for (const ExperimentRecord& rec : res.records) {
    const std::string v = variant_name(rec.config);
    for (std::size_t r = 0; r < res.table.row_labels.size(); ++r) {
      if (res.table.row_labels[r] == v) {
        res.table.cells[r][0].values.push_back(rec.test_accuracy * 100.0);
      }
    }
  }
  return res;
}

struct SweepResult {
  ReportTable table;
  std::vector<ExperimentRecord> records;
};

// methods x biases grid, mean +- std over seeds per cell, plus a cross-bias
// average column per method. Each (bias, seed) pair gets its own generated
// dataset, shared across methods for paired comparisons.
inline SweepResult run_bias_sweep(const TrainConfig& base, BiasSpec spec,
                                  const std::vector<double>& biases,
                                  const std::vector<Method>& methods,
                                  int seeds, const std::string& runs_dir,
                                  int jobs = 1) {
  if (seeds < 1) throw ParameterError("sweep: seeds must be >= 1");
  if (biases.empty() || methods.empty()) {
    throw ParameterError("sweep: needs at least one bias and one method");
  }
  // Generate every dataset first; requests hold pointers into this pool.
  struct DataCell {
    Dataset train, test;
  };
  std::vector<std::vector<DataCell>> data(biases.size());
  for (std::size_t b = 0; b < biases.size(); ++b) {
    data[b].resize(static_cast<std::size_t>(seeds));
    for (int s = 0; s < seeds; ++s) {
      BiasSpec cell_spec = spec;
      cell_spec.bias = biases[b];
      Rng rng(base.seed + static_cast<std::uint64_t>(s));
      GeneratedPair pair = generate(cell_spec, rng);
      data[b][static_cast<std::size_t>(s)].train = std::move(pair.train.data);
      data[b][static_cast<std::size_t>(s)].test = std::move(pair.test.data);
    }
  }

  std::vector<RunRequest> requests;
  for (std::size_t b = 0; b < biases.size(); ++b) {
    for (int s = 0; s < seeds; ++s) {
      for (Method m : methods) {
        TrainConfig cfg = base;
        cfg.method = m;
        cfg.ablation = AblationMode::None;
        cfg.seed = base.seed + static_cast<std::uint64_t>(s);
        BiasSpec cell_spec = spec;
        cell_spec.bias = biases[b];
        RunRequest req;
        req.config = cfg;
        req.spec = cell_spec;
        req.data_seed = base.seed + static_cast<std::uint64_t>(s);
        req.train = &data[b][static_cast<std::size_t>(s)].train;
        req.test = &data[b][static_cast<std::size_t>(s)].test;
        req.runs_dir = runs_dir;
        requests.push_back(std::move(req));
      }
    }
  }

  SweepResult res;
  res.records = run_all(requests, jobs);
  res.table.title = "Bias sweep (" + family_name(spec.family) + ")";
  for (double b : biases) res.table.col_labels.push_back("bias=" + bias_label(b));
  res.table.col_labels.push_back("average");
  for (Method m : methods) res.table.row_labels.push_back(method_name(m));
  res.table.cells.assign(methods.size(),
                         std::vector<ReportCell>(biases.size() + 1));
  for (const ExperimentRecord& rec : res.records) {
    std::size_t row = 0;
    for (std::size_t r = 0; r < methods.size(); ++r) {
      if (methods[r] == rec.config.method) row = r;
    }
    std::size_t col = 0;
    for (std::size_t b = 0; b < biases.size(); ++b) {
      if (std::abs(biases[b] - rec.spec.bias) < 1e-12) col = b;
    }
    res.table.cells[row][col].values.push_back(rec.test_accuracy * 100.0);
    res.table.cells[row][biases.size()].values.push_back(rec.test_accuracy *
                                                         100.0);
  }
  return res;
}

// Rebuilds tables from persisted records: a pure fold over runs_dir, so
// re-running report never changes numbers.
inline ReportTable fold_runs(const std::string& runs_dir,
                             const std::string& title) {
  namespace fs = std::filesystem;
  std::vector<ExperimentRecord> records;
  if (fs::exists(runs_dir)) {
    std::vector<fs::path> record_files;
    for (const auto& entry : fs::directory_iterator(runs_dir)) {
      fs::path rec = entry.path() / "record.txt";
      if (entry.is_directory() && fs::exists(rec)) record_files.push_back(rec);
    }
    std::sort(record_files.begin(), record_files.end());
    for (const fs::path& p : record_files) {
      std::ifstream in(p, std::ios::binary);
      std::ostringstream buf;
      buf << in.rdbuf();
      records.push_back(record_from_text(buf.str(), p.string()));
    }
  }
  ReportTable table;
  table.title = title;
  for (const ExperimentRecord& rec : records) {
    const std::string row = variant_name(rec.config);
    const std::string col = family_name(rec.spec.family) +
                            " bias=" + bias_label(rec.spec.bias);
    std::size_t r = table.row_labels.size();
    for (std::size_t i = 0; i < table.row_labels.size(); ++i) {
      if (table.row_labels[i] == row) r = i;
    }
    if (r == table.row_labels.size()) {
      table.row_labels.push_back(row);
      table.cells.emplace_back(table.col_labels.size());
    }
    std::size_t c = table.col_labels.size();
    for (std::size_t i = 0; i < table.col_labels.size(); ++i) {
      if (table.col_labels[i] == col) c = i;
    }
    if (c == table.col_labels.size()) {
      table.col_labels.push_back(col);
      for (auto& rowcells : table.cells) rowcells.emplace_back();
    }
    table.cells[r][c].values.push_back(rec.test_accuracy * 100.0);
  }
  return table;
}

inline void write_report(const ReportTable& table,
                         const std::string& reports_dir,
                         const std::string& name) {
  namespace fs = std::filesystem;
  fs::create_directories(reports_dir);
  {
    std::ofstream out(fs::path(reports_dir) / (name + ".md"),
                      std::ios::binary);
    out << table.to_markdown();
  }
  {
    std::ofstream out(fs::path(reports_dir) / (name + ".csv"),
                      std::ios::binary);
    out << table.to_csv();
  }
}

// ----- invariant-edge extraction -----

// Ranked per-graph mask listing: graph_id, i, j, mask_prob, in_original, with
// pairs sorted by descending probability. An optional threshold keeps only
// pairs with mask_prob >= threshold.
inline std::string extract_edge_csv(const TrainedModel& model,
                                    const Dataset& ds,
                                    double hard_threshold = -1.0) {
  std::ostringstream out;
  out << "graph_id,i,j,mask_prob,in_original\n";
  const ModifierConfig cfg_v =
      modifier_config_v(model.config, model.feature_dim);
  ParameterStore theta_v = model.theta_v;
  for (std::size_t gi = 0; gi < ds.graphs.size(); ++gi) {
    const Graph& g = ds.graphs[gi];
    Matrix h = gnn_encode(g.adjacency, g.features, cfg_v.gnn, theta_v, "gnn");
    EdgeMask mask = edge_mask(h, theta_v, "scorer");
    struct Row {
      int i, j;
      double prob;
      bool orig;
    };
    std::vector<Row> rows;
    for (int i = 0; i < g.n; ++i) {
      for (int j = i + 1; j < g.n; ++j) {
        double p = mask.probs(i, j);
        if (hard_threshold >= 0.0 && p < hard_threshold) continue;
        rows.push_back({i, j, p, g.adjacency(i, j) != 0.0});
      }
    }
    std::stable_sort(rows.begin(), rows.end(),
                     [](const Row& a, const Row& b) { return a.prob > b.prob; });
    for (const Row& row : rows) {
      out << gi << "," << row.i << "," << row.j << ","
          << to_shortest(row.prob) << "," << (row.orig ? 1 : 0) << "\n";
    }
  }
  return out.str();
}

}  // namespace dlg
