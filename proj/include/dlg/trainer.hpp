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

#include <cmath>
#include <cstdint>
#include <functional>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "dlg/graph.hpp"
#include "dlg/modifier.hpp"
#include "dlg/objectives.hpp"
#include "dlg/param_store.hpp"
#include "dlg/rng.hpp"
#include "dlg/tape.hpp"

namespace dlg {

enum class Method { Dlg, Erm };
enum class AblationMode { None, NoLd, NoLc };
enum class Combiner { Convex, Weighted };

inline std::string method_name(Method m) {
  return m == Method::Dlg ? "dlg" : "erm";
}
inline Method parse_method(const std::string& s) {
  if (s == "dlg") return Method::Dlg;
  if (s == "erm") return Method::Erm;
  throw ParameterError("unknown method '" + s + "'");
}

inline std::string ablation_name(AblationMode a) {
  switch (a) {
    case AblationMode::None: return "none";
    case AblationMode::NoLd: return "no_Ld";
    case AblationMode::NoLc: return "no_Lc";
  }
  throw ParameterError("unknown ablation");
}
inline AblationMode parse_ablation(const std::string& s) {
  if (s == "none") return AblationMode::None;
  if (s == "no_Ld") return AblationMode::NoLd;
  if (s == "no_Lc") return AblationMode::NoLc;
  throw ParameterError("unknown ablation '" + s + "'");
}

inline std::string combiner_name(Combiner c) {
  return c == Combiner::Convex ? "convex" : "weighted";
}
inline Combiner parse_combiner(const std::string& s) {
  if (s == "convex") return Combiner::Convex;
  if (s == "weighted") return Combiner::Weighted;
  throw ParameterError("unknown combiner '" + s + "'");
}

// Full training configuration. The convex combiner weights the modifier
// objective as alpha*L_d + (1-alpha)*L_c; the weighted combiner uses
// alpha_d*L_d + L_c with an unconstrained alpha_d.
struct TrainConfig {
  Method method = Method::Dlg;
  double alpha = 0.5;
  Combiner combiner = Combiner::Convex;
  double alpha_d = 1.0;
  double lr = 1e-3;
  int epochs = 100;
  int batch_size = 32;
  double tau = 1.0;
  double K = 1.0;
  std::uint64_t seed = 0;
  AblationMode ablation = AblationMode::None;
  LdForm ld_form = LdForm::Contrastive;
  bool detach_qv_target = false;
  // Encoder shape shared by both modifiers and the classifier backbone.
  int layers = 2;
  int hidden_dim = 64;
  Activation activation = Activation::Relu;
  int scorer_hidden = 64;
  int scorer_out = 32;
  double validation_fraction = 0.1;
  // Epochs of classifier-only training on raw graphs before the modifiers
  // engage. A classifier that is still at chance pushes every mask toward
  // all-on (flatter predictions lower its loss), so the modifiers only get a
  // useful sculpting signal once the classifier reads structure.
  int warmup_epochs = 20;
};

inline void validate_train_config(const TrainConfig& cfg) {
  if (!(cfg.lr > 0.0)) throw ParameterError("config: lr must be > 0");
  if (cfg.epochs < 1) throw ParameterError("config: epochs must be >= 1");
  if (cfg.batch_size < 1) throw ParameterError("config: batch_size must be >= 1");
  if (cfg.alpha < 0.0 || cfg.alpha > 1.0) {
    throw ParameterError("config: alpha must be in [0,1]");
  }
  if (cfg.alpha_d < 0.0) throw ParameterError("config: alpha_d must be >= 0");
  if (!(cfg.tau > 0.0)) throw ParameterError("config: tau must be > 0");
  if (cfg.K < 0.0) throw ParameterError("config: K must be >= 0");
  if (cfg.layers < 1 || cfg.hidden_dim < 1) {
    throw ParameterError("config: encoder shape invalid");
  }
  if (cfg.validation_fraction < 0.0 || cfg.validation_fraction >= 1.0) {
    throw ParameterError("config: validation_fraction must be in [0,1)");
  }
  if (cfg.warmup_epochs < 0) {
    throw ParameterError("config: warmup_epochs must be >= 0");
  }
}

inline ModifierConfig modifier_config_v(const TrainConfig& cfg, int d_x) {
  ModifierConfig m;
  m.gnn = {cfg.layers, cfg.hidden_dim, cfg.activation, d_x};
  m.scorer = {cfg.scorer_hidden, cfg.scorer_out};
  return m;
}

// The augmentation-side encoder consumes the label concat, so its input is
// d_x + C.
inline ModifierConfig modifier_config_a(const TrainConfig& cfg, int d_x,
                                        int C) {
  ModifierConfig m;
  m.gnn = {cfg.layers, cfg.hidden_dim, cfg.activation, d_x + C};
  m.scorer = {cfg.scorer_hidden, cfg.scorer_out};
  return m;
}

inline GnnConfig classifier_config(const TrainConfig& cfg, int d_x) {
  return {cfg.layers, cfg.hidden_dim, cfg.activation, d_x};
}

// ----- optimizer -----

// Adaptive-moment update with beta1=0.9, beta2=0.999, eps=1e-8 and bias
// correction. Gradients are reset after the step.
struct AdamState {
  struct Moments {
    Matrix m;
    Matrix v;
  };
  std::int64_t t = 0;
  std::map<std::string, Moments> moments;
};

inline void adam_step(ParameterStore& store, AdamState& state, double lr) {
  constexpr double kBeta1 = 0.9;
  constexpr double kBeta2 = 0.999;
  constexpr double kEps = 1e-8;
  ++state.t;
  const double bc1 = 1.0 - std::pow(kBeta1, static_cast<double>(state.t));
  const double bc2 = 1.0 - std::pow(kBeta2, static_cast<double>(state.t));
  for (const std::string& name : store.names()) {
    const Matrix& g = store.grad(name);
    auto it = state.moments.find(name);
    if (it == state.moments.end()) {
      AdamState::Moments mm;
      mm.m = Matrix::Zero(g.rows(), g.cols());
      mm.v = Matrix::Zero(g.rows(), g.cols());
      it = state.moments.emplace(name, std::move(mm)).first;
    }
    Matrix& m = it->second.m;
    Matrix& v = it->second.v;
    m = kBeta1 * m + (1.0 - kBeta1) * g;
    v = kBeta2 * v.array() + (1.0 - kBeta2) * g.array().square();
    Matrix m_hat = m / bc1;
    Matrix v_hat = v / bc2;
    store.value(name).array() -=
        lr * m_hat.array() / (v_hat.array().sqrt() + kEps);
  }
  store.zero_grads();
}

// ----- state -----

struct EpochStats {
  double ld = 0.0;
  double lc = 0.0;
  double combined = 0.0;
  double train_acc = 0.0;
  double val_acc = 0.0;
};

struct StepStats {
  double ld = 0.0;
  double lc = 0.0;
  double combined = 0.0;
  double acc = 0.0;
};

// Called after every optimizer step with the global step index; feeds the
// run's metrics log.
using StepSink = std::function<void(long step, const StepStats&)>;

inline bool cfg_is_dlg(const TrainConfig& cfg) {
  return cfg.method == Method::Dlg;
}

// Complete training state; checkpointing this struct and resuming reproduces
// an uninterrupted run bitwise.
struct TrainState {
  TrainConfig config;
  int num_classes = 0;
  int feature_dim = 0;
  ParameterStore theta_v, theta_a, theta_f;
  AdamState adam_v, adam_a, adam_f;
  std::string rng_state;
  int epochs_done = 0;
  long global_step = 0;
  std::vector<EpochStats> history;
  // Best-validation snapshot (ties resolved to the earliest epoch).
  ParameterStore best_v, best_a, best_f;
  int best_epoch = -1;
  double best_val_acc = -1.0;
};

namespace detail {
constexpr std::uint64_t kStreamThetaV = 0x7468657461765f31ull;
constexpr std::uint64_t kStreamThetaA = 0x7468657461615f32ull;
constexpr std::uint64_t kStreamThetaF = 0x7468657461665f33ull;
constexpr std::uint64_t kStreamTrain = 0x747261696e5f5f34ull;
constexpr std::uint64_t kStreamSplit = 0x73706c69745f5f35ull;
}  // namespace detail

inline TrainState init_train_state(const TrainConfig& cfg, int num_classes,
                                   int feature_dim) {
  validate_train_config(cfg);
  TrainState st;
  st.config = cfg;
  st.num_classes = num_classes;
  st.feature_dim = feature_dim;
  Rng rv(cfg.seed ^ detail::kStreamThetaV);
  Rng ra(cfg.seed ^ detail::kStreamThetaA);
  Rng rf(cfg.seed ^ detail::kStreamThetaF);
  init_modifier_params(st.theta_v, modifier_config_v(cfg, feature_dim), rv);
  init_modifier_params(st.theta_a,
                       modifier_config_a(cfg, feature_dim, num_classes), ra);
  init_classifier_params(st.theta_f, classifier_config(cfg, feature_dim),
                         num_classes, rf);
  st.rng_state = Rng(cfg.seed ^ detail::kStreamTrain).save_state();
  return st;
}

// ----- evaluation -----

struct Metrics {
  double accuracy = 0.0;
  std::vector<double> per_class_accuracy;
  std::vector<std::vector<int>> confusion;  // [true][predicted]
};

// Inference never reads labels: graphs pass through the invariant modifier
// (deterministic mask weights) and the classifier; labels are only compared
// against afterwards.
inline int predict(const TrainState& st, const ParameterStore& theta_v,
                   const ParameterStore& theta_f, const Graph& g) {
  const TrainConfig& cfg = st.config;
  ParameterStore& tv = const_cast<ParameterStore&>(theta_v);
  ParameterStore& tf = const_cast<ParameterStore&>(theta_f);
  Tape t;
  Tape::Var adj = t.constant(g.adjacency);
  Tape::Var feat = t.constant(g.features);
  Tape::Var graph_adj = adj;
  if (cfg.method == Method::Dlg) {
    ModifierTapeOut mv =
        modify_on_tape(t, adj, feat, modifier_config_v(cfg, st.feature_dim),
                       tv, cfg.tau, ModifierMode::Infer, nullptr);
    graph_adj = mv.adjacency;
  }
  Tape::Var z = classifier_logits(t, graph_adj, feat,
                                  classifier_config(cfg, st.feature_dim), tf);
  return argmax_class(t.value(t.softmax_row(z)));
}

inline Metrics evaluate_params(const TrainState& st,
                               const ParameterStore& theta_v,
                               const ParameterStore& theta_f,
                               const Dataset& ds) {
  const int C = ds.num_classes;
  Metrics m;
  m.confusion.assign(static_cast<std::size_t>(C),
                     std::vector<int>(static_cast<std::size_t>(C), 0));
  int correct = 0;
  for (const Graph& g : ds.graphs) {
    int pred = predict(st, theta_v, theta_f, g);
    ++m.confusion[static_cast<std::size_t>(g.label)]
                 [static_cast<std::size_t>(pred)];
    if (pred == g.label) ++correct;
  }
  m.accuracy = ds.graphs.empty()
                   ? 0.0
                   : static_cast<double>(correct) /
                         static_cast<double>(ds.graphs.size());
  m.per_class_accuracy.assign(static_cast<std::size_t>(C), 0.0);
  for (int c = 0; c < C; ++c) {
    int total = 0;
    for (int p = 0; p < C; ++p) {
      total += m.confusion[static_cast<std::size_t>(c)]
                          [static_cast<std::size_t>(p)];
    }
    if (total > 0) {
      m.per_class_accuracy[static_cast<std::size_t>(c)] =
          static_cast<double>(m.confusion[static_cast<std::size_t>(c)]
                                         [static_cast<std::size_t>(c)]) /
          static_cast<double>(total);
    }
  }
  return m;
}

// ----- training -----

namespace detail {

inline Tape::Var erm_loss(Tape& t, const Graph& g, const TrainConfig& cfg,
                          int feature_dim, int num_classes,
                          ParameterStore& theta_f, int* pred_out) {
  Tape::Var z = classifier_logits(t, t.constant(g.adjacency),
                                  t.constant(g.features),
                                  classifier_config(cfg, feature_dim),
                                  theta_f);
  *pred_out = argmax_class(t.value(z));
  Matrix onehot = Matrix::Zero(1, num_classes);
  onehot(0, g.label) = 1.0;
  return t.scale(
      t.sum_all(t.hadamard(t.log_softmax_row(z), t.constant(onehot))), -1.0);
}

inline void check_gradients_finite(const TrainState& st,
                                   const StepStats& stats) {
  const ParameterStore* stores[3] = {&st.theta_v, &st.theta_a, &st.theta_f};
  const char* names[3] = {"theta_v", "theta_a", "theta_f"};
  for (int k = 0; k < 3; ++k) {
    for (const std::string& p : stores[k]->names()) {
      if (!stores[k]->grad(p).allFinite()) {
        throw TrainingError(
            "non-finite gradient in " + std::string(names[k]) + "/" + p +
            " (L_d=" + std::to_string(stats.ld) +
            ", L_c=" + std::to_string(stats.lc) +
            ", combined=" + std::to_string(stats.combined) + ")");
      }
    }
  }
}

}  // namespace detail

// One optimizer step over a batch. For each graph the modifier parameters
// receive the gradient of the combined objective (per the configured combiner
// and ablation) while the classifier receives the gradient of L_c alone.
// Batch losses are means over members, so lr is batch-size independent.
inline StepStats train_step(TrainState& st,
                            const std::vector<std::size_t>& batch,
                            const Dataset& train, Rng& rng,
                            bool warmup = false) {
  if (batch.empty()) throw UsageError("train_step: empty batch");
  const TrainConfig& cfg = st.config;
  const int C = st.num_classes;
  const double inv_b = 1.0 / static_cast<double>(batch.size());
  const ModifierConfig cfg_v = modifier_config_v(cfg, st.feature_dim);
  const ModifierConfig cfg_a = modifier_config_a(cfg, st.feature_dim, C);
  const GnnConfig cfg_clf = classifier_config(cfg, st.feature_dim);

  st.theta_v.zero_grads();
  st.theta_a.zero_grads();
  st.theta_f.zero_grads();

  StepStats stats;
  int correct = 0;

  for (std::size_t idx : batch) {
    const Graph& g = train.graphs[idx];
    if (cfg.method == Method::Erm || warmup) {
      Tape t;
      int pred = 0;
      Tape::Var ce =
          detail::erm_loss(t, g, cfg, st.feature_dim, C, st.theta_f, &pred);
      if (pred == g.label) ++correct;
      stats.lc += t.scalar(ce) * inv_b;
      stats.combined += t.scalar(ce) * inv_b;
      t.backward(ce, {&st.theta_f}, inv_b);
      if (warmup) {
        // Anchor both modifiers' masks to the input graph while the
        // classifier learns on raw graphs.
        Tape::Var hv = gnn_encode(t, t.constant(g.adjacency),
                                  t.constant(g.features), cfg_v.gnn,
                                  st.theta_v, "gnn");
        Tape::Var rec_v = adjacency_reconstruction_loss(
            t, edge_logits(t, hv, st.theta_v, "scorer"), g.adjacency);
        Tape::Var ha = gnn_encode(
            t, t.constant(g.adjacency),
            t.constant(label_concat(g.features, g.label, C)), cfg_a.gnn,
            st.theta_a, "gnn");
        Tape::Var rec_a = adjacency_reconstruction_loss(
            t, edge_logits(t, ha, st.theta_a, "scorer"), g.adjacency);
        t.backward(rec_v, {&st.theta_v}, inv_b);
        t.backward(rec_a, {&st.theta_a}, inv_b);
      }
      continue;
    }

    // Draw order per graph: support set, invariant noise, augmented noise.
    SupportSet supports;
    if (cfg.ablation != AblationMode::NoLd) {
      supports = support_set_sample(train, cfg.K, g.label, rng);
    }
    Matrix noise_v = gumbel_noise(g.n, rng);
    Matrix noise_a = gumbel_noise(g.n, rng);

    Tape t;
    Tape::Var adj = t.constant(g.adjacency);
    Tape::Var feat = t.constant(g.features);
    ModifierTapeOut mv = modify_on_tape(t, adj, feat, cfg_v, st.theta_v,
                                        cfg.tau, ModifierMode::Train,
                                        &noise_v);
    ModifierTapeOut ma = modify_on_tape(
        t, adj, t.constant(label_concat(g.features, g.label, C)), cfg_a,
        st.theta_a, cfg.tau, ModifierMode::Train, &noise_a);

    Tape::Var ld_var;
    if (cfg.ablation != AblationMode::NoLd) {
      std::vector<Tape::Var> reps;
      reps.reserve(supports.indices.size());
      for (std::size_t k = 0; k < supports.indices.size(); ++k) {
        const Graph& sg = train.graphs[supports.indices[k]];
        Tape::Var h = gnn_encode(
            t, t.constant(sg.adjacency),
            t.constant(label_concat(sg.features, sg.label, C)), cfg_a.gnn,
            st.theta_a, "gnn");
        reps.push_back(t.l2_normalize_rows(t.mean_rows(h)));
      }
      ld_var = distribution_loss_tape(t, ma.repr, mv.repr, reps,
                                      supports.labels, g.label, cfg.ld_form);
      stats.ld += t.scalar(ld_var) * inv_b;
    }

    Tape::Var zv = classifier_logits(t, mv.adjacency, feat, cfg_clf,
                                     st.theta_f);
    Tape::Var za = classifier_logits(t, ma.adjacency, feat, cfg_clf,
                                     st.theta_f);
    if (argmax_class(t.value(zv)) == g.label) ++correct;
    Tape::Var lc_var =
        label_loss_tape(t, zv, za, g.label, C, cfg.detach_qv_target);
    stats.lc += t.scalar(lc_var) * inv_b;

    const double w_ld =
        (cfg.combiner == Combiner::Convex) ? cfg.alpha : cfg.alpha_d;
    const double w_lc =
        (cfg.combiner == Combiner::Convex) ? (1.0 - cfg.alpha) : 1.0;
    Tape::Var modifier_obj;
    switch (cfg.ablation) {
      case AblationMode::None:
        modifier_obj = t.add(t.scale(ld_var, w_ld), t.scale(lc_var, w_lc));
        break;
      case AblationMode::NoLd:
        modifier_obj = t.scale(lc_var, w_lc);
        break;
      case AblationMode::NoLc:
        // The classifier still trains on L_c below; only the modifiers lose
        // the label-consistency signal.
        modifier_obj = t.scale(ld_var, w_ld);
        break;
    }
    stats.combined += t.scalar(modifier_obj) * inv_b;

    t.backward(modifier_obj, {&st.theta_v, &st.theta_a}, inv_b);
    t.backward(lc_var, {&st.theta_f}, inv_b);
  }

  stats.acc = static_cast<double>(correct) / static_cast<double>(batch.size());
  detail::check_gradients_finite(st, stats);

  if (cfg.method == Method::Erm || warmup) {
    adam_step(st.theta_f, st.adam_f, cfg.lr);
  } else {
    adam_step(st.theta_v, st.adam_v, cfg.lr);
    adam_step(st.theta_a, st.adam_a, cfg.lr);
    adam_step(st.theta_f, st.adam_f, cfg.lr);
  }
  return stats;
}

// Runs epochs epochs_done..config.epochs-1 with seeded shuffled batching.
// Safe to call on a restored checkpoint; it continues where the state left
// off and reproduces an uninterrupted run bitwise.
inline void train_epochs(TrainState& st, const Dataset& train,
                         const Dataset& valid, const StepSink& sink = {}) {
  validate_dataset(train);
  if (train.num_classes != st.num_classes ||
      train.feature_dim != st.feature_dim) {
    throw DatasetError("train_epochs: dataset incompatible with model");
  }
  if (!valid.graphs.empty() &&
      (valid.num_classes != st.num_classes ||
       valid.feature_dim != st.feature_dim)) {
    throw DatasetError("train_epochs: validation set incompatible with model");
  }
  Rng rng = Rng::restore_state(st.rng_state);
  for (int epoch = st.epochs_done; epoch < st.config.epochs; ++epoch) {
    // Rebuilt from identity each epoch so the batch order is a function of
    // the rng state alone; resuming a checkpoint then replays it exactly.
    std::vector<std::size_t> order(train.graphs.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    for (std::size_t i = order.size(); i > 1; --i) {
      std::swap(order[i - 1], order[rng.uniform_index(i)]);
    }
    EpochStats es;
    double weight_total = 0.0;
    double correct_total = 0.0;
    for (std::size_t start = 0; start < order.size();
         start += static_cast<std::size_t>(st.config.batch_size)) {
      std::size_t end = std::min(
          order.size(), start + static_cast<std::size_t>(st.config.batch_size));
      std::vector<std::size_t> batch(order.begin() + static_cast<long>(start),
                                     order.begin() + static_cast<long>(end));
      const bool warmup =
          cfg_is_dlg(st.config) && epoch < st.config.warmup_epochs;
      StepStats ss = train_step(st, batch, train, rng, warmup);
      const double w = static_cast<double>(batch.size());
      es.ld += ss.ld * w;
      es.lc += ss.lc * w;
      es.combined += ss.combined * w;
      correct_total += ss.acc * w;
      weight_total += w;
      if (sink) sink(st.global_step, ss);
      ++st.global_step;
    }
    es.ld /= weight_total;
    es.lc /= weight_total;
    es.combined /= weight_total;
    es.train_acc = correct_total / weight_total;
    es.val_acc = valid.graphs.empty()
                     ? -1.0
                     : evaluate_params(st, st.theta_v, st.theta_f, valid)
                           .accuracy;
    st.history.push_back(es);

    const bool improved = valid.graphs.empty()
                              ? true  // no validation: keep the latest
                              : es.val_acc > st.best_val_acc;
    if (improved) {
      st.best_val_acc = es.val_acc;
      st.best_epoch = epoch;
      st.best_v = st.theta_v;
      st.best_a = st.theta_a;
      st.best_f = st.theta_f;
    }
    st.epochs_done = epoch + 1;
    st.rng_state = rng.save_state();
  }
}

// Final model under best-validation selection.
struct TrainedModel {
  TrainConfig config;
  int num_classes = 0;
  int feature_dim = 0;
  ParameterStore theta_v, theta_a, theta_f;
  std::vector<EpochStats> history;
  int best_epoch = -1;
  double best_val_acc = -1.0;
};

inline TrainedModel finalize(const TrainState& st) {
  TrainedModel m;
  m.config = st.config;
  m.num_classes = st.num_classes;
  m.feature_dim = st.feature_dim;
  m.theta_v = st.best_epoch >= 0 ? st.best_v : st.theta_v;
  m.theta_a = st.best_epoch >= 0 ? st.best_a : st.theta_a;
  m.theta_f = st.best_epoch >= 0 ? st.best_f : st.theta_f;
  m.history = st.history;
  m.best_epoch = st.best_epoch;
  m.best_val_acc = st.best_val_acc;
  return m;
}

inline Metrics evaluate(const TrainedModel& model, const Dataset& ds) {
  TrainState shim;
  shim.config = model.config;
  shim.num_classes = model.num_classes;
  shim.feature_dim = model.feature_dim;
  return evaluate_params(shim, model.theta_v, model.theta_f, ds);
}

// Stratified validation carve-out: per class, floor(fraction*count) graphs go
// to validation, always leaving at least one training member per class.
inline std::pair<Dataset, Dataset> split_train_validation(
    const Dataset& ds, double fraction, std::uint64_t seed) {
  if (fraction < 0.0 || fraction >= 1.0) {
    throw ParameterError("split: fraction must be in [0,1)");
  }
  Rng rng(seed ^ detail::kStreamSplit);
  std::vector<std::vector<std::size_t>> by_class(
      static_cast<std::size_t>(ds.num_classes));
  for (std::size_t i = 0; i < ds.graphs.size(); ++i) {
    by_class[static_cast<std::size_t>(ds.graphs[i].label)].push_back(i);
  }
  Dataset train, valid;
  train.num_classes = valid.num_classes = ds.num_classes;
  train.feature_dim = valid.feature_dim = ds.feature_dim;
  train.provenance = ds.provenance + " subset=train";
  valid.provenance = ds.provenance + " subset=validation";
  for (auto& pool : by_class) {
    for (std::size_t i = pool.size(); i > 1; --i) {
      std::swap(pool[i - 1], pool[rng.uniform_index(i)]);
    }
    std::size_t n_val = static_cast<std::size_t>(
        fraction * static_cast<double>(pool.size()));
    if (n_val >= pool.size()) n_val = pool.size() - 1;
    for (std::size_t k = 0; k < pool.size(); ++k) {
      (k < n_val ? valid : train).graphs.push_back(ds.graphs[pool[k]]);
    }
  }
  return {std::move(train), std::move(valid)};
}

// End-to-end training entry point: carve nothing here, the caller decides the
// validation source.
inline TrainedModel train(const Dataset& train_ds, const Dataset& valid_ds,
                          const TrainConfig& cfg, const StepSink& sink = {}) {
  TrainState st = init_train_state(cfg, train_ds.num_classes,
                                   train_ds.feature_dim);
  train_epochs(st, train_ds, valid_ds, sink);
  return finalize(st);
}

}  // namespace dlg
