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

#include <fstream>
#include <sstream>
#include <string>

#include <json.hpp>

#include "dlg/config.hpp"
#include "dlg/trainer.hpp"

namespace dlg {

// Textual checkpoint of the full training state: parameter matrices with
// shapes, optimizer moments, rng state, history and the best-validation
// snapshot. Doubles are written as shortest round-trip decimals, so
// save/load is lossless and identical states serialize to identical bytes.

namespace detail {

inline nlohmann::ordered_json matrix_to_json(const Matrix& m) {
  nlohmann::ordered_json j;
  j["rows"] = m.rows();
  j["cols"] = m.cols();
  nlohmann::ordered_json data = nlohmann::ordered_json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    for (Eigen::Index c = 0; c < m.cols(); ++c) data.push_back(m(r, c));
  }
  j["data"] = std::move(data);
  return j;
}

inline Matrix matrix_from_json(const nlohmann::json& j) {
  const Eigen::Index rows = j.at("rows").get<Eigen::Index>();
  const Eigen::Index cols = j.at("cols").get<Eigen::Index>();
  const auto& data = j.at("data");
  if (static_cast<Eigen::Index>(data.size()) != rows * cols) {
    throw ParseError("checkpoint matrix: data length mismatch");
  }
  Matrix m(rows, cols);
  std::size_t idx = 0;
  for (Eigen::Index r = 0; r < rows; ++r) {
    for (Eigen::Index c = 0; c < cols; ++c) {
      m(r, c) = data.at(idx++).get<double>();
    }
  }
  return m;
}

inline nlohmann::ordered_json store_to_json(const ParameterStore& store) {
  nlohmann::ordered_json j;
  for (const std::string& name : store.names()) {
    j[name] = matrix_to_json(store.value(name));
  }
  return j;
}

inline ParameterStore store_from_json(const nlohmann::json& j) {
  ParameterStore store;
  for (auto it = j.begin(); it != j.end(); ++it) {
    store.add(it.key(), matrix_from_json(it.value()));
  }
  return store;
}

inline nlohmann::ordered_json adam_to_json(const AdamState& a) {
  nlohmann::ordered_json j;
  j["t"] = a.t;
  nlohmann::ordered_json moments;
  for (const auto& [name, mm] : a.moments) {
    nlohmann::ordered_json entry;
    entry["m"] = matrix_to_json(mm.m);
    entry["v"] = matrix_to_json(mm.v);
    moments[name] = std::move(entry);
  }
  j["moments"] = std::move(moments);
  return j;
}

inline AdamState adam_from_json(const nlohmann::json& j) {
  AdamState a;
  a.t = j.at("t").get<std::int64_t>();
  for (auto it = j.at("moments").begin(); it != j.at("moments").end(); ++it) {
    AdamState::Moments mm;
    mm.m = matrix_from_json(it.value().at("m"));
    mm.v = matrix_from_json(it.value().at("v"));
    a.moments.emplace(it.key(), std::move(mm));
  }
  return a;
}

inline nlohmann::ordered_json train_config_to_json(const TrainConfig& cfg) {
  nlohmann::ordered_json j;
  for (const auto& [k, v] : train_config_kv(cfg)) j[k] = v;
  return j;
}

inline TrainConfig train_config_from_json(const nlohmann::json& j) {
  TrainConfig cfg;
  for (auto it = j.begin(); it != j.end(); ++it) {
    if (!apply_train_config_field(cfg, it.key(),
                                  it.value().get<std::string>())) {
      throw ParseError("checkpoint: unknown config field '" + it.key() + "'");
    }
  }
  return cfg;
}

}  // namespace detail

inline std::string checkpoint_to_json(const TrainState& st) {
  nlohmann::ordered_json j;
  j["format"] = "dlg-checkpoint-v1";
  j["train_config"] = detail::train_config_to_json(st.config);
  j["config_hash"] = hash_hex(canonical_config_text(st.config, BiasSpec{}));
  j["num_classes"] = st.num_classes;
  j["feature_dim"] = st.feature_dim;
  nlohmann::ordered_json params;
  params["theta_v"] = detail::store_to_json(st.theta_v);
  params["theta_a"] = detail::store_to_json(st.theta_a);
  params["theta_f"] = detail::store_to_json(st.theta_f);
  j["params"] = std::move(params);
  nlohmann::ordered_json adam;
  adam["theta_v"] = detail::adam_to_json(st.adam_v);
  adam["theta_a"] = detail::adam_to_json(st.adam_a);
  adam["theta_f"] = detail::adam_to_json(st.adam_f);
  j["adam"] = std::move(adam);
  j["rng_state"] = st.rng_state;
  j["epochs_done"] = st.epochs_done;
  j["global_step"] = st.global_step;
  nlohmann::ordered_json history = nlohmann::ordered_json::array();
  for (const EpochStats& e : st.history) {
    nlohmann::ordered_json h;
    h["ld"] = e.ld;
    h["lc"] = e.lc;
    h["combined"] = e.combined;
    h["train_acc"] = e.train_acc;
    h["val_acc"] = e.val_acc;
    history.push_back(std::move(h));
  }
  j["history"] = std::move(history);
  nlohmann::ordered_json best;
  best["epoch"] = st.best_epoch;
  best["val_acc"] = st.best_val_acc;
  best["theta_v"] = detail::store_to_json(st.best_v);
  best["theta_a"] = detail::store_to_json(st.best_a);
  best["theta_f"] = detail::store_to_json(st.best_f);
  j["best"] = std::move(best);
  return j.dump(1);
}

inline TrainState checkpoint_from_json_text(const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("checkpoint: ") + e.what());
  }
  try {
    if (j.at("format").get<std::string>() != "dlg-checkpoint-v1") {
      throw ParseError("checkpoint: unknown format marker");
    }
    TrainState st;
    st.config = detail::train_config_from_json(j.at("train_config"));
    st.num_classes = j.at("num_classes").get<int>();
    st.feature_dim = j.at("feature_dim").get<int>();
    st.theta_v = detail::store_from_json(j.at("params").at("theta_v"));
    st.theta_a = detail::store_from_json(j.at("params").at("theta_a"));
    st.theta_f = detail::store_from_json(j.at("params").at("theta_f"));
    st.adam_v = detail::adam_from_json(j.at("adam").at("theta_v"));
    st.adam_a = detail::adam_from_json(j.at("adam").at("theta_a"));
    st.adam_f = detail::adam_from_json(j.at("adam").at("theta_f"));
    st.rng_state = j.at("rng_state").get<std::string>();
    st.epochs_done = j.at("epochs_done").get<int>();
    st.global_step = j.at("global_step").get<long>();
    for (const auto& h : j.at("history")) {
      EpochStats e;
      e.ld = h.at("ld").get<double>();
      e.lc = h.at("lc").get<double>();
      e.combined = h.at("combined").get<double>();
      e.train_acc = h.at("train_acc").get<double>();
      e.val_acc = h.at("val_acc").get<double>();
      st.history.push_back(e);
    }
    st.best_epoch = j.at("best").at("epoch").get<int>();
    st.best_val_acc = j.at("best").at("val_acc").get<double>();
    st.best_v = detail::store_from_json(j.at("best").at("theta_v"));
    st.best_a = detail::store_from_json(j.at("best").at("theta_a"));
    st.best_f = detail::store_from_json(j.at("best").at("theta_f"));
    return st;
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("checkpoint: ") + e.what());
  }
}

inline void save_checkpoint(const TrainState& st, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ParseError("cannot open '" + path + "' for writing");
  out << checkpoint_to_json(st);
  if (!out) throw ParseError("write failed for '" + path + "'");
}

inline TrainState load_checkpoint(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError("cannot open '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return checkpoint_from_json_text(buf.str());
}

}  // namespace dlg
