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
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "dlg/graph.hpp"
#include "dlg/text.hpp"
#include "dlg/trainer.hpp"

namespace dlg {

// Key-value config files: one `key = value` per line, '#' starts a comment.
// Keys mirror the TrainConfig / BiasSpec field names exactly; CLI flags
// override file values.

inline std::map<std::string, std::string> parse_kv_text(
    const std::string& text, const std::string& origin) {
  std::map<std::string, std::string> kv;
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
    if (key.empty()) {
      throw ParseError(origin + ": line " + std::to_string(line_no) +
                       ": empty key");
    }
    kv[key] = value;
  }
  return kv;
}

inline std::map<std::string, std::string> parse_kv_file(
    const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError("cannot open config '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_kv_text(buf.str(), path);
}

// `0.333` (and `1/3`) mean exactly one third.
inline double parse_bias_value(const std::string& text) {
  if (text == "0.333" || text == "1/3") return 1.0 / 3.0;
  return parse_double(text);
}

inline std::string bias_label(double bias) {
  if (std::abs(bias - 1.0 / 3.0) < 1e-12) return "0.333";
  return to_shortest(bias);
}

// Applies one key to a TrainConfig; returns false if the key is not a
// TrainConfig field.
inline bool apply_train_config_field(TrainConfig& cfg, const std::string& key,
                                     const std::string& value) {
  try {
    if (key == "method") cfg.method = parse_method(value);
    else if (key == "alpha") cfg.alpha = parse_double(value);
    else if (key == "combiner") cfg.combiner = parse_combiner(value);
    else if (key == "alpha_d") cfg.alpha_d = parse_double(value);
    else if (key == "lr") cfg.lr = parse_double(value);
    else if (key == "epochs") cfg.epochs = static_cast<int>(parse_int(value));
    else if (key == "batch_size") cfg.batch_size = static_cast<int>(parse_int(value));
    else if (key == "tau") cfg.tau = parse_double(value);
    else if (key == "K") cfg.K = parse_double(value);
    else if (key == "seed") cfg.seed = static_cast<std::uint64_t>(parse_int(value));
    else if (key == "ablation") cfg.ablation = parse_ablation(value);
    else if (key == "ld_form") cfg.ld_form = parse_ld_form(value);
    else if (key == "detach_qv_target") cfg.detach_qv_target = (value == "true" || value == "1");
    else if (key == "layers") cfg.layers = static_cast<int>(parse_int(value));
    else if (key == "hidden_dim") cfg.hidden_dim = static_cast<int>(parse_int(value));
    else if (key == "activation") cfg.activation = parse_activation(value);
    else if (key == "scorer_hidden") cfg.scorer_hidden = static_cast<int>(parse_int(value));
    else if (key == "scorer_out") cfg.scorer_out = static_cast<int>(parse_int(value));
    else if (key == "validation_fraction") cfg.validation_fraction = parse_double(value);
    else if (key == "warmup_epochs") cfg.warmup_epochs = static_cast<int>(parse_int(value));
    else return false;
  } catch (const ParseError& e) {
    throw ParameterError("config field '" + key + "': " + e.what());
  }
  return true;
}

inline bool apply_bias_spec_field(BiasSpec& spec, const std::string& key,
                                  const std::string& value) {
  try {
    if (key == "family") spec.family = parse_family(value);
    else if (key == "bias") spec.bias = parse_bias_value(value);
    else if (key == "train_size") spec.train_size = static_cast<int>(parse_int(value));
    else if (key == "test_size") spec.test_size = static_cast<int>(parse_int(value));
    else if (key == "feature_dim") spec.feature_dim = static_cast<int>(parse_int(value));
    else return false;
  } catch (const ParseError& e) {
    throw ParameterError("config field '" + key + "': " + e.what());
  }
  return true;
}

// Applies a parsed config map; every key must belong to one of the two
// structs, otherwise the offending field is named.
inline void apply_config(const std::map<std::string, std::string>& kv,
                         TrainConfig& cfg, BiasSpec& spec) {
  for (const auto& [key, value] : kv) {
    if (apply_train_config_field(cfg, key, value)) continue;
    if (apply_bias_spec_field(spec, key, value)) continue;
    throw ParameterError("unknown config field '" + key + "'");
  }
}

inline std::vector<std::pair<std::string, std::string>> train_config_kv(
    const TrainConfig& cfg) {
  return {
      {"method", method_name(cfg.method)},
      {"alpha", to_shortest(cfg.alpha)},
      {"combiner", combiner_name(cfg.combiner)},
      {"alpha_d", to_shortest(cfg.alpha_d)},
      {"lr", to_shortest(cfg.lr)},
      {"epochs", std::to_string(cfg.epochs)},
      {"batch_size", std::to_string(cfg.batch_size)},
      {"tau", to_shortest(cfg.tau)},
      {"K", to_shortest(cfg.K)},
      {"seed", std::to_string(cfg.seed)},
      {"ablation", ablation_name(cfg.ablation)},
      {"ld_form", ld_form_name(cfg.ld_form)},
      {"detach_qv_target", cfg.detach_qv_target ? "true" : "false"},
      {"layers", std::to_string(cfg.layers)},
      {"hidden_dim", std::to_string(cfg.hidden_dim)},
      {"activation", activation_name(cfg.activation)},
      {"scorer_hidden", std::to_string(cfg.scorer_hidden)},
      {"scorer_out", std::to_string(cfg.scorer_out)},
      {"validation_fraction", to_shortest(cfg.validation_fraction)},
      {"warmup_epochs", std::to_string(cfg.warmup_epochs)},
  };
}

inline std::vector<std::pair<std::string, std::string>> bias_spec_kv(
    const BiasSpec& spec) {
  return {
      {"family", family_name(spec.family)},
      {"bias", to_shortest(spec.bias)},
      {"train_size", std::to_string(spec.train_size)},
      {"test_size", std::to_string(spec.test_size)},
      {"feature_dim", std::to_string(spec.feature_dim)},
  };
}

// Canonical config text: fixed field order, shortest numerals. Hashing this
// string identifies a run configuration.
inline std::string canonical_config_text(const TrainConfig& cfg,
                                         const BiasSpec& spec) {
  std::ostringstream out;
  for (const auto& [k, v] : train_config_kv(cfg)) out << k << " = " << v << "\n";
  for (const auto& [k, v] : bias_spec_kv(spec)) out << k << " = " << v << "\n";
  return out.str();
}

// Same text with method/ablation blanked; two ablation variants must agree on
// this remainder.
inline std::string canonical_config_text_without_variant(
    const TrainConfig& cfg, const BiasSpec& spec) {
  TrainConfig c = cfg;
  c.method = Method::Dlg;
  c.ablation = AblationMode::None;
  return canonical_config_text(c, spec);
}

inline std::string config_hash(const TrainConfig& cfg, const BiasSpec& spec) {
  return hash_hex(canonical_config_text(cfg, spec));
}

}  // namespace dlg
