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

#include "dlg/graph.hpp"
#include "dlg/text.hpp"

namespace dlg {

// Line-delimited dataset format. The first line is a header object with keys
// C, d_x, provenance; every following line is one graph record with keys
// n, edges (i<j pair list), x (row-major features), y. Numbers are written as
// the shortest decimal that round-trips, so save/load is lossless.

inline std::string dataset_to_string(const Dataset& ds) {
  validate_dataset(ds);
  std::ostringstream out;
  nlohmann::ordered_json header;
  header["C"] = ds.num_classes;
  header["d_x"] = ds.feature_dim;
  header["provenance"] = ds.provenance;
  out << header.dump() << "\n";
  for (const Graph& g : ds.graphs) {
    nlohmann::ordered_json rec;
    rec["n"] = g.n;
    nlohmann::ordered_json edges = nlohmann::ordered_json::array();
    for (int i = 0; i < g.n; ++i) {
      for (int j = i + 1; j < g.n; ++j) {
        if (g.adjacency(i, j) != 0.0) edges.push_back({i, j});
      }
    }
    rec["edges"] = std::move(edges);
    nlohmann::ordered_json x = nlohmann::ordered_json::array();
    for (Eigen::Index r = 0; r < g.features.rows(); ++r) {
      for (Eigen::Index c = 0; c < g.features.cols(); ++c) {
        x.push_back(g.features(r, c));
      }
    }
    rec["x"] = std::move(x);
    rec["y"] = g.label;
    out << rec.dump() << "\n";
  }
  return out.str();
}

inline void save_dataset(const Dataset& ds, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ParseError("cannot open '" + path + "' for writing");
  out << dataset_to_string(ds);
  if (!out) throw ParseError("write failed for '" + path + "'");
}

inline Dataset dataset_from_stream(std::istream& in,
                                   const std::string& origin) {
  Dataset ds;
  std::string line;
  std::size_t line_no = 0;
  bool have_header = false;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    nlohmann::json rec;
    try {
      rec = nlohmann::json::parse(line);
    } catch (const nlohmann::json::exception& e) {
      throw ParseError(origin + ": line " + std::to_string(line_no) + ": " +
                       e.what());
    }
    try {
      if (!have_header) {
        ds.num_classes = rec.at("C").get<int>();
        ds.feature_dim = rec.at("d_x").get<int>();
        ds.provenance = rec.value("provenance", std::string());
        have_header = true;
        continue;
      }
      Graph g;
      g.n = rec.at("n").get<int>();
      if (g.n < 1) {
        throw ParseError(origin + ": line " + std::to_string(line_no) +
                         ": n must be >= 1");
      }
      g.adjacency = Matrix::Zero(g.n, g.n);
      for (const auto& e : rec.at("edges")) {
        int i = e.at(0).get<int>();
        int j = e.at(1).get<int>();
        if (i < 0 || j < 0 || i >= g.n || j >= g.n || i == j) {
          throw ParseError(origin + ": line " + std::to_string(line_no) +
                           ": edge (" + std::to_string(i) + "," +
                           std::to_string(j) + ") out of range");
        }
        g.adjacency(i, j) = 1.0;
        g.adjacency(j, i) = 1.0;
      }
      const auto& x = rec.at("x");
      if (static_cast<Eigen::Index>(x.size()) !=
          static_cast<Eigen::Index>(g.n) * ds.feature_dim) {
        throw SchemaError(origin + ": line " + std::to_string(line_no) +
                          ": feature length " + std::to_string(x.size()) +
                          " != n*d_x = " +
                          std::to_string(g.n * ds.feature_dim));
      }
      g.features = Matrix(g.n, ds.feature_dim);
      Eigen::Index idx = 0;
      for (Eigen::Index r = 0; r < g.n; ++r) {
        for (Eigen::Index c = 0; c < ds.feature_dim; ++c) {
          g.features(r, c) = x.at(static_cast<std::size_t>(idx++)).get<double>();
        }
      }
      g.label = rec.at("y").get<int>();
      if (g.label < 0 || g.label >= ds.num_classes) {
        throw SchemaError(origin + ": line " + std::to_string(line_no) +
                          ": label " + std::to_string(g.label) +
                          " out of range for C=" +
                          std::to_string(ds.num_classes));
      }
      ds.graphs.push_back(std::move(g));
    } catch (const nlohmann::json::exception& e) {
      throw ParseError(origin + ": line " + std::to_string(line_no) + ": " +
                       e.what());
    }
  }
  if (!have_header) throw ParseError(origin + ": line 1: missing header record");
  validate_dataset(ds);
  return ds;
}

inline Dataset load_dataset(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError("cannot open '" + path + "'");
  return dataset_from_stream(in, path);
}

}  // namespace dlg
