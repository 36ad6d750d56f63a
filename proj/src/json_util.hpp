// SPDX-License-Identifier: Apache-2.0
//
// chartkit - channel charting from CSI datasets with triplet-loss networks
// Copyright (C) 2026 The chartkit contributors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
// http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
// ------------------------------------------------------------------------

// Strict JSON field access for the config loaders: unknown keys and type
// mismatches become ConfigError.

#pragma once

#include "chartkit/error.hpp"

#include "json.hpp"

#include <Eigen/Core>

#include <filesystem>
#include <fstream>
#include <initializer_list>
#include <sstream>
#include <string>
#include <vector>

namespace chartkit::detail {

using Json = nlohmann::json;

inline Json parse_json_text(const std::string& text, const std::string& origin)
{
    try {
        return Json::parse(text);
    } catch (const Json::parse_error& e) {
        throw ConfigError(origin + ": " + e.what());
    }
}

inline Json read_json_file(const std::filesystem::path& path)
{
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config " + path.string());
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_json_text(ss.str(), path.string());
}

inline void reject_unknown_keys(const Json& obj, std::initializer_list<const char*> known, const std::string& where)
{
    if (!obj.is_object()) throw ConfigError(where + ": expected an object");
    for (const auto& [key, value] : obj.items()) {
        bool ok = false;
        for (const char* k : known) ok = ok || key == k;
        if (!ok) throw ConfigError(where + ": unknown key \"" + key + "\"");
    }
}

template <class T>
void get_opt(const Json& obj, const char* key, T& out, const std::string& where)
{
    if (!obj.contains(key)) return;
    try {
        out = obj.at(key).get<T>();
    } catch (const Json::exception& e) {
        throw ConfigError(where + "." + key + ": " + e.what());
    }
}

inline Eigen::VectorXd to_vector(const Json& j, const std::string& where)
{
    try {
        const auto v = j.get<std::vector<double>>();
        return Eigen::Map<const Eigen::VectorXd>(v.data(), static_cast<Eigen::Index>(v.size()));
    } catch (const Json::exception& e) {
        throw ConfigError(where + ": " + e.what());
    }
}

inline Eigen::MatrixXd to_matrix(const Json& j, const std::string& where)
{
    try {
        const auto rows = j.get<std::vector<std::vector<double>>>();
        if (rows.empty()) return {};
        Eigen::MatrixXd m(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(rows.front().size()));
        for (std::size_t r = 0; r < rows.size(); ++r) {
            if (rows[r].size() != rows.front().size()) throw ConfigError(where + ": ragged matrix");
            for (std::size_t c = 0; c < rows[r].size(); ++c)
                m(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = rows[r][c];
        }
        return m;
    } catch (const Json::exception& e) {
        throw ConfigError(where + ": " + e.what());
    }
}

inline Json from_vector(const Eigen::VectorXd& v) { return std::vector<double>(v.data(), v.data() + v.size()); }

inline Json from_matrix(const Eigen::MatrixXd& m)
{
    Json rows = Json::array();
    for (Eigen::Index r = 0; r < m.rows(); ++r) {
        std::vector<double> row(static_cast<std::size_t>(m.cols()));
        for (Eigen::Index c = 0; c < m.cols(); ++c) row[static_cast<std::size_t>(c)] = m(r, c);
        rows.push_back(row);
    }
    return rows;
}

} // namespace chartkit::detail
