// Copyright 2026 The deltarank Authors. All Rights Reserved.
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

#include <filesystem>
#include <string>

#include "json.hpp"

#include "deltarank/core.hpp"

namespace deltarank {

// Shortest decimal form that round-trips to the same double ("2.5", "0.1",
// "1e-07"). Used everywhere a number is written as text.
std::string format_double(double value);

nlohmann::json schema_to_json(const FeatureSchema& schema);
FeatureSchema schema_from_json(const nlohmann::json& j);
FeatureSchema read_schema(const std::filesystem::path& path);
void write_schema(const FeatureSchema& schema, const std::filesystem::path& path);

nlohmann::json session_to_json(const QuerySession& session);
// Structural decoding only; schema conformance is checked by the caller.
QuerySession session_from_json(const nlohmann::json& j);

// Reads a JSON-Lines sessions file. Blank lines are skipped; every error
// carries the 1-based line number.
Dataset parse_sessions(const std::filesystem::path& path, const FeatureSchema& schema);

// Canonical JSON-Lines: sorted keys, shortest round-trip numbers, one session
// per line. Identical datasets give byte-identical files.
void write_sessions(const Dataset& dataset, const std::filesystem::path& path);
std::string sessions_to_string(const Dataset& dataset);

// SVMLight ranking format, one line per item:
//   <label> qid:<q> <fid>:<value> ...
// Feature ids follow schema order starting at 1; missing values are omitted.
// <q> is the query_id when it is a non-negative integer, otherwise the
// 1-based session ordinal. Also writes `<path>.fmap` with "<fid>\t<name>"
// lines. Throws ValidationError if any feature is not numeric.
void export_svmlight(const Dataset& dataset, const std::filesystem::path& path);

std::filesystem::path svmlight_feature_map_path(const std::filesystem::path& path);

std::string read_text_file(const std::filesystem::path& path);
void write_text_file(const std::filesystem::path& path, const std::string& content);

}  // namespace deltarank
