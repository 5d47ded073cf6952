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

#include "deltarank/io.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

#include "deltarank/errors.hpp"

namespace deltarank {

using nlohmann::json;

std::string format_double(double value) {
  if (std::isnan(value)) return "nan";
  if (std::isinf(value)) return value > 0 ? "inf" : "-inf";
  if (value == 0.0) return "0";  // folds -0 as well
  char buf[64];
  auto [end, ec] = std::to_chars(buf, buf + sizeof(buf), value);
  if (ec != std::errc()) throw std::runtime_error("format_double failed");
  return std::string(buf, end);
}

std::string read_text_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path.string() + "' for reading");
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

void write_text_file(const std::filesystem::path& path, const std::string& content) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open '" + path.string() + "' for writing");
  out << content;
  out.flush();
  if (!out) throw IoError("write to '" + path.string() + "' failed");
}

json schema_to_json(const FeatureSchema& schema) {
  json features = json::array();
  for (const auto& spec : schema.specs()) {
    json kind;
    if (spec.kind == FeatureKind::kVector) {
      kind = json{{"vector", spec.dim}};
    } else {
      kind = std::string(to_string(spec.kind));
    }
    features.push_back(
        json{{"name", spec.name}, {"kind", kind}, {"delta_candidate", spec.delta_candidate}});
  }
  return json{{"features", features}};
}

FeatureSchema schema_from_json(const json& j) {
  const json* list = &j;
  if (j.is_object()) {
    if (!j.contains("features")) throw SchemaError("schema object needs a 'features' array");
    list = &j.at("features");
  }
  if (!list->is_array()) throw SchemaError("schema features must be an array");
  std::vector<FeatureSpec> specs;
  for (const json& f : *list) {
    if (!f.is_object() || !f.contains("name") || !f.at("name").is_string() ||
        !f.contains("kind")) {
      throw SchemaError("feature spec needs string 'name' and 'kind'");
    }
    FeatureSpec spec;
    spec.name = f.at("name").get<std::string>();
    const json& kind = f.at("kind");
    if (kind == "numeric") {
      spec.kind = FeatureKind::kNumeric;
    } else if (kind == "categorical") {
      spec.kind = FeatureKind::kCategorical;
    } else if (kind.is_object() && kind.size() == 1 && kind.contains("vector") &&
               kind.at("vector").is_number_integer() && kind.at("vector").get<long long>() >= 1) {
      spec.kind = FeatureKind::kVector;
      spec.dim = kind.at("vector").get<std::size_t>();
    } else {
      throw SchemaError("feature '" + spec.name + "' has invalid kind " + kind.dump());
    }
    if (f.contains("delta_candidate")) {
      if (!f.at("delta_candidate").is_boolean()) {
        throw SchemaError("feature '" + spec.name + "': delta_candidate must be boolean");
      }
      spec.delta_candidate = f.at("delta_candidate").get<bool>();
    }
    specs.push_back(std::move(spec));
  }
  return FeatureSchema(std::move(specs));
}

FeatureSchema read_schema(const std::filesystem::path& path) {
  json j;
  try {
    j = json::parse(read_text_file(path));
  } catch (const json::parse_error& e) {
    throw SchemaError("schema file '" + path.string() + "' is not valid JSON: " + e.what());
  }
  return schema_from_json(j);
}

void write_schema(const FeatureSchema& schema, const std::filesystem::path& path) {
  write_text_file(path, schema_to_json(schema).dump(2) + "\n");
}

json session_to_json(const QuerySession& session) {
  json items = json::array();
  for (const Item& item : session.items) {
    json num = json::object();
    for (const auto& [name, value] : item.numeric) {
      num[name] = value ? json(*value) : json(nullptr);
    }
    json cat = json::object();
    for (const auto& [name, value] : item.categorical) cat[name] = value;
    json vec = json::object();
    for (const auto& [name, value] : item.vectors) {
      vec[name] = value ? json(*value) : json(nullptr);
    }
    items.push_back(json{{"item_id", item.item_id},
                         {"label", item.label},
                         {"num", std::move(num)},
                         {"cat", std::move(cat)},
                         {"vec", std::move(vec)}});
  }
  return json{{"query_id", session.query_id}, {"items", std::move(items)}};
}

namespace {

[[noreturn]] void malformed(const std::string& what) { throw ValidationError(what); }

void expect_keys(const json& obj, std::initializer_list<std::string_view> allowed,
                 const std::string& where) {
  for (const auto& [key, value] : obj.items()) {
    if (std::find(allowed.begin(), allowed.end(), key) == allowed.end()) {
      malformed(where + ": unexpected key '" + key + "'");
    }
  }
}

}  // namespace

QuerySession session_from_json(const json& j) {
  if (!j.is_object()) malformed("session must be a JSON object");
  expect_keys(j, {"query_id", "items"}, "session");
  if (!j.contains("query_id") || !j.at("query_id").is_string()) {
    malformed("session needs a string 'query_id'");
  }
  if (!j.contains("items") || !j.at("items").is_array()) {
    malformed("session needs an 'items' array");
  }
  QuerySession session;
  session.query_id = j.at("query_id").get<std::string>();
  for (const json& ji : j.at("items")) {
    if (!ji.is_object()) malformed("item must be a JSON object");
    expect_keys(ji, {"item_id", "label", "num", "cat", "vec"}, "item");
    Item item;
    if (!ji.contains("item_id") || !ji.at("item_id").is_string()) {
      malformed("item needs a string 'item_id'");
    }
    item.item_id = ji.at("item_id").get<std::string>();
    if (!ji.contains("label") || !ji.at("label").is_number_integer() ||
        ji.at("label").get<long long>() < 0 ||
        ji.at("label").get<long long>() > std::numeric_limits<int>::max()) {
      malformed("item '" + item.item_id + "' needs a non-negative integer 'label'");
    }
    item.label = ji.at("label").get<int>();
    if (ji.contains("num")) {
      const json& num = ji.at("num");
      if (!num.is_object()) malformed("'num' must be an object");
      for (const auto& [name, value] : num.items()) {
        if (value.is_null()) {
          item.numeric[name] = std::nullopt;
        } else if (value.is_number()) {
          item.numeric[name] = value.get<double>();
        } else {
          malformed("numeric feature '" + name + "' must be a number or null");
        }
      }
    }
    if (ji.contains("cat")) {
      const json& cat = ji.at("cat");
      if (!cat.is_object()) malformed("'cat' must be an object");
      for (const auto& [name, value] : cat.items()) {
        if (!value.is_string()) malformed("categorical feature '" + name + "' must be a string");
        item.categorical[name] = value.get<std::string>();
      }
    }
    if (ji.contains("vec")) {
      const json& vec = ji.at("vec");
      if (!vec.is_object()) malformed("'vec' must be an object");
      for (const auto& [name, value] : vec.items()) {
        if (value.is_null()) {
          item.vectors[name] = std::nullopt;
          continue;
        }
        if (!value.is_array()) malformed("vector feature '" + name + "' must be an array or null");
        std::vector<double> v;
        v.reserve(value.size());
        for (const json& x : value) {
          if (!x.is_number()) malformed("vector feature '" + name + "' has a non-number entry");
          v.push_back(x.get<double>());
        }
        item.vectors[name] = std::move(v);
      }
    }
    session.items.push_back(std::move(item));
  }
  return session;
}

Dataset parse_sessions(const std::filesystem::path& path, const FeatureSchema& schema) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path.string() + "' for reading");
  Dataset dataset;
  dataset.schema = schema;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.find_first_not_of(" \t") == std::string::npos) continue;
    try {
      json j = json::parse(line);
      QuerySession session = session_from_json(j);
      validate_session(session, schema);
      dataset.sessions.push_back(std::move(session));
    } catch (const json::exception& e) {
      throw ParseError(line_no, ParseError::Category::kMalformed,
                       std::string("malformed JSON: ") + e.what());
    } catch (const SchemaError& e) {
      throw ParseError(line_no, ParseError::Category::kSchemaViolation, e.what());
    } catch (const DuplicateItemError& e) {
      throw ParseError(line_no, ParseError::Category::kDuplicateItem, e.what());
    } catch (const ValidationError& e) {
      throw ParseError(line_no, ParseError::Category::kMalformed, e.what());
    }
  }
  if (in.bad()) throw IoError("read error on '" + path.string() + "'");
  return dataset;
}

std::string sessions_to_string(const Dataset& dataset) {
  std::string out;
  for (const auto& session : dataset.sessions) {
    out += session_to_json(session).dump();
    out += '\n';
  }
  return out;
}

void write_sessions(const Dataset& dataset, const std::filesystem::path& path) {
  write_text_file(path, sessions_to_string(dataset));
}

std::filesystem::path svmlight_feature_map_path(const std::filesystem::path& path) {
  std::filesystem::path p = path;
  p += ".fmap";
  return p;
}

namespace {

bool is_unsigned_integer(const std::string& s) {
  return !s.empty() && s.size() <= 18 &&
         std::all_of(s.begin(), s.end(), [](char c) { return c >= '0' && c <= '9'; });
}

}  // namespace

void export_svmlight(const Dataset& dataset, const std::filesystem::path& path) {
  for (const auto& spec : dataset.schema.specs()) {
    if (spec.kind != FeatureKind::kNumeric) {
      throw ValidationError("svmlight export needs numeric features only; '" + spec.name +
                            "' is " + std::string(to_string(spec.kind)));
    }
  }
  std::string out;
  for (std::size_t s = 0; s < dataset.sessions.size(); ++s) {
    const QuerySession& session = dataset.sessions[s];
    const std::string qid = is_unsigned_integer(session.query_id)
                                ? std::to_string(std::stoull(session.query_id))
                                : std::to_string(s + 1);
    for (const Item& item : session.items) {
      out += std::to_string(item.label);
      out += " qid:";
      out += qid;
      const auto& specs = dataset.schema.specs();
      for (std::size_t f = 0; f < specs.size(); ++f) {
        auto it = item.numeric.find(specs[f].name);
        if (it == item.numeric.end() || !it->second) continue;
        out += ' ';
        out += std::to_string(f + 1);
        out += ':';
        out += format_double(*it->second);
      }
      out += '\n';
    }
  }
  std::string fmap;
  const auto& specs = dataset.schema.specs();
  for (std::size_t f = 0; f < specs.size(); ++f) {
    fmap += std::to_string(f + 1) + "\t" + specs[f].name + "\n";
  }
  write_text_file(path, out);
  write_text_file(svmlight_feature_map_path(path), fmap);
}

}  // namespace deltarank
