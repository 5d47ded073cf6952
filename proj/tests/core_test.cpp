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

#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <set>
#include <sstream>

#include "deltarank/dataset_ops.hpp"
#include "deltarank/errors.hpp"
#include "deltarank/io.hpp"
#include "test_util.hpp"

namespace deltarank {
namespace {

using testing::TempDir;

FeatureSchema small_schema() {
  return FeatureSchema({{"price", FeatureKind::kNumeric, 0, true},
                        {"condition", FeatureKind::kCategorical, 0, true},
                        {"emb", FeatureKind::kVector, 4, false}});
}

std::string lines(std::initializer_list<std::string> parts) {
  std::string out;
  for (const auto& p : parts) out += p + "\n";
  return out;
}

const std::string kSession1 =
    R"({"query_id":"q1","items":[{"item_id":"a","label":1,"num":{"price":12.5},"cat":{"condition":"new"},"vec":{"emb":[0.1,0.2,0.3,0.4]}},{"item_id":"b","label":0,"num":{"price":null},"cat":{"condition":"used"},"vec":{"emb":null}}]})";
const std::string kSession2 =
    R"({"query_id":"q2","items":[{"item_id":"c","label":0,"num":{"price":3},"cat":{"condition":"new"},"vec":{"emb":[1,0,0,0]}}]})";

TEST(FeatureSchemaTest, RejectsBrokenInvariants) {
  EXPECT_THROW(FeatureSchema(std::vector<FeatureSpec>{}), SchemaError);
  EXPECT_THROW(FeatureSchema({{"a", FeatureKind::kNumeric, 0, false}, {"a", FeatureKind::kNumeric, 0, false}}),
               SchemaError);
  EXPECT_THROW(FeatureSchema({{"v", FeatureKind::kVector, 0, false}}), SchemaError);
  EXPECT_THROW(FeatureSchema({{"", FeatureKind::kNumeric, 0, false}}), SchemaError);
  FeatureSchema s = small_schema();
  EXPECT_EQ(s.find("condition"), 1u);
  EXPECT_FALSE(s.find("nope").has_value());
  EXPECT_FALSE(s.all_numeric());
  EXPECT_THROW(s.with_appended({{"price", FeatureKind::kNumeric, 0, false}}), SchemaError);
}

TEST(FeatureSchemaTest, JsonRoundTrip) {
  FeatureSchema s = small_schema();
  nlohmann::json j = schema_to_json(s);
  EXPECT_EQ(j["features"][2]["kind"]["vector"], 4);
  EXPECT_EQ(j["features"][1]["kind"], "categorical");
  EXPECT_EQ(schema_from_json(j), s);
}

TEST(ValidationTest, ItemConformance) {
  FeatureSchema s = small_schema();
  Item ok{"a", 1, {{"price", 1.0}}, {{"condition", "new"}}, {{"emb", std::vector<double>{1, 2, 3, 4}}}};
  EXPECT_NO_THROW(validate_item(ok, s));

  Item absent = ok;
  absent.numeric.clear();
  EXPECT_THROW(validate_item(absent, s), SchemaError);

  Item bad_dim = ok;
  bad_dim.vectors["emb"] = std::vector<double>{1, 2, 3};
  EXPECT_THROW(validate_item(bad_dim, s), SchemaError);

  Item unknown = ok;
  unknown.numeric["weight"] = 2.0;
  EXPECT_THROW(validate_item(unknown, s), SchemaError);

  Item nan = ok;
  nan.numeric["price"] = std::numeric_limits<double>::quiet_NaN();
  EXPECT_THROW(validate_item(nan, s), SchemaError);

  Item negative = ok;
  negative.label = -1;
  EXPECT_THROW(validate_item(negative, s), SchemaError);

  Item missing_ok = ok;
  missing_ok.numeric["price"] = std::nullopt;
  missing_ok.vectors["emb"] = std::nullopt;
  EXPECT_NO_THROW(validate_item(missing_ok, s));
}

TEST(ValidationTest, SessionInvariants) {
  FeatureSchema s = small_schema();
  Item a{"a", 0, {{"price", 1.0}}, {{"condition", "new"}}, {{"emb", std::nullopt}}};
  EXPECT_THROW(validate_session(QuerySession{"q", {}}, s), ValidationError);
  EXPECT_THROW(validate_session(QuerySession{"q", {a, a}}, s), DuplicateItemError);
  Item b = a;
  b.item_id = "b";
  EXPECT_NO_THROW(validate_session(QuerySession{"q", {a, b}}, s));
}

TEST(ParseSessionsTest, PreservesOrder) {
  TempDir dir;
  write_text_file(dir / "s.jsonl", lines({kSession1, "", kSession2}));
  Dataset d = parse_sessions(dir / "s.jsonl", small_schema());
  ASSERT_EQ(d.sessions.size(), 2u);
  EXPECT_EQ(d.sessions[0].query_id, "q1");
  EXPECT_EQ(d.sessions[1].query_id, "q2");
  ASSERT_EQ(d.sessions[0].items.size(), 2u);
  EXPECT_EQ(d.sessions[0].items[0].item_id, "a");
  EXPECT_EQ(d.sessions[0].items[1].item_id, "b");
  EXPECT_EQ(d.sessions[0].items[0].numeric.at("price"), 12.5);
  EXPECT_FALSE(d.sessions[0].items[1].numeric.at("price").has_value());
}

TEST(ParseSessionsTest, VectorDimMismatchNamesFeatureAndLine) {
  TempDir dir;
  std::string bad = kSession2;
  bad.replace(bad.find("[1,0,0,0]"), 9, "[1,0,0]");
  write_text_file(dir / "s.jsonl", lines({kSession1, bad}));
  try {
    parse_sessions(dir / "s.jsonl", small_schema());
    FAIL() << "expected ParseError";
  } catch (const ParseError& e) {
    EXPECT_EQ(e.line(), 2u);
    EXPECT_EQ(e.category(), ParseError::Category::kSchemaViolation);
    EXPECT_NE(std::string(e.what()).find("emb"), std::string::npos);
    EXPECT_NE(std::string(e.what()).find("line 2"), std::string::npos);
  }
}

// Each mutation of a valid line must be rejected with exactly the expected
// category; harmless rewrites must be accepted.
TEST(ParseSessionsTest, MutationsMapToDocumentedCategories) {
  using C = ParseError::Category;
  struct Case {
    std::string from, to;
    std::optional<C> expected;
  };
  const std::vector<Case> cases = {
      {R"("price":12.5)", R"("price":"12.5")", C::kMalformed},
      {R"({"query_id":"q1",)", R"({"query_id":"q1",)", std::nullopt},
      {R"("price":12.5)", R"("weight":12.5)", C::kSchemaViolation},
      {R"("item_id":"b")", R"("item_id":"a")", C::kDuplicateItem},
      {R"([0.1,0.2,0.3,0.4])", R"([0.1,0.2,0.3,0.4,0.5])", C::kSchemaViolation},
      {R"("condition":"new")", R"("condition":null)", C::kMalformed},
      {R"("label":1)", R"("label":-1)", C::kMalformed},
      {R"("label":1)", R"("label":1.5)", C::kMalformed},
      {R"({"query_id":"q1",)", R"({"query_id":"q1","extra":1,)", C::kMalformed},
      {R"("items":[)", R"("items":)", C::kMalformed},
      {R"("price":12.5)", R"("price":  1.25e1)", std::nullopt},
      {R"("price":12.5)", R"("price":null)", std::nullopt},
      {R"("label":1)", R"("label":2)", std::nullopt},
  };
  TempDir dir;
  for (const auto& c : cases) {
    std::string line = kSession1;
    const auto pos = line.find(c.from);
    ASSERT_NE(pos, std::string::npos) << c.from;
    line.replace(pos, c.from.size(), c.to);
    write_text_file(dir / "m.jsonl", lines({kSession2, line}));
    if (!c.expected) {
      EXPECT_NO_THROW(parse_sessions(dir / "m.jsonl", small_schema())) << line;
      continue;
    }
    try {
      parse_sessions(dir / "m.jsonl", small_schema());
      ADD_FAILURE() << "accepted: " << line;
    } catch (const ParseError& e) {
      EXPECT_EQ(e.category(), *c.expected) << line << " -> " << e.what();
      EXPECT_EQ(e.line(), 2u);
    }
  }
}

TEST(ParseSessionsTest, MissingFileIsIoError) {
  EXPECT_THROW(parse_sessions("/nonexistent/sessions.jsonl", small_schema()), IoError);
}

TEST(WriteSessionsTest, EmptyDatasetGivesEmptyFile) {
  TempDir dir;
  Dataset d{small_schema(), {}, SplitTag::kUnsplit};
  write_sessions(d, dir / "e.jsonl");
  EXPECT_EQ(read_text_file(dir / "e.jsonl"), "");
}

TEST(WriteSessionsTest, CanonicalAndByteIdentical) {
  TempDir dir;
  write_text_file(dir / "s.jsonl", lines({kSession1, kSession2}));
  Dataset d = parse_sessions(dir / "s.jsonl", small_schema());
  write_sessions(d, dir / "a.jsonl");
  write_sessions(d, dir / "b.jsonl");
  const std::string a = read_text_file(dir / "a.jsonl");
  EXPECT_EQ(a, read_text_file(dir / "b.jsonl"));
  EXPECT_EQ(std::count(a.begin(), a.end(), '\n'), 2);
  // Keys come out sorted.
  EXPECT_LT(a.find("\"items\""), a.find("\"query_id\""));
  EXPECT_LT(a.find("\"cat\""), a.find("\"item_id\""));
}

TEST(WriteSessionsTest, RoundTripOnRandomDatasets) {
  TempDir dir;
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    Rng rng(seed);
    Dataset d = testing::random_dataset(rng, 1 + rng.uniform_index(8), 1, 12);
    write_sessions(d, dir / "r.jsonl");
    const std::string first = read_text_file(dir / "r.jsonl");
    Dataset back = parse_sessions(dir / "r.jsonl", d.schema);
    ASSERT_EQ(back, d) << "seed " << seed;
    write_sessions(back, dir / "r2.jsonl");
    ASSERT_EQ(read_text_file(dir / "r2.jsonl"), first) << "seed " << seed;
  }
}

TEST(FormatDoubleTest, ShortestRoundTrip) {
  EXPECT_EQ(format_double(2.5), "2.5");
  EXPECT_EQ(format_double(0.1), "0.1");
  EXPECT_EQ(format_double(3.0), "3");
  EXPECT_EQ(format_double(-0.25), "-0.25");
  Rng rng(3);
  for (int i = 0; i < 1000; ++i) {
    const double x = testing::random_value(rng);
    EXPECT_EQ(std::stod(format_double(x)), x);
  }
}

Dataset numeric_dataset(std::vector<std::pair<std::string, std::vector<std::vector<std::optional<double>>>>> sessions,
                        std::vector<std::string> names) {
  std::vector<FeatureSpec> specs;
  for (const auto& n : names) specs.push_back({n, FeatureKind::kNumeric, 0, true});
  Dataset d{FeatureSchema(specs), {}, SplitTag::kUnsplit};
  for (auto& [qid, rows] : sessions) {
    QuerySession s{qid, {}};
    for (std::size_t k = 0; k < rows.size(); ++k) {
      Item it;
      it.item_id = "i" + std::to_string(k);
      it.label = k == 0 ? 1 : 0;
      for (std::size_t f = 0; f < names.size(); ++f) it.numeric[names[f]] = rows[k][f];
      s.items.push_back(it);
    }
    d.sessions.push_back(s);
  }
  return d;
}

TEST(SvmlightTest, LineGrammar) {
  TempDir dir;
  Dataset d = numeric_dataset({{"7", {{2.5}}}}, {"price"});
  export_svmlight(d, dir / "x.svm");
  EXPECT_EQ(read_text_file(dir / "x.svm"), "1 qid:7 1:2.5\n");
  EXPECT_EQ(read_text_file(svmlight_feature_map_path(dir / "x.svm")), "1\tprice\n");
}

TEST(SvmlightTest, MissingValuesOmittedAndOrdinalQids) {
  TempDir dir;
  Dataset d = numeric_dataset({{"abc", {{1.0, std::nullopt, 3.0}, {std::nullopt, 0.5, 1e-7}}},
                               {"12", {{0.0, 0.0, 0.0}}}},
                              {"a", "b", "c"});
  export_svmlight(d, dir / "x.svm");
  EXPECT_EQ(read_text_file(dir / "x.svm"),
            "1 qid:1 1:1 3:3\n"
            "0 qid:1 2:0.5 3:1e-07\n"
            "1 qid:12 1:0 2:0 3:0\n");
  const std::string fmap = read_text_file(svmlight_feature_map_path(dir / "x.svm"));
  EXPECT_EQ(fmap, "1\ta\n2\tb\n3\tc\n");
}

TEST(SvmlightTest, EveryLineMatchesGrammar) {
  TempDir dir;
  Rng rng(17);
  Dataset raw = testing::random_dataset(rng, 20, 1, 10);
  Dataset d = to_numeric(raw, build_vocabulary(raw));
  export_svmlight(d, dir / "x.svm");
  std::istringstream in(read_text_file(dir / "x.svm"));
  std::string line;
  std::size_t n_lines = 0;
  while (std::getline(in, line)) {
    ++n_lines;
    std::istringstream tok(line);
    std::string label, qid, pair;
    tok >> label >> qid;
    EXPECT_TRUE(std::all_of(label.begin(), label.end(), ::isdigit)) << line;
    ASSERT_EQ(qid.rfind("qid:", 0), 0u) << line;
    EXPECT_GE(std::stoull(qid.substr(4)), 1u);
    long prev_fid = 0;
    while (tok >> pair) {
      const auto colon = pair.find(':');
      ASSERT_NE(colon, std::string::npos) << line;
      const long fid = std::stol(pair.substr(0, colon));
      EXPECT_GT(fid, prev_fid) << line;
      EXPECT_LE(fid, static_cast<long>(d.schema.size()));
      prev_fid = fid;
      std::size_t used = 0;
      std::stod(pair.substr(colon + 1), &used);
      EXPECT_EQ(used, pair.size() - colon - 1) << line;
    }
    EXPECT_EQ(line.find("  "), std::string::npos);
    EXPECT_NE(line.back(), ' ');
  }
  std::size_t n_items = 0;
  for (const auto& s : d.sessions) n_items += s.items.size();
  EXPECT_EQ(n_lines, n_items);
}

TEST(SvmlightTest, RejectsRawCategoricalAndVector) {
  TempDir dir;
  Rng rng(1);
  Dataset d{small_schema(), {}, SplitTag::kUnsplit};
  d.sessions.push_back({"1", {testing::random_item(rng, d.schema, "a", 0.0)}});
  EXPECT_THROW(export_svmlight(d, dir / "x.svm"), ValidationError);
}

Dataset sessions_dataset(std::size_t n) {
  return numeric_dataset([&] {
    std::vector<std::pair<std::string, std::vector<std::vector<std::optional<double>>>>> s;
    for (std::size_t i = 0; i < n; ++i) s.push_back({"q" + std::to_string(i), {{double(i)}, {0.0}}});
    return s;
  }(), {"x"});
}

std::set<std::string> query_ids(const Dataset& d) {
  std::set<std::string> ids;
  for (const auto& s : d.sessions) ids.insert(s.query_id);
  return ids;
}

TEST(SplitTest, EightyTwenty) {
  auto [train, test] = split_dataset(sessions_dataset(10), 0.8, 42);
  EXPECT_EQ(train.sessions.size(), 8u);
  EXPECT_EQ(test.sessions.size(), 2u);
  EXPECT_EQ(train.split_tag, SplitTag::kTrain);
  EXPECT_EQ(test.split_tag, SplitTag::kTest);
}

TEST(SplitTest, PartitionAndDeterminism) {
  for (std::size_t n : {2u, 3u, 10u, 57u}) {
    for (double f : {0.01, 0.5, 0.8, 0.99}) {
      Dataset d = sessions_dataset(n);
      auto [a_train, a_test] = split_dataset(d, f, 5);
      auto [b_train, b_test] = split_dataset(d, f, 5);
      EXPECT_EQ(a_train, b_train);
      EXPECT_EQ(a_test, b_test);
      const std::size_t expect =
          std::clamp<std::size_t>(static_cast<std::size_t>(std::llround(f * double(n))), 1, n - 1);
      EXPECT_EQ(a_train.sessions.size(), expect);
      auto tr = query_ids(a_train), te = query_ids(a_test);
      std::set<std::string> all = tr;
      all.insert(te.begin(), te.end());
      EXPECT_EQ(all, query_ids(d));
      EXPECT_EQ(tr.size() + te.size(), n);
      // Original relative order kept.
      auto is_ordered = [](const Dataset& part) {
        for (std::size_t i = 1; i < part.sessions.size(); ++i) {
          if (std::stoi(part.sessions[i - 1].query_id.substr(1)) >=
              std::stoi(part.sessions[i].query_id.substr(1))) {
            return false;
          }
        }
        return true;
      };
      EXPECT_TRUE(is_ordered(a_train));
      EXPECT_TRUE(is_ordered(a_test));
    }
  }
}

TEST(SplitTest, SeedChangesMembership) {
  Dataset d = sessions_dataset(50);
  EXPECT_NE(query_ids(split_dataset(d, 0.8, 1).second), query_ids(split_dataset(d, 0.8, 2).second));
}

TEST(SplitTest, Errors) {
  EXPECT_THROW(split_dataset(sessions_dataset(1), 0.8, 0), ValidationError);
  EXPECT_THROW(split_dataset(sessions_dataset(5), 0.0, 0), ValidationError);
  EXPECT_THROW(split_dataset(sessions_dataset(5), 1.0, 0), ValidationError);
}

TEST(ToNumericTest, OneHotAndVectorColumns) {
  FeatureSchema s = small_schema();
  Item a{"a", 1, {{"price", 2.0}}, {{"condition", "new"}}, {{"emb", std::vector<double>{1, 2, 3, 4}}}};
  Item b{"b", 0, {{"price", std::nullopt}}, {{"condition", "refurb"}}, {{"emb", std::nullopt}}};
  Dataset d{s, {{"q", {a, b}}}, SplitTag::kUnsplit};
  CategoricalVocabulary vocab{{"condition", {"new", "used"}}};
  Dataset n = to_numeric(d, vocab);
  std::vector<std::string> names;
  for (const auto& spec : n.schema.specs()) names.push_back(spec.name);
  EXPECT_EQ(names, (std::vector<std::string>{"price", "condition=new", "condition=used", "emb[0]",
                                             "emb[1]", "emb[2]", "emb[3]"}));
  const Item& na = n.sessions[0].items[0];
  const Item& nb = n.sessions[0].items[1];
  EXPECT_EQ(na.numeric.at("condition=new"), 1.0);
  EXPECT_EQ(na.numeric.at("condition=used"), 0.0);
  EXPECT_EQ(na.numeric.at("emb[2]"), 3.0);
  EXPECT_EQ(nb.numeric.at("condition=new"), 0.0);
  EXPECT_EQ(nb.numeric.at("condition=used"), 0.0);
  EXPECT_FALSE(nb.numeric.at("price").has_value());
  EXPECT_FALSE(nb.numeric.at("emb[0]").has_value());
  EXPECT_TRUE(n.schema.all_numeric());

  EXPECT_EQ(vocabulary_from_columns(s, names), vocab);
}

}  // namespace
}  // namespace deltarank
