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

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>
#include <sstream>

#include "deltarank/errors.hpp"
#include "deltarank/experiment.hpp"
#include "deltarank/io.hpp"

namespace deltarank {

namespace {

constexpr const char* kCsvHeader =
    "model_name,m,direction,mrr,mrr_diff,pct_change,ci_lo,ci_hi,n_queries,seed,run_id";

const std::vector<std::string> kDirectionOrder = {"prev", "next", "prev_next"};

std::vector<std::string> split_fields(const std::string& line) {
  std::vector<std::string> fields;
  std::string field;
  std::istringstream in(line);
  while (std::getline(in, field, ',')) fields.push_back(field);
  if (!line.empty() && line.back() == ',') fields.emplace_back();
  return fields;
}

double parse_number(const std::string& text) {
  if (text == "nan") return std::nan("");
  if (text == "inf") return HUGE_VAL;
  if (text == "-inf") return -HUGE_VAL;
  std::size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(text, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used != text.size() || text.empty()) throw ValidationError("bad number '" + text + "'");
  return v;
}

std::string fixed(double v, int decimals) {
  if (std::isnan(v)) return "nan";
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.*f", decimals, v);
  std::string s = buf;
  if (s.find_first_not_of("-0.") == std::string::npos) s = s.substr(s.front() == '-' ? 1 : 0);
  return s;
}

std::vector<std::string> present_directions(const std::vector<ResultRow>& rows) {
  std::vector<std::string> present;
  for (const auto& d : kDirectionOrder) {
    if (std::any_of(rows.begin(), rows.end(), [&](const ResultRow& r) { return r.direction == d; })) {
      present.push_back(d);
    }
  }
  return present;
}

std::string xml_escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '&': out += "&amp;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

}  // namespace

std::string results_csv(const std::vector<ResultRow>& rows) {
  std::string out = std::string(kCsvHeader) + "\n";
  for (const auto& r : rows) {
    out += r.model_name + "," + std::to_string(r.m) + "," + r.direction + "," +
           format_double(r.mrr) + "," + format_double(r.mrr_diff) + "," +
           format_double(r.pct_change) + "," + format_double(r.ci_lo) + "," +
           format_double(r.ci_hi) + "," + std::to_string(r.n_queries) + "," +
           std::to_string(r.seed) + "," + r.run_id + "\n";
  }
  return out;
}

std::vector<ResultRow> parse_results_csv(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line) || line != kCsvHeader) {
    throw ValidationError("results CSV does not start with the expected header");
  }
  std::vector<ResultRow> rows;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    auto f = split_fields(line);
    if (f.size() != 11) {
      throw ValidationError("results CSV line " + std::to_string(line_no) + " has " +
                            std::to_string(f.size()) + " fields, expected 11");
    }
    try {
      ResultRow r;
      r.model_name = f[0];
      r.m = std::stoi(f[1]);
      r.direction = f[2];
      r.mrr = parse_number(f[3]);
      r.mrr_diff = parse_number(f[4]);
      r.pct_change = parse_number(f[5]);
      r.ci_lo = parse_number(f[6]);
      r.ci_hi = parse_number(f[7]);
      r.n_queries = std::stoull(f[8]);
      r.seed = std::stoull(f[9]);
      r.run_id = f[10];
      rows.push_back(std::move(r));
    } catch (const std::logic_error&) {
      throw ValidationError("results CSV line " + std::to_string(line_no) + " is malformed");
    }
  }
  return rows;
}

std::string table_csv(const std::vector<ResultRow>& rows) {
  const auto dirs = present_directions(rows);
  std::map<int, std::map<std::string, double>> grid;
  for (const auto& r : rows) grid[r.m][r.direction] = r.pct_change;
  std::string out = "m";
  for (const auto& d : dirs) out += "," + d;
  out += "\n";
  for (const auto& [m, cells] : grid) {
    out += std::to_string(m);
    for (const auto& d : dirs) {
      out += ",";
      auto it = cells.find(d);
      if (it != cells.end()) out += fixed(it->second, 2);
    }
    out += "\n";
  }
  return out;
}

std::string svg_chart(const std::vector<ResultRow>& all_rows, const std::string& direction) {
  std::vector<ResultRow> rows;
  for (const auto& r : all_rows) {
    if (r.direction == direction) rows.push_back(r);
  }
  std::stable_sort(rows.begin(), rows.end(),
                   [](const ResultRow& a, const ResultRow& b) { return a.m < b.m; });

  constexpr double kWidth = 480, kHeight = 320;
  constexpr double kLeft = 70, kRight = 20, kTop = 40, kBottom = 50;
  const double plot_w = kWidth - kLeft - kRight;
  const double plot_h = kHeight - kTop - kBottom;

  double lo = 0.0, hi = 0.0;
  for (const auto& r : rows) {
    for (double v : {r.mrr_diff, r.ci_lo, r.ci_hi}) {
      if (std::isfinite(v)) {
        lo = std::min(lo, v);
        hi = std::max(hi, v);
      }
    }
  }
  if (hi - lo <= 0.0) hi = lo + 1e-3;
  const double pad = 0.1 * (hi - lo);
  lo -= pad;
  hi += pad;
  auto y_of = [&](double v) { return kTop + (hi - v) / (hi - lo) * plot_h; };

  const std::string run_id = rows.empty() ? "" : rows.front().run_id;
  std::string svg;
  svg += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + fixed(kWidth, 0) +
         "\" height=\"" + fixed(kHeight, 0) + "\" viewBox=\"0 0 " + fixed(kWidth, 0) + " " +
         fixed(kHeight, 0) + "\" data-run-id=\"" + xml_escape(run_id) + "\" data-direction=\"" +
         xml_escape(direction) + "\">\n";
  svg += "  <title>MRR difference vs " + std::string(kBaseModelName) + " (" +
         xml_escape(direction) + ")</title>\n";
  svg += "  <desc>run " + xml_escape(run_id) + "</desc>\n";
  svg += "  <rect x=\"0\" y=\"0\" width=\"" + fixed(kWidth, 0) + "\" height=\"" +
         fixed(kHeight, 0) + "\" fill=\"white\"/>\n";
  svg += "  <text x=\"" + fixed(kWidth / 2, 2) +
         "\" y=\"24\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"14\">" +
         xml_escape(direction) + " delta features: MRR difference</text>\n";

  const double zero_y = y_of(0.0);
  svg += "  <line class=\"axis\" x1=\"" + fixed(kLeft, 2) + "\" y1=\"" + fixed(kTop, 2) +
         "\" x2=\"" + fixed(kLeft, 2) + "\" y2=\"" + fixed(kTop + plot_h, 2) +
         "\" stroke=\"black\"/>\n";
  svg += "  <line class=\"zero\" x1=\"" + fixed(kLeft, 2) + "\" y1=\"" + fixed(zero_y, 2) +
         "\" x2=\"" + fixed(kLeft + plot_w, 2) + "\" y2=\"" + fixed(zero_y, 2) +
         "\" stroke=\"black\"/>\n";
  for (int t = 0; t <= 4; ++t) {
    const double v = lo + (hi - lo) * t / 4.0;
    const double y = y_of(v);
    svg += "  <text x=\"" + fixed(kLeft - 6, 2) + "\" y=\"" + fixed(y + 4, 2) +
           "\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"10\">" + fixed(v, 4) +
           "</text>\n";
  }

  const double slot = rows.empty() ? plot_w : plot_w / static_cast<double>(rows.size());
  const double bar_w = slot * 0.5;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const ResultRow& r = rows[i];
    const double cx = kLeft + slot * (static_cast<double>(i) + 0.5);
    const double top = y_of(std::max(r.mrr_diff, 0.0));
    const double bottom = y_of(std::min(r.mrr_diff, 0.0));
    svg += "  <rect class=\"bar\" data-model=\"" + xml_escape(r.model_name) + "\" data-m=\"" +
           std::to_string(r.m) + "\" data-mrr-diff=\"" + format_double(r.mrr_diff) + "\" x=\"" +
           fixed(cx - bar_w / 2, 2) + "\" y=\"" + fixed(top, 2) + "\" width=\"" +
           fixed(bar_w, 2) + "\" height=\"" + fixed(bottom - top, 2) +
           "\" fill=\"#4a7ab5\"/>\n";
    svg += "  <line class=\"errorbar\" data-model=\"" + xml_escape(r.model_name) +
           "\" data-ci-lo=\"" + format_double(r.ci_lo) + "\" data-ci-hi=\"" +
           format_double(r.ci_hi) + "\" x1=\"" + fixed(cx, 2) + "\" y1=\"" +
           fixed(y_of(r.ci_lo), 2) + "\" x2=\"" + fixed(cx, 2) + "\" y2=\"" +
           fixed(y_of(r.ci_hi), 2) + "\" stroke=\"black\"/>\n";
    for (double v : {r.ci_lo, r.ci_hi}) {
      svg += "  <line x1=\"" + fixed(cx - bar_w / 4, 2) + "\" y1=\"" + fixed(y_of(v), 2) +
             "\" x2=\"" + fixed(cx + bar_w / 4, 2) + "\" y2=\"" + fixed(y_of(v), 2) +
             "\" stroke=\"black\"/>\n";
    }
    svg += "  <text x=\"" + fixed(cx, 2) + "\" y=\"" + fixed(kTop + plot_h + 18, 2) +
           "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"11\">m=" +
           std::to_string(r.m) + "</text>\n";
  }
  svg += "</svg>\n";
  return svg;
}

std::vector<std::string> emit_report(const std::vector<ResultRow>& rows,
                                     const std::filesystem::path& out_dir) {
  if (rows.empty()) throw ValidationError("emit_report needs at least one result row");
  std::vector<std::string> written;
  write_text_file(out_dir / "results.csv", results_csv(rows));
  written.push_back("results.csv");
  write_text_file(out_dir / "table.csv", table_csv(rows));
  written.push_back("table.csv");
  for (const auto& d : present_directions(rows)) {
    write_text_file(out_dir / (d + ".svg"), svg_chart(rows, d));
    written.push_back(d + ".svg");
  }
  return written;
}

}  // namespace deltarank
