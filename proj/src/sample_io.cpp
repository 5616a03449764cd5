// Copyright 2026 The Codesign Authors.
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

#include "codesign/sample_io.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include <fmt/format.h>

#include "codesign/error.hpp"

namespace codesign {

namespace {

std::vector<std::string> column_names(SampleSchema schema) {
  std::vector<std::string> names;
  for (int i = 0; i < kEncodingWidth; ++i) names.push_back(fmt::format("e{}", i));
  if (schema == SampleSchema::kLoss) {
    names.emplace_back("ce");
  } else {
    for (const char* n : {"pf", "pc", "pv", "bw", "mem", "latency_ms", "power_w"}) {
      names.emplace_back(n);
    }
  }
  return names;
}

std::string join(const std::vector<std::string>& fields) {
  std::string out;
  for (std::size_t i = 0; i < fields.size(); ++i) {
    if (i) out += ',';
    out += fields[i];
  }
  return out;
}

std::vector<std::string_view> split(std::string_view line) {
  std::vector<std::string_view> fields;
  std::size_t start = 0;
  while (true) {
    const std::size_t comma = line.find(',', start);
    fields.push_back(line.substr(start, comma - start));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return fields;
}

struct CsvTable {
  std::vector<std::vector<double>> rows;
};

CsvTable read_table(const std::filesystem::path& path, SampleSchema schema) {
  std::ifstream in(path);
  if (!in) throw IoError(fmt::format("cannot open sample file '{}'", path.string()));
  const std::vector<std::string> names = column_names(schema);
  std::string line;
  if (!std::getline(in, line)) {
    throw ParseError(fmt::format("{}: missing header line", path.string()));
  }
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != join(names)) {
    throw ParseError(fmt::format("{}: line 1: header '{}' does not match expected '{}'",
                                 path.string(), line, join(names)));
  }
  CsvTable table;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto fields = split(line);
    if (fields.size() != names.size()) {
      throw ParseError(fmt::format("{}: line {}: expected {} columns, found {}", path.string(),
                                   line_no, names.size(), fields.size()));
    }
    std::vector<double> row(fields.size());
    for (std::size_t c = 0; c < fields.size(); ++c) {
      const std::string_view f = fields[c];
      const auto [ptr, ec] = std::from_chars(f.data(), f.data() + f.size(), row[c]);
      if (ec != std::errc() || ptr != f.data() + f.size() || !std::isfinite(row[c])) {
        throw ParseError(fmt::format("{}: line {}, column '{}': cannot parse '{}' as a number",
                                     path.string(), line_no, names[c], f));
      }
    }
    table.rows.push_back(std::move(row));
  }
  return table;
}

std::int64_t as_integer(double v, const std::filesystem::path& path, std::size_t row,
                        const char* column) {
  if (v != std::floor(v)) {
    throw ParseError(fmt::format("{}: line {}, column '{}': '{}' is not an integer",
                                 path.string(), row + 2, column, format_double(v)));
  }
  return static_cast<std::int64_t>(v);
}

}  // namespace

std::string format_double(double value) {
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), value);
  if (ec != std::errc()) throw InvalidInput("cannot format number");
  return std::string(buf, ptr);
}

std::string loss_header() { return join(column_names(SampleSchema::kLoss)); }
std::string perf_header() { return join(column_names(SampleSchema::kPerf)); }

SampleSchema detect_schema(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError(fmt::format("cannot open sample file '{}'", path.string()));
  std::string line;
  std::getline(in, line);
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line == loss_header()) return SampleSchema::kLoss;
  if (line == perf_header()) return SampleSchema::kPerf;
  throw ParseError(fmt::format("{}: line 1: header matches neither the loss nor the perf schema",
                               path.string()));
}

void write_text_file(const std::filesystem::path& path, const std::string& contents) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError(fmt::format("cannot open '{}' for writing", path.string()));
  out << contents;
  out.flush();
  if (!out) throw IoError(fmt::format("failed writing '{}'", path.string()));
}

void write_loss_samples(const std::filesystem::path& path, const std::vector<LossSample>& rows) {
  std::string text = loss_header() + '\n';
  for (const LossSample& r : rows) {
    for (double e : r.encoding) {
      text += format_double(e);
      text += ',';
    }
    text += format_double(r.ce);
    text += '\n';
  }
  write_text_file(path, text);
}

void write_perf_samples(const std::filesystem::path& path, const std::vector<PerfSample>& rows) {
  std::string text = perf_header() + '\n';
  for (const PerfSample& r : rows) {
    for (double e : r.encoding) {
      text += format_double(e);
      text += ',';
    }
    text += fmt::format("{},{},{},{},{},", r.hw.pf, r.hw.pc, r.hw.pv, r.hw.bw, r.hw.mem);
    text += format_double(r.latency_ms);
    text += ',';
    text += format_double(r.power_w);
    text += '\n';
  }
  write_text_file(path, text);
}

std::vector<LossSample> read_loss_samples(const std::filesystem::path& path) {
  const CsvTable table = read_table(path, SampleSchema::kLoss);
  std::vector<LossSample> out;
  out.reserve(table.rows.size());
  for (const auto& row : table.rows) {
    LossSample s;
    std::copy(row.begin(), row.begin() + kEncodingWidth, s.encoding.begin());
    s.ce = row[kEncodingWidth];
    out.push_back(s);
  }
  return out;
}

std::vector<PerfSample> read_perf_samples(const std::filesystem::path& path) {
  const CsvTable table = read_table(path, SampleSchema::kPerf);
  std::vector<PerfSample> out;
  out.reserve(table.rows.size());
  for (std::size_t i = 0; i < table.rows.size(); ++i) {
    const auto& row = table.rows[i];
    PerfSample s;
    std::copy(row.begin(), row.begin() + kEncodingWidth, s.encoding.begin());
    s.hw.pf = as_integer(row[16], path, i, "pf");
    s.hw.pc = as_integer(row[17], path, i, "pc");
    s.hw.pv = as_integer(row[18], path, i, "pv");
    s.hw.bw = as_integer(row[19], path, i, "bw");
    s.hw.mem = as_integer(row[20], path, i, "mem");
    s.latency_ms = row[21];
    s.power_w = row[22];
    out.push_back(s);
  }
  return out;
}

gp::Dataset to_dataset(const std::vector<LossSample>& rows) {
  gp::Dataset data;
  data.target_name = "ce";
  const auto n = static_cast<Eigen::Index>(rows.size());
  data.inputs.resize(n, kEncodingWidth);
  data.targets.resize(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const LossSample& r = rows[static_cast<std::size_t>(i)];
    for (int j = 0; j < kEncodingWidth; ++j) data.inputs(i, j) = r.encoding[static_cast<std::size_t>(j)];
    data.targets(i) = r.ce;
  }
  return data;
}

gp::Dataset to_dataset(const std::vector<PerfSample>& rows, std::string_view target) {
  if (target != "latency_ms" && target != "power_w") {
    throw InvalidInput(fmt::format("perf samples have no target '{}'", target));
  }
  gp::Dataset data;
  data.target_name = std::string(target);
  const auto n = static_cast<Eigen::Index>(rows.size());
  data.inputs.resize(n, kEncodingWidth + 3);
  data.targets.resize(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const PerfSample& r = rows[static_cast<std::size_t>(i)];
    for (int j = 0; j < kEncodingWidth; ++j) data.inputs(i, j) = r.encoding[static_cast<std::size_t>(j)];
    data.inputs(i, 16) = static_cast<double>(r.hw.pf);
    data.inputs(i, 17) = static_cast<double>(r.hw.pc);
    data.inputs(i, 18) = static_cast<double>(r.hw.pv);
    data.targets(i) = target == "latency_ms" ? r.latency_ms : r.power_w;
  }
  return data;
}

}  // namespace codesign
