/* Copyright 2026 The nvdnp Authors.
Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at
    http://www.apache.org/licenses/LICENSE-2.0
Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License.
==============================================================================*/
#include "nvdnp/csv.hpp"

#include <charconv>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <system_error>

namespace nvdnp {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> split(const std::string& line, char sep) {
  std::vector<std::string> out;
  std::string field;
  std::istringstream ss(line);
  while (std::getline(ss, field, sep)) out.push_back(trim(field));
  if (!line.empty() && line.back() == sep) out.push_back("");
  return out;
}

double parse_double(const std::string& s, const std::string& context) {
  double v{};
  const char* begin = s.data();
  const char* end = begin + s.size();
  const auto res = std::from_chars(begin, end, v);
  if (res.ec != std::errc{} || res.ptr != end)
    throw std::invalid_argument(context + ": cannot parse number '" + s + "'");
  return v;
}

}  // namespace

std::string format_double(double value) {
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof(buf), value);
  return std::string(buf, res.ptr);
}

std::string CsvTable::to_string() const {
  std::string out;
  for (const std::string& c : comments) out += "# " + c + "\n";
  for (size_t j = 0; j < header.size(); ++j) {
    if (j) out += ",";
    out += header[j];
  }
  out += "\n";
  for (const auto& row : rows) {
    for (size_t j = 0; j < row.size(); ++j) {
      if (j) out += ",";
      out += format_double(row[j]);
    }
    out += "\n";
  }
  return out;
}

void write_csv(const std::string& path, const CsvTable& table) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw std::invalid_argument("cannot open for writing: " + path);
  f << table.to_string();
  if (!f) throw std::runtime_error("write failed: " + path);
}

ExperimentTrace read_trace_csv(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw std::invalid_argument("cannot open trace file: " + path);

  ExperimentTrace trace;
  bool have_b = false, have_theta = false;
  std::vector<std::string> header;
  std::string line;
  int lineno = 0;
  while (std::getline(f, line)) {
    ++lineno;
    const std::string row = trim(line);
    if (row.empty()) continue;
    const std::string where = path + ":" + std::to_string(lineno);
    if (row[0] == '#') {
      const auto eq = row.find('=');
      if (eq == std::string::npos) continue;
      const std::string key = trim(row.substr(1, eq - 1));
      const std::string val = trim(row.substr(eq + 1));
      if (key == "b_gauss") {
        trace.field.b_gauss = parse_double(val, where);
        have_b = true;
      } else if (key == "theta_deg") {
        trace.field.theta_deg = parse_double(val, where);
        have_theta = true;
      }
      continue;
    }
    if (header.empty()) {
      header = split(row, ',');
      if (header.size() < 3 || header[0] != "t_us" || header[1] != "p_plus1" ||
          header[2] != "p_zero" || (header.size() == 4 && header[3] != "sigma") ||
          header.size() > 4)
        throw std::invalid_argument(
            where + ": expected header t_us,p_plus1,p_zero[,sigma]");
      continue;
    }
    const auto fields = split(row, ',');
    if (fields.size() != header.size())
      throw std::invalid_argument(where + ": expected " +
                                  std::to_string(header.size()) + " fields, got " +
                                  std::to_string(fields.size()));
    trace.times.push_back(parse_double(fields[0], where));
    trace.p_plus1.push_back(parse_double(fields[1], where));
    trace.p_zero.push_back(parse_double(fields[2], where));
    if (header.size() == 4) trace.sigma.push_back(parse_double(fields[3], where));
  }
  if (header.empty()) throw std::invalid_argument(path + ": no header row");
  if (!have_b || !have_theta)
    throw std::invalid_argument(
        path + ": missing '# b_gauss = ...' or '# theta_deg = ...' header");
  try {
    trace.validate();
  } catch (const std::exception& e) {
    throw std::invalid_argument(path + ": " + e.what());
  }
  return trace;
}

void write_trace_csv(const std::string& path, const ExperimentTrace& trace) {
  CsvTable t;
  t.comments = {"b_gauss = " + format_double(trace.field.b_gauss),
                "theta_deg = " + format_double(trace.field.theta_deg)};
  t.header = {"t_us", "p_plus1", "p_zero"};
  if (!trace.sigma.empty()) t.header.push_back("sigma");
  for (size_t i = 0; i < trace.times.size(); ++i) {
    std::vector<double> row{trace.times[i], trace.p_plus1[i], trace.p_zero[i]};
    if (!trace.sigma.empty()) row.push_back(trace.sigma[i]);
    t.rows.push_back(std::move(row));
  }
  write_csv(path, t);
}

std::vector<SteadyDatum> read_steady_csv(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw std::invalid_argument("cannot open steady file: " + path);
  std::vector<SteadyDatum> out;
  std::string line;
  int lineno = 0;
  bool have_header = false;
  while (std::getline(f, line)) {
    ++lineno;
    const std::string row = trim(line);
    if (row.empty() || row[0] == '#') continue;
    const std::string where = path + ":" + std::to_string(lineno);
    const auto fields = split(row, ',');
    if (!have_header) {
      if (fields.size() < 3 || fields[0] != "b_gauss" || fields[1] != "p_plus1" ||
          fields[2] != "p_zero")
        throw std::invalid_argument(where +
                                    ": expected header b_gauss,p_plus1,p_zero");
      have_header = true;
      continue;
    }
    if (fields.size() != 3)
      throw std::invalid_argument(where + ": expected 3 fields");
    out.push_back({parse_double(fields[0], where), parse_double(fields[1], where),
                   parse_double(fields[2], where)});
  }
  if (!have_header) throw std::invalid_argument(path + ": no header row");
  if (out.empty()) throw std::invalid_argument(path + ": no data rows");
  return out;
}

}  // namespace nvdnp
