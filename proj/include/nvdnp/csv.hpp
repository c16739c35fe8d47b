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
#pragma once

#include <string>
#include <vector>

#include "nvdnp/estimation.hpp"

namespace nvdnp {

/// Shortest decimal string that round-trips to the same double; '.' decimal
/// separator, locale independent.
std::string format_double(double value);

/// One CSV table: a header row plus numeric rows, comma separated. Comment
/// lines start with '#'.
struct CsvTable {
  std::vector<std::string> comments;  // without the leading '#'
  std::vector<std::string> header;
  std::vector<std::vector<double>> rows;

  std::string to_string() const;
};

void write_csv(const std::string& path, const CsvTable& table);

/// Reads a polarization trace: '#' comment lines carrying "b_gauss = x" and
/// "theta_deg = y", then columns t_us, p_plus1, p_zero and optionally sigma.
/// Errors name the offending row.
ExperimentTrace read_trace_csv(const std::string& path);

void write_trace_csv(const std::string& path, const ExperimentTrace& trace);

/// Reads steady-state observations: columns b_gauss, p_plus1, p_zero.
std::vector<SteadyDatum> read_steady_csv(const std::string& path);

}  // namespace nvdnp
