// Copyright 2026 The dnls-nfr Authors
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

#include "dnls/io.hpp"

#include <fstream>
#include <iomanip>
#include <sstream>
#include <stdexcept>

namespace dnls {

namespace {

void write_grid(std::ostream& os, const FrequencyGrid<double>& g) {
  os << "n,L\n" << g.size() << ',' << g.length() << '\n';
}

std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> out;
  std::istringstream in(line);
  std::string item;
  while (std::getline(in, item, ',')) out.push_back(item);
  return out;
}

bool next_data_line(std::istream& is, std::string& line) {
  while (std::getline(is, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (!line.empty() && line[0] != '#') return true;
  }
  return false;
}

}  // namespace

void write_field(std::ostream& os, const SpectralField<double>& f) {
  const auto& g = f.grid();
  os << std::setprecision(17);
  os << "# dnls-field v1\n";
  write_grid(os, g);
  os << "k,re,im\n";
  for (Index i = 0; i < g.size(); ++i) os << g.mode(i) << ',' << f[i].real() << ',' << f[i].imag() << '\n';
}

SpectralField<double> read_field(std::istream& is) {
  std::string line;
  if (!next_data_line(is, line) || line != "n,L") throw std::runtime_error("field file: expected 'n,L' header");
  if (!next_data_line(is, line)) throw std::runtime_error("field file: missing grid line");
  const auto gl = split(line);
  if (gl.size() != 2) throw std::runtime_error("field file: malformed grid line");
  const FrequencyGrid<double> g(std::stoll(gl[0]), std::stod(gl[1]));
  if (!next_data_line(is, line) || line != "k,re,im") throw std::runtime_error("field file: expected 'k,re,im'");
  ComplexVector<double> c = ComplexVector<double>::Zero(g.size());
  std::vector<bool> seen(static_cast<size_t>(g.size()), false);
  while (next_data_line(is, line)) {
    const auto r = split(line);
    if (r.size() != 3) throw std::runtime_error("field file: malformed row '" + line + "'");
    const Index k = std::stoll(r[0]);
    if (!g.contains_mode(k)) throw std::runtime_error("field file: mode outside grid");
    const auto s = static_cast<size_t>(g.slot(k));
    if (seen[s]) throw std::runtime_error("field file: duplicate mode");
    seen[s] = true;
    c[g.slot(k)] = {std::stod(r[1]), std::stod(r[2])};
  }
  for (bool b : seen)
    if (!b) throw std::runtime_error("field file: missing modes");
  return SpectralField<double>(g, std::move(c));
}

void save_field(const std::string& path, const SpectralField<double>& f) {
  std::ofstream os(path);
  if (!os) throw std::runtime_error("cannot write '" + path + "'");
  write_field(os, f);
}

SpectralField<double> load_field(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw std::runtime_error("cannot open '" + path + "'");
  return read_field(is);
}

void write_trajectory(std::ostream& os, const Trajectory<double>& tr) {
  if (tr.size() == 0) throw std::invalid_argument("write_trajectory: empty trajectory");
  const auto& g = tr.fields.front().grid();
  os << std::setprecision(17);
  os << "# dnls-trajectory v1 kind=" << tr.kind << '\n';
  write_grid(os, g);
  os << "t,k,re,im\n";
  for (size_t m = 0; m < tr.size(); ++m)
    for (Index i = 0; i < g.size(); ++i)
      os << tr.times[m] << ',' << g.mode(i) << ',' << tr.fields[m][i].real() << ',' << tr.fields[m][i].imag() << '\n';
}

}  // namespace dnls
