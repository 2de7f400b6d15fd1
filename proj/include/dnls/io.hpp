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

#ifndef DNLS_IO_HPP
#define DNLS_IO_HPP

#include <iosfwd>
#include <string>

#include "dnls/solvers.hpp"
#include "dnls/spectral.hpp"

namespace dnls {

/// Field CSV:
///   # dnls-field v1
///   n,L
///   <n>,<L>
///   k,re,im
///   <k>,<Re>,<Im>      one row per mode, k ascending
/// Numbers use 17 significant digits so a write/read cycle is exact.
void write_field(std::ostream& os, const SpectralField<double>& f);
SpectralField<double> read_field(std::istream& is);
void save_field(const std::string& path, const SpectralField<double>& f);
SpectralField<double> load_field(const std::string& path);

/// Trajectory CSV: header `t,k,re,im` then one row per (snapshot, mode),
/// preceded by the same `n,L` block as a field file.
void write_trajectory(std::ostream& os, const Trajectory<double>& tr);

}  // namespace dnls

#endif  // DNLS_IO_HPP
