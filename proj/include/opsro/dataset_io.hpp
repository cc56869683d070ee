// Copyright 2026 The opsro Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef OPSRO_DATASET_IO_HPP_
#define OPSRO_DATASET_IO_HPP_

#include <filesystem>
#include <iosfwd>

#include "opsro/trajectory.hpp"

namespace opsro {

// Newline-delimited JSON: one header record followed by one record per
// trajectory. Doubles are written with round-trip precision, so
// read(write(d)) == d bit for bit.
void write_dataset(std::ostream& out, const Dataset& dataset);
Dataset read_dataset(std::istream& in);

void save_dataset(const std::filesystem::path& path, const Dataset& dataset);
Dataset load_dataset(const std::filesystem::path& path);

}  // namespace opsro

#endif  // OPSRO_DATASET_IO_HPP_
