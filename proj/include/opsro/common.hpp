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

#ifndef OPSRO_COMMON_HPP_
#define OPSRO_COMMON_HPP_

#include <cstdint>
#include <random>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace opsro {

using ActionId = int;
using Rng = std::mt19937_64;

// One byte per action in the game's action space; nonzero means legal.
using LegalMask = std::vector<std::uint8_t>;

// Raised when a policy or caller supplies an action that is not legal.
class IllegalActionError : public std::runtime_error {
 public:
  IllegalActionError(const std::string& what, int step_index)
      : std::runtime_error(what), step_index_(step_index) {}
  int step_index() const { return step_index_; }

 private:
  int step_index_;
};

// Raised for malformed or inconsistent persisted artifacts.
class ArtifactError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// splitmix64 finalizer; maps (master seed, task index) to an independent seed.
inline std::uint64_t derive_seed(std::uint64_t master, std::uint64_t index) {
  std::uint64_t z = master + 0x9e3779b97f4a7c15ULL * (index + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

// 64-bit FNV-1a.
inline std::uint64_t fnv1a(std::string_view bytes,
                           std::uint64_t seed = 0xcbf29ce484222325ULL) {
  std::uint64_t h = seed;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::string hex64(std::uint64_t value);

inline double uniform01(Rng& rng) {
  return std::uniform_real_distribution<double>(0.0, 1.0)(rng);
}

inline LegalMask mask_from_actions(const std::vector<ActionId>& actions,
                                   int num_actions) {
  LegalMask mask(num_actions, 0);
  for (ActionId a : actions) mask.at(a) = 1;
  return mask;
}

inline std::vector<ActionId> actions_from_mask(const LegalMask& mask) {
  std::vector<ActionId> out;
  for (int a = 0; a < static_cast<int>(mask.size()); ++a)
    if (mask[a]) out.push_back(a);
  return out;
}

}  // namespace opsro

#endif  // OPSRO_COMMON_HPP_
