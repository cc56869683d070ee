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

#include "opsro/game.hpp"

#include <cstdio>

namespace opsro {

std::string hex64(std::uint64_t value) {
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx",
                static_cast<unsigned long long>(value));
  return buf;
}

std::vector<double> GameSchema::action_features(ActionId action) const {
  std::vector<double> out(num_actions(), 0.0);
  out.at(action) = 1.0;
  return out;
}

bool StochasticGame::is_terminal(const State& state) const {
  return state == terminal_state_vector();
}

}  // namespace opsro
