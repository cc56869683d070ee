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

#include "opsro/bargaining.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>

namespace opsro {
namespace {

constexpr double kSentinel = -1.0;

int to_int(double x) { return static_cast<int>(std::lround(x)); }

void enumerate_pools(const BargainingConfig& cfg, std::vector<int>& prefix,
                     int sum, std::vector<Pool>& out) {
  const int k = static_cast<int>(prefix.size());
  if (k == cfg.n_items) {
    if (sum >= cfg.pool_min && sum <= cfg.pool_max) out.push_back({prefix});
    return;
  }
  const int remaining = cfg.n_items - k - 1;
  for (int c = 1; sum + c + remaining <= cfg.pool_max; ++c) {
    prefix.push_back(c);
    enumerate_pools(cfg, prefix, sum + c, out);
    prefix.pop_back();
  }
}

}  // namespace

BargainingConfig BargainingConfig::mini() {
  BargainingConfig cfg;
  cfg.n_items = 2;
  cfg.pool_min = 2;
  cfg.pool_max = 3;
  cfg.max_turns = 4;
  return cfg;
}

void BargainingConfig::validate() const {
  if (n_items < 1) throw std::invalid_argument("bargaining: n_items < 1");
  if (valuation_min < n_items)
    throw std::invalid_argument("bargaining: valuation_min < n_items");
  if (valuation_max < valuation_min)
    throw std::invalid_argument("bargaining: valuation_max < valuation_min");
  if (pool_min < n_items)
    throw std::invalid_argument("bargaining: pool_min < n_items");
  if (pool_max < pool_min)
    throw std::invalid_argument("bargaining: pool_max < pool_min");
  if (max_turns < 1) throw std::invalid_argument("bargaining: max_turns < 1");
  if (!(discount > 0.0 && discount < 1.0))
    throw std::invalid_argument("bargaining: discount outside (0, 1)");
}

std::string BargainingConfig::canonical_string() const {
  std::ostringstream os;
  os.precision(17);
  os << "bargaining;n_items=" << n_items << ";v=" << valuation_min << ","
     << valuation_max << ";c=" << pool_min << "," << pool_max
     << ";T=" << max_turns << ";gamma=" << discount;
  return os.str();
}

OfferCodec::OfferCodec(const BargainingConfig& cfg)
    : n_items_(cfg.n_items), max_count_(cfg.pool_max - (cfg.n_items - 1)) {
  num_offers_ = 1;
  for (int j = 0; j < n_items_; ++j) num_offers_ *= max_count_ + 1;
}

std::vector<int> OfferCodec::offer(ActionId index) const {
  if (index < 0 || index >= num_offers_)
    throw std::out_of_range("OfferCodec: not an offer index");
  std::vector<int> out(n_items_);
  for (int j = n_items_ - 1; j >= 0; --j) {
    out[j] = index % (max_count_ + 1);
    index /= max_count_ + 1;
  }
  return out;
}

ActionId OfferCodec::index(std::span<const int> offer) const {
  if (static_cast<int>(offer.size()) != n_items_)
    throw std::invalid_argument("OfferCodec: wrong offer length");
  ActionId k = 0;
  for (int j = 0; j < n_items_; ++j) {
    if (offer[j] < 0 || offer[j] > max_count_)
      throw std::out_of_range("OfferCodec: item count out of range");
    k = k * (max_count_ + 1) + offer[j];
  }
  return k;
}

std::vector<Pool> feasible_pools(const BargainingConfig& cfg) {
  cfg.validate();
  std::vector<Pool> out;
  std::vector<int> prefix;
  enumerate_pools(cfg, prefix, 0, out);
  return out;
}

Pool sample_pool(const BargainingConfig& cfg, Rng& rng) {
  const auto pools = feasible_pools(cfg);
  if (pools.empty()) throw std::invalid_argument("bargaining: no feasible pool");
  std::uniform_int_distribution<std::size_t> pick(0, pools.size() - 1);
  return pools[pick(rng)];
}

Valuation sample_valuation(const BargainingConfig& cfg, Rng& rng) {
  cfg.validate();
  const double hi = cfg.valuation_max - (cfg.n_items - 1);
  std::uniform_real_distribution<double> box(1.0, hi);
  Valuation v{std::vector<double>(cfg.n_items)};
  if (hi <= 1.0) {  // degenerate region: every value pinned to 1
    std::fill(v.values.begin(), v.values.end(), 1.0);
    return v;
  }
  for (;;) {
    double sum = 0.0;
    for (auto& x : v.values) sum += (x = box(rng));
    if (sum >= cfg.valuation_min && sum <= cfg.valuation_max) return v;
  }
}

std::vector<Valuation> sample_valuations(const BargainingConfig& cfg,
                                         Rng& rng) {
  std::vector<Valuation> out;
  out.push_back(sample_valuation(cfg, rng));
  out.push_back(sample_valuation(cfg, rng));
  return out;
}

BargainingGame::BargainingGame(BargainingConfig cfg)
    : cfg_(cfg), codec_((cfg.validate(), cfg)), pools_(feasible_pools(cfg)) {}

State BargainingGame::terminal_state_vector() const {
  return State(state_size(), kSentinel);
}

int BargainingGame::acting_player_from_vector(
    std::span<const double> state) const {
  const int p = to_int(state[3 * cfg_.n_items + 3]);
  return p <= 0 ? 0 : 1;
}

std::string BargainingGame::config_hash() const {
  return hex64(fnv1a(cfg_.canonical_string()));
}

State BargainingGame::make_state(int turn, const Pool& pool,
                                 const std::vector<Valuation>& valuations,
                                 ActionId last_offer,
                                 int current_player) const {
  const int n = cfg_.n_items;
  State s(state_size());
  s[0] = 0.0;
  s[1] = turn;
  for (int j = 0; j < n; ++j) {
    s[2 + j] = pool.counts.at(j);
    s[2 + n + j] = valuations.at(0).values.at(j);
    s[2 + 2 * n + j] = valuations.at(1).values.at(j);
  }
  s[2 + 3 * n] = last_offer;
  s[3 + 3 * n] = current_player;
  return s;
}

Pool BargainingGame::pool_of(const State& state) const {
  Pool p{std::vector<int>(cfg_.n_items)};
  for (int j = 0; j < cfg_.n_items; ++j) p.counts[j] = to_int(state[2 + j]);
  return p;
}

Valuation BargainingGame::valuation_of(const State& state, int player) const {
  const int n = cfg_.n_items;
  Valuation v{std::vector<double>(n)};
  for (int j = 0; j < n; ++j) v.values[j] = state[2 + n * (1 + player) + j];
  return v;
}

int BargainingGame::turn_of(const State& state) const {
  return to_int(state[1]);
}

ActionId BargainingGame::last_offer_of(const State& state) const {
  return to_int(state[2 + 3 * cfg_.n_items]);
}

bool BargainingGame::is_terminal(const State& state) const {
  return !state.empty() && state[1] < 0.0;
}

State BargainingGame::initial_state(Rng& rng) const {
  std::uniform_int_distribution<std::size_t> pick(0, pools_.size() - 1);
  const Pool pool = pools_[pick(rng)];
  const auto valuations = sample_valuations(cfg_, rng);
  const int first = std::bernoulli_distribution(0.5)(rng) ? 1 : 0;
  return make_state(0, pool, valuations, -1, first);
}

std::vector<ActionId> BargainingGame::legal_actions(const State& state) const {
  if (is_terminal(state))
    throw std::logic_error("legal_actions on a terminal state");
  const Pool pool = pool_of(state);
  std::vector<ActionId> out;
  for (ActionId a = 0; a < codec_.num_offers(); ++a) {
    const auto offer = codec_.offer(a);
    bool fits = true;
    for (int j = 0; j < cfg_.n_items && fits; ++j)
      fits = offer[j] <= pool.counts[j];
    if (fits) out.push_back(a);
  }
  if (last_offer_of(state) >= 0) out.push_back(codec_.accept_action());
  return out;
}

StepResult BargainingGame::step(const State& state, ActionId action) const {
  if (is_terminal(state)) throw std::logic_error("step on a terminal state");
  const Pool pool = pool_of(state);
  const int turn = turn_of(state);
  const int player = acting_player_from_vector(state);
  const ActionId last = last_offer_of(state);
  StepResult result;
  result.rewards.assign(2, 0.0);

  if (action == codec_.accept_action()) {
    if (last < 0)
      throw IllegalActionError("ACCEPT with no outstanding offer", -1);
    const auto share = codec_.offer(last);
    const auto mine = valuation_of(state, player);
    const auto theirs = valuation_of(state, 1 - player);
    const double scale = std::pow(cfg_.discount, turn);
    double accepter = 0.0, offerer = 0.0;
    for (int j = 0; j < cfg_.n_items; ++j) {
      accepter += mine.values[j] * share[j];
      offerer += theirs.values[j] * (pool.counts[j] - share[j]);
    }
    result.rewards[player] = scale * accepter;
    result.rewards[1 - player] = scale * offerer;
    result.next_state = terminal_state_vector();
    result.done = true;
    return result;
  }

  if (action < 0 || action >= codec_.num_offers())
    throw IllegalActionError("action index out of range", -1);
  const auto offer = codec_.offer(action);
  for (int j = 0; j < cfg_.n_items; ++j)
    if (offer[j] > pool.counts[j])
      throw IllegalActionError("offer exceeds pool", -1);

  if (turn >= cfg_.max_turns) {  // no turns left: nobody gets anything
    result.next_state = terminal_state_vector();
    result.done = true;
    return result;
  }
  result.next_state = state;
  result.next_state[1] = turn + 1;
  result.next_state[2 + 3 * cfg_.n_items] = action;
  result.next_state[3 + 3 * cfg_.n_items] = 1 - player;
  return result;
}

std::vector<double> BargainingGame::observe(const State& state,
                                            int player) const {
  const int n = cfg_.n_items;
  std::vector<double> obs(observation_size());
  if (is_terminal(state)) {
    std::fill(obs.begin(), obs.end(), kSentinel);
    return obs;
  }
  obs[0] = state[0];
  obs[1] = state[1];
  for (int j = 0; j < n; ++j) {
    obs[2 + j] = state[2 + j];
    obs[2 + n + j] = state[2 + n * (1 + player) + j];
  }
  obs[2 + 2 * n] = state[2 + 3 * n];
  return obs;
}

std::vector<double> BargainingGame::encode_infostate(
    std::span<const double> observation, std::span<const ActionId> history,
    int /*player*/) const {
  const int n = cfg_.n_items;
  if (static_cast<int>(observation.size()) != observation_size())
    throw std::invalid_argument("encode_infostate: bad observation size");
  if (static_cast<int>(history.size()) > cfg_.max_turns)
    throw std::invalid_argument("encode_infostate: history longer than T");
  std::vector<double> h(infostate_size(), kSentinel);
  for (int d = 0; d < 2 + 2 * n; ++d) h[d] = observation[d];
  for (std::size_t k = 0; k < history.size(); ++k)
    h[2 + 2 * n + k] = history[k];
  return h;
}

std::vector<double> BargainingGame::action_features(ActionId action) const {
  std::vector<double> f(cfg_.n_items + 1, 0.0);
  if (action == codec_.accept_action()) {
    f[0] = 1.0;
    return f;
  }
  const auto offer = codec_.offer(action);
  for (int j = 0; j < cfg_.n_items; ++j) f[1 + j] = offer[j];
  return f;
}

State BargainingGame::resample_private(const State& state, int player,
                                       Rng& rng) const {
  State out = state;
  const auto v = sample_valuation(cfg_, rng);
  const int n = cfg_.n_items;
  for (int j = 0; j < n; ++j) out[2 + n * (1 + player) + j] = v.values[j];
  return out;
}

State BargainingGame::root_from_infostate(std::span<const double> infostate,
                                          int player, Rng& rng) const {
  const int n = cfg_.n_items;
  Pool pool{std::vector<int>(n)};
  Valuation own{std::vector<double>(n)};
  for (int j = 0; j < n; ++j) {
    pool.counts[j] = to_int(infostate[2 + j]);
    own.values[j] = infostate[2 + n + j];
  }
  const int turn = to_int(infostate[1]);
  // `player` is to act at `turn`, so it moved first iff turn is even.
  const int first = turn % 2 == 0 ? player : 1 - player;
  std::vector<Valuation> valuations(2);
  valuations[player] = own;
  valuations[1 - player] = sample_valuation(cfg_, rng);
  return make_state(0, pool, valuations, -1, first);
}

std::vector<ActionId> BargainingGame::history_from_infostate(
    std::span<const double> infostate) const {
  const int n = cfg_.n_items;
  const int turn = to_int(infostate[1]);
  std::vector<ActionId> out;
  for (int k = 0; k < turn; ++k) out.push_back(to_int(infostate[2 + 2 * n + k]));
  return out;
}

}  // namespace opsro
