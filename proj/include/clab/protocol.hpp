#pragma once

#include <algorithm>
#include <cstdint>
#include <numeric>
#include <vector>

#include "rng.hpp"
#include "types.hpp"

namespace clab {

enum class Family { BitcoinPoW, SLPoS, MLPoS };

struct ProtocolSpec {
  Family family = Family::SLPoS;

  // BitcoinPoW
  int q = 0;            // total queries per slot across all parties
  double delta = 0.0;   // per-query success probability
  int slots = 0;        // execution length N (PoW)

  // PoS
  int epoch_length = 0;  // l_ep
  int epochs = 0;        // e
  std::vector<double> phi;  // MLPoS per-party leadership probabilities
  bool predictable = false;

  int total_slots() const {
    return family == Family::BitcoinPoW ? slots : epoch_length * epochs;
  }

  void validate(std::size_t n_parties) const {
    if (family == Family::BitcoinPoW) {
      if (slots < 1) throw ConfigError("protocol.slots: need N >= 1");
      if (q < 1) throw ConfigError("protocol.q: need q >= 1");
      if (delta < 0.0 || delta > 1.0)
        throw ConfigError("protocol.delta: probability must lie in [0,1]");
    } else {
      if (epoch_length < 1 || epochs < 1)
        throw ConfigError("protocol: need epoch_length >= 1 and epochs >= 1");
      if (family == Family::MLPoS) {
        if (phi.size() != n_parties)
          throw ConfigError("protocol.phi: need one probability per party");
        for (double p : phi)
          if (p < 0.0 || p > 1.0)
            throw ConfigError("protocol.phi: probabilities must lie in [0,1]");
      }
    }
  }
};

struct LeaderSchedule {
  std::vector<std::vector<int>> per_slot;  // slot (1-based -> index slot-1)
  std::vector<std::vector<double>> stake_snapshot;  // per epoch

  bool is_leader(int party, int slot) const {
    const auto& v = per_slot.at(static_cast<std::size_t>(slot - 1));
    return std::find(v.begin(), v.end(), party) != v.end();
  }
  const std::vector<int>& leaders(int slot) const {
    return per_slot.at(static_cast<std::size_t>(slot - 1));
  }
};

inline LeaderSchedule draw_leader_schedule(const ProtocolSpec& spec,
                                           const std::vector<double>& powers,
                                           std::uint64_t seed) {
  if (spec.family == Family::BitcoinPoW)
    throw ConfigError("leader schedule: not defined for proof-of-work");
  LeaderSchedule sched;
  int n = static_cast<int>(powers.size());
  int N = spec.total_slots();
  sched.per_slot.resize(static_cast<std::size_t>(N));
  sched.stake_snapshot.assign(static_cast<std::size_t>(spec.epochs), powers);
  for (int slot = 1; slot <= N; ++slot) {
    auto& leaders = sched.per_slot[static_cast<std::size_t>(slot - 1)];
    if (spec.family == Family::SLPoS) {
      double u = rand_unit(seed, Stream::Schedule, static_cast<std::uint64_t>(slot));
      double acc = 0.0;
      int pick = n - 1;
      for (int p = 0; p < n; ++p) {
        acc += powers[static_cast<std::size_t>(p)];
        if (u < acc) {
          pick = p;
          break;
        }
      }
      leaders.push_back(pick);
    } else {  // MLPoS: independent Bernoulli per party
      for (int p = 0; p < n; ++p) {
        double u = rand_unit(seed, Stream::Schedule,
                             static_cast<std::uint64_t>(slot),
                             static_cast<std::uint64_t>(p));
        if (u < spec.phi[static_cast<std::size_t>(p)]) leaders.push_back(p);
      }
    }
  }
  return sched;
}

// Probability that two or more leaders are elected in one ML-PoS slot.
inline double p_multi_leader(const ProtocolSpec& spec) {
  if (spec.family != Family::MLPoS)
    throw ConfigError("p_multi_leader: multi-leader PoS only");
  double none = 1.0;
  for (double p : spec.phi) none *= 1.0 - p;
  double one = 0.0;
  for (std::size_t i = 0; i < spec.phi.size(); ++i) {
    double term = spec.phi[i];
    for (std::size_t j = 0; j < spec.phi.size(); ++j)
      if (j != i) term *= 1.0 - spec.phi[j];
    one += term;
  }
  return 1.0 - none - one;
}

// Per-party PoW query budgets: floor(mu*q) plus largest-remainder top-up so
// the budgets sum to exactly q.
inline std::vector<int> pow_budgets(const std::vector<double>& powers, int q) {
  std::size_t n = powers.size();
  std::vector<int> out(n, 0);
  std::vector<std::pair<double, std::size_t>> rem(n);
  int assigned = 0;
  for (std::size_t i = 0; i < n; ++i) {
    double exact = powers[i] * q;
    out[i] = static_cast<int>(exact);
    assigned += out[i];
    rem[i] = {exact - out[i], i};
  }
  std::sort(rem.begin(), rem.end(), [](const auto& a, const auto& b) {
    if (a.first != b.first) return a.first > b.first;
    return a.second < b.second;
  });
  for (int k = 0; k < q - assigned; ++k) out[rem[static_cast<std::size_t>(k)].second] += 1;
  return out;
}

// Closed form for the probability that a Bitcoin slot is uniquely successful
// for party P: only P's queries succeed, at least once.
inline double pr_unique_success(double mu, int q, double delta) {
  double others = std::pow(1.0 - delta, (1.0 - mu) * q);
  double all = std::pow(1.0 - delta, static_cast<double>(q));
  return others - all;
}

}  // namespace clab
