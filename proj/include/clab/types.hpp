#pragma once

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace clab {

// Error taxonomy. ConfigError maps to CLI exit 2, PartialResult to 3,
// InternalError (and anything unexpected) to 4.
struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct InternalError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct PartialResult : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct DomainError : ConfigError {
  using ConfigError::ConfigError;
};

struct Party {
  int id = 0;
  double power = 0.0;  // mining/staking fraction mu_P
};

inline void check_powers(const std::vector<double>& powers) {
  if (powers.empty()) throw ConfigError("parties.powers: need n >= 1");
  double sum = 0.0;
  for (double p : powers) {
    if (p < 0.0 || p > 1.0)
      throw ConfigError("parties.powers: each power must lie in [0,1]");
    sum += p;
  }
  if (std::fabs(sum - 1.0) > 1e-12)
    throw ConfigError("parties.powers: powers must sum to 1 (got " +
                      std::to_string(sum) + ")");
}

enum class RouterKind { Synchronous, Lossy, Uniform };

struct RouterSpec {
  RouterKind kind = RouterKind::Synchronous;
  double drop_probability = 0.0;  // Lossy only

  void validate() const {
    if (drop_probability < 0.0 || drop_probability > 1.0)
      throw ConfigError("router.drop: probability must lie in [0,1]");
  }
};

struct SlotClock {
  int current_slot = 0;
  int total_slots = 0;

  void advance() {
    if (current_slot >= total_slots)
      throw InternalError("slot clock advanced past the execution length");
    ++current_slot;
  }
};

}  // namespace clab
