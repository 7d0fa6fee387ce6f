#pragma once

#include <cmath>
#include <cstdint>
#include <numeric>
#include <vector>

#include "infractions.hpp"

namespace clab {

enum class SchemeKind {
  ResourceProportional,  // xi(mu_P) * R_total iff any valid block exists
  BlockProportional,     // (M_P / |C|) * R_total
  FixedPerBlock,         // M_P * R
  PenaltyFixedPerBlock,  // M_P * R + g_P, forfeited on a detected conflict
};

struct RewardScheme {
  SchemeKind kind = SchemeKind::FixedPerBlock;
  double R = 1.0;              // per-block reward, or R_total for the
                               // proportional schemes
  std::vector<double> xi;      // ResourceProportional shares; defaults to the
                               // power vector (identity xi)
  std::vector<double> deposit; // PenaltyFixedPerBlock per-party deposits g_P

  void validate(const std::vector<double>& powers) const {
    if (kind == SchemeKind::ResourceProportional && !xi.empty()) {
      if (xi.size() != powers.size())
        throw ConfigError("scheme.xi: need one share per party");
      double sum = std::accumulate(xi.begin(), xi.end(), 0.0);
      if (std::fabs(sum - 1.0) > 1e-9)
        throw ConfigError("scheme.xi: shares must sum to 1");
    }
    if (kind == SchemeKind::PenaltyFixedPerBlock && !deposit.empty() &&
        deposit.size() != powers.size())
      throw ConfigError("scheme.deposit: need one deposit per party");
  }
};

struct CostModel {
  double lambda = 0.0;  // cost per oracle query
};

inline std::vector<double> compute_cost(const Trace& tr, double lambda) {
  std::vector<double> out(static_cast<std::size_t>(tr.n), 0.0);
  for (int p = 0; p < tr.n; ++p)
    out[static_cast<std::size_t>(p)] = lambda * tr.queries_of(p);
  return out;
}

inline std::vector<double> compute_rewards(const RewardScheme& scheme,
                                           const Trace& tr) {
  std::size_t n = static_cast<std::size_t>(tr.n);
  std::vector<double> out(n, 0.0);
  int total_blocks = 0;
  for (int m : tr.m_counts) total_blocks += m;
  switch (scheme.kind) {
    case SchemeKind::ResourceProportional: {
      bool any = false;
      for (const auto& s : tr.slots)
        if (!s.produced.empty()) any = true;
      if (!any) return out;
      for (std::size_t p = 0; p < n; ++p) {
        double share = scheme.xi.empty() ? tr.powers[p] : scheme.xi[p];
        out[p] = share * scheme.R;
      }
      return out;
    }
    case SchemeKind::BlockProportional: {
      if (total_blocks == 0) return out;
      for (std::size_t p = 0; p < n; ++p)
        out[p] = scheme.R * tr.m_counts[p] / total_blocks;
      return out;
    }
    case SchemeKind::FixedPerBlock: {
      for (std::size_t p = 0; p < n; ++p) out[p] = scheme.R * tr.m_counts[p];
      return out;
    }
    case SchemeKind::PenaltyFixedPerBlock: {
      for (std::size_t p = 0; p < n; ++p) {
        if (eval_infraction(InfractionKind::Conf, tr, static_cast<int>(p))) {
          out[p] = 0.0;  // forfeits both block rewards and the deposit
        } else {
          double g = scheme.deposit.empty() ? 0.0 : scheme.deposit[p];
          out[p] = scheme.R * tr.m_counts[p] + g;
        }
      }
      return out;
    }
  }
  return out;
}

enum class UtilityKind { Reward, Profit, RelativeProfit, ExternReward, ExternProfit };

struct UtilityEstimates {
  double reward_mean = 0.0;
  double cost_mean = 0.0;
  double total_reward_mean = 0.0;  // over all parties
  double exchange_rate = 1.0;      // x_sigma
  double external_reward = 0.0;    // b, zero for infraction-free play
};

inline double utility(UtilityKind kind, const UtilityEstimates& e) {
  switch (kind) {
    case UtilityKind::Reward:
      return e.reward_mean;
    case UtilityKind::Profit:
      return e.reward_mean - e.cost_mean;
    case UtilityKind::RelativeProfit:
      if (e.total_reward_mean == 0.0) return 0.0;
      return (e.reward_mean - e.cost_mean) / e.total_reward_mean;
    case UtilityKind::ExternReward:
      return e.reward_mean * e.exchange_rate + e.external_reward;
    case UtilityKind::ExternProfit:
      return e.reward_mean * e.exchange_rate + e.external_reward - e.cost_mean;
  }
  return 0.0;
}

// Per-profile-class externality inputs (expected values, per Def-level use).
struct ExternalityModel {
  double honest_exchange_rate = 1.0;
  // keyed by strategy name for the deviating party
  std::vector<std::pair<std::string, double>> exchange_rates;
  std::vector<std::pair<std::string, double>> external_rewards;

  double rate_for(const std::string& name) const {
    for (const auto& [k, v] : exchange_rates)
      if (k == name) return v;
    return honest_exchange_rate;
  }
  double reward_for(const std::string& name) const {
    for (const auto& [k, v] : external_rewards)
      if (k == name) return v;
    return 0.0;
  }
};

}  // namespace clab
