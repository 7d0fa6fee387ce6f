#pragma once

#include <algorithm>
#include <cmath>
#include <vector>

#include "types.hpp"

namespace clab {

// Resource-proportional rewards: non-compliance margin driven by the
// probability alpha that an execution produces no block at all.
inline double bound_abstain_reward(double alpha, const std::vector<double>& xi_mu,
                                   double R_total) {
  if (alpha < 0.0 || alpha > 1.0) throw DomainError("alpha must lie in [0,1]");
  double m = 0.0;
  for (double x : xi_mu) m = std::max(m, x);
  return alpha * m * R_total;
}

struct AbstainProfitBound {
  double eps_max = 0.0;
  int argmax_party = -1;
  bool precondition_ok = true;  // C_i > beta_i * xi(mu_i) * R must hold with >
                                // for the profit comparison to bite
};

// Profit under resource-proportional rewards: abstaining saves the entire
// participation cost C_i and risks only the (beta_i - alpha) reward mass.
inline AbstainProfitBound bound_abstain_profit(const std::vector<double>& C_i,
                                               const std::vector<double>& beta_i,
                                               double alpha,
                                               const std::vector<double>& xi_mu,
                                               double R_total) {
  if (C_i.size() != beta_i.size() || C_i.size() != xi_mu.size())
    throw ConfigError("abstain profit bound: vectors must have equal length");
  if (alpha < 0.0 || alpha > 1.0) throw DomainError("alpha must lie in [0,1]");
  AbstainProfitBound out;
  out.eps_max = -1e300;
  for (std::size_t i = 0; i < C_i.size(); ++i) {
    if (beta_i[i] < 0.0 || beta_i[i] > 1.0)
      throw DomainError("beta probabilities must lie in [0,1]");
    double v = C_i[i] - (beta_i[i] - alpha) * xi_mu[i] * R_total;
    if (v > out.eps_max) {
      out.eps_max = v;
      out.argmax_party = static_cast<int>(i);
    }
    if (!(C_i[i] > beta_i[i] * xi_mu[i] * R_total)) out.precondition_ok = false;
  }
  return out;
}

struct PowGapBound {
  double eps = 0.0;
  bool small_delta_ok = true;  // requires delta * q < 1
};

// Bitcoin reward gap: no deviation that keeps diffusing gains more than
// N*R*q^2*delta^2/2 over honest play.
inline PowGapBound bound_pow_gap(int N, double R, int q, double delta) {
  PowGapBound out;
  out.eps = N * R * q * static_cast<double>(q) * delta * delta / 2.0;
  out.small_delta_ok = delta * q < 1.0;
  return out;
}

struct ConflictBound {
  int t_star = 0;
  double eps_reward = 0.0;       // at the stated optimizer / supremum scale
  double eps_profit = 0.0;
  double margin_ratio = 0.0;     // (1-d)*R / C, flagged when not >> 1
  bool margin_ok = true;
};

// Lossy-router single-leader PoS: a leader diffusing t conflicting copies
// survives the drop with probability 1-d^t.
inline ConflictBound bound_conflict_lossy(double d, double R, double C,
                                          double s_P,
                                          double margin_threshold = 10.0) {
  if (!(d > 0.0 && d < 1.0)) throw DomainError("drop probability must lie in (0,1)");
  ConflictBound out;
  out.margin_ratio = C > 0.0 ? (1.0 - d) * R / C : 1e300;
  out.margin_ok = out.margin_ratio >= margin_threshold;
  out.eps_reward = d * R * s_P;  // supremum over t of (d - d^t)*R*s_P
  if (C <= 0.0) {
    out.t_star = 0;
    out.eps_profit = out.eps_reward;
    return out;
  }
  double t = std::floor(std::log(C / (R * std::log(1.0 / d))) / std::log(d));
  out.t_star = static_cast<int>(std::max(1.0, t));
  out.eps_profit =
      ((d - std::pow(d, out.t_star)) * R - (out.t_star - 1) * C) * s_P;
  return out;
}

inline double conflict_lossy_reward(double d, double R, double s_P, int t) {
  return (1.0 - std::pow(d, t)) * R * s_P;
}

inline double conflict_lossy_gain(double d, double R, double s_P, int t) {
  return (d - std::pow(d, t)) * R * s_P;
}

// Multi-leader PoS: slot races decided by uniform delivery order; diffusing t
// copies wins a race with probability t/(t+1).
inline ConflictBound bound_conflict_race(double p_l, double R, double C,
                                         double s_P) {
  if (p_l < 0.0 || p_l > 1.0) throw DomainError("p_l must lie in [0,1]");
  ConflictBound out;
  out.eps_reward = p_l / 2.0 * R * s_P;  // supremum over t
  if (C <= 0.0) {
    out.t_star = 0;
    out.eps_profit = out.eps_reward;
    return out;
  }
  int t = static_cast<int>(std::floor(std::sqrt(p_l * R / C))) - 1;
  out.t_star = std::max(1, t);
  double t_d = out.t_star;
  out.eps_profit =
      ((t_d - 1.0) / (2.0 * (t_d + 1.0)) * p_l * R - (t_d - 1.0) * C) * s_P;
  return out;
}

inline double conflict_race_reward(double p_l, double R, double s_P, int t) {
  return (1.0 - p_l / (t + 1.0)) * R * s_P;
}

// Closed-form expected blocks discarded per 7 slots by depth-capped selfish
// signing (tabulated form; see the ledger note on its slack vs. simulation).
inline double delta_mu(double mu) {
  double g = 1.0 - mu;
  return 5.0 * g * mu * mu + 6.0 * g * g * mu * mu * mu +
         3.0 * g * g * mu * mu * mu * mu + 3.0 * g * g * g * mu * mu * mu * mu;
}

// Selfish-signing relative-profit margin for a predictable PoS protocol.
inline double bound_selfish_relative(double mu_max, double R, double C) {
  if (!(R > C)) throw DomainError("selfish bound: requires R > C");
  return mu_max / (7.0 / delta_mu(mu_max) - 1.0) * (R - C) / R;
}

// Externalities without penalties.
inline double bound_externality(const std::vector<double>& rho_honest,
                                double x_honest,
                                const std::vector<std::vector<double>>& x_dev,
                                const std::vector<std::vector<double>>& b_dev) {
  double best = 0.0;
  for (std::size_t p = 0; p < rho_honest.size(); ++p)
    for (std::size_t s = 0; s < x_dev[p].size(); ++s)
      best = std::max(best,
                      rho_honest[p] * (x_dev[p][s] - x_honest) + b_dev[p][s]);
  return best;
}

struct PenaltyBound {
  double eps_max = 0.0;
  double deposit_needed = 0.0;  // g zeroing the bound given forfeiture
};

// Externalities with forfeited rewards and deposit on detected conflicts;
// negligible detection-failure terms are set to zero.
inline PenaltyBound bound_externality_penalty(double rho_honest, double x_honest,
                                              const std::vector<double>& b_dev) {
  PenaltyBound out;
  for (double b : b_dev) {
    out.eps_max = std::max(out.eps_max, b - rho_honest * x_honest);
    if (x_honest > 0.0)
      out.deposit_needed = std::max(
          out.deposit_needed, (b - rho_honest * x_honest) / x_honest);
  }
  out.deposit_needed = std::max(0.0, out.deposit_needed);
  return out;
}

// Smallest confirmation depth making a double-spend of value v unprofitable
// when each reorged slot forfeits deposit d plus reward R and the attacker
// controls a (1-x) minority of slots.
inline int confirmation_window(double v_tx, double x_participation,
                               double d_deposit, double R) {
  if (!(x_participation > 0.5 && x_participation <= 1.0))
    throw DomainError("confirmation window: x must lie in (0.5, 1]");
  if (v_tx < 0.0) throw DomainError("confirmation window: value must be >= 0");
  double bound =
      v_tx / ((2.0 * x_participation - 1.0) / x_participation * (d_deposit + R));
  int k = static_cast<int>(std::floor(bound)) + 1;
  if (static_cast<double>(k) <= bound) ++k;  // strict inequality
  return std::max(1, k);
}

struct AttackDifference {
  double counterfactual_difference = 0.0;  // P_C * p_btc * b * R
  double actual_minus_counterfactual = 0.0;
  bool have_actual = false;
};

// Double-spend reward revaluation: block rewards valued at the asset price
// five days after the attack, compared against the benchmark-driven
// counterfactual price path.
inline AttackDifference attack_reward_difference(double P_C_after,
                                                 double p_btc_change,
                                                 double b_blocks, double R,
                                                 double P_C_at_attack = -1.0) {
  AttackDifference out;
  out.counterfactual_difference = P_C_after * p_btc_change * b_blocks * R;
  if (P_C_at_attack >= 0.0) {
    out.have_actual = true;
    double counterfactual_price = P_C_at_attack * (1.0 + p_btc_change);
    out.actual_minus_counterfactual =
        (P_C_after - counterfactual_price) * b_blocks * R;
  }
  return out;
}

}  // namespace clab
