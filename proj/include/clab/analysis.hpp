#pragma once

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <deque>
#include <functional>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <thread>
#include <vector>

#include "bounds.hpp"
#include "economics.hpp"
#include "execution.hpp"
#include "infractions.hpp"

namespace clab {

struct ExperimentConfig {
  ExecutionConfig exec;
  RewardScheme scheme;
  CostModel cost;
  UtilityKind utility = UtilityKind::Profit;
  ExternalityModel externality;
  bool use_externality = false;
  std::vector<StrategyDescriptor> candidates;
  double epsilon = 0.0;
  int runs = 100;
  std::uint64_t seed = 1;
  double confidence_z = 2.5758293035489004;  // two-sided 99%
  int escalation_cap = 2;                    // x4 run escalations
  int max_depth = 3;
  std::vector<InfractionKind> flag_kinds = {
      InfractionKind::Conf, InfractionKind::Abs, InfractionKind::Self};

  void validate() const {
    exec.validate();
    scheme.validate(exec.powers);
    if (runs < 1) throw ConfigError("runs: need >= 1");
  }
};

inline int max_threads() {
  if (const char* env = std::getenv("COMPLIANCE_LAB_THREADS")) {
    int v = std::atoi(env);
    if (v >= 1) return v;
  }
  unsigned hw = std::thread::hardware_concurrency();
  return static_cast<int>(std::min(hw == 0 ? 1u : hw, 8u));
}

// Runs fn(i) for i in [0, count) on a bounded pool; results land in index
// order so downstream folds are deterministic.
template <typename F>
void parallel_for(int count, F&& fn) {
  int workers = std::min(max_threads(), count);
  if (workers <= 1) {
    for (int i = 0; i < count; ++i) fn(i);
    return;
  }
  std::atomic<int> next{0};
  std::vector<std::thread> pool;
  pool.reserve(static_cast<std::size_t>(workers));
  for (int w = 0; w < workers; ++w)
    pool.emplace_back([&]() {
      while (true) {
        int i = next.fetch_add(1);
        if (i >= count) break;
        fn(i);
      }
    });
  for (auto& t : pool) t.join();
}

struct PartyReport {
  double reward_mean = 0.0;
  double reward_ci = 0.0;
  double cost_mean = 0.0;
  double cost_ci = 0.0;
  double utility = 0.0;
  double utility_ci = 0.0;
};

struct UtilityReport {
  std::vector<PartyReport> parties;
  int samples = 0;
  std::uint64_t seed = 0;
};

// Seed for estimating one profile: a pure function of the master seed and the
// profile, so identical profiles evaluate identically anywhere in a search.
inline std::uint64_t profile_seed(std::uint64_t master,
                                  const StrategyProfile& profile) {
  std::uint64_t h = master;
  for (const auto& d : profile) {
    h = mix64(h ^ static_cast<std::uint64_t>(d.ordinal()));
    for (int s : d.abstain_slots) h = mix64(h ^ static_cast<std::uint64_t>(s));
  }
  return h;
}

inline UtilityReport estimate_utility(const ExperimentConfig& cfg,
                                      const StrategyProfile& profile,
                                      UtilityKind kind, int runs,
                                      std::uint64_t seed) {
  if (runs < 1) throw ConfigError("estimate: need runs >= 1");
  int n = cfg.exec.n();
  struct Run {
    std::vector<double> rewards, costs;
    double total_reward = 0.0;
  };
  std::vector<Run> results(static_cast<std::size_t>(runs));
  parallel_for(runs, [&](int i) {
    Trace tr = run_execution(cfg.exec, profile,
                             replica_seed(seed, static_cast<std::uint64_t>(i)));
    Run r;
    r.rewards = compute_rewards(cfg.scheme, tr);
    r.costs = compute_cost(tr, cfg.cost.lambda);
    for (double x : r.rewards) r.total_reward += x;
    results[static_cast<std::size_t>(i)] = std::move(r);
  });

  UtilityReport rep;
  rep.samples = runs;
  rep.seed = seed;
  rep.parties.assign(static_cast<std::size_t>(n), {});
  std::vector<double> rsum(static_cast<std::size_t>(n), 0.0), rsq(rsum),
      csum(rsum), csq(rsum);
  double tsum = 0.0, tsq = 0.0;
  for (const Run& r : results) {
    for (int p = 0; p < n; ++p) {
      std::size_t i = static_cast<std::size_t>(p);
      rsum[i] += r.rewards[i];
      rsq[i] += r.rewards[i] * r.rewards[i];
      csum[i] += r.costs[i];
      csq[i] += r.costs[i] * r.costs[i];
    }
    tsum += r.total_reward;
    tsq += r.total_reward * r.total_reward;
  }
  double inv = 1.0 / runs;
  auto ci = [&](double sum, double sq) {
    if (runs < 2) return 0.0;
    double mean = sum * inv;
    double var = std::max(0.0, (sq - runs * mean * mean) / (runs - 1));
    return cfg.confidence_z * std::sqrt(var * inv);
  };
  double total_mean = tsum * inv;
  double total_ci = ci(tsum, tsq);
  for (int p = 0; p < n; ++p) {
    std::size_t i = static_cast<std::size_t>(p);
    PartyReport& pr = rep.parties[i];
    pr.reward_mean = rsum[i] * inv;
    pr.reward_ci = ci(rsum[i], rsq[i]);
    pr.cost_mean = csum[i] * inv;
    pr.cost_ci = ci(csum[i], csq[i]);
    UtilityEstimates est;
    est.reward_mean = pr.reward_mean;
    est.cost_mean = pr.cost_mean;
    est.total_reward_mean = total_mean;
    if (cfg.use_externality) {
      const std::string name = profile[i].name();
      est.exchange_rate = cfg.externality.rate_for(name);
      est.external_reward = profile[i].kind == StrategyKind::Honest
                                ? 0.0
                                : cfg.externality.reward_for(name);
    }
    pr.utility = utility(kind, est);
    switch (kind) {
      case UtilityKind::Reward:
        pr.utility_ci = pr.reward_ci;
        break;
      case UtilityKind::Profit:
        pr.utility_ci = std::sqrt(pr.reward_ci * pr.reward_ci +
                                  pr.cost_ci * pr.cost_ci);
        break;
      case UtilityKind::RelativeProfit: {
        if (total_mean == 0.0) {
          pr.utility_ci = 0.0;
        } else {
          double num_ci = std::sqrt(pr.reward_ci * pr.reward_ci +
                                    pr.cost_ci * pr.cost_ci);
          double num = pr.reward_mean - pr.cost_mean;
          pr.utility_ci = num_ci / std::fabs(total_mean) +
                          std::fabs(num) / (total_mean * total_mean) * total_ci;
        }
        break;
      }
      case UtilityKind::ExternReward:
        pr.utility_ci = pr.reward_ci * est.exchange_rate;
        break;
      case UtilityKind::ExternProfit:
        pr.utility_ci = std::sqrt(pr.reward_ci * est.exchange_rate *
                                      pr.reward_ci * est.exchange_rate +
                                  pr.cost_ci * pr.cost_ci);
        break;
    }
  }
  return rep;
}

struct BestResponse {
  StrategyDescriptor descriptor;
  double utility = 0.0;
  double utility_ci = 0.0;
  int runs_used = 0;
  bool indeterminate = false;  // CI overlap persisted at the escalation cap
};

inline BestResponse best_response(const ExperimentConfig& cfg,
                                  const StrategyProfile& profile, int party,
                                  const std::vector<StrategyDescriptor>& candidates,
                                  UtilityKind kind, int runs) {
  if (candidates.empty()) throw ConfigError("best response: empty candidate set");
  const StrategyDescriptor current = profile[static_cast<std::size_t>(party)];
  int attempt_runs = runs;
  for (int attempt = 0;; ++attempt) {
    struct Scored {
      StrategyDescriptor d;
      double u, ci;
    };
    std::vector<Scored> scored;
    for (const auto& cand : candidates) {
      StrategyProfile p = profile;
      p[static_cast<std::size_t>(party)] = cand;
      UtilityReport rep =
          estimate_utility(cfg, p, kind, attempt_runs, profile_seed(cfg.seed, p));
      const PartyReport& pr = rep.parties[static_cast<std::size_t>(party)];
      scored.push_back({cand, pr.utility, pr.utility_ci});
    }
    auto better = [&](const Scored& a, const Scored& b) {
      if (a.u != b.u) return a.u > b.u;
      bool ac = a.d == current, bc = b.d == current;
      if (ac != bc) return ac;
      return a.d.ordinal() < b.d.ordinal();
    };
    std::sort(scored.begin(), scored.end(), better);
    bool separated = true;
    if (scored.size() > 1 && !(scored[0].d == scored[1].d)) {
      separated = scored[0].u - scored[0].ci > scored[1].u + scored[1].ci;
      // exact ties between behaviorally identical candidates resolve by rule
      if (scored[0].u == scored[1].u) separated = true;
    }
    if (separated || attempt >= cfg.escalation_cap) {
      BestResponse out;
      out.descriptor = scored[0].d;
      out.utility = scored[0].u;
      out.utility_ci = scored[0].ci;
      out.runs_used = attempt_runs;
      out.indeterminate = !separated;
      if (!separated) {
        // unresolved overlap: prefer the incumbent, then lowest ordinal
        for (const auto& s : scored)
          if (s.d == current &&
              s.u + s.ci >= scored[0].u - scored[0].ci) {
            out.descriptor = current;
            out.utility = s.u;
            out.utility_ci = s.ci;
            break;
          }
      }
      return out;
    }
    attempt_runs *= 4;
  }
}

struct Reachability {
  bool reachable = false;
  double gain = 0.0;
  double gain_ci = 0.0;
};

inline Reachability directly_reachable(const ExperimentConfig& cfg,
                                       const StrategyProfile& from,
                                       const StrategyProfile& to, double eps,
                                       UtilityKind kind, int runs) {
  Reachability out;
  if (from.size() != to.size()) return out;
  int diff = -1;
  for (std::size_t i = 0; i < from.size(); ++i)
    if (!(from[i] == to[i])) {
      if (diff >= 0) return out;  // more than one coordinate changed
      diff = static_cast<int>(i);
    }
  if (diff < 0) return out;  // identical profiles are never reachable

  UtilityReport rf = estimate_utility(cfg, from, kind, runs,
                                      profile_seed(cfg.seed, from));
  UtilityReport rt =
      estimate_utility(cfg, to, kind, runs, profile_seed(cfg.seed, to));
  const PartyReport& a = rf.parties[static_cast<std::size_t>(diff)];
  const PartyReport& b = rt.parties[static_cast<std::size_t>(diff)];
  out.gain = b.utility - a.utility;
  out.gain_ci = a.utility_ci + b.utility_ci;
  bool improves = (b.utility - b.utility_ci) - (a.utility + a.utility_ci) > eps;
  if (!improves) return out;
  BestResponse br =
      best_response(cfg, from, diff, cfg.candidates, kind, runs);
  out.reachable = br.descriptor == to[static_cast<std::size_t>(diff)];
  return out;
}

struct ConeEntry {
  StrategyProfile profile;
  std::vector<double> utilities;
  std::vector<std::string> path;  // profile labels from the all-honest root
  std::vector<std::pair<int, InfractionKind>> infractions;  // (party, kind)
};

struct ConeResult {
  std::vector<ConeEntry> entries;  // entry 0 is always the all-honest profile
  std::vector<std::pair<std::string, std::string>> non_compliant_found;
  bool depth_exceeded = false;
  bool compliant_on_candidates = true;
};

inline std::string profile_label(const StrategyProfile& p) {
  std::string s;
  for (std::size_t i = 0; i < p.size(); ++i) {
    if (i) s += "|";
    s += p[i].name();
  }
  return s;
}

inline std::vector<std::pair<int, InfractionKind>> flag_profile(
    const ExperimentConfig& cfg, const StrategyProfile& profile, int samples) {
  std::vector<std::pair<int, InfractionKind>> found;
  std::uint64_t s0 = profile_seed(cfg.seed, profile);
  std::vector<Trace> traces;
  for (int i = 0; i < samples; ++i)
    traces.push_back(run_execution(cfg.exec, profile,
                                   replica_seed(s0, static_cast<std::uint64_t>(i))));
  for (int p = 0; p < cfg.exec.n(); ++p)
    for (InfractionKind k : cfg.flag_kinds) {
      bool hit = false;
      for (const Trace& tr : traces)
        if (eval_infraction(k, tr, p)) {
          hit = true;
          break;
        }
      if (hit) found.emplace_back(p, k);
    }
  return found;
}

inline ConeResult explore_cone(const ExperimentConfig& cfg,
                               const std::vector<StrategyDescriptor>& candidates,
                               double eps, UtilityKind kind, int runs,
                               int max_depth) {
  if (candidates.empty()) throw ConfigError("cone: empty candidate set");
  ConeResult result;
  StrategyProfile root(static_cast<std::size_t>(cfg.exec.n()),
                       StrategyDescriptor::honest());
  std::set<std::string> seen;
  struct Item {
    StrategyProfile profile;
    std::vector<std::string> path;
    int depth;
  };
  std::deque<Item> frontier;
  frontier.push_back({root, {profile_label(root)}, 0});
  seen.insert(profile_label(root));

  while (!frontier.empty()) {
    Item item = std::move(frontier.front());
    frontier.pop_front();

    UtilityReport rep = estimate_utility(cfg, item.profile, kind, runs,
                                         profile_seed(cfg.seed, item.profile));
    ConeEntry entry;
    entry.profile = item.profile;
    entry.path = item.path;
    for (const auto& pr : rep.parties) entry.utilities.push_back(pr.utility);
    entry.infractions = flag_profile(cfg, item.profile, std::min(runs, 16));
    for (const auto& [p, k] : entry.infractions) {
      result.non_compliant_found.emplace_back(profile_label(item.profile),
                                              std::string(infraction_name(k)) +
                                                  ":party" + std::to_string(p));
      result.compliant_on_candidates = false;
    }
    result.entries.push_back(entry);

    for (int party = 0; party < cfg.exec.n(); ++party) {
      BestResponse br =
          best_response(cfg, item.profile, party, candidates, kind, runs);
      if (br.descriptor == item.profile[static_cast<std::size_t>(party)]) continue;
      const PartyReport& cur = rep.parties[static_cast<std::size_t>(party)];
      bool improves = (br.utility - br.utility_ci) -
                          (cur.utility + cur.utility_ci) >
                      eps;
      if (!improves) continue;
      StrategyProfile next = item.profile;
      next[static_cast<std::size_t>(party)] = br.descriptor;
      std::string label = profile_label(next);
      if (seen.count(label)) continue;
      if (item.depth >= max_depth) {
        // a qualifying edge exists past the depth budget: partial result
        result.depth_exceeded = true;
        continue;
      }
      seen.insert(label);
      auto path = item.path;
      path.push_back(label);
      frontier.push_back({std::move(next), std::move(path), item.depth + 1});
    }
  }
  return result;
}

// ---------------------------------------------------------------------------
// Explicit finite games: the equilibrium <-> singleton-cone equivalence.

struct FiniteGame {
  int players = 0;
  std::vector<int> n_strategies;                 // per player
  std::vector<std::vector<double>> utils;        // [player][profile index]

  int profile_count() const {
    int c = 1;
    for (int s : n_strategies) c *= s;
    return c;
  }
  int index_of(const std::vector<int>& strat) const {
    int idx = 0;
    for (int p = 0; p < players; ++p)
      idx = idx * n_strategies[static_cast<std::size_t>(p)] +
            strat[static_cast<std::size_t>(p)];
    return idx;
  }
  double u(int player, const std::vector<int>& strat) const {
    return utils[static_cast<std::size_t>(player)]
                [static_cast<std::size_t>(index_of(strat))];
  }
};

inline bool game_is_eps_nash(const FiniteGame& g, const std::vector<int>& at,
                             double eps) {
  for (int p = 0; p < g.players; ++p) {
    double base = g.u(p, at);
    std::vector<int> dev = at;
    for (int s = 0; s < g.n_strategies[static_cast<std::size_t>(p)]; ++s) {
      dev[static_cast<std::size_t>(p)] = s;
      if (g.u(p, dev) > base + eps) return false;
    }
  }
  return true;
}

inline bool game_cone_is_singleton(const FiniteGame& g, double eps) {
  std::vector<int> root(static_cast<std::size_t>(g.players), 0);
  std::set<std::vector<int>> seen{root};
  std::deque<std::vector<int>> frontier{root};
  while (!frontier.empty()) {
    std::vector<int> cur = frontier.front();
    frontier.pop_front();
    for (int p = 0; p < g.players; ++p) {
      // exact best response, ties toward the incumbent then lowest index
      int cur_s = cur[static_cast<std::size_t>(p)];
      int best = cur_s;
      double best_u = g.u(p, cur);
      std::vector<int> dev = cur;
      for (int s = 0; s < g.n_strategies[static_cast<std::size_t>(p)]; ++s) {
        dev[static_cast<std::size_t>(p)] = s;
        double u = g.u(p, dev);
        if (u > best_u) {
          best_u = u;
          best = s;
        }
      }
      if (best == cur_s) continue;
      if (best_u <= g.u(p, cur) + eps) continue;
      std::vector<int> next = cur;
      next[static_cast<std::size_t>(p)] = best;
      if (seen.insert(next).second) frontier.push_back(next);
    }
  }
  return seen.size() == 1;
}

// Both routes computed independently; the framework's core equivalence says
// they must always agree at the all-honest profile.
inline bool check_equilibrium_cone_equivalence(const FiniteGame& g, double eps) {
  std::vector<int> honest(static_cast<std::size_t>(g.players), 0);
  return game_is_eps_nash(g, honest, eps) == game_cone_is_singleton(g, eps);
}

}  // namespace clab
