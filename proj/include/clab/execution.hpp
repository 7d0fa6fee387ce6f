#pragma once

#include <algorithm>
#include <cstdint>
#include <numeric>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "block.hpp"
#include "protocol.hpp"
#include "rng.hpp"
#include "strategy.hpp"
#include "types.hpp"

namespace clab {

struct ExecutionConfig {
  std::vector<double> powers;
  ProtocolSpec protocol;
  RouterSpec router;
  ChainRule rule = ChainRule::LongestChain;
  TieRule tie = TieRule::Chronological;
  int checkpoint_depth = 36;

  int n() const { return static_cast<int>(powers.size()); }

  void validate() const {
    check_powers(powers);
    protocol.validate(powers.size());
    router.validate();
    if (protocol.total_slots() < 1)
      throw ConfigError("protocol: execution length must be >= 1");
  }
};

struct SlotRecord {
  int slot = 0;
  std::vector<int> queries;      // per party
  std::vector<Block> produced;   // diffusion order
  std::vector<std::uint8_t> dropped;  // per produced message (lossy router)
};

struct Trace {
  std::uint64_t seed = 0;
  int n = 0;
  std::vector<double> powers;
  Family family = Family::SLPoS;
  double pow_delta = 0.0;
  int pow_q = 0;
  std::vector<std::string> strategy_names;
  std::vector<std::uint8_t> deviated;  // per party, descriptor != Honest
  std::vector<SlotRecord> slots;
  std::vector<std::vector<std::uint8_t>> duty;  // [party][slot-1]
  std::vector<std::vector<Hash>> party_arrivals;  // delivered, excluding own
  std::vector<Hash> observer_arrivals;
  std::unordered_map<Hash, Block> block_registry;
  // Final observer output, computed at the closing observer-only activation.
  std::vector<Block> chain;  // genesis first
  std::vector<int> m_counts;

  int total_slots() const { return static_cast<int>(slots.size()); }

  int queries_of(int party) const {
    int total = 0;
    for (const auto& s : slots) total += s.queries[static_cast<std::size_t>(party)];
    return total;
  }
};

struct RoutingResult {
  std::vector<std::uint8_t> dropped;          // per message
  std::vector<std::vector<int>> order;        // per recipient, message indices
};

// Recipients are the n parties plus the observer at index n. Delivered lists
// carry no sender identity beyond the block contents themselves.
inline RoutingResult route_deliver(const RouterSpec& router, int n_messages,
                                   int n_parties, std::uint64_t seed, int slot) {
  RoutingResult res;
  res.dropped.assign(static_cast<std::size_t>(n_messages), 0);
  if (router.kind == RouterKind::Lossy) {
    for (int m = 0; m < n_messages; ++m) {
      double u = rand_unit(seed, Stream::Router, static_cast<std::uint64_t>(slot),
                           0xd80f, static_cast<std::uint64_t>(m));
      if (u < router.drop_probability) res.dropped[static_cast<std::size_t>(m)] = 1;
    }
  }
  std::vector<int> base;
  for (int m = 0; m < n_messages; ++m)
    if (!res.dropped[static_cast<std::size_t>(m)]) base.push_back(m);
  res.order.assign(static_cast<std::size_t>(n_parties) + 1, base);
  if (router.kind == RouterKind::Uniform) {
    for (int r = 0; r <= n_parties; ++r) {
      auto& v = res.order[static_cast<std::size_t>(r)];
      // independent per-recipient Fisher-Yates permutation
      for (std::size_t i = v.size(); i > 1; --i) {
        std::uint64_t j = rand_u64(seed, Stream::Router,
                                   static_cast<std::uint64_t>(slot),
                                   static_cast<std::uint64_t>(r) + 1, i) % i;
        std::swap(v[i - 1], v[j]);
      }
    }
  }
  return res;
}

// Stateless proof-of-work oracle coin: the k-th query of a party in a slot
// has a fixed outcome regardless of interleaving.
inline bool pow_coin(std::uint64_t seed, int slot, int party, int k, double delta) {
  return rand_unit(seed, Stream::Oracle, static_cast<std::uint64_t>(slot),
                   static_cast<std::uint64_t>(party),
                   static_cast<std::uint64_t>(k)) < delta;
}

struct QueryResult {
  bool success = false;     // PoW coin, or PoS token validity
};

namespace detail {

struct PartyState {
  StrategyDescriptor desc;
  SelfishPlan plan;
  std::size_t next_window = 0;
  std::vector<Block> active_fork;
  std::size_t fork_pos = 0;
};

inline bool abstains_now(const StrategyDescriptor& d, int slot) {
  return std::find(d.abstain_slots.begin(), d.abstain_slots.end(), slot) !=
         d.abstain_slots.end();
}

inline StrategyKind piece_for_slot(const StrategyDescriptor& d, int slot) {
  StrategyKind k = StrategyKind::Honest;
  for (std::size_t i = 0; i < d.pieces.size(); ++i)
    if (slot >= d.from_slot[i]) k = d.pieces[i];
  return k;
}

}  // namespace detail

// One party's activation in one slot: performs oracle queries against the
// live view and returns the blocks it diffuses. Produced blocks are entered
// into the party's own view immediately.
inline void strategy_step(detail::PartyState& st, int party,
                          const ExecutionConfig& cfg, int slot, ChainView& view,
                          const LeaderSchedule* sched,
                          const std::vector<int>& budgets, std::uint64_t seed,
                          int& queries, std::vector<Block>& out) {
  const ProtocolSpec& proto = cfg.protocol;
  // Producers do not short-circuit their own view: a diffused block reaches
  // its creator through the router at the next slot like any other recipient
  // (and a lossy drop loses it for the creator too).
  auto tip_block = [&]() -> const Block& { return view.tree.at(view.tip); };
  auto emit = [&](const Block& b) { out.push_back(b); };

  StrategyKind kind = st.desc.kind;
  if (kind == StrategyKind::Composite) kind = detail::piece_for_slot(st.desc, slot);

  if (kind == StrategyKind::AbstainAlways) return;
  if (kind == StrategyKind::AbstainSchedule && detail::abstains_now(st.desc, slot))
    return;

  if (proto.family == Family::BitcoinPoW) {
    int budget = budgets[static_cast<std::size_t>(party)];
    std::optional<Block> prev;
    for (int k = 0; k < budget; ++k) {
      ++queries;
      if (!pow_coin(seed, slot, party, k, proto.delta)) continue;
      Block parent;
      if (prev) {
        parent = *prev;
      } else if (kind == StrategyKind::GreedyFork &&
                 tip_block().hash != kGenesisHash) {
        parent = view.tree.at(tip_block().parent);
      } else {
        parent = tip_block();
      }
      Block b = Block::make(party, slot, parent);
      emit(b);
      prev = b;
    }
    return;
  }

  // PoS families
  bool leader = sched->is_leader(party, slot);

  if (kind == StrategyKind::SelfishSign || kind == StrategyKind::SelfishSignDepthLE3) {
    if (st.fork_pos < st.active_fork.size()) {
      ++queries;
      emit(st.active_fork[st.fork_pos++]);
      return;
    }
    if (st.next_window < st.plan.windows.size() &&
        st.plan.windows[st.next_window].r == slot) {
      SelfishWindow w = st.plan.windows[st.next_window++];
      try {
        st.active_fork = execute_selfish_fork(view, w, party, *sched);
        st.fork_pos = 0;
        ++queries;
        emit(st.active_fork[st.fork_pos++]);
        return;
      } catch (const PartialResult&) {
        st.active_fork.clear();  // schedule drift: play the slot honestly
        st.fork_pos = 0;
      }
    }
    if (leader) {
      ++queries;
      emit(Block::make(party, slot, tip_block()));
    }
    return;
  }

  if (kind == StrategyKind::ConflictT) {
    if (!leader) return;
    Block parent = tip_block();
    for (int k = 0; k < st.desc.t; ++k) {
      ++queries;
      emit(Block::make(party, slot, parent, static_cast<std::uint64_t>(k)));
    }
    return;
  }

  // Honest (and PoW-only kinds degrade to honest under PoS)
  if (leader) {
    ++queries;
    emit(Block::make(party, slot, tip_block()));
  }
}

inline Trace run_execution(const ExecutionConfig& cfg,
                           const StrategyProfile& profile, std::uint64_t seed) {
  cfg.validate();
  int n = cfg.n();
  if (static_cast<int>(profile.size()) != n)
    throw ConfigError("strategy profile: arity does not match the party count");
  int N = cfg.protocol.total_slots();

  std::optional<LeaderSchedule> sched;
  if (cfg.protocol.family != Family::BitcoinPoW)
    sched = draw_leader_schedule(cfg.protocol, cfg.powers, seed);
  std::vector<int> budgets;
  if (cfg.protocol.family == Family::BitcoinPoW)
    budgets = pow_budgets(cfg.powers, cfg.protocol.q);

  std::vector<detail::PartyState> st(static_cast<std::size_t>(n));
  for (int p = 0; p < n; ++p) {
    st[static_cast<std::size_t>(p)].desc = profile[static_cast<std::size_t>(p)];
    StrategyKind k = profile[static_cast<std::size_t>(p)].kind;
    if (k == StrategyKind::SelfishSign || k == StrategyKind::SelfishSignDepthLE3) {
      if (cfg.protocol.family == Family::BitcoinPoW)
        throw ConfigError("selfish signing: predictable PoS only");
      if (!cfg.protocol.predictable)
        throw ConfigError("selfish signing: protocol must be predictable");
      std::string bits = schedule_bits_for(*sched, p);
      st[static_cast<std::size_t>(p)].plan = (k == StrategyKind::SelfishSign)
                                                 ? plan_selfish(bits)
                                                 : plan_selfish_d_le_3(bits);
    }
  }

  SubRng tie_rng{seed, Stream::TieBreak, 0, 0};
  std::vector<ChainView> views(static_cast<std::size_t>(n));
  ChainView observer;
  auto init_view = [&](ChainView& v, int owner) {
    v.owner = owner;
    v.rule = cfg.rule;
    v.tie = cfg.tie;
    v.checkpoint_depth = cfg.checkpoint_depth;
    v.tie_rng = cfg.tie == TieRule::Random ? &tie_rng : nullptr;
  };
  for (int p = 0; p < n; ++p) init_view(views[static_cast<std::size_t>(p)], p);
  init_view(observer, -1);

  Trace tr;
  tr.seed = seed;
  tr.n = n;
  tr.powers = cfg.powers;
  tr.family = cfg.protocol.family;
  tr.pow_delta = cfg.protocol.delta;
  tr.pow_q = cfg.protocol.q;
  tr.party_arrivals.assign(static_cast<std::size_t>(n), {});
  tr.duty.assign(static_cast<std::size_t>(n),
                 std::vector<std::uint8_t>(static_cast<std::size_t>(N), 0));
  for (int p = 0; p < n; ++p) {
    tr.strategy_names.push_back(profile[static_cast<std::size_t>(p)].name());
    tr.deviated.push_back(profile[static_cast<std::size_t>(p)].kind !=
                                  StrategyKind::Honest
                              ? 1
                              : 0);
    for (int s = 1; s <= N; ++s) {
      bool duty = cfg.protocol.family == Family::BitcoinPoW
                      ? true
                      : sched->is_leader(p, s);
      tr.duty[static_cast<std::size_t>(p)][static_cast<std::size_t>(s - 1)] =
          duty ? 1 : 0;
    }
  }

  // Deliveries scheduled for the start of the next slot.
  std::vector<std::vector<Block>> inbox(static_cast<std::size_t>(n) + 1);

  for (int slot = 1; slot <= N; ++slot) {
    // deliver last slot's routed messages
    for (int r = 0; r <= n; ++r) {
      ChainView& v = r == n ? observer : views[static_cast<std::size_t>(r)];
      for (const Block& b : inbox[static_cast<std::size_t>(r)]) {
        bool added = v.add_block(b);
        if (r == n && added) tr.observer_arrivals.push_back(b.hash);
        if (r < n && added) tr.party_arrivals[static_cast<std::size_t>(r)].push_back(b.hash);
      }
      inbox[static_cast<std::size_t>(r)].clear();
    }

    SlotRecord rec;
    rec.slot = slot;
    rec.queries.assign(static_cast<std::size_t>(n), 0);
    for (int p = 0; p < n; ++p) {
      std::vector<Block> produced;
      strategy_step(st[static_cast<std::size_t>(p)], p, cfg, slot,
                    views[static_cast<std::size_t>(p)],
                    sched ? &*sched : nullptr, budgets, seed,
                    rec.queries[static_cast<std::size_t>(p)], produced);
      for (const Block& b : produced) {
        rec.produced.push_back(b);
        tr.block_registry.emplace(b.hash, b);
      }
    }

    RoutingResult routed = route_deliver(cfg.router,
                                         static_cast<int>(rec.produced.size()),
                                         n, seed, slot);
    rec.dropped = routed.dropped;
    for (int r = 0; r <= n; ++r)
      for (int m : routed.order[static_cast<std::size_t>(r)])
        inbox[static_cast<std::size_t>(r)].push_back(
            rec.produced[static_cast<std::size_t>(m)]);
    tr.slots.push_back(std::move(rec));
  }

  // Closing activation: only the observer collects the final deliveries.
  for (const Block& b : inbox[static_cast<std::size_t>(n)]) {
    if (observer.add_block(b)) tr.observer_arrivals.push_back(b.hash);
  }

  tr.chain = chain_to(observer.tree, observer.tip);
  tr.m_counts.assign(static_cast<std::size_t>(n), 0);
  for (const Block& b : tr.chain)
    if (b.creator >= 0) tr.m_counts[static_cast<std::size_t>(b.creator)] += 1;
  return tr;
}

// Rebuild the observer's chain and per-party block counts from a trace.
struct ObserverOutput {
  std::vector<Block> chain;
  std::vector<int> m_counts;
};

inline ObserverOutput observer_output(const Trace& tr) {
  ObserverOutput out;
  out.chain = tr.chain;
  out.m_counts = tr.m_counts;
  return out;
}

inline bool validate_block(const Trace& tr, const Block& b,
                           const LeaderSchedule* sched) {
  if (b.creator < 0) return true;  // genesis
  if (tr.family == Family::BitcoinPoW) {
    // a PoW block is valid iff its creating query succeeded; blocks only
    // enter traces via successful queries, so presence in the registry is
    // the certificate
    return tr.block_registry.count(b.hash) != 0;
  }
  if (sched != nullptr && !sched->is_leader(b.creator, b.slot)) return false;
  if (tr.family == Family::SLPoS) {
    // a chain cannot contain two blocks for the same slot
    auto it = tr.block_registry.find(b.parent);
    if (it != tr.block_registry.end() && it->second.slot == b.slot) return false;
  }
  return true;
}

}  // namespace clab
