#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "block.hpp"
#include "protocol.hpp"
#include "types.hpp"

namespace clab {

enum class StrategyKind {
  Honest,
  AbstainAlways,
  AbstainSchedule,
  ConflictT,
  SelfishSign,
  SelfishSignDepthLE3,
  GreedyFork,  // withhold-free PoW fork: first success extends the tip's parent
  Composite,
};

struct StrategyDescriptor {
  StrategyKind kind = StrategyKind::Honest;
  int t = 1;                        // ConflictT width
  std::vector<int> abstain_slots;   // AbstainSchedule
  // Composite: piecewise by slot; pieces[i] applies from from_slot[i] until the
  // next piece begins.
  std::vector<int> from_slot;
  std::vector<StrategyKind> pieces;

  bool operator==(const StrategyDescriptor& o) const {
    return kind == o.kind && t == o.t && abstain_slots == o.abstain_slots &&
           from_slot == o.from_slot && pieces == o.pieces;
  }

  std::string name() const {
    switch (kind) {
      case StrategyKind::Honest: return "honest";
      case StrategyKind::AbstainAlways: return "abstain_always";
      case StrategyKind::AbstainSchedule: return "abstain_schedule";
      case StrategyKind::ConflictT: return "conflict_" + std::to_string(t);
      case StrategyKind::SelfishSign: return "selfish_sign";
      case StrategyKind::SelfishSignDepthLE3: return "selfish_sign_dle3";
      case StrategyKind::GreedyFork: return "greedy_fork";
      case StrategyKind::Composite: return "composite";
    }
    return "?";
  }

  // Stable ordinal for deterministic tie-breaking in best-response search.
  long ordinal() const {
    return static_cast<long>(kind) * 1000 + t;
  }

  static StrategyDescriptor honest() { return {}; }
  static StrategyDescriptor abstain() {
    StrategyDescriptor d;
    d.kind = StrategyKind::AbstainAlways;
    return d;
  }
  static StrategyDescriptor abstain_on(std::vector<int> slots) {
    StrategyDescriptor d;
    d.kind = StrategyKind::AbstainSchedule;
    d.abstain_slots = std::move(slots);
    return d;
  }
  static StrategyDescriptor conflict(int t) {
    if (t < 1) throw ConfigError("conflict strategy: need t >= 1");
    StrategyDescriptor d;
    d.kind = StrategyKind::ConflictT;
    d.t = t;
    return d;
  }
  static StrategyDescriptor selfish() {
    StrategyDescriptor d;
    d.kind = StrategyKind::SelfishSign;
    return d;
  }
  static StrategyDescriptor selfish_dle3() {
    StrategyDescriptor d;
    d.kind = StrategyKind::SelfishSignDepthLE3;
    return d;
  }
  static StrategyDescriptor greedy() {
    StrategyDescriptor d;
    d.kind = StrategyKind::GreedyFork;
    return d;
  }
};

using StrategyProfile = std::vector<StrategyDescriptor>;

struct SelfishWindow {
  int r = 0;  // first led slot of the window (1-based)
  int d = 0;  // depth; the window covers slots r..r+d
};

struct SelfishPlan {
  std::vector<SelfishWindow> windows;
};

// Reorg planner over a revealed leadership schedule: scan left to right; at a
// led slot r with k* consecutive future leads and l* consecutive preceding
// non-led slots, both positive, commit to depth d = min(k*, l*) over slots
// r..r+d and resume after the window. Never discards own blocks (the gap
// guarantees the victims are others'), never abstains.
inline SelfishPlan plan_selfish(const std::string& schedule_bits) {
  SelfishPlan plan;
  int N = static_cast<int>(schedule_bits.size());
  auto led = [&](int slot) {  // 1-based
    char c = schedule_bits[static_cast<std::size_t>(slot - 1)];
    if (c != '0' && c != '1')
      throw ConfigError("schedule bits: expected a 0/1 string");
    return c == '1';
  };
  int r = 1;
  while (r <= N) {
    if (!led(r)) {
      ++r;
      continue;
    }
    int k = 0;
    while (r + k + 1 <= N && led(r + k + 1)) ++k;
    int l = 0;
    while (r - l - 1 >= 1 && !led(r - l - 1)) ++l;
    if (k > 0 && l > 0) {
      int d = std::min(k, l);
      plan.windows.push_back({r, d});
      r += d + 1;
    } else {
      ++r;
    }
  }
  return plan;
}

// Depth-capped variant used as the brute-force discard-rate oracle: the
// schedule is fragmented into disjoint 7-bit windows (zero-padded on the
// right) and each window is planned independently with depth capped at 3.
inline SelfishPlan plan_selfish_d_le_3(const std::string& schedule_bits) {
  SelfishPlan plan;
  std::string padded = schedule_bits;
  while (padded.size() % 7 != 0) padded.push_back('0');
  for (std::size_t w = 0; w < padded.size(); w += 7) {
    std::string window = padded.substr(w, 7);
    SelfishPlan sub = plan_selfish(window);
    for (SelfishWindow sw : sub.windows) {
      if (sw.d > 3) sw.d = 3;
      sw.r += static_cast<int>(w);
      if (sw.r + sw.d <= static_cast<int>(schedule_bits.size()))
        plan.windows.push_back(sw);
    }
  }
  return plan;
}

inline std::string schedule_bits_for(const LeaderSchedule& sched, int party) {
  std::string bits;
  bits.reserve(sched.per_slot.size());
  for (std::size_t s = 0; s < sched.per_slot.size(); ++s)
    bits.push_back(sched.is_leader(party, static_cast<int>(s) + 1) ? '1' : '0');
  return bits;
}

// Build the d+1 fork blocks for one window against the live view: the block
// at slot r extends the tip's d-th ancestor, the rest chain onto it. After
// slot r+d the fork is one longer than the displaced branch, so longest-chain
// adopters discard the d victim blocks.
inline std::vector<Block> execute_selfish_fork(const ChainView& view,
                                               SelfishWindow window, int party,
                                               const LeaderSchedule& schedule) {
  if (window.d < 1)
    throw ConfigError("selfish fork: depth must be >= 1");
  for (int s = window.r; s <= window.r + window.d; ++s)
    if (s > static_cast<int>(schedule.per_slot.size()) ||
        !schedule.is_leader(party, s))
      throw PartialResult("selfish fork: schedule drift, party not leading the window");
  const Block* tip = &view.tree.at(view.tip);
  if (static_cast<int>(tip->index) < window.d)
    throw PartialResult("selfish fork: chain shorter than the fork depth");
  const Block* anchor = tip;
  for (int i = 0; i < window.d; ++i) anchor = &view.tree.at(anchor->parent);
  std::vector<Block> out;
  Block prev = *anchor;
  for (int j = 0; j <= window.d; ++j) {
    Block b = Block::make(party, window.r + j, prev);
    b.fork_flag = true;
    out.push_back(b);
    prev = b;
  }
  return out;
}

}  // namespace clab
