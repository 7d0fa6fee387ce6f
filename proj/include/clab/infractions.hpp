#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <vector>

#include "execution.hpp"

namespace clab {

enum class InfractionKind { Conf, Abs, BC, Self, AlwaysZero, AllHonest };

inline const char* infraction_name(InfractionKind k) {
  switch (k) {
    case InfractionKind::Conf: return "conflicting";
    case InfractionKind::Abs: return "abstaining";
    case InfractionKind::BC: return "blockchain";
    case InfractionKind::Self: return "selfish_signing";
    case InfractionKind::AlwaysZero: return "always_zero";
    case InfractionKind::AllHonest: return "all_honest";
  }
  return "?";
}

inline int eval_infraction(InfractionKind kind, const Trace& tr, int party) {
  switch (kind) {
    case InfractionKind::AlwaysZero:
      return 0;
    case InfractionKind::AllHonest:
      return tr.deviated.at(static_cast<std::size_t>(party)) ? 1 : 0;
    case InfractionKind::Conf: {
      // two valid same-creator same-height non-equivalent blocks
      std::map<std::uint32_t, Hash> seen;
      for (const auto& s : tr.slots)
        for (const Block& b : s.produced) {
          if (b.creator != party) continue;
          auto [it, fresh] = seen.emplace(b.index, b.hash);
          if (!fresh && it->second != b.hash) return 1;
        }
      return 0;
    }
    case InfractionKind::Abs: {
      // a duty slot with zero oracle queries (all slots are duty under PoW)
      for (const auto& s : tr.slots) {
        bool duty = tr.duty[static_cast<std::size_t>(party)]
                           [static_cast<std::size_t>(s.slot - 1)] != 0;
        if (duty && s.queries[static_cast<std::size_t>(party)] == 0) return 1;
      }
      return 0;
    }
    case InfractionKind::BC:
      return eval_infraction(InfractionKind::Conf, tr, party) |
             eval_infraction(InfractionKind::Abs, tr, party);
    case InfractionKind::Self: {
      for (const auto& s : tr.slots)
        for (const Block& b : s.produced)
          if (b.creator == party && b.fork_flag) return 1;
      return 0;
    }
  }
  return 0;
}

struct ComplianceVerdict {
  bool compliant_on_sample = true;
  std::optional<Trace> witness;
  std::uint64_t witness_seed = 0;
};

// Samples executions where `party` 0 plays the descriptor against an
// otherwise-honest profile. A positive verdict is evidence on the sampled
// seeds only; a negative verdict carries an exact witness trace.
inline ComplianceVerdict is_compliant_strategy(const StrategyDescriptor& desc,
                                               InfractionKind kind,
                                               const ExecutionConfig& cfg,
                                               int sample_count,
                                               std::uint64_t master_seed = 7) {
  if (sample_count < 1)
    throw ConfigError("compliance sampling: need sample_count >= 1");
  StrategyProfile profile(static_cast<std::size_t>(cfg.n()),
                          StrategyDescriptor::honest());
  profile[0] = desc;
  ComplianceVerdict v;
  for (int i = 0; i < sample_count; ++i) {
    std::uint64_t s = replica_seed(master_seed, static_cast<std::uint64_t>(i));
    Trace tr = run_execution(cfg, profile, s);
    if (eval_infraction(kind, tr, 0)) {
      v.compliant_on_sample = false;
      v.witness = std::move(tr);
      v.witness_seed = s;
      return v;
    }
  }
  return v;
}

}  // namespace clab
