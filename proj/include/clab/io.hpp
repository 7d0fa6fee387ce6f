#pragma once

#include <fstream>
#include <sstream>
#include <string>

#include <json.hpp>

#include "analysis.hpp"

namespace clab {

inline constexpr const char* kToolVersion = "0.1.0";
inline constexpr int kSchemaVersion = 1;

using Json = nlohmann::ordered_json;

// RFC-4180 field quoting.
inline std::string csv_escape(const std::string& s) {
  bool need = s.find_first_of(",\"\r\n") != std::string::npos;
  if (!need) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += "\"\"";
    else out += c;
  }
  out += "\"";
  return out;
}

inline std::string fmt_num(double v) {
  std::ostringstream os;
  os.precision(12);
  os << v;
  return os.str();
}

inline std::string hash_hex(std::uint64_t h) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

inline std::string config_hash(const Json& j) {
  std::string s = j.dump();
  std::uint64_t h = 0x636c6162ULL;
  for (char c : s) h = mix64(h ^ static_cast<unsigned char>(c));
  return hash_hex(h);
}

// ---------------------------------------------------------------------------
// Trace serialization: line-delimited JSON, header record first.

inline Json block_json(const Block& b) {
  return Json{{"hash", hash_hex(b.hash)}, {"creator", b.creator},
              {"slot", b.slot},           {"parent", hash_hex(b.parent)},
              {"index", b.index},         {"payload", b.payload},
              {"fork", b.fork_flag}};
}

inline std::string trace_to_jsonl(const Trace& tr) {
  std::ostringstream os;
  Json head{{"record", "header"},
            {"seed", tr.seed},
            {"parties", tr.n},
            {"strategies", tr.strategy_names}};
  os << head.dump() << "\n";
  for (const auto& s : tr.slots) {
    Json rec{{"record", "slot"}, {"slot", s.slot}, {"queries", s.queries}};
    Json blocks = Json::array();
    for (const Block& b : s.produced) blocks.push_back(block_json(b));
    rec["produced"] = blocks;
    rec["dropped"] = s.dropped;
    os << rec.dump() << "\n";
  }
  Json tail{{"record", "observer"}, {"m_counts", tr.m_counts}};
  Json chain = Json::array();
  for (const Block& b : tr.chain) chain.push_back(hash_hex(b.hash));
  tail["chain"] = chain;
  os << tail.dump() << "\n";
  return os.str();
}

inline std::string chain_csv(const Trace& tr) {
  std::string out = "height,hash,creator,slot\r\n";
  for (const Block& b : tr.chain) {
    out += std::to_string(b.index) + "," + hash_hex(b.hash) + "," +
           std::to_string(b.creator) + "," + std::to_string(b.slot) + "\r\n";
  }
  return out;
}

// ---------------------------------------------------------------------------
// Config ingestion (strict: unknown keys are rejected).

inline void reject_unknown(const Json& j, std::initializer_list<const char*> keys,
                           const std::string& where) {
  for (auto it = j.begin(); it != j.end(); ++it) {
    bool ok = false;
    for (const char* k : keys)
      if (it.key() == k) ok = true;
    if (!ok) throw ConfigError(where + ": unknown key '" + it.key() + "'");
  }
}

inline StrategyDescriptor parse_strategy(const Json& j) {
  reject_unknown(j, {"kind", "t", "slots"}, "strategy");
  std::string kind = j.at("kind").get<std::string>();
  if (kind == "honest") return StrategyDescriptor::honest();
  if (kind == "abstain_always") return StrategyDescriptor::abstain();
  if (kind == "abstain_schedule")
    return StrategyDescriptor::abstain_on(j.at("slots").get<std::vector<int>>());
  if (kind == "conflict") return StrategyDescriptor::conflict(j.at("t").get<int>());
  if (kind == "selfish_sign") return StrategyDescriptor::selfish();
  if (kind == "selfish_sign_dle3") return StrategyDescriptor::selfish_dle3();
  if (kind == "greedy_fork") return StrategyDescriptor::greedy();
  throw ConfigError("strategy.kind: unknown kind '" + kind + "'");
}

inline ExperimentConfig parse_experiment(const Json& j) {
  reject_unknown(j,
                 {"schema_version", "protocol", "parties", "router", "chain",
                  "scheme", "cost", "utility", "strategies", "epsilon", "runs",
                  "seed", "max_depth", "externality"},
                 "config");
  if (j.at("schema_version").get<int>() != kSchemaVersion)
    throw ConfigError("schema_version: expected " + std::to_string(kSchemaVersion));
  ExperimentConfig cfg;

  const Json& pj = j.at("parties");
  reject_unknown(pj, {"powers"}, "parties");
  cfg.exec.powers = pj.at("powers").get<std::vector<double>>();

  const Json& prj = j.at("protocol");
  reject_unknown(prj,
                 {"family", "q", "delta", "slots", "epoch_length", "epochs",
                  "phi", "predictable"},
                 "protocol");
  std::string family = prj.at("family").get<std::string>();
  if (family == "bitcoin_pow") cfg.exec.protocol.family = Family::BitcoinPoW;
  else if (family == "sl_pos") cfg.exec.protocol.family = Family::SLPoS;
  else if (family == "ml_pos") cfg.exec.protocol.family = Family::MLPoS;
  else throw ConfigError("protocol.family: unknown family '" + family + "'");
  cfg.exec.protocol.q = prj.value("q", 0);
  cfg.exec.protocol.delta = prj.value("delta", 0.0);
  cfg.exec.protocol.slots = prj.value("slots", 0);
  cfg.exec.protocol.epoch_length = prj.value("epoch_length", 0);
  cfg.exec.protocol.epochs = prj.value("epochs", 0);
  cfg.exec.protocol.predictable = prj.value("predictable", false);
  if (prj.contains("phi"))
    cfg.exec.protocol.phi = prj.at("phi").get<std::vector<double>>();

  if (j.contains("router")) {
    const Json& rj = j.at("router");
    reject_unknown(rj, {"kind", "drop"}, "router");
    std::string kind = rj.at("kind").get<std::string>();
    if (kind == "synchronous") cfg.exec.router.kind = RouterKind::Synchronous;
    else if (kind == "lossy") cfg.exec.router.kind = RouterKind::Lossy;
    else if (kind == "uniform") cfg.exec.router.kind = RouterKind::Uniform;
    else throw ConfigError("router.kind: unknown kind '" + kind + "'");
    cfg.exec.router.drop_probability = rj.value("drop", 0.0);
  }

  if (j.contains("chain")) {
    const Json& cj = j.at("chain");
    reject_unknown(cj, {"rule", "checkpoint_depth", "tie"}, "chain");
    std::string rule = cj.value("rule", "longest");
    if (rule == "longest") cfg.exec.rule = ChainRule::LongestChain;
    else if (rule == "bounded_depth") cfg.exec.rule = ChainRule::BoundedDepthLongest;
    else throw ConfigError("chain.rule: unknown rule '" + rule + "'");
    cfg.exec.checkpoint_depth = cj.value("checkpoint_depth", 36);
    std::string tie = cj.value("tie", "chronological");
    if (tie == "chronological") cfg.exec.tie = TieRule::Chronological;
    else if (tie == "random") cfg.exec.tie = TieRule::Random;
    else throw ConfigError("chain.tie: unknown rule '" + tie + "'");
  }

  if (j.contains("scheme")) {
    const Json& sj = j.at("scheme");
    reject_unknown(sj, {"kind", "R", "xi", "deposit"}, "scheme");
    std::string kind = sj.at("kind").get<std::string>();
    if (kind == "resource_proportional")
      cfg.scheme.kind = SchemeKind::ResourceProportional;
    else if (kind == "block_proportional")
      cfg.scheme.kind = SchemeKind::BlockProportional;
    else if (kind == "fixed_per_block") cfg.scheme.kind = SchemeKind::FixedPerBlock;
    else if (kind == "penalty_fixed_per_block")
      cfg.scheme.kind = SchemeKind::PenaltyFixedPerBlock;
    else throw ConfigError("scheme.kind: unknown kind '" + kind + "'");
    cfg.scheme.R = sj.value("R", 1.0);
    if (sj.contains("xi")) cfg.scheme.xi = sj.at("xi").get<std::vector<double>>();
    if (sj.contains("deposit"))
      cfg.scheme.deposit = sj.at("deposit").get<std::vector<double>>();
  }

  if (j.contains("cost")) {
    reject_unknown(j.at("cost"), {"lambda"}, "cost");
    cfg.cost.lambda = j.at("cost").value("lambda", 0.0);
  }

  if (j.contains("utility")) {
    std::string u = j.at("utility").get<std::string>();
    if (u == "reward") cfg.utility = UtilityKind::Reward;
    else if (u == "profit") cfg.utility = UtilityKind::Profit;
    else if (u == "relative_profit") cfg.utility = UtilityKind::RelativeProfit;
    else if (u == "extern_reward") cfg.utility = UtilityKind::ExternReward;
    else if (u == "extern_profit") cfg.utility = UtilityKind::ExternProfit;
    else throw ConfigError("utility: unknown kind '" + u + "'");
  }

  if (j.contains("strategies")) {
    const Json& stj = j.at("strategies");
    reject_unknown(stj, {"candidates"}, "strategies");
    for (const Json& c : stj.at("candidates"))
      cfg.candidates.push_back(parse_strategy(c));
  }
  if (cfg.candidates.empty())
    cfg.candidates.push_back(StrategyDescriptor::honest());

  if (j.contains("externality")) {
    const Json& ej = j.at("externality");
    reject_unknown(ej, {"honest_rate", "rates", "rewards"}, "externality");
    cfg.use_externality = true;
    cfg.externality.honest_exchange_rate = ej.value("honest_rate", 1.0);
    if (ej.contains("rates"))
      for (auto it = ej.at("rates").begin(); it != ej.at("rates").end(); ++it)
        cfg.externality.exchange_rates.emplace_back(it.key(),
                                                    it.value().get<double>());
    if (ej.contains("rewards"))
      for (auto it = ej.at("rewards").begin(); it != ej.at("rewards").end(); ++it)
        cfg.externality.external_rewards.emplace_back(it.key(),
                                                      it.value().get<double>());
  }

  cfg.epsilon = j.value("epsilon", 0.0);
  cfg.runs = j.value("runs", 100);
  cfg.seed = j.value("seed", std::uint64_t{1});
  cfg.max_depth = j.value("max_depth", 3);
  cfg.validate();
  return cfg;
}

inline Json load_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open file: " + path);
  Json j;
  try {
    in >> j;
  } catch (const std::exception& e) {
    throw ConfigError(path + ": " + e.what());
  }
  return j;
}

inline void write_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ConfigError("cannot write file: " + path);
  out << content;
}

// ---------------------------------------------------------------------------
// Report emission.

inline Json report_envelope(const Json& config_json, std::uint64_t seed) {
  return Json{{"tool_version", kToolVersion},
              {"config_hash", config_hash(config_json)},
              {"seed", seed}};
}

inline Json utility_report_json(const UtilityReport& rep,
                                const StrategyProfile& profile) {
  Json parties = Json::array();
  for (std::size_t i = 0; i < rep.parties.size(); ++i) {
    const PartyReport& p = rep.parties[i];
    parties.push_back(Json{{"party", i},
                           {"strategy", profile[i].name()},
                           {"reward_mean", p.reward_mean},
                           {"reward_ci", p.reward_ci},
                           {"cost_mean", p.cost_mean},
                           {"cost_ci", p.cost_ci},
                           {"utility", p.utility},
                           {"utility_ci", p.utility_ci}});
  }
  return Json{{"samples", rep.samples}, {"parties", parties}};
}

inline std::string utility_report_csv(const std::string& profile_label,
                                      const UtilityReport& rep,
                                      const StrategyProfile& profile) {
  std::string out;
  for (std::size_t i = 0; i < rep.parties.size(); ++i) {
    const PartyReport& p = rep.parties[i];
    out += csv_escape(profile_label) + "," + std::to_string(i) + "," +
           csv_escape(profile[i].name()) + "," + fmt_num(p.reward_mean) + "," +
           fmt_num(p.reward_ci) + "," + fmt_num(p.cost_mean) + "," +
           fmt_num(p.utility) + "," + fmt_num(p.utility_ci) + "," +
           std::to_string(rep.samples) + "\r\n";
  }
  return out;
}

}  // namespace clab
