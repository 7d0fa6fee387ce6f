#include <catch2/catch_amalgamated.hpp>

#include <numeric>

#include "clab/economics.hpp"

using namespace clab;

namespace {

ExecutionConfig pos_cfg(std::vector<double> powers, int epoch_length,
                        int epochs) {
  ExecutionConfig cfg;
  cfg.powers = std::move(powers);
  cfg.protocol.family = Family::SLPoS;
  cfg.protocol.epoch_length = epoch_length;
  cfg.protocol.epochs = epochs;
  return cfg;
}

}  // namespace

TEST_CASE("per-block rewards scale block counts by R") {
  ExecutionConfig cfg = pos_cfg({0.3, 0.7}, 10, 3);
  StrategyProfile honest(2, StrategyDescriptor::honest());
  Trace tr = run_execution(cfg, honest, 8);
  RewardScheme scheme;
  scheme.kind = SchemeKind::FixedPerBlock;
  scheme.R = 2.5;
  auto r = compute_rewards(scheme, tr);
  CHECK(r[0] == Catch::Approx(2.5 * tr.m_counts[0]));
  CHECK(r[1] == Catch::Approx(2.5 * tr.m_counts[1]));
}

TEST_CASE("proportional rewards split a fixed budget over the chain") {
  ExecutionConfig cfg = pos_cfg({0.3, 0.7}, 10, 3);
  StrategyProfile honest(2, StrategyDescriptor::honest());
  Trace tr = run_execution(cfg, honest, 8);
  RewardScheme scheme;
  scheme.kind = SchemeKind::BlockProportional;
  scheme.R = 100.0;
  auto r = compute_rewards(scheme, tr);
  CHECK(r[0] + r[1] == Catch::Approx(100.0));  // budget balance
  int total = tr.m_counts[0] + tr.m_counts[1];
  CHECK(r[0] == Catch::Approx(100.0 * tr.m_counts[0] / total));
}

TEST_CASE("resource-proportional rewards depend only on liveness") {
  ExecutionConfig cfg = pos_cfg({0.3, 0.7}, 10, 3);
  StrategyProfile honest(2, StrategyDescriptor::honest());
  Trace tr = run_execution(cfg, honest, 8);
  RewardScheme scheme;
  scheme.kind = SchemeKind::ResourceProportional;
  scheme.R = 50.0;
  auto r = compute_rewards(scheme, tr);
  CHECK(r[0] == Catch::Approx(0.3 * 50.0));  // identity shares default
  CHECK(r[1] == Catch::Approx(0.7 * 50.0));

  scheme.xi = {0.9, 0.1};
  auto rx = compute_rewards(scheme, tr);
  CHECK(rx[0] == Catch::Approx(45.0));

  // a blockless execution pays nobody
  ExecutionConfig dead;
  dead.powers = {0.3, 0.7};
  dead.protocol.family = Family::BitcoinPoW;
  dead.protocol.q = 10;
  dead.protocol.delta = 0.0;
  dead.protocol.slots = 5;
  Trace empty = run_execution(dead, honest, 1);
  auto rz = compute_rewards(scheme, empty);
  CHECK(rz == std::vector<double>{0.0, 0.0});
}

TEST_CASE("penalty rewards forfeit on a detected equivocation") {
  ExecutionConfig cfg = pos_cfg({0.5, 0.5}, 10, 2);
  StrategyProfile profile{StrategyDescriptor::conflict(2),
                          StrategyDescriptor::honest()};
  Trace tr = run_execution(cfg, profile, 3);
  RewardScheme scheme;
  scheme.kind = SchemeKind::PenaltyFixedPerBlock;
  scheme.R = 2.0;
  scheme.deposit = {5.0, 5.0};
  auto r = compute_rewards(scheme, tr);
  CHECK(r[0] == 0.0);  // equivocator loses rewards and deposit
  CHECK(r[1] == Catch::Approx(2.0 * tr.m_counts[1] + 5.0));
}

TEST_CASE("costs are linear in oracle queries") {
  ExecutionConfig cfg = pos_cfg({0.4, 0.6}, 10, 5);
  StrategyProfile honest(2, StrategyDescriptor::honest());
  Trace tr = run_execution(cfg, honest, 5);
  auto c = compute_cost(tr, 0.25);
  CHECK(c[0] == Catch::Approx(0.25 * tr.queries_of(0)));
  CHECK(c[1] == Catch::Approx(0.25 * tr.queries_of(1)));
  CHECK(tr.queries_of(0) + tr.queries_of(1) == 50);  // one per slot
}

TEST_CASE("utility kinds compose rewards, costs, and externalities") {
  UtilityEstimates e;
  e.reward_mean = 10.0;
  e.cost_mean = 3.0;
  e.total_reward_mean = 40.0;
  e.exchange_rate = 2.0;
  e.external_reward = 5.0;
  CHECK(utility(UtilityKind::Reward, e) == Catch::Approx(10.0));
  CHECK(utility(UtilityKind::Profit, e) == Catch::Approx(7.0));
  CHECK(utility(UtilityKind::RelativeProfit, e) == Catch::Approx(0.175));
  CHECK(utility(UtilityKind::ExternReward, e) == Catch::Approx(25.0));
  CHECK(utility(UtilityKind::ExternProfit, e) == Catch::Approx(22.0));

  e.total_reward_mean = 0.0;  // degenerate executions yield zero, not NaN
  CHECK(utility(UtilityKind::RelativeProfit, e) == 0.0);
}

TEST_CASE("externality tables fall back to honest defaults") {
  ExternalityModel m;
  m.honest_exchange_rate = 1.5;
  m.exchange_rates = {{"conflict_2", 0.5}};
  m.external_rewards = {{"conflict_2", 1000.0}};
  CHECK(m.rate_for("conflict_2") == 0.5);
  CHECK(m.rate_for("honest") == 1.5);
  CHECK(m.reward_for("conflict_2") == 1000.0);
  CHECK(m.reward_for("honest") == 0.0);
}

TEST_CASE("scheme validation enforces share and deposit arity") {
  RewardScheme scheme;
  scheme.kind = SchemeKind::ResourceProportional;
  scheme.xi = {0.5, 0.6};  // does not sum to 1
  CHECK_THROWS_AS(scheme.validate({0.5, 0.5}), ConfigError);
  scheme.xi = {0.5};
  CHECK_THROWS_AS(scheme.validate({0.5, 0.5}), ConfigError);
  scheme.xi = {0.4, 0.6};
  CHECK_NOTHROW(scheme.validate({0.5, 0.5}));

  RewardScheme pen;
  pen.kind = SchemeKind::PenaltyFixedPerBlock;
  pen.deposit = {1.0};
  CHECK_THROWS_AS(pen.validate({0.5, 0.5}), ConfigError);
}
