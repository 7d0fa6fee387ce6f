#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "clab/bounds.hpp"

using namespace clab;

TEST_CASE("reward margin for abstention scales with the liveness gap") {
  CHECK(bound_abstain_reward(0.2, {0.3, 0.7}, 10.0) == Catch::Approx(1.4));
  CHECK(bound_abstain_reward(0.0, {0.3, 0.7}, 10.0) == 0.0);
  CHECK_THROWS_AS(bound_abstain_reward(1.5, {1.0}, 1.0), DomainError);
}

TEST_CASE("profit margin for abstention maximizes saved costs over lost mass") {
  auto b = bound_abstain_profit({5.0, 2.0}, {1.0, 1.0}, 0.0, {0.3, 0.7}, 10.0);
  // party 0: 5 - 3 = 2; party 1: 2 - 7 = -5
  CHECK(b.eps_max == Catch::Approx(2.0));
  CHECK(b.argmax_party == 0);
  CHECK_FALSE(b.precondition_ok);  // party 1 fails C > beta*xi*R

  auto ok = bound_abstain_profit({5.0, 8.0}, {1.0, 1.0}, 0.0, {0.3, 0.7}, 10.0);
  CHECK(ok.precondition_ok);
  CHECK(ok.argmax_party == 0);  // 5-3=2 > 8-7=1

  CHECK_THROWS_AS(bound_abstain_profit({1.0}, {1.0, 1.0}, 0.0, {1.0}, 1.0),
                  ConfigError);
  CHECK_THROWS_AS(bound_abstain_profit({1.0}, {2.0}, 0.0, {1.0}, 1.0),
                  DomainError);
}

TEST_CASE("proof-of-work gap is quadratic in the per-query success rate") {
  auto b = bound_pow_gap(2000, 1.0, 10, 0.005);
  CHECK(b.eps == Catch::Approx(2.5));
  CHECK(b.small_delta_ok);
  auto big = bound_pow_gap(100, 1.0, 10, 0.2);
  CHECK_FALSE(big.small_delta_ok);  // delta*q = 2 >= 1
}

TEST_CASE("lossy-router conflicting bound pins the profit-optimal width") {
  auto b = bound_conflict_lossy(0.5, 100.0, 1.0, 80.0);
  CHECK(b.t_star == 6);
  CHECK(b.eps_reward == Catch::Approx(0.5 * 100.0 * 80.0));
  double expect_profit =
      ((0.5 - std::pow(0.5, 6)) * 100.0 - 5.0 * 1.0) * 80.0;
  CHECK(b.eps_profit == Catch::Approx(expect_profit));
  CHECK(b.margin_ratio == Catch::Approx(50.0));
  CHECK(b.margin_ok);

  auto free = bound_conflict_lossy(0.5, 100.0, 0.0, 80.0);
  CHECK(free.t_star == 0);  // no interior optimum without costs
  CHECK(free.eps_profit == free.eps_reward);
  CHECK_THROWS_AS(bound_conflict_lossy(0.0, 1.0, 1.0, 1.0), DomainError);

  CHECK(conflict_lossy_reward(0.5, 100.0, 80.0, 1) == Catch::Approx(4000.0));
  CHECK(conflict_lossy_reward(0.5, 100.0, 80.0, 2) == Catch::Approx(6000.0));
  CHECK(conflict_lossy_gain(0.5, 100.0, 80.0, 4) ==
        Catch::Approx((0.5 - 0.0625) * 100.0 * 80.0));
}

TEST_CASE("slot-race conflicting bound pins the profit-optimal width") {
  auto b = bound_conflict_race(0.09, 100.0, 1.0, 200.0);
  CHECK(b.t_star == 2);  // floor(sqrt(9)) - 1
  CHECK(b.eps_reward == Catch::Approx(0.045 * 100.0 * 200.0));
  double expect = (1.0 / 6.0 * 0.09 * 100.0 - 1.0) * 200.0;
  CHECK(b.eps_profit == Catch::Approx(expect));
  CHECK(conflict_race_reward(0.3, 100.0, 200.0, 1) == Catch::Approx(17000.0));
  CHECK(conflict_race_reward(0.3, 100.0, 200.0, 4) == Catch::Approx(18800.0));
  CHECK_THROWS_AS(bound_conflict_race(1.1, 1.0, 1.0, 1.0), DomainError);
}

TEST_CASE("expected discard rate per seven slots has the tabulated values") {
  CHECK(delta_mu(0.5) == Catch::Approx(0.8828125).epsilon(1e-12));
  CHECK(delta_mu(0.1) == Catch::Approx(0.0503217).margin(1e-6));
  CHECK(delta_mu(0.3) == Catch::Approx(0.4146219).margin(1e-6));
  CHECK(delta_mu(0.0) == 0.0);
}

TEST_CASE("relative-profit margin for reorgs uses the discard rate") {
  double b = bound_selfish_relative(0.5, 2.0, 1.0);
  double expect = 0.5 / (7.0 / 0.8828125 - 1.0) * 0.5;
  CHECK(b == Catch::Approx(expect).epsilon(1e-12));
  CHECK(b == Catch::Approx(0.036079).margin(1e-5));
  CHECK_THROWS_AS(bound_selfish_relative(0.5, 1.0, 2.0), DomainError);
}

TEST_CASE("externality margins maximize over deviations") {
  double b = bound_externality({2.0, 1.0}, 1.0, {{0.5, 2.0}, {1.0}},
                               {{1.0, 0.0}, {3.0}});
  // party 0: 2*(0.5-1)+1 = 0, 2*(2-1)+0 = 2; party 1: 1*(1-1)+3 = 3
  CHECK(b == Catch::Approx(3.0));

  auto p = bound_externality_penalty(1.0, 1.0, {2.0, 0.5});
  CHECK(p.eps_max == Catch::Approx(1.0));
  CHECK(p.deposit_needed == Catch::Approx(1.0));
  auto none = bound_externality_penalty(2.0, 1.0, {0.5});
  CHECK(none.eps_max == 0.0);
  CHECK(none.deposit_needed == 0.0);
}

TEST_CASE("confirmation depth defeats a bounded double-spend") {
  CHECK(confirmation_window(1000.0, 0.75, 5.0, 5.0) == 151);
  CHECK(confirmation_window(0.0, 0.75, 5.0, 5.0) == 1);
  CHECK_THROWS_AS(confirmation_window(1.0, 0.5, 1.0, 1.0), DomainError);
  CHECK_THROWS_AS(confirmation_window(-1.0, 0.75, 1.0, 1.0), DomainError);
}

TEST_CASE("reward revaluation follows the benchmark price path") {
  auto d = attack_reward_difference(7.113026, -0.1404504, 3693.0, 3.2);
  CHECK(d.counterfactual_difference == Catch::Approx(-11806.0).margin(1.0));
  CHECK_FALSE(d.have_actual);

  auto full = attack_reward_difference(10.0, 0.1, 100.0, 2.0, 8.0);
  CHECK(full.have_actual);
  CHECK(full.counterfactual_difference == Catch::Approx(200.0));
  // actual 10 vs counterfactual 8*1.1=8.8, over 200 blocks' rewards
  CHECK(full.actual_minus_counterfactual == Catch::Approx((10.0 - 8.8) * 200.0));
}
