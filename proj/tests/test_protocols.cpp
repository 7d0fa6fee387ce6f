#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <numeric>

#include "clab/protocol.hpp"

using namespace clab;

TEST_CASE("query budgets split q by power with a largest-remainder top-up") {
  auto b = pow_budgets({0.3, 0.3, 0.4}, 10);
  CHECK(b == std::vector<int>{3, 3, 4});
  auto c = pow_budgets({0.5, 0.5}, 7);
  CHECK(std::accumulate(c.begin(), c.end(), 0) == 7);
  auto d = pow_budgets({0.21, 0.33, 0.46}, 9);
  CHECK(std::accumulate(d.begin(), d.end(), 0) == 9);
}

TEST_CASE("single-leader schedules elect exactly one leader per slot") {
  ProtocolSpec spec;
  spec.family = Family::SLPoS;
  spec.epoch_length = 100;
  spec.epochs = 100;  // 10000 slots
  std::vector<double> powers{0.3, 0.7};
  auto sched = draw_leader_schedule(spec, powers, 5);
  int count0 = 0;
  for (const auto& leaders : sched.per_slot) {
    REQUIRE(leaders.size() == 1);
    if (leaders[0] == 0) ++count0;
  }
  double freq = count0 / 10000.0;
  CHECK(std::fabs(freq - 0.3) < 0.02);
  CHECK(sched.stake_snapshot.size() == 100);
}

TEST_CASE("multi-leader schedules draw each party independently") {
  ProtocolSpec spec;
  spec.family = Family::MLPoS;
  spec.epoch_length = 100;
  spec.epochs = 100;
  spec.phi = {0.2, 0.5};
  std::vector<double> powers{0.3, 0.7};
  auto sched = draw_leader_schedule(spec, powers, 9);
  int c0 = 0, c1 = 0, multi = 0, none = 0;
  for (const auto& leaders : sched.per_slot) {
    bool l0 = false, l1 = false;
    for (int p : leaders) (p == 0 ? l0 : l1) = true;
    c0 += l0;
    c1 += l1;
    if (leaders.size() >= 2) ++multi;
    if (leaders.empty()) ++none;
  }
  CHECK(std::fabs(c0 / 10000.0 - 0.2) < 0.02);
  CHECK(std::fabs(c1 / 10000.0 - 0.5) < 0.02);
  CHECK(std::fabs(multi / 10000.0 - 0.1) < 0.02);  // 0.2 * 0.5
  CHECK(std::fabs(none / 10000.0 - 0.4) < 0.02);   // 0.8 * 0.5
}

TEST_CASE("schedules replay deterministically from the seed") {
  ProtocolSpec spec;
  spec.family = Family::SLPoS;
  spec.epoch_length = 10;
  spec.epochs = 5;
  std::vector<double> powers{0.5, 0.5};
  auto a = draw_leader_schedule(spec, powers, 123);
  auto b = draw_leader_schedule(spec, powers, 123);
  CHECK(a.per_slot == b.per_slot);
  auto c = draw_leader_schedule(spec, powers, 124);
  CHECK(a.per_slot != c.per_slot);
}

TEST_CASE("leader schedules are undefined for proof of work") {
  ProtocolSpec spec;
  spec.family = Family::BitcoinPoW;
  spec.q = 10;
  spec.delta = 0.01;
  spec.slots = 5;
  CHECK_THROWS_AS(draw_leader_schedule(spec, {1.0}, 1), ConfigError);
}

TEST_CASE("multi-leader collision probability matches enumeration") {
  ProtocolSpec spec;
  spec.family = Family::MLPoS;
  spec.epoch_length = 1;
  spec.epochs = 1;
  spec.phi = {0.1, 0.2, 0.3};
  // enumerate all subsets of elected parties
  double expect = 0.0;
  for (int mask = 0; mask < 8; ++mask) {
    int bits = __builtin_popcount(static_cast<unsigned>(mask));
    if (bits < 2) continue;
    double p = 1.0;
    for (int i = 0; i < 3; ++i)
      p *= (mask >> i) & 1 ? spec.phi[static_cast<std::size_t>(i)]
                           : 1.0 - spec.phi[static_cast<std::size_t>(i)];
    expect += p;
  }
  CHECK(p_multi_leader(spec) == Catch::Approx(expect).epsilon(1e-12));
  CHECK(p_multi_leader(spec) == Catch::Approx(0.098).epsilon(1e-12));

  ProtocolSpec sl;
  sl.family = Family::SLPoS;
  CHECK_THROWS_AS(p_multi_leader(sl), ConfigError);
}

TEST_CASE("unique-success probability has the stated closed form") {
  double v = pr_unique_success(0.3, 10, 0.01);
  double expect = std::pow(0.99, 7.0) - std::pow(0.99, 10.0);
  CHECK(v == Catch::Approx(expect).epsilon(1e-12));
  CHECK(v == Catch::Approx(0.0276833).margin(1e-6));
  CHECK(pr_unique_success(0.0, 10, 0.01) == Catch::Approx(0.0).margin(1e-15));
}

TEST_CASE("protocol validation rejects malformed parameters") {
  ProtocolSpec spec;
  spec.family = Family::BitcoinPoW;
  spec.q = 0;
  spec.slots = 10;
  CHECK_THROWS_AS(spec.validate(2), ConfigError);
  spec.q = 10;
  spec.delta = 1.5;
  CHECK_THROWS_AS(spec.validate(2), ConfigError);

  ProtocolSpec ml;
  ml.family = Family::MLPoS;
  ml.epoch_length = 10;
  ml.epochs = 1;
  ml.phi = {0.5};  // wrong arity for two parties
  CHECK_THROWS_AS(ml.validate(2), ConfigError);
}
