#include <catch2/catch_amalgamated.hpp>

#include "clab/rng.hpp"
#include "clab/strategy.hpp"

using namespace clab;

namespace {

LeaderSchedule sched_from_bits(const std::string& bits, int party = 0,
                               int other = 1) {
  LeaderSchedule s;
  for (char c : bits)
    s.per_slot.push_back({c == '1' ? party : other});
  return s;
}

}  // namespace

TEST_CASE("reorg planner finds gap-backed runs of led slots") {
  auto p = plan_selfish("0110");
  REQUIRE(p.windows.size() == 1);
  CHECK(p.windows[0].r == 2);
  CHECK(p.windows[0].d == 1);

  CHECK(plan_selfish("1111").windows.empty());  // no preceding gap
  CHECK(plan_selfish("0000").windows.empty());  // nothing led
  CHECK(plan_selfish("").windows.empty());

  // depth is min(future leads, preceding non-leads)
  auto q = plan_selfish("0011110");
  REQUIRE(q.windows.size() == 1);
  CHECK(q.windows[0].r == 3);
  CHECK(q.windows[0].d == 2);

  CHECK_THROWS_AS(plan_selfish("01x0"), ConfigError);
}

TEST_CASE("depth-capped planner works window by window") {
  auto a = plan_selfish_d_le_3("0110110");
  REQUIRE(a.windows.size() == 2);
  CHECK(a.windows[0].r == 2);
  CHECK(a.windows[0].d == 1);
  CHECK(a.windows[1].r == 5);
  CHECK(a.windows[1].d == 1);

  auto b = plan_selfish_d_le_3("0001111");
  REQUIRE(b.windows.size() == 1);
  CHECK(b.windows[0].r == 4);
  CHECK(b.windows[0].d == 3);

  CHECK(plan_selfish_d_le_3("1111111").windows.empty());

  // fragments past the first 7 bits plan independently
  auto c = plan_selfish_d_le_3("01100000110110");
  REQUIRE(c.windows.size() == 3);
  CHECK(c.windows[1].r == 9);
  CHECK(c.windows[2].r == 12);
}

TEST_CASE("planned windows are disjoint, in range, and led throughout") {
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    std::string bits;
    for (int s = 0; s < 64; ++s)
      bits.push_back(rand_unit(seed, Stream::Game, static_cast<std::uint64_t>(s)) <
                             0.5
                         ? '1'
                         : '0');
    for (auto plan : {plan_selfish(bits), plan_selfish_d_le_3(bits)}) {
      int last_end = 0;
      for (const SelfishWindow& w : plan.windows) {
        CHECK(w.d >= 1);
        CHECK(w.r > last_end);
        CHECK(w.r + w.d <= static_cast<int>(bits.size()));
        for (int s = w.r; s <= w.r + w.d; ++s)
          CHECK(bits[static_cast<std::size_t>(s - 1)] == '1');
        last_end = w.r + w.d;
      }
    }
  }
}

TEST_CASE("schedule bit extraction mirrors the leader predicate") {
  LeaderSchedule s = sched_from_bits("01101");
  CHECK(schedule_bits_for(s, 0) == "01101");
  CHECK(schedule_bits_for(s, 1) == "10010");
}

TEST_CASE("fork execution rebases onto the tip's d-th ancestor") {
  // view: genesis <- a(other) <- b(other), tip = b at height 2
  ChainView view;
  Block g = Block::genesis();
  Block a = Block::make(1, 1, g);
  Block b = Block::make(1, 2, a);
  view.add_block(a);
  view.add_block(b);

  LeaderSchedule sched = sched_from_bits("00110");
  SelfishWindow w{3, 1};
  auto fork = execute_selfish_fork(view, w, 0, sched);
  REQUIRE(fork.size() == 2);
  CHECK(fork[0].parent == a.hash);  // one level below the tip
  CHECK(fork[0].slot == 3);
  CHECK(fork[1].parent == fork[0].hash);
  CHECK(fork[1].slot == 4);
  for (const Block& blk : fork) {
    CHECK(blk.fork_flag);
    CHECK(blk.creator == 0);
  }
  CHECK(fork.back().index == 3);  // one longer than the displaced branch
}

TEST_CASE("fork execution rejects invalid windows") {
  ChainView view;
  Block g = Block::genesis();
  Block a = Block::make(1, 1, g);
  view.add_block(a);

  LeaderSchedule sched = sched_from_bits("01110");
  CHECK_THROWS_AS(execute_selfish_fork(view, SelfishWindow{2, 0}, 0, sched),
                  ConfigError);  // depth must be positive
  CHECK_THROWS_AS(execute_selfish_fork(view, SelfishWindow{2, 2}, 0, sched),
                  PartialResult);  // chain shorter than the fork depth
  LeaderSchedule not_leading = sched_from_bits("00000");
  CHECK_THROWS_AS(execute_selfish_fork(view, SelfishWindow{2, 1}, 0, not_leading),
                  PartialResult);  // schedule drift
}

TEST_CASE("descriptors have stable names and ordinals") {
  CHECK(StrategyDescriptor::honest().name() == "honest");
  CHECK(StrategyDescriptor::conflict(3).name() == "conflict_3");
  CHECK(StrategyDescriptor::abstain().name() == "abstain_always");
  CHECK(StrategyDescriptor::selfish().name() == "selfish_sign");
  CHECK(StrategyDescriptor::greedy().name() == "greedy_fork");
  CHECK(StrategyDescriptor::conflict(2).ordinal() !=
        StrategyDescriptor::conflict(3).ordinal());
  CHECK(StrategyDescriptor::honest() == StrategyDescriptor::honest());
  CHECK_FALSE(StrategyDescriptor::honest() == StrategyDescriptor::abstain());
  CHECK_THROWS_AS(StrategyDescriptor::conflict(0), ConfigError);
}
