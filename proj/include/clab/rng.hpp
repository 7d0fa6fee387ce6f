#pragma once

#include <cstdint>

namespace clab {

// Counter-based deterministic randomness. Every draw is a pure function of
// (seed, stream, key, counter), so executions replay bit-identically and
// oracle answers do not depend on query interleaving.

enum class Stream : std::uint64_t {
  Oracle   = 0x01,
  Router   = 0x02,
  Schedule = 0x03,
  TieBreak = 0x04,
  Replica  = 0x05,
  Game     = 0x06,
};

inline std::uint64_t mix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

inline std::uint64_t rand_u64(std::uint64_t seed, Stream stream,
                              std::uint64_t a = 0, std::uint64_t b = 0,
                              std::uint64_t c = 0) {
  std::uint64_t x = mix64(seed ^ 0x8f1bbcdcbfa53e0bULL);
  x = mix64(x ^ static_cast<std::uint64_t>(stream) * 0xd6e8feb86659fd93ULL);
  x = mix64(x ^ a);
  x = mix64(x ^ b * 0xa0761d6478bd642fULL);
  x = mix64(x ^ c * 0xe7037ed1a0b428dbULL);
  return x;
}

inline double rand_unit(std::uint64_t seed, Stream stream,
                        std::uint64_t a = 0, std::uint64_t b = 0,
                        std::uint64_t c = 0) {
  return (rand_u64(seed, stream, a, b, c) >> 11) * 0x1.0p-53;
}

// Per-execution seed for Monte Carlo replica i under master seed s.
inline std::uint64_t replica_seed(std::uint64_t master, std::uint64_t replica) {
  return rand_u64(master, Stream::Replica, replica);
}

// Small stateful view over one (seed, stream, key) sub-stream.
struct SubRng {
  std::uint64_t seed;
  Stream stream;
  std::uint64_t key;
  std::uint64_t counter = 0;

  std::uint64_t next_u64() { return rand_u64(seed, stream, key, counter++); }
  double next_unit() { return (next_u64() >> 11) * 0x1.0p-53; }
  std::uint64_t next_below(std::uint64_t n) { return next_u64() % n; }
};

}  // namespace clab
