#pragma once

#include <cstdint>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "rng.hpp"
#include "types.hpp"

namespace clab {

using Hash = std::uint64_t;

inline constexpr Hash kGenesisHash = 0x67656e6573697331ULL;
inline constexpr int kGenesisCreator = -1;

inline Hash block_hash(int creator, int slot, Hash parent, std::uint64_t payload) {
  std::uint64_t x = mix64(parent ^ 0x426c6f636bULL);
  x = mix64(x ^ static_cast<std::uint64_t>(static_cast<std::uint32_t>(creator)));
  x = mix64(x ^ (static_cast<std::uint64_t>(slot) << 32));
  x = mix64(x ^ payload);
  return x;
}

struct Block {
  Hash hash = 0;
  int creator = kGenesisCreator;
  int slot = 0;
  Hash parent = 0;
  std::uint32_t index = 0;         // height; genesis = 0
  std::uint64_t payload = 0;       // opaque; conflicting siblings differ here
  bool fork_flag = false;          // produced inside a planned fork window,
                                   // parent was not the creator's adopted tip

  static Block genesis() {
    Block g;
    g.hash = kGenesisHash;
    return g;
  }
  static Block make(int creator, int slot, const Block& parent,
                    std::uint64_t payload = 0) {
    Block b;
    b.creator = creator;
    b.slot = slot;
    b.parent = parent.hash;
    b.index = parent.index + 1;
    b.payload = payload;
    b.hash = block_hash(creator, slot, parent.hash, payload);
    return b;
  }
};

enum class ChainRule { LongestChain, BoundedDepthLongest };
enum class TieRule { Chronological, Random };

struct BlockTree {
  std::unordered_map<Hash, Block> blocks;
  std::unordered_map<Hash, std::vector<Hash>> children;

  BlockTree() {
    Block g = Block::genesis();
    blocks.emplace(g.hash, g);
  }

  bool contains(Hash h) const { return blocks.count(h) != 0; }

  const Block& at(Hash h) const {
    auto it = blocks.find(h);
    if (it == blocks.end()) throw InternalError("block tree: unknown hash");
    return it->second;
  }

  // Parent must already be present; no orphans are admitted.
  bool insert(const Block& b) {
    if (contains(b.hash)) return false;
    auto pit = blocks.find(b.parent);
    if (pit == blocks.end()) return false;
    if (b.index != pit->second.index + 1)
      throw InternalError("block tree: index != parent index + 1");
    blocks.emplace(b.hash, b);
    children[b.parent].push_back(b.hash);
    return true;
  }
};

// A party's (or the observer's) evolving view: tree + arrival bookkeeping +
// adopted tip under the configured fork-choice rule.
struct ChainView {
  int owner = -1;  // party id, or -1 for the observer
  ChainRule rule = ChainRule::LongestChain;
  TieRule tie = TieRule::Chronological;
  int checkpoint_depth = 36;
  SubRng* tie_rng = nullptr;  // used only under TieRule::Random

  BlockTree tree;
  std::unordered_map<Hash, std::uint64_t> arrival_seq;
  std::vector<Hash> arrival_order;  // insertion order, genesis excluded
  std::vector<Block> pending;       // parent not yet seen (possible under
                                    // permuted same-slot delivery)
  Hash tip = kGenesisHash;

  ChainView() { arrival_seq.emplace(kGenesisHash, 0); }

  bool has(Hash h) const { return tree.contains(h); }

  // Depth of the fork point of candidate below the current tip.
  int fork_depth(Hash candidate) const {
    std::unordered_set<Hash> anc;
    Hash h = candidate;
    while (true) {
      anc.insert(h);
      if (h == kGenesisHash) break;
      h = tree.at(h).parent;
    }
    int depth = 0;
    h = tip;
    while (!anc.count(h)) {
      ++depth;
      h = tree.at(h).parent;
    }
    return depth;
  }

  void consider_tip(Hash candidate) {
    if (candidate == tip) return;
    const Block& c = tree.at(candidate);
    const Block& t = tree.at(tip);
    bool adopt = false;
    if (c.index > t.index) {
      adopt = true;
    } else if (c.index == t.index) {
      if (tie == TieRule::Random && tie_rng != nullptr) {
        adopt = (tie_rng->next_u64() & 1) != 0;
      } else {
        // chronological first arrival, then lexicographic hash
        std::uint64_t sc = arrival_seq.at(candidate);
        std::uint64_t st = arrival_seq.at(tip);
        adopt = sc < st || (sc == st && c.hash < t.hash);
      }
    }
    if (adopt && rule == ChainRule::BoundedDepthLongest &&
        fork_depth(candidate) > checkpoint_depth)
      adopt = false;
    if (adopt) tip = candidate;
  }

  // Returns true if the block entered the tree (now or from pending).
  bool add_block(const Block& b) {
    if (tree.contains(b.hash)) return false;
    if (!tree.contains(b.parent)) {
      pending.push_back(b);
      return false;
    }
    admit(b);
    resolve_pending();
    return true;
  }

 private:
  void admit(const Block& b) {
    tree.insert(b);
    arrival_seq.emplace(b.hash, arrival_order.size() + 1);
    arrival_order.push_back(b.hash);
    consider_tip(b.hash);
  }

  void resolve_pending() {
    bool progress = true;
    while (progress) {
      progress = false;
      for (std::size_t i = 0; i < pending.size(); ++i) {
        if (tree.contains(pending[i].parent) && !tree.contains(pending[i].hash)) {
          Block b = pending[i];
          pending.erase(pending.begin() + static_cast<long>(i));
          admit(b);
          progress = true;
          break;
        }
      }
    }
  }
};

// Standalone fork-choice over a finished view: full scan, used as the
// cross-check against the incrementally maintained tip.
inline Hash select_chain(const ChainView& view, ChainRule rule) {
  Hash best = kGenesisHash;
  const Block* bb = &view.tree.at(best);
  for (const auto& [h, blk] : view.tree.blocks) {
    bool better = false;
    if (blk.index > bb->index) {
      better = true;
    } else if (blk.index == bb->index && h != best) {
      std::uint64_t sc = view.arrival_seq.at(h);
      std::uint64_t sb = view.arrival_seq.at(best);
      better = sc < sb || (sc == sb && h < best);
    }
    if (better && rule == ChainRule::BoundedDepthLongest) {
      ChainView tmp = view;  // fork depth relative to the adopted tip
      if (tmp.fork_depth(h) > view.checkpoint_depth) better = false;
    }
    if (better) {
      best = h;
      bb = &blk;
    }
  }
  return best;
}

inline std::vector<Block> chain_to(const BlockTree& tree, Hash tip) {
  std::vector<Block> chain;
  Hash h = tip;
  while (true) {
    chain.push_back(tree.at(h));
    if (h == kGenesisHash) break;
    h = tree.at(h).parent;
  }
  std::vector<Block> out(chain.rbegin(), chain.rend());
  return out;
}

}  // namespace clab
