#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "chancegram/corpus.hpp"

namespace chancegram {

/// Up to four 32-bit ids packed into 128 bits. The length is implied by the
/// table the key lives in.
struct PackedKey {
  std::uint64_t hi = 0;
  std::uint64_t lo = 0;

  friend bool operator==(const PackedKey&, const PackedKey&) = default;
};

inline PackedKey pack_key(std::span<const TokenId> ids) {
  PackedKey key;
  for (std::size_t i = 0; i < ids.size(); ++i) {
    const auto shift = (i % 2 == 0) ? 32 : 0;
    (i < 2 ? key.hi : key.lo) |= static_cast<std::uint64_t>(ids[i]) << shift;
  }
  return key;
}

/// Open-addressing hash table from packed keys to a small payload, used on
/// the permutation hot path where std::unordered_map is too slow.
class KeyIndex {
 public:
  struct Slot {
    PackedKey key;
    std::int32_t entry = -1;  // index into an observed table, or -1
    bool prefix = false;      // key is a proper prefix of a longer observed key
    bool used = false;
  };

  KeyIndex();

  /// Returns the slot for `key`, inserting an empty one if absent.
  Slot& insert(const PackedKey& key);

  const Slot* find(const PackedKey& key) const {
    std::size_t i = hash(key) & mask_;
    while (true) {
      const Slot& s = slots_[i];
      if (!s.used) return nullptr;
      if (s.key == key) return &s;
      i = (i + 1) & mask_;
    }
  }

  std::size_t size() const { return size_; }

 private:
  static std::size_t hash(const PackedKey& key) {
    std::uint64_t x = key.hi * 0x9e3779b97f4a7c15ULL ^ (key.lo + 0x632be59bd9b4e019ULL);
    x ^= x >> 32;
    x *= 0xd6e8feb86659fd93ULL;
    x ^= x >> 32;
    return static_cast<std::size_t>(x);
  }

  void grow();

  std::vector<Slot> slots_;
  std::size_t mask_;
  std::size_t size_ = 0;
};

}  // namespace chancegram
