#include "chancegram/key_index.hpp"

namespace chancegram {

KeyIndex::KeyIndex() : slots_(16), mask_(15) {}

KeyIndex::Slot& KeyIndex::insert(const PackedKey& key) {
  if (2 * (size_ + 1) > slots_.size()) grow();
  std::size_t i = hash(key) & mask_;
  while (slots_[i].used) {
    if (slots_[i].key == key) return slots_[i];
    i = (i + 1) & mask_;
  }
  slots_[i].used = true;
  slots_[i].key = key;
  ++size_;
  return slots_[i];
}

void KeyIndex::grow() {
  std::vector<Slot> old = std::move(slots_);
  slots_.assign(old.size() * 2, Slot{});
  mask_ = slots_.size() - 1;
  for (const Slot& s : old) {
    if (!s.used) continue;
    std::size_t i = hash(s.key) & mask_;
    while (slots_[i].used) i = (i + 1) & mask_;
    slots_[i] = s;
  }
}

}  // namespace chancegram
