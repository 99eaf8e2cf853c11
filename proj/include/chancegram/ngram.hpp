#pragma once

#include <array>
#include <compare>
#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "chancegram/corpus.hpp"

namespace chancegram {

inline constexpr int kMinOrder = 2;
inline constexpr int kMaxOrder = 4;

/// A fixed-length sequence of 2..4 token ids.
class NgramKey {
 public:
  NgramKey() = default;
  explicit NgramKey(std::span<const TokenId> ids);
  NgramKey(std::initializer_list<TokenId> ids)
      : NgramKey(std::span<const TokenId>(ids.begin(), ids.size())) {}

  int size() const { return size_; }
  TokenId operator[](std::size_t i) const { return ids_[i]; }
  std::span<const TokenId> ids() const { return {ids_.data(), size_}; }

  /// Surface forms joined by single spaces.
  std::string text(const Vocabulary& vocab) const;

  friend auto operator<=>(const NgramKey&, const NgramKey&) = default;

 private:
  std::array<TokenId, kMaxOrder> ids_{};
  std::uint8_t size_ = 0;
};

struct NgramKeyHash {
  std::size_t operator()(const NgramKey& key) const noexcept;
};

using NgramCounts = std::unordered_map<NgramKey, std::uint64_t, NgramKeyHash>;

/// Counts every window of `n` consecutive Word tokens. A NonWord token breaks
/// the run; windows overlap. Throws std::invalid_argument unless 2 <= n <= 4.
NgramCounts count_ngrams(const TokenStream& stream, int n);

/// Calls `visit(start)` for every qualifying window start position.
template <typename Visit>
void for_each_window(std::span<const TokenId> tokens, const Vocabulary& vocab, int n,
                     Visit&& visit) {
  std::size_t run = 0;
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    run = vocab.is_word(tokens[i]) ? run + 1 : 0;
    if (run >= static_cast<std::size_t>(n)) visit(i + 1 - n);
  }
}

/// Observed n-grams of one length that meet the frequency threshold, with the
/// unigram marginals they need.
class NgramTable {
 public:
  struct Entry {
    NgramKey key;
    std::uint64_t observed;
  };

  /// Keeps entries with observed >= min_freq. Entries are ordered by
  /// descending count, then ascending surface text.
  NgramTable(int n, std::vector<Entry> entries, const TokenStream& stream, std::uint64_t min_freq);

  int order() const { return n_; }
  std::uint64_t min_freq() const { return min_freq_; }
  std::span<const Entry> entries() const { return entries_; }
  std::size_t size() const { return entries_.size(); }
  bool empty() const { return entries_.empty(); }

  /// Total token count (all classes).
  std::uint64_t corpus_size() const { return corpus_size_; }
  std::uint64_t word_token_count() const { return word_tokens_; }

  /// Whole-stream frequency of a Word id; 0 for NonWord or unknown ids.
  std::uint64_t marginal(TokenId id) const;

 private:
  int n_;
  std::uint64_t min_freq_;
  std::vector<Entry> entries_;
  std::vector<std::uint64_t> marginals_;
  std::uint64_t corpus_size_;
  std::uint64_t word_tokens_;
};

NgramTable build_table(const NgramCounts& counts, const TokenStream& stream, std::uint64_t min_freq);

/// Counts file body: `w1 w2 [w3 [w4]]<TAB>O`, in table order.
void write_counts(std::ostream& out, const NgramTable& table, const Vocabulary& vocab);

/// Reads a counts file, mapping surfaces through the stream's vocabulary.
/// Every row must have the same length.
NgramTable read_counts(std::istream& in, const TokenStream& stream, std::uint64_t min_freq);

/// Parses space-separated surfaces into a key.
NgramKey parse_key(std::string_view text, const Vocabulary& vocab);

}  // namespace chancegram
