#pragma once

#include <cstdint>

#include "chancegram/ngram.hpp"

namespace chancegram {

/// 2x2 table for a bigram w1 w2 in a corpus of N tokens:
///   o11 = f(w1 w2)   o12 = f(w1) - o11
///   o21 = f(w2) - o11   o22 = N - f(w1) - f(w2) + o11
struct ContingencyTable2x2 {
  std::uint64_t o11 = 0;
  std::uint64_t o12 = 0;
  std::uint64_t o21 = 0;
  std::uint64_t o22 = 0;

  /// Throws OracleError if any cell would be negative.
  static ContingencyTable2x2 from_marginals(std::uint64_t f1, std::uint64_t f2,
                                            std::uint64_t o11, std::uint64_t total);

  std::uint64_t row1() const { return o11 + o12; }
  std::uint64_t col1() const { return o11 + o21; }
  std::uint64_t total() const { return o11 + o12 + o21 + o22; }
};

/// log C(n, k); -inf when k > n.
double log_binomial(std::uint64_t n, std::uint64_t k);

/// One-sided upper tail of the hypergeometric distribution:
///   sum_{k >= o11} C(R1, k) C(N - R1, C1 - k) / C(N, C1)
/// summed in log space.
double fisher_exact_upper(const ContingencyTable2x2& table);

/// Convenience: builds the table for a bigram key from the stream.
ContingencyTable2x2 bigram_table(const TokenStream& stream, const NgramKey& key);

inline constexpr std::size_t kMaxEnumerationTokens = 12;

/// Exact permutation p-value for `key`: the share of all orderings of the
/// stream's tokens in which the key occurs at least as often as it does in the
/// stream. Walks distinct multiset arrangements, each of which stands for the
/// same number of orderings. Throws OracleError for streams longer than 12.
double enumerate_exact(const TokenStream& stream, const NgramKey& key);

}  // namespace chancegram
