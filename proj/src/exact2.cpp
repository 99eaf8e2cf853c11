#include "chancegram/exact2.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include "chancegram/error.hpp"

namespace chancegram {

namespace {

std::uint64_t count_key(std::span<const TokenId> tokens, const Vocabulary& vocab, const NgramKey& key) {
  std::uint64_t count = 0;
  const auto ids = key.ids();
  for_each_window(tokens, vocab, key.size(), [&](std::size_t start) {
    if (std::equal(ids.begin(), ids.end(), tokens.begin() + static_cast<std::ptrdiff_t>(start)))
      ++count;
  });
  return count;
}

}  // namespace

ContingencyTable2x2 ContingencyTable2x2::from_marginals(std::uint64_t f1, std::uint64_t f2,
                                                        std::uint64_t o11, std::uint64_t total) {
  if (o11 > f1 || o11 > f2 || f1 + f2 > total + o11)
    throw OracleError("marginals do not form a valid 2x2 table");
  return {o11, f1 - o11, f2 - o11, total + o11 - f1 - f2};
}

double log_binomial(std::uint64_t n, std::uint64_t k) {
  if (k > n) return -std::numeric_limits<double>::infinity();
  const auto nd = static_cast<double>(n);
  const auto kd = static_cast<double>(k);
  return std::lgamma(nd + 1.0) - std::lgamma(kd + 1.0) - std::lgamma(nd - kd + 1.0);
}

double fisher_exact_upper(const ContingencyTable2x2& table) {
  const std::uint64_t n = table.total();
  const std::uint64_t r1 = table.row1();
  const std::uint64_t c1 = table.col1();
  if (n == 0) throw OracleError("empty contingency table");
  // Support of o11 is [max(0, R1 + C1 - N), min(R1, C1)].
  const std::uint64_t support_low = (r1 + c1 > n) ? r1 + c1 - n : 0;
  if (table.o11 <= support_low) return 1.0;
  const std::uint64_t k_min = table.o11;
  const std::uint64_t k_max = std::min(r1, c1);

  const double log_denominator = log_binomial(n, c1);
  std::vector<double> terms;
  terms.reserve(k_max - k_min + 1);
  for (std::uint64_t k = k_min; k <= k_max; ++k)
    terms.push_back(log_binomial(r1, k) + log_binomial(n - r1, c1 - k) - log_denominator);
  const double peak = *std::max_element(terms.begin(), terms.end());
  double sum = 0.0;
  for (double t : terms) sum += std::exp(t - peak);
  return std::min(1.0, std::exp(peak + std::log(sum)));
}

ContingencyTable2x2 bigram_table(const TokenStream& stream, const NgramKey& key) {
  if (key.size() != 2) throw OracleError("the 2x2 test needs a bigram");
  const auto& vocab = stream.vocab();
  for (TokenId id : key.ids())
    if (id >= vocab.size() || !vocab.is_word(id)) throw OracleError("bigram contains a non-word");
  const auto o11 = count_key(stream.tokens(), vocab, key);
  return ContingencyTable2x2::from_marginals(vocab.frequency(key[0]), vocab.frequency(key[1]), o11,
                                             stream.size());
}

double enumerate_exact(const TokenStream& stream, const NgramKey& key) {
  if (stream.size() > kMaxEnumerationTokens)
    throw OracleError("enumeration is limited to " + std::to_string(kMaxEnumerationTokens) + " tokens");
  const auto& vocab = stream.vocab();
  const std::uint64_t observed = count_key(stream.tokens(), vocab, key);
  if (observed == 0) return 1.0;

  std::vector<TokenId> arrangement(stream.tokens().begin(), stream.tokens().end());
  std::sort(arrangement.begin(), arrangement.end());
  std::uint64_t hits = 0;
  std::uint64_t total = 0;
  do {
    ++total;
    if (count_key(arrangement, vocab, key) >= observed) ++hits;
  } while (std::next_permutation(arrangement.begin(), arrangement.end()));
  return static_cast<double>(hits) / static_cast<double>(total);
}

}  // namespace chancegram
