#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "chancegram/key_index.hpp"
#include "chancegram/ngram.hpp"

namespace chancegram {

// Monte Carlo permutation test over a whole token stream.
//
// Every permutation i is a uniform shuffle of the full token sequence (all
// classes mixed). Its randomness is derived from (master_seed, i) alone, so
// any permutation can be regenerated in isolation and results do not depend
// on how indices are spread over workers. For each observed n-gram the
// exceedance tally r counts the permutations in which the n-gram occurs at
// least as often as in the original stream.

struct PermutationPlan {
  std::uint64_t permutations = 1;
  std::uint64_t master_seed = 0;
  std::vector<int> lengths;
  std::uint64_t min_freq = 3;

  /// Throws PermuteError on P == 0 or a bad length list.
  void validate() const;
};

enum class Estimator { AddOne, Raw };

std::string_view estimator_name(Estimator e);
Estimator parse_estimator(std::string_view name);

/// Seed of permutation `index`, mixed from the master seed with splitmix64.
std::uint64_t permutation_seed(std::uint64_t master_seed, std::uint64_t index);

/// Writes the shuffled copy of `source` into `out` (same size).
void shuffle_into(std::span<const TokenId> source, std::span<TokenId> out,
                  std::uint64_t master_seed, std::uint64_t index);

std::vector<TokenId> shuffle_stream(const TokenStream& stream, std::uint64_t master_seed,
                                    std::uint64_t index);

/// Permuted counts restricted to observed keys: [table][entry].
using PermutedCounts = std::vector<std::vector<std::uint64_t>>;

/// Hot-path counter. Looks up only windows whose prefixes can still extend to
/// an observed key, so most positions cost one byte test.
class ObservedKeyIndex {
 public:
  ObservedKeyIndex(const Vocabulary& vocab, std::span<const NgramTable> tables);

  struct Scratch {
    std::vector<std::vector<std::uint32_t>> counts;
    std::vector<std::vector<std::uint32_t>> touched;
  };

  Scratch make_scratch() const;

  /// Counts observed keys in `permuted`. Non-zero counts are listed in
  /// scratch.touched; the caller resets them with `clear`.
  void count(std::span<const TokenId> permuted, Scratch& scratch) const;
  static void clear(Scratch& scratch);

  std::size_t table_count() const { return table_sizes_.size(); }

 private:
  std::vector<std::uint8_t> is_word_;
  std::vector<std::uint8_t> starts_key_;
  std::vector<KeyIndex> levels_;        // levels_[k - 2] holds keys/prefixes of length k
  std::vector<int> level_table_;        // table index whose keys have length k, or -1
  std::vector<std::size_t> table_sizes_;
  int max_order_ = 0;
};

PermutedCounts tally_permutation(std::span<const TokenId> permuted, const Vocabulary& vocab,
                                 std::span<const NgramTable> observed);

struct TallyTable {
  std::vector<int> lengths;
  /// exceedances[t][e]: permutations where entry e of table t reached its O.
  std::vector<std::vector<std::uint64_t>> exceedances;
  std::uint64_t completed = 0;

  friend bool operator==(const TallyTable&, const TallyTable&) = default;
};

struct Progress {
  std::uint64_t completed = 0;
  std::uint64_t total = 0;
  double elapsed_seconds = 0.0;
  double per_second = 0.0;
};

struct RunOptions {
  unsigned workers = 1;
  /// Chunk size between merges and checkpoint writes; 0 picks a default.
  std::uint64_t checkpoint_every = 0;
  /// Empty disables checkpointing. An existing file is resumed from.
  std::string checkpoint_path;
  std::function<void(const Progress&)> progress;
};

/// Runs permutations [0, P). `observed[i]` must have order plan.lengths[i]
/// and come from `stream`.
TallyTable run_permutations(const TokenStream& stream, const PermutationPlan& plan,
                            std::span<const NgramTable> observed, const RunOptions& options = {});

/// AddOne: (r + 1) / (P + 1). Raw: r / P.
double p_value(std::uint64_t exceed, std::uint64_t permutations, Estimator estimator);

/// Hash over the stream and observed tables; guards checkpoint reuse.
std::string observed_fingerprint(const TokenStream& stream, std::span<const NgramTable> observed);

struct PValueRow {
  std::string text;
  int n = 0;
  std::uint64_t observed = 0;
  std::uint64_t exceed = 0;
  std::uint64_t permutations = 0;
  double p_hat = 1.0;
};

std::vector<PValueRow> make_pvalue_rows(std::span<const NgramTable> observed, const TallyTable& tally,
                                        const Vocabulary& vocab, Estimator estimator);

/// `w1..wn<TAB>O<TAB>r<TAB>P<TAB>p_hat`
void write_pvalues(std::ostream& out, std::span<const PValueRow> rows);
std::vector<PValueRow> read_pvalues(std::istream& in);

}  // namespace chancegram
