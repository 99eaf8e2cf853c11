#pragma once

#include <array>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "chancegram/ngram.hpp"

namespace chancegram {

enum class Measure : std::uint8_t { F, MI, MI3, Z, T, SimpleLL };

inline constexpr std::array<Measure, 6> kAllMeasures = {
    Measure::F, Measure::MI, Measure::MI3, Measure::Z, Measure::T, Measure::SimpleLL};

/// Column name: f, MI, MI3, z, t, simple_ll.
std::string_view measure_name(Measure m);
std::optional<Measure> parse_measure(std::string_view name);

/// Which token count plays the role of the corpus size N in E.
enum class SizeBasis { Tokens, Words };

struct ScoreOptions {
  SizeBasis basis = SizeBasis::Tokens;
  /// Replace the corrected MI3 column with plain log2(O^3/E).
  bool mi3_uncorrected = false;
};

/// E = N * prod(f(w_i) / N) = prod f(w_i) / N^(n-1).
double expected_freq(const NgramTable& table, const NgramKey& key,
                     SizeBasis basis = SizeBasis::Tokens);

// Association measures on (observed O, expected E). All throw MeasureError on
// out-of-domain input.
double mi(double observed, double expected);
/// log2(O^3/E) when O >= E, otherwise falls back to log2(O/E) so the score
/// keeps the sign of O - E.
double mi3_corrected(double observed, double expected);
double mi3_uncorrected(double observed, double expected);
double z_score(double observed, double expected);
double t_score(double observed, double expected);
/// sign(O - E) * 2 (O ln(O/E) - (O - E)).
double simple_ll_signed(double observed, double expected);

struct ScoreRecord {
  NgramKey key;
  std::uint64_t observed = 0;
  double expected = 0.0;
  std::array<double, kAllMeasures.size()> scores{};

  double score(Measure m) const { return scores[static_cast<std::size_t>(m)]; }
};

std::vector<ScoreRecord> score_table(const NgramTable& table, const ScoreOptions& options = {});

/// Scores in textual form, as stored in a scores file and consumed by the
/// evaluation stage.
struct ScoreRow {
  std::string text;
  int n = 0;
  std::uint64_t observed = 0;
  double expected = 0.0;
  std::array<double, kAllMeasures.size()> scores{};

  double score(Measure m) const { return scores[static_cast<std::size_t>(m)]; }
};

ScoreRow to_row(const ScoreRecord& record, const Vocabulary& vocab);

/// `w1..wn<TAB>O<TAB>E<TAB>f<TAB>MI<TAB>MI3<TAB>z<TAB>t<TAB>simple_ll`, scores
/// with 6 significant digits.
void write_scores(std::ostream& out, const std::vector<ScoreRecord>& records, const Vocabulary& vocab);
std::vector<ScoreRow> read_scores(std::istream& in);

}  // namespace chancegram
