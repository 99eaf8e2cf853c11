#include "chancegram/measures.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <istream>
#include <ostream>

#include "chancegram/error.hpp"
#include "chancegram/fileio.hpp"

namespace chancegram {

namespace {

constexpr std::array<std::string_view, 6> kNames = {"f", "MI", "MI3", "z", "t", "simple_ll"};

void require_positive(double observed, double expected, std::string_view what) {
  if (!(observed > 0.0) || !(expected > 0.0) || !std::isfinite(expected))
    throw MeasureError(std::string(what) + ": need O >= 1 and E > 0");
}

}  // namespace

std::string_view measure_name(Measure m) { return kNames[static_cast<std::size_t>(m)]; }

std::optional<Measure> parse_measure(std::string_view name) {
  for (Measure m : kAllMeasures)
    if (measure_name(m) == name) return m;
  return std::nullopt;
}

double expected_freq(const NgramTable& table, const NgramKey& key, SizeBasis basis) {
  const double n_total = static_cast<double>(
      basis == SizeBasis::Tokens ? table.corpus_size() : table.word_token_count());
  if (!(n_total > 0.0)) throw MeasureError("corpus size is zero");
  // Sorted so that E does not depend on word order down to the last bit.
  std::array<std::uint64_t, kMaxOrder> freqs{};
  const auto ids = key.ids();
  for (std::size_t i = 0; i < ids.size(); ++i) {
    freqs[i] = table.marginal(ids[i]);
    if (freqs[i] == 0) throw MeasureError("missing marginal for token id " + std::to_string(ids[i]));
  }
  std::sort(freqs.begin(), freqs.begin() + static_cast<std::ptrdiff_t>(ids.size()));
  double expected = n_total;
  for (std::size_t i = 0; i < ids.size(); ++i) expected *= static_cast<double>(freqs[i]) / n_total;
  return expected;
}

double mi(double observed, double expected) {
  require_positive(observed, expected, "MI");
  return std::log2(observed / expected);
}

double mi3_corrected(double observed, double expected) {
  require_positive(observed, expected, "MI3");
  if (observed < expected) return std::log2(observed / expected);
  return std::log2(observed * observed * observed / expected);
}

double mi3_uncorrected(double observed, double expected) {
  require_positive(observed, expected, "MI3");
  return std::log2(observed * observed * observed / expected);
}

double z_score(double observed, double expected) {
  if (!(expected > 0.0) || !std::isfinite(expected) || observed < 0.0)
    throw MeasureError("z: need O >= 0 and E > 0");
  return (observed - expected) / std::sqrt(expected);
}

double t_score(double observed, double expected) {
  if (!(observed > 0.0) || expected < 0.0)
    throw MeasureError("t: need O >= 1 and E >= 0");
  return (observed - expected) / std::sqrt(observed);
}

double simple_ll_signed(double observed, double expected) {
  require_positive(observed, expected, "simple-ll");
  if (observed == expected) return 0.0;
  const double g2 = 2.0 * (observed * std::log(observed / expected) - (observed - expected));
  return observed > expected ? g2 : -g2;
}

std::vector<ScoreRecord> score_table(const NgramTable& table, const ScoreOptions& options) {
  std::vector<ScoreRecord> records;
  records.reserve(table.size());
  for (const auto& entry : table.entries()) {
    ScoreRecord r;
    r.key = entry.key;
    r.observed = entry.observed;
    r.expected = expected_freq(table, entry.key, options.basis);
    const auto o = static_cast<double>(entry.observed);
    const double e = r.expected;
    auto set = [&](Measure m, double v) { r.scores[static_cast<std::size_t>(m)] = v; };
    set(Measure::F, o);
    set(Measure::MI, mi(o, e));
    set(Measure::MI3, options.mi3_uncorrected ? mi3_uncorrected(o, e) : mi3_corrected(o, e));
    set(Measure::Z, z_score(o, e));
    set(Measure::T, t_score(o, e));
    set(Measure::SimpleLL, simple_ll_signed(o, e));
    records.push_back(r);
  }
  return records;
}

ScoreRow to_row(const ScoreRecord& record, const Vocabulary& vocab) {
  return {record.key.text(vocab), record.key.size(), record.observed, record.expected, record.scores};
}

void write_scores(std::ostream& out, const std::vector<ScoreRecord>& records, const Vocabulary& vocab) {
  for (const auto& r : records) {
    out << r.key.text(vocab) << '\t' << r.observed << '\t' << format_significant(r.expected);
    for (double s : r.scores) out << '\t' << format_significant(s);
    out << '\n';
  }
}

std::vector<ScoreRow> read_scores(std::istream& in) {
  std::vector<ScoreRow> rows;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line_no == 1 && parse_header_line(line)) continue;
    if (line.empty()) continue;
    auto cols = split(line, '\t');
    if (cols.size() != 3 + kAllMeasures.size())
      throw FormatError("scores line " + std::to_string(line_no) + ": expected 9 columns");
    ScoreRow row;
    row.text = std::string(cols[0]);
    row.n = static_cast<int>(split(cols[0], ' ').size());
    row.observed = parse_u64(cols[1]);
    row.expected = parse_double(cols[2]);
    for (std::size_t m = 0; m < kAllMeasures.size(); ++m) row.scores[m] = parse_double(cols[3 + m]);
    rows.push_back(std::move(row));
  }
  return rows;
}

}  // namespace chancegram
