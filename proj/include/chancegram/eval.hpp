#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_set>
#include <vector>

#include "chancegram/measures.hpp"
#include "chancegram/mtc.hpp"

namespace chancegram {

/// How equal scores are ordered. Frequency: higher O first, then key bytes.
/// Bytes: key bytes only. ScoreOnly: keep input order (stable).
enum class TieBreak { Frequency, Bytes, ScoreOnly };

std::string_view tie_break_name(TieBreak t);
TieBreak parse_tie_break(std::string_view name);

using GoldSet = std::unordered_set<std::string>;

struct RankedItem {
  std::string text;
  std::uint64_t observed = 0;
  double score = 0.0;
  bool gold = false;
};

struct RankedList {
  Measure measure = Measure::F;
  std::vector<RankedItem> items;
  std::size_t gold_count = 0;
};

/// Descending by score with the given tie rule. Every gold key must be among
/// the rows (EvalError otherwise).
RankedList rank(std::span<const ScoreRow> rows, Measure measure, const GoldSet& gold,
                TieBreak tie_break = TieBreak::Frequency);

struct PrPoint {
  double recall = 0.0;
  double precision = 0.0;
};

/// (recall, precision) at every rank from the first non-gold item to the end.
/// Precision is 1 before that point, so those ranks are not emitted. A ranking
/// without non-gold items yields the single point (1, 1).
std::vector<PrPoint> pr_curve(const RankedList& list);

/// Evenly thins a curve to at most `max_points`, always keeping the first
/// point (the first rejection) and the last.
std::vector<PrPoint> downsample_curve(std::span<const PrPoint> curve, std::size_t max_points);

/// Non-interpolated AP: mean precision at the ranks of the gold items.
double average_precision(const RankedList& list);

/// Expected AP of a random ranking: n_sig / n_types.
double baseline_ap(std::size_t n_sig, std::size_t n_types);

/// Kappa-style correction (ap - baseline) / (1 - baseline).
double chance_corrected_ap(double ap, double baseline);

/// Recall reached just before the first non-gold item; 1 if there is none.
double first_reject_recall(const RankedList& list);

struct MeasureReport {
  Measure measure = Measure::F;
  double ap = 0.0;
  std::optional<double> ccap;
  double first_reject_recall = 0.0;
  std::vector<PrPoint> pr;
};

struct LengthReport {
  int n = 0;
  std::size_t types = 0;
  std::size_t significant = 0;
  /// Empty when there is nothing to evaluate (no significant n-gram).
  std::optional<double> baseline;
  std::vector<MeasureReport> measures;
  std::string note;
};

struct EvalReport {
  std::string config_hash;
  TieBreak tie_break = TieBreak::Frequency;
  std::vector<LengthReport> lengths;
};

inline constexpr std::size_t kMaxPrPoints = 2000;

/// Joins scores with Holm decisions (by key text) and evaluates every measure
/// per n-gram length present in `scores`.
EvalReport evaluate(std::span<const ScoreRow> scores, std::span<const SignificanceRow> significance,
                    TieBreak tie_break = TieBreak::Frequency);

/// Deterministic JSON (sorted keys).
std::string report_json(const EvalReport& report);

/// One `recall,precision` CSV per length and measure: pr_<n>gram_<measure>.csv
void write_pr_curves(const std::string& directory, const EvalReport& report);

}  // namespace chancegram
