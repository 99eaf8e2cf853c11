#include "chancegram/eval.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <map>
#include <unordered_map>

#include <json.hpp>

#include "chancegram/error.hpp"
#include "chancegram/fileio.hpp"

namespace chancegram {

std::string_view tie_break_name(TieBreak t) {
  switch (t) {
    case TieBreak::Frequency: return "freq";
    case TieBreak::Bytes: return "bytes";
    case TieBreak::ScoreOnly: return "score-only";
  }
  return "freq";
}

TieBreak parse_tie_break(std::string_view name) {
  if (name == "freq") return TieBreak::Frequency;
  if (name == "bytes") return TieBreak::Bytes;
  if (name == "score-only") return TieBreak::ScoreOnly;
  throw EvalError("unknown tie-break policy '" + std::string(name) + "'");
}

RankedList rank(std::span<const ScoreRow> rows, Measure measure, const GoldSet& gold,
                TieBreak tie_break) {
  if (rows.empty()) throw EvalError("nothing to rank");
  RankedList list;
  list.measure = measure;
  list.items.reserve(rows.size());
  for (const auto& row : rows) {
    const bool is_gold = gold.contains(row.text);
    list.items.push_back({row.text, row.observed, row.score(measure), is_gold});
    if (is_gold) ++list.gold_count;
  }
  if (list.gold_count != gold.size()) throw EvalError("gold set contains keys that were not scored");

  auto by_score = [](const RankedItem& a, const RankedItem& b) { return a.score > b.score; };
  switch (tie_break) {
    case TieBreak::Frequency:
      std::sort(list.items.begin(), list.items.end(), [](const RankedItem& a, const RankedItem& b) {
        if (a.score != b.score) return a.score > b.score;
        if (a.observed != b.observed) return a.observed > b.observed;
        return a.text < b.text;
      });
      break;
    case TieBreak::Bytes:
      std::sort(list.items.begin(), list.items.end(), [](const RankedItem& a, const RankedItem& b) {
        if (a.score != b.score) return a.score > b.score;
        return a.text < b.text;
      });
      break;
    case TieBreak::ScoreOnly:
      std::stable_sort(list.items.begin(), list.items.end(), by_score);
      break;
  }
  return list;
}

std::vector<PrPoint> pr_curve(const RankedList& list) {
  if (list.gold_count == 0) throw EvalError("PR curve needs at least one gold item");
  const auto gold = static_cast<double>(list.gold_count);
  std::vector<PrPoint> curve;
  std::size_t hits = 0;
  bool started = false;
  for (std::size_t k = 0; k < list.items.size(); ++k) {
    if (list.items[k].gold)
      ++hits;
    else
      started = true;
    if (started)
      curve.push_back({static_cast<double>(hits) / gold,
                       static_cast<double>(hits) / static_cast<double>(k + 1)});
  }
  if (!started) curve.push_back({1.0, 1.0});
  return curve;
}

std::vector<PrPoint> downsample_curve(std::span<const PrPoint> curve, std::size_t max_points) {
  if (curve.size() <= max_points || max_points < 2) return {curve.begin(), curve.end()};
  std::vector<PrPoint> out;
  out.reserve(max_points);
  const std::size_t last = curve.size() - 1;
  for (std::size_t i = 0; i < max_points; ++i) out.push_back(curve[i * last / (max_points - 1)]);
  return out;
}

double average_precision(const RankedList& list) {
  if (list.gold_count == 0) throw EvalError("AP needs at least one gold item");
  double sum = 0.0;
  std::size_t hits = 0;
  for (std::size_t k = 0; k < list.items.size(); ++k) {
    if (!list.items[k].gold) continue;
    ++hits;
    sum += static_cast<double>(hits) / static_cast<double>(k + 1);
  }
  return sum / static_cast<double>(list.gold_count);
}

double baseline_ap(std::size_t n_sig, std::size_t n_types) {
  if (n_types == 0) throw EvalError("baseline AP needs at least one n-gram type");
  if (n_sig == 0 || n_sig > n_types) throw EvalError("significant count must lie in [1, types]");
  return static_cast<double>(n_sig) / static_cast<double>(n_types);
}

double chance_corrected_ap(double ap, double baseline) {
  if (!(baseline < 1.0)) throw EvalError("chance-corrected AP is undefined for a baseline of 1");
  return (ap - baseline) / (1.0 - baseline);
}

double first_reject_recall(const RankedList& list) {
  if (list.gold_count == 0) throw EvalError("first-rejection recall needs at least one gold item");
  std::size_t hits = 0;
  for (const auto& item : list.items) {
    if (!item.gold) return static_cast<double>(hits) / static_cast<double>(list.gold_count);
    ++hits;
  }
  return 1.0;
}

EvalReport evaluate(std::span<const ScoreRow> scores, std::span<const SignificanceRow> significance,
                    TieBreak tie_break) {
  std::unordered_map<std::string, bool> decision;
  for (const auto& s : significance) decision[s.pvalue.text] = s.significant;

  std::map<int, std::vector<ScoreRow>> by_length;
  for (const auto& row : scores) by_length[row.n].push_back(row);

  EvalReport report;
  report.tie_break = tie_break;
  for (auto& [n, rows] : by_length) {
    LengthReport section;
    section.n = n;
    section.types = rows.size();
    GoldSet gold;
    for (const auto& row : rows) {
      auto it = decision.find(row.text);
      if (it == decision.end())
        throw EvalError("no significance decision for '" + row.text + "'");
      if (it->second) gold.insert(row.text);
    }
    section.significant = gold.size();
    if (gold.empty()) {
      section.note = "no significant n-grams; AP undefined";
      report.lengths.push_back(std::move(section));
      continue;
    }
    section.baseline = baseline_ap(gold.size(), rows.size());
    if (*section.baseline >= 1.0) section.note = "all n-grams significant; CcAP undefined";
    for (Measure m : kAllMeasures) {
      const RankedList list = rank(rows, m, gold, tie_break);
      MeasureReport mr;
      mr.measure = m;
      mr.ap = average_precision(list);
      if (*section.baseline < 1.0) mr.ccap = chance_corrected_ap(mr.ap, *section.baseline);
      mr.first_reject_recall = first_reject_recall(list);
      mr.pr = downsample_curve(pr_curve(list), kMaxPrPoints);
      section.measures.push_back(std::move(mr));
    }
    report.lengths.push_back(std::move(section));
  }
  return report;
}

std::string report_json(const EvalReport& report) {
  using nlohmann::json;
  json root = json::object();
  if (!report.config_hash.empty()) root["config_hash"] = report.config_hash;
  root["tie_break"] = std::string(tie_break_name(report.tie_break));
  json lengths = json::object();
  for (const auto& section : report.lengths) {
    json s = json::object();
    s["types"] = section.types;
    s["significant"] = section.significant;
    s["baseline_ap"] = section.baseline ? json(*section.baseline) : json(nullptr);
    if (!section.note.empty()) s["note"] = section.note;
    json measures = json::object();
    for (const auto& m : section.measures) {
      json jm = json::object();
      jm["ap"] = m.ap;
      jm["ccap"] = m.ccap ? json(*m.ccap) : json(nullptr);
      jm["first_reject_recall"] = m.first_reject_recall;
      measures[std::string(measure_name(m.measure))] = std::move(jm);
    }
    s["measures"] = std::move(measures);
    lengths[std::to_string(section.n)] = std::move(s);
  }
  root["lengths"] = std::move(lengths);
  return root.dump(2) + "\n";
}

void write_pr_curves(const std::string& directory, const EvalReport& report) {
  std::filesystem::create_directories(directory);
  for (const auto& section : report.lengths) {
    for (const auto& m : section.measures) {
      const auto path = std::filesystem::path(directory) /
                        ("pr_" + std::to_string(section.n) + "gram_" +
                         std::string(measure_name(m.measure)) + ".csv");
      std::ofstream out(path);
      if (!out) throw EvalError("cannot write " + path.string());
      out << "recall,precision\n";
      for (const auto& p : m.pr)
        out << format_significant(p.recall, 8) << ',' << format_significant(p.precision, 8) << '\n';
    }
  }
}

}  // namespace chancegram
