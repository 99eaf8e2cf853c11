#include "chancegram/mtc.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <numeric>
#include <ostream>

#include "chancegram/error.hpp"
#include "chancegram/fileio.hpp"

namespace chancegram {

namespace {

void check_alpha(double alpha) {
  if (!(alpha > 0.0 && alpha < 1.0)) throw MtcError("alpha must lie in (0, 1)");
}

// Step-down over indices already sorted by ascending p.
std::vector<bool> step_down(std::span<const double> pvalues, std::span<const std::size_t> order,
                            double alpha) {
  const std::size_t m = order.size();
  std::vector<bool> reject(m, false);
  for (std::size_t i = 0; i < m; ++i) {
    const double threshold = alpha / static_cast<double>(m - i);
    if (pvalues[order[i]] > threshold) break;
    reject[order[i]] = true;
  }
  return reject;
}

}  // namespace

std::vector<bool> holm(std::span<const double> pvalues, double alpha) {
  check_alpha(alpha);
  if (pvalues.empty()) throw MtcError("empty family");
  for (double p : pvalues)
    if (!(p >= 0.0 && p <= 1.0)) throw MtcError("p-value outside [0, 1]");
  std::vector<std::size_t> order(pvalues.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return pvalues[a] < pvalues[b]; });
  return step_down(pvalues, order, alpha);
}

SignificanceTable apply_holm(std::span<const PValueRow> rows, double alpha) {
  check_alpha(alpha);
  if (rows.empty()) throw MtcError("no p-values to correct");
  SignificanceTable table;
  table.alpha = alpha;
  table.rows.reserve(rows.size());
  for (const auto& r : rows) table.rows.push_back({r, false});

  std::map<int, std::vector<std::size_t>> families;
  for (std::size_t i = 0; i < rows.size(); ++i) families[rows[i].n].push_back(i);

  for (auto& [n, members] : families) {
    // Sorted by (p, key text) so the walk is reproducible; the decisions do
    // not depend on the order within ties.
    std::stable_sort(members.begin(), members.end(), [&](std::size_t a, std::size_t b) {
      if (rows[a].p_hat != rows[b].p_hat) return rows[a].p_hat < rows[b].p_hat;
      return rows[a].text < rows[b].text;
    });
    std::vector<double> p;
    p.reserve(members.size());
    for (auto i : members) p.push_back(rows[i].p_hat);
    const auto flags = holm(p, alpha);
    for (std::size_t k = 0; k < members.size(); ++k) table.rows[members[k]].significant = flags[k];
    table.family_sizes[n] = members.size();
  }
  return table;
}

void write_significance(std::ostream& out, const SignificanceTable& table) {
  for (const auto& row : table.rows) {
    const auto& r = row.pvalue;
    out << r.text << '\t' << r.observed << '\t' << r.exceed << '\t' << r.permutations << '\t'
        << format_exact(r.p_hat) << '\t' << (row.significant ? 1 : 0) << '\n';
  }
}

std::vector<SignificanceRow> read_significance(std::istream& in) {
  std::vector<SignificanceRow> rows;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line_no == 1 && parse_header_line(line)) continue;
    if (line.empty()) continue;
    auto cols = split(line, '\t');
    if (cols.size() != 6 || (cols[5] != "0" && cols[5] != "1"))
      throw FormatError("significance line " + std::to_string(line_no) + ": expected 6 columns ending in 0/1");
    SignificanceRow row;
    row.pvalue.text = std::string(cols[0]);
    row.pvalue.n = static_cast<int>(split(cols[0], ' ').size());
    row.pvalue.observed = parse_u64(cols[1]);
    row.pvalue.exceed = parse_u64(cols[2]);
    row.pvalue.permutations = parse_u64(cols[3]);
    row.pvalue.p_hat = parse_double(cols[4]);
    row.significant = cols[5] == "1";
    rows.push_back(std::move(row));
  }
  return rows;
}

}  // namespace chancegram
