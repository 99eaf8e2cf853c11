#pragma once

#include <iosfwd>
#include <map>
#include <span>
#include <vector>

#include "chancegram/permute.hpp"

namespace chancegram {

/// Holm's step-down procedure. With p sorted ascending, rejects hypotheses
/// 1..i-1 where i is the first (1-based) position with p(i) > alpha/(m-i+1).
/// Returned flags are in input order. Tied p-values always share a decision:
/// once the first member of a tie group passes its threshold, later members
/// face looser thresholds with the same p.
///
/// p must lie in [0, 1] (0 arises from the raw estimator) and alpha in (0, 1);
/// otherwise MtcError. An empty input is an error too.
std::vector<bool> holm(std::span<const double> pvalues, double alpha);

struct SignificanceRow {
  PValueRow pvalue;
  bool significant = false;
};

struct SignificanceTable {
  double alpha = 0.05;
  std::vector<SignificanceRow> rows;
  /// n-gram length -> family size m.
  std::map<int, std::size_t> family_sizes;
};

/// Runs holm separately within each n-gram length. Row order is preserved.
SignificanceTable apply_holm(std::span<const PValueRow> rows, double alpha);

/// p-values columns followed by `significant` (0/1).
void write_significance(std::ostream& out, const SignificanceTable& table);
std::vector<SignificanceRow> read_significance(std::istream& in);

}  // namespace chancegram
