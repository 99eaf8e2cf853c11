#include <doctest.h>

#include <map>
#include <set>
#include <sstream>

#include "chancegram/ngram.hpp"
#include "support/synthetic.hpp"

using namespace chancegram;

namespace {

TokenStream stream_of(std::initializer_list<std::pair<const char*, TokenClass>> tokens) {
  std::vector<VerticalLine> lines;
  for (auto [s, c] : tokens) lines.push_back({s, c});
  return ingest_vertical(lines);
}

constexpr auto W = TokenClass::Word;
constexpr auto N = TokenClass::NonWord;

std::map<std::string, std::uint64_t> by_text(const NgramCounts& counts, const Vocabulary& vocab) {
  std::map<std::string, std::uint64_t> out;
  for (const auto& [k, c] : counts) out[k.text(vocab)] = c;
  return out;
}

}  // namespace

TEST_CASE("count_ngrams respects interruptions") {
  auto s = stream_of({{"a", W}, {"b", W}, {",", N}, {"a", W}, {"b", W}});
  CHECK(by_text(count_ngrams(s, 2), s.vocab()) == std::map<std::string, std::uint64_t>{{"a b", 2}});
}

TEST_CASE("count_ngrams overlapping windows") {
  auto s = stream_of({{"a", W}, {"b", W}, {"a", W}, {"b", W}});
  // Windows by hand: (a b) (b a) (a b); (a b a) (b a b).
  CHECK(by_text(count_ngrams(s, 2), s.vocab()) ==
        std::map<std::string, std::uint64_t>{{"a b", 2}, {"b a", 1}});
  CHECK(by_text(count_ngrams(s, 3), s.vocab()) ==
        std::map<std::string, std::uint64_t>{{"a b a", 1}, {"b a b", 1}});
  CHECK(count_ngrams(s, 4).size() == 1);
  CHECK_THROWS_AS(count_ngrams(s, 1), std::invalid_argument);
  CHECK_THROWS_AS(count_ngrams(s, 5), std::invalid_argument);
}

TEST_CASE("build_table threshold and marginals") {
  auto s = stream_of({{"a", W}, {"b", W}, {"a", W}, {"b", W}});
  auto empty = build_table(count_ngrams(s, 2), s, 3);
  CHECK(empty.empty());
  CHECK(empty.marginal(0) == 2);
  CHECK(empty.marginal(1) == 2);
  CHECK(empty.corpus_size() == 4);

  // {ab:5, ac:3, ad:2} at min_freq 3 keeps ab and ac.
  auto t = stream_of({{"a", W}, {"b", W}, {"c", W}, {"d", W}});
  std::vector<NgramTable::Entry> entries = {{NgramKey{0, 1}, 5}, {NgramKey{0, 2}, 3}, {NgramKey{0, 3}, 2}};
  NgramTable table(2, entries, t, 3);
  REQUIRE(table.size() == 2);
  CHECK(table.entries()[0].key == NgramKey{0, 1});
  CHECK(table.entries()[0].observed == 5);
  CHECK(table.entries()[1].key == NgramKey{0, 2});
}

TEST_CASE("marginals cover the whole stream and exclude non-words") {
  auto s = stream_of({{"a", W}, {",", N}, {"a", W}, {"b", W}});
  auto table = build_table(count_ngrams(s, 2), s, 1);
  CHECK(table.marginal(0) == 2);
  CHECK(table.marginal(1) == 0);
  CHECK(table.marginal(2) == 1);
  CHECK(table.corpus_size() == 4);
  CHECK(table.word_token_count() == 3);
}

TEST_CASE("window-count identity on all-word streams") {
  for (std::size_t len : {2u, 5u, 17u, 40u}) {
    std::vector<VerticalLine> lines;
    for (std::size_t i = 0; i < len; ++i) lines.push_back({testing::word_name(i % 3), W});
    auto s = ingest_vertical(lines);
    for (int n = 2; n <= 4; ++n) {
      std::uint64_t total = 0;
      for (const auto& [k, c] : count_ngrams(s, n)) total += c;
      CHECK(total == (len >= static_cast<std::size_t>(n) ? len - n + 1 : 0));
    }
  }
}

TEST_CASE("inserting a non-word removes exactly the spanning windows") {
  testing::SyntheticSpec spec;
  spec.tokens = 400;
  spec.vocabulary = 8;
  spec.punctuation_rate = 0.0;
  const auto words = testing::make_synthetic_tokens(spec);
  for (std::size_t k : {1u, 2u, 50u, 199u, 398u}) {
    std::vector<VerticalLine> before, after;
    for (const auto& w : words) before.push_back({w, W});
    after = before;
    after.insert(after.begin() + static_cast<std::ptrdiff_t>(k), VerticalLine{",", N});
    auto s0 = ingest_vertical(before);
    auto s1 = ingest_vertical(after);
    for (int n = 2; n <= 4; ++n) {
      auto c0 = by_text(count_ngrams(s0, n), s0.vocab());
      auto c1 = by_text(count_ngrams(s1, n), s1.vocab());
      // Windows of the original spanning the boundary between k-1 and k.
      std::map<std::string, std::uint64_t> removed;
      for (std::size_t start = (k >= static_cast<std::size_t>(n) - 1 ? k - n + 1 : 0); start < k; ++start) {
        if (start + n > words.size()) continue;
        std::string text;
        for (int i = 0; i < n; ++i) text += (i ? " " : "") + words[start + i];
        ++removed[text];
      }
      for (auto& [text, c] : c0) {
        auto expected = c - removed[text];
        auto it = c1.find(text);
        CHECK((it == c1.end() ? 0 : it->second) == expected);
      }
      for (auto& [text, c] : c1) CHECK(c0.contains(text));
    }
  }
}

TEST_CASE("threshold monotonicity") {
  testing::SyntheticSpec spec;
  spec.tokens = 4000;
  spec.vocabulary = 60;
  auto s = ingest_plain(testing::make_synthetic_text(spec));
  for (int n = 2; n <= 4; ++n) {
    auto counts = count_ngrams(s, n);
    for (std::uint64_t t = 1; t < 8; ++t) {
      auto loose = build_table(counts, s, t);
      auto strict = build_table(counts, s, t + 1);
      CHECK(strict.size() <= loose.size());
      std::set<NgramKey> keys;
      for (const auto& e : loose.entries()) keys.insert(e.key);
      for (const auto& e : strict.entries()) {
        CHECK(keys.contains(e.key));
        CHECK(e.observed >= t + 1);
        std::uint64_t min_marginal = UINT64_MAX;
        for (TokenId id : e.key.ids()) min_marginal = std::min(min_marginal, strict.marginal(id));
        CHECK(e.observed <= min_marginal);
      }
    }
  }
}

TEST_CASE("counts file round trip keeps order and values") {
  testing::SyntheticSpec spec;
  spec.tokens = 3000;
  spec.vocabulary = 100;
  auto s = ingest_plain(testing::make_synthetic_text(spec));
  auto table = build_table(count_ngrams(s, 3), s, 2);
  REQUIRE_FALSE(table.empty());
  std::ostringstream out;
  write_counts(out, table, s.vocab());
  std::istringstream in(out.str());
  auto back = read_counts(in, s, 2);
  REQUIRE(back.size() == table.size());
  for (std::size_t i = 0; i < table.size(); ++i) {
    CHECK(back.entries()[i].key == table.entries()[i].key);
    CHECK(back.entries()[i].observed == table.entries()[i].observed);
  }
  // Descending O, then surface text.
  for (std::size_t i = 1; i < table.size(); ++i) {
    const auto& a = table.entries()[i - 1];
    const auto& b = table.entries()[i];
    CHECK((a.observed > b.observed ||
           (a.observed == b.observed && a.key.text(s.vocab()) < b.key.text(s.vocab()))));
  }
}
