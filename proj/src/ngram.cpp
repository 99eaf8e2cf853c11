#include "chancegram/ngram.hpp"

#include <algorithm>
#include <istream>
#include <ostream>
#include <stdexcept>

#include "chancegram/fileio.hpp"

namespace chancegram {

namespace {

void check_order(int n) {
  if (n < kMinOrder || n > kMaxOrder)
    throw std::invalid_argument("n-gram length must be in 2..4, got " + std::to_string(n));
}

std::uint64_t mix64(std::uint64_t x) {
  x ^= x >> 30;
  x *= 0xbf58476d1ce4e5b9ULL;
  x ^= x >> 27;
  x *= 0x94d049bb133111ebULL;
  x ^= x >> 31;
  return x;
}

}  // namespace

NgramKey::NgramKey(std::span<const TokenId> ids) {
  if (ids.size() < 1 || ids.size() > kMaxOrder)
    throw std::invalid_argument("n-gram key must hold 1..4 ids");
  std::copy(ids.begin(), ids.end(), ids_.begin());
  size_ = static_cast<std::uint8_t>(ids.size());
}

std::string NgramKey::text(const Vocabulary& vocab) const {
  std::string out;
  for (int i = 0; i < size_; ++i) {
    if (i) out += ' ';
    out += vocab.surface(ids_[i]);
  }
  return out;
}

std::size_t NgramKeyHash::operator()(const NgramKey& key) const noexcept {
  std::uint64_t h = key.size();
  for (TokenId id : key.ids()) h = mix64(h ^ id) + 0x9e3779b97f4a7c15ULL;
  return static_cast<std::size_t>(h);
}

NgramCounts count_ngrams(const TokenStream& stream, int n) {
  check_order(n);
  NgramCounts counts;
  auto tokens = stream.tokens();
  for_each_window(tokens, stream.vocab(), n, [&](std::size_t start) {
    ++counts[NgramKey(tokens.subspan(start, n))];
  });
  return counts;
}

NgramTable::NgramTable(int n, std::vector<Entry> entries, const TokenStream& stream,
                       std::uint64_t min_freq)
    : n_(n),
      min_freq_(min_freq),
      corpus_size_(stream.size()),
      word_tokens_(stream.word_token_count()) {
  check_order(n);
  const auto& vocab = stream.vocab();
  marginals_.assign(vocab.size(), 0);
  for (TokenId id = 0; id < vocab.size(); ++id)
    if (vocab.is_word(id)) marginals_[id] = vocab.frequency(id);

  std::erase_if(entries, [&](const Entry& e) { return e.observed < min_freq || e.observed == 0; });
  for (const auto& e : entries) {
    if (e.key.size() != n) throw std::invalid_argument("n-gram key has the wrong length");
    for (TokenId id : e.key.ids())
      if (id >= vocab.size() || !vocab.is_word(id))
        throw std::invalid_argument("n-gram key contains a non-word token");
  }

  std::vector<std::pair<std::string, Entry>> keyed;
  keyed.reserve(entries.size());
  for (auto& e : entries) keyed.emplace_back(e.key.text(vocab), e);
  std::sort(keyed.begin(), keyed.end(), [](const auto& a, const auto& b) {
    if (a.second.observed != b.second.observed) return a.second.observed > b.second.observed;
    return a.first < b.first;
  });
  entries_.reserve(keyed.size());
  for (auto& [text, e] : keyed) entries_.push_back(e);
}

std::uint64_t NgramTable::marginal(TokenId id) const {
  return id < marginals_.size() ? marginals_[id] : 0;
}

NgramTable build_table(const NgramCounts& counts, const TokenStream& stream, std::uint64_t min_freq) {
  int n = 0;
  std::vector<NgramTable::Entry> entries;
  entries.reserve(counts.size());
  for (const auto& [key, count] : counts) {
    n = key.size();
    entries.push_back({key, count});
  }
  // An empty map carries no length; any valid order gives the same empty table.
  return NgramTable(n == 0 ? kMinOrder : n, std::move(entries), stream, min_freq);
}

void write_counts(std::ostream& out, const NgramTable& table, const Vocabulary& vocab) {
  for (const auto& e : table.entries()) out << e.key.text(vocab) << '\t' << e.observed << '\n';
}

NgramKey parse_key(std::string_view text, const Vocabulary& vocab) {
  std::vector<TokenId> ids;
  for (auto word : split(text, ' ')) {
    auto id = vocab.lookup(word);
    if (!id) throw FormatError("unknown token '" + std::string(word) + "'");
    ids.push_back(*id);
  }
  if (ids.size() > static_cast<std::size_t>(kMaxOrder))
    throw FormatError("n-gram '" + std::string(text) + "' is longer than 4 tokens");
  return NgramKey(ids);
}

NgramTable read_counts(std::istream& in, const TokenStream& stream, std::uint64_t min_freq) {
  std::string line;
  std::size_t line_no = 0;
  int n = 0;
  std::vector<NgramTable::Entry> entries;
  while (std::getline(in, line)) {
    ++line_no;
    if (line_no == 1) {
      if (auto header = parse_header_line(line)) {
        if (auto order = header->get("n")) n = static_cast<int>(parse_u64(*order));
        continue;
      }
    }
    if (line.empty()) continue;
    auto cols = split(line, '\t');
    if (cols.size() != 2)
      throw FormatError("counts line " + std::to_string(line_no) + ": expected 2 columns");
    NgramKey key = parse_key(cols[0], stream.vocab());
    if (n == 0) n = key.size();
    if (key.size() != n)
      throw FormatError("counts line " + std::to_string(line_no) + ": mixed n-gram lengths");
    entries.push_back({key, parse_u64(cols[1])});
  }
  if (n == 0) throw FormatError("counts file has no rows and no n= header field");
  return NgramTable(n, std::move(entries), stream, min_freq);
}

}  // namespace chancegram
