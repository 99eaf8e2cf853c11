#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "chancegram/error.hpp"

namespace chancegram {

using TokenId = std::uint32_t;

enum class TokenClass : std::uint8_t { Word, NonWord };

char class_code(TokenClass cls);

/// Dense surface <-> id mapping. Ids are assigned in first-seen order and
/// every interned occurrence bumps the id's corpus frequency.
class Vocabulary {
 public:
  /// Returns the id for `surface`, creating it if needed, and counts one
  /// occurrence. Throws IngestError if the surface was already seen with the
  /// other class.
  TokenId intern(std::string_view surface, TokenClass cls);

  std::optional<TokenId> lookup(std::string_view surface) const;

  const std::string& surface(TokenId id) const { return surfaces_.at(id); }
  TokenClass token_class(TokenId id) const { return classes_.at(id); }
  bool is_word(TokenId id) const { return classes_[id] == TokenClass::Word; }
  std::uint64_t frequency(TokenId id) const { return frequencies_.at(id); }
  std::size_t size() const { return surfaces_.size(); }

  bool operator==(const Vocabulary& other) const;

 private:
  struct StringHash {
    using is_transparent = void;
    std::size_t operator()(std::string_view s) const noexcept {
      return std::hash<std::string_view>{}(s);
    }
  };

  std::vector<std::string> surfaces_;
  std::vector<TokenClass> classes_;
  std::vector<std::uint64_t> frequencies_;
  std::unordered_map<std::string, TokenId, StringHash, std::equal_to<>> index_;
};

/// The corpus as a sequence of token ids. Immutable once built.
class TokenStream {
 public:
  TokenStream(std::vector<TokenId> tokens, Vocabulary vocab);

  std::span<const TokenId> tokens() const { return tokens_; }
  const Vocabulary& vocab() const { return vocab_; }
  std::size_t size() const { return tokens_.size(); }
  std::uint64_t word_token_count() const;
  bool is_word(TokenId id) const { return vocab_.is_word(id); }

  bool operator==(const TokenStream& other) const = default;

 private:
  std::vector<TokenId> tokens_;
  Vocabulary vocab_;
};

struct VerticalLine {
  std::string surface;
  TokenClass cls;
};

/// ASCII lowercasing; bytes outside A-Z are copied unchanged.
std::string lowercase(std::string_view text);

/// A form is a word iff it is non-empty and made only of ASCII letters and
/// apostrophes (straight or U+2019).
bool is_word_form(std::string_view surface);

TokenStream ingest_vertical(std::span<const VerticalLine> lines);

/// Whitespace tokenizer. Classification follows is_word_form.
TokenStream ingest_plain(std::string_view text);

/// Parses `surface<TAB>W|N` lines. A leading file header line is skipped.
/// Errors carry the 1-based line number.
std::vector<VerticalLine> read_vertical(std::istream& in);

TokenStream read_token_file(std::istream& in);

/// Token file body (no header): one `surface<TAB>W|N` line per token.
void write_token_file(std::ostream& out, const TokenStream& stream);

}  // namespace chancegram
