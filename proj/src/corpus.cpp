#include "chancegram/corpus.hpp"

#include <istream>
#include <ostream>

#include "chancegram/fileio.hpp"

namespace chancegram {

namespace {

constexpr std::string_view kRightQuote = "\xE2\x80\x99";

bool is_ascii_letter(char c) { return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z'); }

bool is_space(char c) {
  return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' || c == '\v';
}

IngestError line_error(std::size_t line_no, const std::string& what) {
  return IngestError("line " + std::to_string(line_no) + ": " + what);
}

}  // namespace

char class_code(TokenClass cls) { return cls == TokenClass::Word ? 'W' : 'N'; }

TokenId Vocabulary::intern(std::string_view surface, TokenClass cls) {
  if (auto it = index_.find(surface); it != index_.end()) {
    TokenId id = it->second;
    if (classes_[id] != cls)
      throw IngestError("token '" + std::string(surface) + "' appears as both W and N");
    ++frequencies_[id];
    return id;
  }
  auto id = static_cast<TokenId>(surfaces_.size());
  surfaces_.emplace_back(surface);
  classes_.push_back(cls);
  frequencies_.push_back(1);
  index_.emplace(std::string(surface), id);
  return id;
}

std::optional<TokenId> Vocabulary::lookup(std::string_view surface) const {
  if (auto it = index_.find(surface); it != index_.end()) return it->second;
  return std::nullopt;
}

bool Vocabulary::operator==(const Vocabulary& other) const {
  return surfaces_ == other.surfaces_ && classes_ == other.classes_ &&
         frequencies_ == other.frequencies_;
}

TokenStream::TokenStream(std::vector<TokenId> tokens, Vocabulary vocab)
    : tokens_(std::move(tokens)), vocab_(std::move(vocab)) {
  if (tokens_.empty()) throw IngestError("corpus contains no tokens");
}

std::uint64_t TokenStream::word_token_count() const {
  std::uint64_t total = 0;
  for (TokenId id = 0; id < vocab_.size(); ++id)
    if (vocab_.is_word(id)) total += vocab_.frequency(id);
  return total;
}

std::string lowercase(std::string_view text) {
  std::string out(text);
  for (char& c : out)
    if (c >= 'A' && c <= 'Z') c = static_cast<char>(c - 'A' + 'a');
  return out;
}

bool is_word_form(std::string_view surface) {
  if (surface.empty()) return false;
  std::size_t i = 0;
  while (i < surface.size()) {
    if (is_ascii_letter(surface[i]) || surface[i] == '\'') {
      ++i;
    } else if (surface.substr(i).starts_with(kRightQuote)) {
      i += kRightQuote.size();
    } else {
      return false;
    }
  }
  return true;
}

TokenStream ingest_vertical(std::span<const VerticalLine> lines) {
  if (lines.empty()) throw IngestError("empty input");
  Vocabulary vocab;
  std::vector<TokenId> tokens;
  tokens.reserve(lines.size());
  for (std::size_t i = 0; i < lines.size(); ++i) {
    const auto& line = lines[i];
    const std::size_t line_no = i + 1;
    if (line.surface.empty()) throw line_error(line_no, "empty surface");
    if (line.surface.find_first_of("\t\n\r") != std::string::npos)
      throw line_error(line_no, "surface contains a tab or line break");
    if (line.cls != TokenClass::Word && line.cls != TokenClass::NonWord)
      throw line_error(line_no, "invalid token class");
    // Word surfaces end up space-separated inside n-gram files.
    if (line.cls == TokenClass::Word && line.surface.find(' ') != std::string::npos)
      throw line_error(line_no, "word surface contains a space");
    try {
      if (line.cls == TokenClass::Word)
        tokens.push_back(vocab.intern(lowercase(line.surface), TokenClass::Word));
      else
        tokens.push_back(vocab.intern(line.surface, TokenClass::NonWord));
    } catch (const IngestError& e) {
      throw line_error(line_no, e.what());
    }
  }
  return TokenStream(std::move(tokens), std::move(vocab));
}

TokenStream ingest_plain(std::string_view text) {
  std::vector<VerticalLine> lines;
  std::size_t i = 0;
  while (i < text.size()) {
    while (i < text.size() && is_space(text[i])) ++i;
    std::size_t start = i;
    while (i < text.size() && !is_space(text[i])) ++i;
    if (i > start) {
      std::string surface(text.substr(start, i - start));
      auto cls = is_word_form(lowercase(surface)) ? TokenClass::Word : TokenClass::NonWord;
      lines.push_back({std::move(surface), cls});
    }
  }
  if (lines.empty()) throw IngestError("text contains no tokens");
  return ingest_vertical(lines);
}

std::vector<VerticalLine> read_vertical(std::istream& in) {
  std::vector<VerticalLine> lines;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line_no == 1 && parse_header_line(line)) continue;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) throw line_error(line_no, "blank line");
    auto tab = line.rfind('\t');
    if (tab == std::string::npos || tab == 0)
      throw line_error(line_no, "expected surface<TAB>W|N");
    std::string_view code = std::string_view(line).substr(tab + 1);
    TokenClass cls;
    if (code == "W")
      cls = TokenClass::Word;
    else if (code == "N")
      cls = TokenClass::NonWord;
    else
      throw line_error(line_no, "class must be W or N, got '" + std::string(code) + "'");
    lines.push_back({line.substr(0, tab), cls});
  }
  return lines;
}

TokenStream read_token_file(std::istream& in) {
  auto lines = read_vertical(in);
  return ingest_vertical(lines);
}

void write_token_file(std::ostream& out, const TokenStream& stream) {
  const auto& vocab = stream.vocab();
  for (TokenId id : stream.tokens())
    out << vocab.surface(id) << '\t' << class_code(vocab.token_class(id)) << '\n';
}

}  // namespace chancegram
