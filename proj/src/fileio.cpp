#include "chancegram/fileio.hpp"

#include <array>
#include <charconv>
#include <cstdio>
#include <fstream>
#include <ostream>

#include "chancegram/error.hpp"

namespace chancegram {

std::optional<std::string> FileHeader::get(const std::string& key) const {
  auto it = fields.find(key);
  if (it == fields.end()) return std::nullopt;
  return it->second;
}

std::optional<FileHeader> parse_header_line(std::string_view line) {
  if (!line.starts_with(kHeaderMagic)) return std::nullopt;
  auto parts = split(line, '\t');
  if (parts.empty() || parts[0] != kHeaderMagic) return std::nullopt;
  FileHeader header;
  for (std::size_t i = 1; i < parts.size(); ++i) {
    auto eq = parts[i].find('=');
    if (eq == std::string_view::npos)
      throw FormatError("malformed header field '" + std::string(parts[i]) + "'");
    header.fields.emplace(std::string(parts[i].substr(0, eq)), std::string(parts[i].substr(eq + 1)));
  }
  return header;
}

void write_header(std::ostream& out, const FileHeader& header) {
  out << kHeaderMagic;
  for (const auto& [key, value] : header.fields) out << '\t' << key << '=' << value;
  out << '\n';
}

std::optional<FileHeader> read_file_header(const std::string& path) {
  std::ifstream in(path);
  if (!in) return std::nullopt;
  std::string line;
  if (!std::getline(in, line)) return std::nullopt;
  return parse_header_line(line);
}

std::vector<std::string_view> split(std::string_view text, char sep) {
  std::vector<std::string_view> parts;
  std::size_t start = 0;
  while (true) {
    auto pos = text.find(sep, start);
    if (pos == std::string_view::npos) {
      parts.push_back(text.substr(start));
      return parts;
    }
    parts.push_back(text.substr(start, pos - start));
    start = pos + 1;
  }
}

std::uint64_t parse_u64(std::string_view text) {
  std::uint64_t value = 0;
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc() || ptr != text.data() + text.size())
    throw FormatError("expected an unsigned integer, got '" + std::string(text) + "'");
  return value;
}

double parse_double(std::string_view text) {
  double value = 0.0;
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc() || ptr != text.data() + text.size())
    throw FormatError("expected a number, got '" + std::string(text) + "'");
  return value;
}

std::string format_exact(double value) {
  std::array<char, 64> buf{};
  auto [ptr, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), value);
  return std::string(buf.data(), ptr);
}

std::string format_significant(double value, int digits) {
  std::array<char, 64> buf{};
  auto [ptr, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), value,
                                 std::chars_format::general, digits);
  return std::string(buf.data(), ptr);
}

void Fnv1a::update(std::string_view bytes) {
  for (unsigned char c : bytes) {
    state_ ^= c;
    state_ *= 0x100000001b3ULL;
  }
}

void Fnv1a::update_u64(std::uint64_t value) {
  for (int i = 0; i < 8; ++i) {
    state_ ^= (value >> (8 * i)) & 0xffU;
    state_ *= 0x100000001b3ULL;
  }
}

std::string Fnv1a::hex() const {
  std::array<char, 17> buf{};
  std::snprintf(buf.data(), buf.size(), "%016llx", static_cast<unsigned long long>(state_));
  return std::string(buf.data(), 16);
}

}  // namespace chancegram
