#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace chancegram {

/// Every file the toolkit writes may start with one header line:
///   #@chancegram<TAB>kind=counts<TAB>config=0123abcd...<TAB>...
/// The second field is never W or N, so a header cannot be mistaken for a
/// token line.
inline constexpr std::string_view kHeaderMagic = "#@chancegram";

struct FileHeader {
  std::map<std::string, std::string> fields;

  std::optional<std::string> get(const std::string& key) const;
  void set(const std::string& key, std::string value) { fields[key] = std::move(value); }
};

std::optional<FileHeader> parse_header_line(std::string_view line);
void write_header(std::ostream& out, const FileHeader& header);

/// Reads the header (if any) of the file at `path`.
std::optional<FileHeader> read_file_header(const std::string& path);

std::vector<std::string_view> split(std::string_view text, char sep);

std::uint64_t parse_u64(std::string_view text);
double parse_double(std::string_view text);

/// Shortest representation that round-trips.
std::string format_exact(double value);

/// `digits` significant digits, %g style.
std::string format_significant(double value, int digits = 6);

/// 64-bit FNV-1a; stable across platforms, used for config and data hashes.
class Fnv1a {
 public:
  void update(std::string_view bytes);
  void update_u64(std::uint64_t value);
  std::uint64_t digest() const { return state_; }
  std::string hex() const;

 private:
  std::uint64_t state_ = 0xcbf29ce484222325ULL;
};

}  // namespace chancegram
