#pragma once

#include <filesystem>
#include <fstream>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace slideagg::csv {

// Minimal reader for the unquoted comma-separated files used throughout:
// strips a leading UTF-8 BOM and accepts LF or CRLF endings.
class LineReader {
 public:
  explicit LineReader(const std::filesystem::path& path);

  // Next line without its terminator; nullopt at end of file.
  std::optional<std::string> next();
  // 1-based number of the line last returned.
  std::size_t line_no() const noexcept { return line_no_; }

 private:
  std::ifstream in_;
  std::size_t line_no_ = 0;
};

std::vector<std::string_view> split(std::string_view line, char sep = ',');
std::string_view trim(std::string_view s);

std::optional<double> parse_real(std::string_view s);
std::optional<long long> parse_int(std::string_view s);

// Shortest decimal form that parses back to the identical double.
std::string format_real(double v);
// Fixed notation with the given number of decimals.
std::string format_fixed(double v, int decimals);

// Opens `path` for writing, creating parent directories; throws WriteFailed.
std::ofstream open_for_write(const std::filesystem::path& path);

}  // namespace slideagg::csv
