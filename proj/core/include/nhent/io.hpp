#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <string_view>
#include <vector>

namespace nhent {

// 17 significant digits: round-trip exact for 64-bit doubles.
std::string format_g17(double v);

// compact %g form used in file names and resolved configs
std::string format_g(double v);

std::uint64_t fnv1a64(std::string_view bytes);
std::string fnv1a64_hex(std::string_view bytes);

// write-then-rename so interrupted runs never leave half a file behind
void write_text_atomic(const std::filesystem::path& path, const std::string& content);

std::string read_text(const std::filesystem::path& path);

// header-keyed CSV reader (no quoting; the emitters here never quote)
struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  int column(const std::string& name) const;  // -1 if absent
};
CsvTable read_csv(const std::filesystem::path& path);

}  // namespace nhent
