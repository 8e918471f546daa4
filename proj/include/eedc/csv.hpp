#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

namespace eedc {

/// Formats a double with 12 significant digits, the precision used for
/// every CSV artifact.
std::string format_number(double value);

/// A CSV document: one `#` metadata line, one header row, data rows.
class CsvTable {
 public:
  explicit CsvTable(std::vector<std::string> header) : header_(std::move(header)) {}

  void set_metadata(std::uint64_t model_hash, const std::string& command);
  void add_row(std::vector<std::string> row);

  [[nodiscard]] const std::vector<std::string>& header() const { return header_; }
  [[nodiscard]] const std::vector<std::vector<std::string>>& rows() const { return rows_; }

  void write(std::ostream& out) const;
  [[nodiscard]] std::string str() const;
  void save(const std::string& path) const;

 private:
  std::string metadata_;
  std::vector<std::string> header_;
  std::vector<std::vector<std::string>> rows_;
};

/// Library version stamped into CSV metadata.
inline constexpr const char* kVersion = "0.1.0";

}  // namespace eedc
