#include "eedc/csv.hpp"

#include <cstdio>
#include <fstream>
#include <ostream>
#include <sstream>

#include "eedc/error.hpp"

namespace eedc {

std::string format_number(double value) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.12g", value);
  return buf;
}

namespace {

void write_field(std::ostream& out, const std::string& field) {
  if (field.find_first_of(",\"\r\n") == std::string::npos) {
    out << field;
    return;
  }
  out << '"';
  for (const char c : field) {
    if (c == '"') out << '"';
    out << c;
  }
  out << '"';
}

void write_row(std::ostream& out, const std::vector<std::string>& row) {
  for (std::size_t k = 0; k < row.size(); ++k) {
    if (k > 0) out << ',';
    write_field(out, row[k]);
  }
  out << "\r\n";
}

}  // namespace

void CsvTable::set_metadata(std::uint64_t model_hash, const std::string& command) {
  char hash[20];
  std::snprintf(hash, sizeof hash, "%016llx", static_cast<unsigned long long>(model_hash));
  metadata_ = std::string("# model_hash=") + hash + " command=" + command + " version=" + kVersion;
}

void CsvTable::add_row(std::vector<std::string> row) {
  if (row.size() != header_.size()) throw Error("CSV row width does not match header");
  rows_.push_back(std::move(row));
}

void CsvTable::write(std::ostream& out) const {
  if (!metadata_.empty()) out << metadata_ << "\r\n";
  write_row(out, header_);
  for (const auto& r : rows_) write_row(out, r);
}

std::string CsvTable::str() const {
  std::ostringstream os;
  write(os);
  return os.str();
}

void CsvTable::save(const std::string& path) const {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ConfigError("cannot open output file '" + path + "'");
  write(out);
  if (!out) throw Error("failed writing '" + path + "'");
}

}  // namespace eedc
