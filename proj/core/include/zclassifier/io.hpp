#pragma once

#include <string>
#include <vector>

namespace zc {

/// Shortest round-trip decimal form; deterministic across runs, so emitted
/// CSV/JSON artifacts are byte-stable.
std::string format_double(double v);

void write_text_file(const std::string& path, const std::string& content);
std::string read_text_file(const std::string& path);

/// Minimal RFC-4180 writer: header + numeric/token rows, comma separated.
class CsvWriter {
 public:
  explicit CsvWriter(std::vector<std::string> header);
  void add_row(std::vector<std::string> fields);
  const std::string& content() const { return content_; }
  void save(const std::string& path) const;

 private:
  std::size_t columns_;
  std::string content_;
};

}  // namespace zc
