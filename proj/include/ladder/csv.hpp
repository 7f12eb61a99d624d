#pragma once

#include <fstream>
#include <string>
#include <vector>

namespace ladder {

std::string format_double(double x);

/// CSV with a leading provenance comment, a header row, and a stable column
/// order. Identical content in, identical bytes out.
class CsvWriter {
 public:
  CsvWriter(const std::string& path, const std::string& config_hash,
            const std::vector<std::string>& columns);

  void row(const std::vector<std::string>& cells);
  void row_numeric(const std::vector<double>& cells);
  void close();

 private:
  std::ofstream out_;
  size_t n_cols_;
};

}  // namespace ladder
