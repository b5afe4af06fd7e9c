#pragma once

#include <fstream>
#include <initializer_list>
#include <string>
#include <string_view>
#include <vector>

namespace lunarkd::csv {

/// Shortest form that round-trips: 17 significant digits.
std::string format(double v);

std::vector<std::string> split(std::string_view line, char sep = ',');

/// Parses a whole field as a double; throws ConfigError mentioning `what`.
double parse_double(std::string_view field, const std::string& what);

/// Line-oriented CSV writer; throws on I/O failure.
class Writer {
 public:
  Writer(const std::string& path, const std::vector<std::string>& header);
  void row(const std::vector<double>& values);
  void row(std::string_view first, const std::vector<double>& values);
  void close();

 private:
  std::string path_;
  std::ofstream out_;
};

/// Reads every line of a file; throws IoError if it cannot be opened.
std::vector<std::string> read_lines(const std::string& path);

}  // namespace lunarkd::csv
