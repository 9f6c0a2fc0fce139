#pragma once

#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>

namespace swarmloc {

// Minimal CSV sink. Numeric formatting goes through one printf spec so runs
// with the same seed produce byte-identical files.
class CsvWriter {
 public:
  CsvWriter() = default;
  explicit CsvWriter(const std::string& path, const std::string& header) {
    open(path, header);
  }

  void open(const std::string& path, const std::string& header) {
    out_.open(path);
    if (!out_) throw std::runtime_error("cannot open for writing: " + path);
    out_ << header << '\n';
  }

  bool is_open() const { return out_.is_open(); }

  CsvWriter& field(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.9g", v);
    sep();
    row_ << buf;
    return *this;
  }
  CsvWriter& field(long long v) {
    sep();
    row_ << v;
    return *this;
  }
  CsvWriter& field(int v) { return field(static_cast<long long>(v)); }
  CsvWriter& field(const std::string& v) {
    sep();
    row_ << v;
    return *this;
  }

  void end_row() {
    out_ << row_.str() << '\n';
    row_.str("");
    row_.clear();
    first_ = true;
  }

 private:
  void sep() {
    if (!first_) row_ << ',';
    first_ = false;
  }
  std::ofstream out_;
  std::ostringstream row_;
  bool first_ = true;
};

}  // namespace swarmloc
