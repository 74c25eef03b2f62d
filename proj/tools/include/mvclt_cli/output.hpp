#pragma once

#include <optional>
#include <ostream>
#include <string>
#include <vector>

namespace mvclt::cli {

/// 17 significant digits: round-trips every double.
std::string format_double(double v);
std::string format_optional(const std::optional<double>& v);
std::string csv_field(const std::string& s);

class CsvWriter {
 public:
  CsvWriter(std::ostream& out, const std::vector<std::string>& header);
  void row(const std::vector<std::string>& fields);
  std::size_t rows() const { return rows_; }

 private:
  std::ostream& out_;
  std::size_t width_;
  std::size_t rows_ = 0;
};

/// "# mvclt <command> generated <UTC timestamp>"
std::string timestamp_line(const std::string& command);

struct SvgSeries {
  std::vector<double> x;
  std::vector<double> y;
};

/// Log-log line plot of y against x with an optional fitted slope
/// annotation. Points with x or y not positive are dropped.
std::string render_loglog_svg(const SvgSeries& series, const std::string& title, const std::string& x_label,
                              const std::string& y_label, std::optional<double> slope);

}  // namespace mvclt::cli
