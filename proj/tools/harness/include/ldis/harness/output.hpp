#pragma once

#include <string>
#include <vector>

namespace ldis::harness {

// Fixed nine-decimal rendering; non-finite values become "inf", "-inf" or "nan".
std::string format_fixed(double v);

class Table {
 public:
  explicit Table(std::vector<std::string> header);

  void add_row(std::vector<std::string> cells);
  const std::vector<std::string>& header() const { return header_; }
  const std::vector<std::vector<std::string>>& rows() const { return rows_; }
  std::string to_csv() const;

 private:
  std::vector<std::string> header_;
  std::vector<std::vector<std::string>> rows_;
};

struct Series {
  std::string name;
  std::vector<double> x;
  std::vector<double> y;  // non-finite values break the polyline
};

// Line plot on a fixed 960×540 viewport with linear axes and tick labels.
struct SvgPlot {
  std::string title;
  std::string x_label;
  std::string y_label;
  std::vector<Series> series;

  std::string render() const;
};

void write_file(const std::string& path, const std::string& contents);

}  // namespace ldis::harness
