#pragma once

#include <cassert>
#include <cstddef>
#include <stdexcept>
#include <vector>

namespace vnfpr {

// Dense row-major matrix of doubles. Binary and hop matrices store their
// integer entries exactly (all values involved are far below 2^53).
struct Mat {
  int rows = 0;
  int cols = 0;
  std::vector<double> data;

  Mat() = default;
  Mat(int r, int c, double fill = 0.0)
      : rows(r), cols(c), data(static_cast<std::size_t>(r) * c, fill) {
    if (r < 0 || c < 0) throw std::invalid_argument("Mat: negative dimension");
  }

  double& operator()(int r, int c) {
    assert(r >= 0 && r < rows && c >= 0 && c < cols);
    return data[static_cast<std::size_t>(r) * cols + c];
  }
  double operator()(int r, int c) const {
    assert(r >= 0 && r < rows && c >= 0 && c < cols);
    return data[static_cast<std::size_t>(r) * cols + c];
  }

  bool same_shape(const Mat& o) const { return rows == o.rows && cols == o.cols; }

  bool operator==(const Mat& o) const {
    return rows == o.rows && cols == o.cols && data == o.data;
  }

  double sum() const {
    double s = 0.0;
    for (double v : data) s += v;
    return s;
  }

  double max_value() const {
    double m = 0.0;
    for (double v : data)
      if (v > m) m = v;
    return m;
  }

  double row_sum(int r) const {
    double s = 0.0;
    for (int c = 0; c < cols; ++c) s += (*this)(r, c);
    return s;
  }

  double col_sum(int c) const {
    double s = 0.0;
    for (int r = 0; r < rows; ++r) s += (*this)(r, c);
    return s;
  }

  bool is_binary() const {
    for (double v : data)
      if (v != 0.0 && v != 1.0) return false;
    return true;
  }

  Mat scaled(double k) const {
    Mat out = *this;
    for (double& v : out.data) v *= k;
    return out;
  }
};

}  // namespace vnfpr
