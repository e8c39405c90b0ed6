#pragma once

#include <cstddef>
#include <iosfwd>
#include <span>
#include <vector>

namespace ahc {

/// Row-major dense matrix of doubles used for feature and target sets.
class Table {
 public:
  Table() = default;
  Table(std::size_t rows, std::size_t cols) : rows_(rows), cols_(cols), data_(rows * cols, 0.0) {}
  explicit Table(std::size_t cols) : cols_(cols) {}

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  bool empty() const { return rows_ == 0; }

  std::span<double> row(std::size_t r) { return {data_.data() + r * cols_, cols_}; }
  std::span<const double> row(std::size_t r) const { return {data_.data() + r * cols_, cols_}; }
  double& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
  double operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }

  void push_back(std::span<const double> values);
  void reserve(std::size_t rows) { data_.reserve(rows * cols_); }
  const std::vector<double>& data() const { return data_; }

  /// New table holding the given rows in order.
  Table select(std::span<const std::size_t> rows) const;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

/// Per-column z-score statistics. Columns with zero spread keep std = 1 so
/// that normalization stays the identity shift for them.
struct Normalizer {
  std::vector<double> mean;
  std::vector<double> stddev;

  static Normalizer fit(const Table& table);
  static Normalizer identity(std::size_t cols);

  std::size_t size() const { return mean.size(); }
  std::vector<double> normalize(std::span<const double> x) const;
  void normalize_into(std::span<const double> x, std::span<double> out) const;
  std::vector<double> denormalize(std::span<const double> z) const;
  Table normalize(const Table& table) const;
};

}  // namespace ahc
