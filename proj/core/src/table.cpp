#include "ahc/table.hpp"

#include <cmath>
#include <stdexcept>

namespace ahc {

void Table::push_back(std::span<const double> values) {
  if (values.size() != cols_) throw std::invalid_argument("row width mismatch");
  data_.insert(data_.end(), values.begin(), values.end());
  ++rows_;
}

Table Table::select(std::span<const std::size_t> rows) const {
  Table out(cols_);
  out.reserve(rows.size());
  for (auto r : rows) out.push_back(row(r));
  return out;
}

Normalizer Normalizer::fit(const Table& table) {
  const std::size_t d = table.cols();
  Normalizer n;
  n.mean.assign(d, 0.0);
  n.stddev.assign(d, 1.0);
  if (table.empty()) return n;
  const double count = static_cast<double>(table.rows());
  for (std::size_t r = 0; r < table.rows(); ++r)
    for (std::size_t c = 0; c < d; ++c) n.mean[c] += table(r, c);
  for (auto& m : n.mean) m /= count;
  std::vector<double> var(d, 0.0);
  for (std::size_t r = 0; r < table.rows(); ++r)
    for (std::size_t c = 0; c < d; ++c) {
      const double e = table(r, c) - n.mean[c];
      var[c] += e * e;
    }
  for (std::size_t c = 0; c < d; ++c) {
    const double s = std::sqrt(var[c] / count);
    n.stddev[c] = s > 1e-12 ? s : 1.0;
  }
  return n;
}

Normalizer Normalizer::identity(std::size_t cols) {
  return Normalizer{std::vector<double>(cols, 0.0), std::vector<double>(cols, 1.0)};
}

void Normalizer::normalize_into(std::span<const double> x, std::span<double> out) const {
  if (x.size() != mean.size() || out.size() != mean.size())
    throw std::invalid_argument("normalizer width mismatch");
  for (std::size_t i = 0; i < x.size(); ++i) out[i] = (x[i] - mean[i]) / stddev[i];
}

std::vector<double> Normalizer::normalize(std::span<const double> x) const {
  std::vector<double> out(x.size());
  normalize_into(x, out);
  return out;
}

std::vector<double> Normalizer::denormalize(std::span<const double> z) const {
  if (z.size() != mean.size()) throw std::invalid_argument("normalizer width mismatch");
  std::vector<double> out(z.size());
  for (std::size_t i = 0; i < z.size(); ++i) out[i] = z[i] * stddev[i] + mean[i];
  return out;
}

Table Normalizer::normalize(const Table& table) const {
  Table out(table.rows(), table.cols());
  for (std::size_t r = 0; r < table.rows(); ++r) normalize_into(table.row(r), out.row(r));
  return out;
}

}  // namespace ahc
