#include "ahc/metrics.hpp"

#include <cmath>
#include <stdexcept>

namespace ahc {

ClassificationReport eval_classification(std::span<const MobilityMode> predicted,
                                         std::span<const MobilityMode> truth) {
  if (predicted.size() != truth.size()) throw std::invalid_argument("prediction/label length mismatch");
  if (predicted.empty()) throw std::invalid_argument("cannot evaluate an empty prediction set");
  ClassificationReport rep;
  rep.total = static_cast<int>(predicted.size());
  int correct = 0;
  for (std::size_t i = 0; i < predicted.size(); ++i) {
    const int t = mode_index(truth[i]), p = mode_index(predicted[i]);
    ++rep.confusion[t][p];
    if (t == p) ++correct;
  }
  rep.accuracy = static_cast<double>(correct) / rep.total;
  for (int c = 0; c < kModeCount; ++c) {
    int tp = rep.confusion[c][c], pred_c = 0, true_c = 0;
    for (int k = 0; k < kModeCount; ++k) {
      pred_c += rep.confusion[k][c];
      true_c += rep.confusion[c][k];
    }
    auto& m = rep.per_class[c];
    m.support = true_c;
    m.precision = pred_c > 0 ? static_cast<double>(tp) / pred_c : 0.0;
    m.recall = true_c > 0 ? static_cast<double>(tp) / true_c : 0.0;
    m.f1 = (m.precision + m.recall) > 0.0 ? 2.0 * m.precision * m.recall / (m.precision + m.recall) : 0.0;
  }
  return rep;
}

RegressionReport eval_regression(const Table& predicted, const Table& target) {
  if (predicted.rows() != target.rows() || predicted.cols() != target.cols())
    throw std::invalid_argument("prediction/target shape mismatch");
  if (predicted.empty() || predicted.cols() == 0) throw std::invalid_argument("empty regression set");
  const std::size_t n = predicted.rows(), d = predicted.cols();
  RegressionReport rep;
  rep.count = n;
  rep.mae_per_dim.assign(d, 0.0);
  double sq = 0.0, bias = 0.0, sum_p = 0.0, sum_t = 0.0;
  std::vector<double> mean_p(d, 0.0), mean_t(d, 0.0);
  for (std::size_t r = 0; r < n; ++r)
    for (std::size_t c = 0; c < d; ++c) {
      const double p = predicted(r, c), t = target(r, c), e = p - t;
      sq += e * e;
      bias += e;
      sum_p += p;
      sum_t += t;
      rep.mae_per_dim[c] += std::abs(e);
      mean_p[c] += p;
      mean_t[c] += t;
    }
  const double total = static_cast<double>(n * d);
  rep.rmse = std::sqrt(sq / total);
  rep.mean_bias = bias / total;
  rep.mean_prediction = sum_p / total;
  rep.mean_target = sum_t / total;
  for (std::size_t c = 0; c < d; ++c) {
    rep.mae_per_dim[c] /= static_cast<double>(n);
    mean_p[c] /= static_cast<double>(n);
    mean_t[c] /= static_cast<double>(n);
  }
  rep.pearson_per_dim.resize(d);
  for (std::size_t c = 0; c < d; ++c) {
    double sxy = 0.0, sxx = 0.0, syy = 0.0;
    for (std::size_t r = 0; r < n; ++r) {
      const double a = predicted(r, c) - mean_p[c], b = target(r, c) - mean_t[c];
      sxy += a * b;
      sxx += a * a;
      syy += b * b;
    }
    if (sxx > 0.0 && syy > 0.0) rep.pearson_per_dim[c] = sxy / std::sqrt(sxx * syy);
  }
  return rep;
}

}  // namespace ahc
