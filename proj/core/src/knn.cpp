#include "ahc/knn.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <stdexcept>

#include "ahc/binary_io.hpp"

namespace ahc {

namespace {
constexpr std::string_view kMagic = "AHCKNN";
constexpr std::uint32_t kVersion = 1;

bool closer(const Neighbor& a, const Neighbor& b) {
  return a.distance < b.distance || (a.distance == b.distance && a.index < b.index);
}
}  // namespace

KnnClassifier::KnnClassifier(const Table& features, std::vector<MobilityMode> labels, int k,
                             std::vector<double> weights)
    : k_(k), weights_(std::move(weights)), labels_(std::move(labels)) {
  if (features.empty()) throw std::invalid_argument("k-NN training set is empty");
  if (features.rows() != labels_.size())
    throw std::invalid_argument("k-NN feature rows and labels differ in length");
  if (k < 1 || static_cast<std::size_t>(k) > features.rows())
    throw std::invalid_argument("k must be in [1, training set size]");
  if (weights_.empty()) weights_.assign(features.cols(), 1.0);
  if (weights_.size() != features.cols()) throw std::invalid_argument("k-NN weight vector length mismatch");
  for (double w : weights_)
    if (!(w >= 0.0)) throw std::invalid_argument("k-NN weights must be >= 0");
  normalizer_ = Normalizer::fit(features);
  features_ = Table(features.cols());
  features_.reserve(features.rows());
  for (std::size_t r = 0; r < features.rows(); ++r) features_.push_back(transform(features.row(r)));
}

std::vector<double> KnnClassifier::transform(std::span<const double> raw_features) const {
  auto q = normalizer_.normalize(raw_features);
  for (std::size_t c = 0; c < q.size(); ++c) q[c] *= weights_[c];
  return q;
}

std::vector<Neighbor> KnnClassifier::nearest(std::span<const double> q) const {
  if (labels_.empty()) throw std::logic_error("k-NN classifier is empty");
  if (q.size() != features_.cols()) throw std::invalid_argument("query width mismatch");
  const std::size_t k = static_cast<std::size_t>(k_);
  // Bounded max-heap on (distance, index) holding the best k so far.
  std::vector<Neighbor> heap;
  heap.reserve(k + 1);
  const std::size_t d = q.size();
  const double* data = features_.data().data();
  for (std::size_t i = 0; i < features_.rows(); ++i) {
    const double* row = data + i * d;
    double acc = 0.0;
    for (std::size_t c = 0; c < d; ++c) {
      const double e = row[c] - q[c];
      acc += e * e;
    }
    const Neighbor cand{i, acc};
    if (heap.size() < k) {
      heap.push_back(cand);
      std::push_heap(heap.begin(), heap.end(), closer);
    } else if (closer(cand, heap.front())) {
      std::pop_heap(heap.begin(), heap.end(), closer);
      heap.back() = cand;
      std::push_heap(heap.begin(), heap.end(), closer);
    }
  }
  std::sort_heap(heap.begin(), heap.end(), closer);
  for (auto& n : heap) n.distance = std::sqrt(n.distance);
  return heap;
}

MobilityMode vote(std::span<const Neighbor> neighbors, const std::vector<MobilityMode>& labels) {
  std::array<int, kModeCount> count{};
  std::array<double, kModeCount> dist_sum{};
  for (const auto& n : neighbors) {
    const int m = mode_index(labels[n.index]);
    ++count[m];
    dist_sum[m] += n.distance;
  }
  int best = -1;
  for (int m = 0; m < kModeCount; ++m) {
    if (count[m] == 0) continue;
    if (best < 0 || count[m] > count[best]) {
      best = m;
    } else if (count[m] == count[best] &&
               dist_sum[m] / count[m] < dist_sum[best] / count[best]) {
      best = m;
    }
  }
  return mode_from_index(best);
}

MobilityMode KnnClassifier::classify(std::span<const double> raw_features) const {
  const auto nn = nearest(transform(raw_features));
  return vote(nn, labels_);
}

void KnnClassifier::save(std::ostream& out) const {
  binio::put_magic(out, kMagic, kVersion);
  binio::put<std::int32_t>(out, k_);
  binio::put<std::uint64_t>(out, features_.cols());
  binio::put_vector(out, normalizer_.mean);
  binio::put_vector(out, normalizer_.stddev);
  binio::put_vector(out, weights_);
  binio::put_vector(out, features_.data());
  std::vector<std::int32_t> lab(labels_.size());
  std::transform(labels_.begin(), labels_.end(), lab.begin(), [](MobilityMode m) { return mode_index(m); });
  binio::put_vector(out, lab);
}

KnnClassifier KnnClassifier::load(std::istream& in) {
  if (binio::expect_magic(in, kMagic) != kVersion)
    throw std::runtime_error("unsupported k-NN checkpoint version");
  KnnClassifier c;
  c.k_ = binio::get<std::int32_t>(in);
  const auto cols = binio::get<std::uint64_t>(in);
  c.normalizer_.mean = binio::get_vector<double>(in);
  c.normalizer_.stddev = binio::get_vector<double>(in);
  c.weights_ = binio::get_vector<double>(in);
  const auto data = binio::get_vector<double>(in);
  const auto lab = binio::get_vector<std::int32_t>(in);
  if (cols == 0 || data.size() != lab.size() * cols || c.normalizer_.size() != cols ||
      c.weights_.size() != cols)
    throw std::runtime_error("corrupt k-NN checkpoint");
  c.features_ = Table(cols);
  c.features_.reserve(lab.size());
  for (std::size_t r = 0; r < lab.size(); ++r)
    c.features_.push_back(std::span<const double>(data.data() + r * cols, cols));
  c.labels_.reserve(lab.size());
  for (auto m : lab) c.labels_.push_back(mode_from_index(m));
  return c;
}

}  // namespace ahc
