#pragma once

#include <iosfwd>
#include <span>
#include <vector>

#include "ahc/mobility.hpp"
#include "ahc/table.hpp"

namespace ahc {

struct Neighbor {
  std::size_t index = 0;
  double distance = 0.0;
};

/// Exact brute-force k-nearest-neighbour mode classifier. Training features
/// are z-scored with their own statistics and then scaled per column by
/// `weights`; queries get the same transform before the Euclidean scan.
class KnnClassifier {
 public:
  KnnClassifier() = default;
  /// Throws std::invalid_argument on an empty training set, label/row count
  /// mismatch, k outside [1, |train|], or a weight vector of the wrong
  /// length or with a negative entry. Empty weights mean all ones.
  KnnClassifier(const Table& features, std::vector<MobilityMode> labels, int k,
                std::vector<double> weights = {});

  /// Z-score followed by the column weights.
  std::vector<double> transform(std::span<const double> raw_features) const;

  /// Majority vote over the k nearest; ties go to the label with the smaller
  /// mean neighbour distance, then the lower mode index.
  MobilityMode classify(std::span<const double> raw_features) const;

  /// k nearest training rows to an already-transformed query, ordered by
  /// (distance, index).
  std::vector<Neighbor> nearest(std::span<const double> normalized_query) const;

  int k() const { return k_; }
  std::size_t size() const { return labels_.size(); }
  std::size_t dims() const { return features_.cols(); }
  const Normalizer& normalizer() const { return normalizer_; }
  const std::vector<double>& weights() const { return weights_; }
  const Table& normalized_features() const { return features_; }  // transformed
  const std::vector<MobilityMode>& labels() const { return labels_; }

  void save(std::ostream& out) const;
  static KnnClassifier load(std::istream& in);

 private:
  int k_ = 1;
  Normalizer normalizer_;
  std::vector<double> weights_;
  Table features_;  // transformed
  std::vector<MobilityMode> labels_;
};

/// Vote rule shared by the classifier: majority, then smaller mean distance,
/// then lower mode index.
MobilityMode vote(std::span<const Neighbor> neighbors, const std::vector<MobilityMode>& labels);

}  // namespace ahc
