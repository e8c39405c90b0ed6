#pragma once

#include <cstdint>
#include <iosfwd>
#include <span>
#include <vector>

#include "ahc/rng.hpp"
#include "ahc/table.hpp"

namespace ahc {

struct ForestParams {
  bool operator==(const ForestParams&) const = default;

  int n_trees = 50;
  int max_depth = 12;
  int min_leaf = 2;
  bool bootstrap = true;
  /// Features examined per split; 0 means ceil(sqrt(d)).
  int max_features = 0;
};

/// One node of a regression tree. `feature < 0` marks a leaf whose output
/// vector starts at `value_offset` in DecisionTree::leaf_values.
struct TreeNode {
  double threshold = 0.0;  // normalized feature units; go left when x <= threshold
  std::int32_t feature = -1;
  std::int32_t left = -1;
  std::int32_t right = -1;
  std::int32_t value_offset = -1;
};

static_assert(sizeof(TreeNode) == 24, "TreeNode is serialized as raw bytes");

struct DecisionTree {
  std::vector<TreeNode> nodes;  // nodes[0] is the root
  std::vector<double> leaf_values;
  int depth = 0;

  /// Leaf output (normalized target units) for a normalized feature row.
  std::span<const double> leaf(std::span<const double> z, std::size_t n_outputs) const;
};

/// Multi-output random-forest regressor (CART, variance reduction). Features
/// and targets are z-scored on the training set; predictions come back in
/// physical units.
class ForestModel {
 public:
  ForestModel() = default;
  ForestModel(std::vector<DecisionTree> trees, Normalizer features, Normalizer targets,
              ForestParams params);

  /// Requires X.rows() == Y.rows() >= 2 * min_leaf. Each tree draws its
  /// bootstrap sample and per-node feature subsets from streams split off
  /// `stream`, so a given node's split does not depend on max_depth.
  static ForestModel train(const Table& X, const Table& Y, const ForestParams& params,
                           RandomStream& stream);

  /// Throws std::invalid_argument on a feature-length mismatch.
  std::vector<double> predict(std::span<const double> features) const;

  std::size_t n_features() const { return feature_norm_.size(); }
  std::size_t n_outputs() const { return target_norm_.size(); }
  const std::vector<DecisionTree>& trees() const { return trees_; }
  const Normalizer& feature_normalizer() const { return feature_norm_; }
  const Normalizer& target_normalizer() const { return target_norm_; }
  const ForestParams& params() const { return params_; }

  /// Mean over trees of each tree's RMSE on its own bootstrap sample, in
  /// normalized target units. Zero for models not built by train().
  double in_bag_rmse() const { return in_bag_rmse_; }

  void save(std::ostream& out) const;
  static ForestModel load(std::istream& in);

 private:
  std::vector<DecisionTree> trees_;
  Normalizer feature_norm_;
  Normalizer target_norm_;
  ForestParams params_;
  double in_bag_rmse_ = 0.0;
};

}  // namespace ahc
