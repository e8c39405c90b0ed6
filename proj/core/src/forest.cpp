#include "ahc/forest.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "ahc/binary_io.hpp"

namespace ahc {

namespace {

constexpr std::string_view kMagic = "AHCRF";
constexpr std::uint32_t kVersion = 1;

class TreeBuilder {
 public:
  TreeBuilder(const Table& X, const Table& Y, const ForestParams& params, std::uint64_t tree_seed)
      : X_(X), Y_(Y), params_(params), tree_seed_(tree_seed), n_out_(Y.cols()) {
    const int d = static_cast<int>(X.cols());
    n_try_ = params.max_features > 0 ? std::min(params.max_features, d)
                                     : static_cast<int>(std::ceil(std::sqrt(static_cast<double>(d))));
  }

  DecisionTree build(std::vector<std::size_t> rows) {
    tree_.nodes.clear();
    tree_.leaf_values.clear();
    tree_.depth = 0;
    sse_ = 0.0;
    grow(rows, 0, 0);
    return std::move(tree_);
  }

  double sse() const { return sse_; }

 private:
  struct Sums {
    std::vector<double> s;
    std::vector<double> ss;
  };

  double node_sse(const std::vector<double>& s, const std::vector<double>& ss, double n) const {
    double acc = 0.0;
    for (std::size_t k = 0; k < n_out_; ++k) acc += ss[k] - s[k] * s[k] / n;
    return std::max(acc, 0.0);
  }

  int make_leaf(const std::vector<std::size_t>& rows, const std::vector<double>& sum, double node_sse_value) {
    const int id = static_cast<int>(tree_.nodes.size());
    TreeNode leaf;
    leaf.value_offset = static_cast<std::int32_t>(tree_.leaf_values.size());
    const double n = static_cast<double>(rows.size());
    for (std::size_t k = 0; k < n_out_; ++k) tree_.leaf_values.push_back(sum[k] / n);
    tree_.nodes.push_back(leaf);
    sse_ += node_sse_value;
    return id;
  }

  // `path` is the heap index of the node (root 0, children 2p+1, 2p+2).
  int grow(std::vector<std::size_t>& rows, int depth, std::uint64_t path) {
    tree_.depth = std::max(tree_.depth, depth);
    const double n = static_cast<double>(rows.size());
    std::vector<double> sum(n_out_, 0.0), sumsq(n_out_, 0.0);
    for (auto r : rows) {
      const auto y = Y_.row(r);
      for (std::size_t k = 0; k < n_out_; ++k) {
        sum[k] += y[k];
        sumsq[k] += y[k] * y[k];
      }
    }
    const double parent_sse = node_sse(sum, sumsq, n);
    if (depth >= params_.max_depth || rows.size() < 2 * static_cast<std::size_t>(params_.min_leaf) ||
        parent_sse <= 1e-12 * n)
      return make_leaf(rows, sum, parent_sse);

    // Random feature subset, drawn from a stream keyed by the node path.
    RandomStream node_stream(mix_seed(tree_seed_, path));
    std::vector<int> features(X_.cols());
    std::iota(features.begin(), features.end(), 0);
    for (int i = 0; i < n_try_; ++i) {
      const auto j = static_cast<std::size_t>(i) + node_stream.index(features.size() - static_cast<std::size_t>(i));
      std::swap(features[static_cast<std::size_t>(i)], features[j]);
    }

    const auto min_leaf = static_cast<std::size_t>(params_.min_leaf);
    double best_sse = parent_sse;
    int best_feature = -1;
    double best_threshold = 0.0;
    std::vector<std::size_t> order(rows);
    std::vector<double> ls(n_out_), lss(n_out_), rs(n_out_), rss(n_out_);
    for (int fi = 0; fi < n_try_; ++fi) {
      const int f = features[static_cast<std::size_t>(fi)];
      std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        const double xa = X_(a, static_cast<std::size_t>(f)), xb = X_(b, static_cast<std::size_t>(f));
        return xa < xb || (xa == xb && a < b);
      });
      std::fill(ls.begin(), ls.end(), 0.0);
      std::fill(lss.begin(), lss.end(), 0.0);
      for (std::size_t i = 0; i + 1 < order.size(); ++i) {
        const auto y = Y_.row(order[i]);
        for (std::size_t k = 0; k < n_out_; ++k) {
          ls[k] += y[k];
          lss[k] += y[k] * y[k];
        }
        const std::size_t n_left = i + 1;
        const std::size_t n_right = order.size() - n_left;
        if (n_left < min_leaf || n_right < min_leaf) continue;
        const double x_here = X_(order[i], static_cast<std::size_t>(f));
        const double x_next = X_(order[i + 1], static_cast<std::size_t>(f));
        if (!(x_here < x_next)) continue;
        for (std::size_t k = 0; k < n_out_; ++k) {
          rs[k] = sum[k] - ls[k];
          rss[k] = sumsq[k] - lss[k];
        }
        const double total = node_sse(ls, lss, static_cast<double>(n_left)) +
                             node_sse(rs, rss, static_cast<double>(n_right));
        if (total < best_sse - 1e-12) {
          best_sse = total;
          best_feature = f;
          best_threshold = 0.5 * (x_here + x_next);
        }
      }
    }
    if (best_feature < 0) return make_leaf(rows, sum, parent_sse);

    std::vector<std::size_t> left_rows, right_rows;
    left_rows.reserve(rows.size());
    right_rows.reserve(rows.size());
    for (auto r : rows)
      (X_(r, static_cast<std::size_t>(best_feature)) <= best_threshold ? left_rows : right_rows).push_back(r);
    rows.clear();
    rows.shrink_to_fit();

    const int id = static_cast<int>(tree_.nodes.size());
    tree_.nodes.push_back(TreeNode{best_threshold, best_feature, -1, -1, -1});
    const int left = grow(left_rows, depth + 1, 2 * path + 1);
    const int right = grow(right_rows, depth + 1, 2 * path + 2);
    tree_.nodes[static_cast<std::size_t>(id)].left = left;
    tree_.nodes[static_cast<std::size_t>(id)].right = right;
    return id;
  }

  const Table& X_;
  const Table& Y_;
  const ForestParams& params_;
  std::uint64_t tree_seed_;
  std::size_t n_out_;
  int n_try_ = 1;
  DecisionTree tree_;
  double sse_ = 0.0;
};

}  // namespace

std::span<const double> DecisionTree::leaf(std::span<const double> z, std::size_t n_outputs) const {
  std::size_t i = 0;
  while (nodes[i].feature >= 0) {
    const auto& node = nodes[i];
    i = static_cast<std::size_t>(z[static_cast<std::size_t>(node.feature)] <= node.threshold ? node.left
                                                                                               : node.right);
  }
  return {leaf_values.data() + nodes[i].value_offset, n_outputs};
}

ForestModel::ForestModel(std::vector<DecisionTree> trees, Normalizer features, Normalizer targets,
                         ForestParams params)
    : trees_(std::move(trees)),
      feature_norm_(std::move(features)),
      target_norm_(std::move(targets)),
      params_(params) {}

ForestModel ForestModel::train(const Table& X, const Table& Y, const ForestParams& params,
                               RandomStream& stream) {
  if (X.rows() != Y.rows()) throw std::invalid_argument("feature and target row counts differ");
  if (params.n_trees < 1 || params.max_depth < 0 || params.min_leaf < 1)
    throw std::invalid_argument("invalid forest parameters");
  if (X.rows() < 2 * static_cast<std::size_t>(params.min_leaf))
    throw std::invalid_argument("forest needs at least 2 * min_leaf samples");

  ForestModel model;
  model.params_ = params;
  model.feature_norm_ = Normalizer::fit(X);
  model.target_norm_ = Normalizer::fit(Y);
  const Table Xn = model.feature_norm_.normalize(X);
  const Table Yn = model.target_norm_.normalize(Y);

  const std::size_t n = X.rows();
  double rmse_sum = 0.0;
  for (int t = 0; t < params.n_trees; ++t) {
    RandomStream tree_stream = stream.split(static_cast<std::uint64_t>(t));
    std::vector<std::size_t> rows(n);
    if (params.bootstrap) {
      for (auto& r : rows) r = tree_stream.index(n);
      std::sort(rows.begin(), rows.end());
    } else {
      std::iota(rows.begin(), rows.end(), 0);
    }
    TreeBuilder builder(Xn, Yn, params, tree_stream.engine()());
    model.trees_.push_back(builder.build(std::move(rows)));
    rmse_sum += std::sqrt(builder.sse() / (static_cast<double>(n) * static_cast<double>(Y.cols())));
  }
  model.in_bag_rmse_ = rmse_sum / params.n_trees;
  return model;
}

std::vector<double> ForestModel::predict(std::span<const double> features) const {
  if (features.size() != n_features())
    throw std::invalid_argument("feature length mismatch: expected " + std::to_string(n_features()) +
                                ", got " + std::to_string(features.size()));
  if (trees_.empty()) throw std::logic_error("forest has no trees");
  const auto z = feature_norm_.normalize(features);
  std::vector<double> acc(n_outputs(), 0.0);
  for (const auto& tree : trees_) {
    const auto leaf = tree.leaf(z, n_outputs());
    for (std::size_t k = 0; k < acc.size(); ++k) acc[k] += leaf[k];
  }
  for (auto& v : acc) v /= static_cast<double>(trees_.size());
  return target_norm_.denormalize(acc);
}

void ForestModel::save(std::ostream& out) const {
  binio::put_magic(out, kMagic, kVersion);
  binio::put<std::int32_t>(out, params_.n_trees);
  binio::put<std::int32_t>(out, params_.max_depth);
  binio::put<std::int32_t>(out, params_.min_leaf);
  binio::put<std::int32_t>(out, params_.bootstrap ? 1 : 0);
  binio::put<std::int32_t>(out, params_.max_features);
  binio::put<double>(out, in_bag_rmse_);
  binio::put_vector(out, feature_norm_.mean);
  binio::put_vector(out, feature_norm_.stddev);
  binio::put_vector(out, target_norm_.mean);
  binio::put_vector(out, target_norm_.stddev);
  binio::put<std::uint64_t>(out, trees_.size());
  for (const auto& tree : trees_) {
    binio::put<std::int32_t>(out, tree.depth);
    binio::put_vector(out, tree.nodes);
    binio::put_vector(out, tree.leaf_values);
  }
}

ForestModel ForestModel::load(std::istream& in) {
  if (binio::expect_magic(in, kMagic) != kVersion)
    throw std::runtime_error("unsupported forest checkpoint version");
  ForestModel m;
  m.params_.n_trees = binio::get<std::int32_t>(in);
  m.params_.max_depth = binio::get<std::int32_t>(in);
  m.params_.min_leaf = binio::get<std::int32_t>(in);
  m.params_.bootstrap = binio::get<std::int32_t>(in) != 0;
  m.params_.max_features = binio::get<std::int32_t>(in);
  m.in_bag_rmse_ = binio::get<double>(in);
  m.feature_norm_.mean = binio::get_vector<double>(in);
  m.feature_norm_.stddev = binio::get_vector<double>(in);
  m.target_norm_.mean = binio::get_vector<double>(in);
  m.target_norm_.stddev = binio::get_vector<double>(in);
  const auto n_trees = binio::get<std::uint64_t>(in);
  if (n_trees > 100000) throw std::runtime_error("corrupt forest checkpoint");
  for (std::uint64_t t = 0; t < n_trees; ++t) {
    DecisionTree tree;
    tree.depth = binio::get<std::int32_t>(in);
    tree.nodes = binio::get_vector<TreeNode>(in);
    tree.leaf_values = binio::get_vector<double>(in);
    const auto n_out = m.target_norm_.size();
    for (const auto& node : tree.nodes) {
      const bool bad_leaf = node.feature < 0 &&
                            (node.value_offset < 0 ||
                             static_cast<std::size_t>(node.value_offset) + n_out > tree.leaf_values.size());
      const bool bad_split = node.feature >= 0 &&
                             (node.left < 0 || node.right < 0 ||
                              static_cast<std::size_t>(node.left) >= tree.nodes.size() ||
                              static_cast<std::size_t>(node.right) >= tree.nodes.size() ||
                              static_cast<std::size_t>(node.feature) >= m.feature_norm_.size());
      if (bad_leaf || bad_split) throw std::runtime_error("corrupt forest checkpoint");
    }
    if (tree.nodes.empty()) throw std::runtime_error("corrupt forest checkpoint");
    m.trees_.push_back(std::move(tree));
  }
  return m;
}

}  // namespace ahc
