#pragma once

#include <cstdint>
#include <iosfwd>
#include <span>
#include <utility>
#include <vector>

#include "robovis/features/keypoints.hpp"

namespace robovis::vtree {

struct TreeConfig {
  int k = 10;
  int depth = 4;
  int max_iters = 20;  ///< Lloyd iterations per node
  std::uint64_t seed = 0;

  void validate() const;

  static TreeConfig detection_preset() { return {10, 4, 20, 0}; }
  static TreeConfig classification_preset() { return {9, 4, 20, 0}; }
};

/// Sparse (word, count) list, sorted by word. Words are leaf indices.
using WordCounts = std::vector<std::pair<int, int>>;

/// Hierarchical k-means vocabulary with per-node entropy weights.
class VocabularyTree {
 public:
  struct Node {
    features::Descriptor centroid{};
    int parent = -1;
    int first_child = -1;
    int child_count = 0;
    int level = 0;
    int leaf_index = -1;  ///< word id for leaves, -1 for internal nodes
  };

  /// Throws InvalidArgument when fewer than k descriptors are given.
  static VocabularyTree train(std::span<const features::Descriptor> data, const TreeConfig& cfg);

  const TreeConfig& config() const { return cfg_; }
  std::size_t node_count() const { return nodes_.size(); }
  int leaf_count() const { return static_cast<int>(leaf_nodes_.size()); }
  const Node& node(int id) const { return nodes_[id]; }
  int leaf_node(int word) const { return leaf_nodes_[word]; }

  /// Greedy descent; returns the node ids below the root, ending at a leaf.
  std::vector<int> path(const features::Descriptor& d) const;
  /// Word (leaf index) of a descriptor.
  int quantize(const features::Descriptor& d) const;
  WordCounts quantize_all(std::span<const features::Descriptor> ds) const;

  /// Per-node weights, indexed by node id. Zero until set_weights is called.
  const std::vector<double>& weights() const { return weights_; }
  void set_weights(std::vector<double> w);

  void save(std::ostream& out) const;
  static VocabularyTree load(std::istream& in);
  /// One line per node: id parent level leaf_index weight c0 ... c127.
  void write_text(std::ostream& out) const;

 private:
  TreeConfig cfg_;
  std::vector<Node> nodes_;
  std::vector<int> leaf_nodes_;
  std::vector<double> weights_;
};

/// ω_i = ln(N / N_i), where N_i counts images with at least one path through
/// node i; nodes no image reaches get 0. Indexed by node id.
std::vector<double> compute_weights(const VocabularyTree& tree, std::span<const WordCounts> images);
std::vector<double> compute_weights(const VocabularyTree& tree,
                                    std::span<const std::vector<features::Descriptor>> images);

}  // namespace robovis::vtree
