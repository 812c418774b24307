#pragma once

#include <cstdint>
#include <iosfwd>
#include <limits>
#include <vector>

#include "robovis/matching/descriptor_set.hpp"

namespace robovis::matching {

/// Best and second-best database entries for one query. The second best is the
/// nearest entry whose owner tag differs from the best's. Distances are squared.
struct TwoNearest {
  static constexpr std::size_t kNone = std::numeric_limits<std::size_t>::max();
  std::size_t best = kNone;
  std::size_t second = kNone;
  float best_dist = std::numeric_limits<float>::infinity();
  float second_dist = std::numeric_limits<float>::infinity();

  /// Folds in candidate i; ties on distance go to the lower index.
  void offer(std::size_t i, float d, const DescriptorSet& db);
};

/// Exhaustive scan.
TwoNearest brute_force_two_nearest(const features::Descriptor& q, const DescriptorSet& db);

struct ForestParams {
  int trees = 4;
  int top_variance_dims = 5;
  std::uint64_t seed = 0;
};

inline constexpr int kUnlimitedChecks = 0;

/// Randomized kd-tree forest searched best-bin-first across all trees.
/// Immutable after construction; concurrent searches are safe.
class KdForest {
 public:
  /// Throws InvalidArgument when fewer than two descriptors are given.
  KdForest(DescriptorSet db, ForestParams params = {});

  const DescriptorSet& database() const { return db_; }
  const ForestParams& params() const { return params_; }

  /// Per-thread scratch, reusable across queries.
  struct Scratch {
    std::vector<std::uint32_t> stamp;
    std::uint32_t epoch = 0;
  };

  /// Budgeted search; `checks` bounds the number of distance evaluations.
  /// kUnlimitedChecks visits every entry and is exact.
  TwoNearest search(const features::Descriptor& q, int checks, Scratch& scratch) const;

  void save(std::ostream& out) const;
  static KdForest load(std::istream& in);

 private:
  struct Node {
    int dim = -1;  ///< -1 for leaves
    float split = 0.0f;
    int left = -1, right = -1;
    int begin = 0, end = 0;  ///< leaf range into the tree's permutation
  };
  struct Tree {
    std::vector<Node> nodes;
    std::vector<int> perm;
  };

  KdForest() = default;
  void build_tree(Tree& tree, std::uint64_t seed) const;

  DescriptorSet db_;
  ForestParams params_;
  std::vector<Tree> trees_;
};

}  // namespace robovis::matching
