#pragma once

#include <span>
#include <string>
#include <utility>
#include <vector>

#include "robovis/vtree/vocabulary_tree.hpp"

namespace robovis::vtree {

enum class Norm { L1, L2 };

/// Which nodes contribute entries: every node on each root-to-leaf path, or
/// leaves only (what the inverted file indexes).
enum class Scope { AllNodes, LeavesOnly };

struct Signature {
  std::vector<std::pair<int, double>> entries;  ///< (node id, value), sorted, values > 0
  Norm norm = Norm::L1;
};

/// q_i = n_i ω_i over the chosen nodes, normalized in `norm`. Nodes with zero
/// weight are left out. Throws InvalidArgument for an image without features.
Signature make_signature(const WordCounts& words, const VocabularyTree& tree, Norm norm,
                         Scope scope = Scope::AllNodes);
Signature make_signature(std::span<const features::Descriptor> ds, const VocabularyTree& tree,
                         Norm norm, Scope scope = Scope::AllNodes);

/// ‖q − d‖ in the signatures' norm. Throws InvalidArgument on a norm mismatch.
double score(const Signature& q, const Signature& d);

/// Σ q_i d_i over shared nodes.
double dot(const Signature& q, const Signature& d);

struct RankedImage {
  int image_id = 0;
  double product = 0.0;   ///< accumulated Σ q_i d_i
  double distance = 0.0;  ///< squared L2 distance ‖q − d‖₂², i.e. 2 − 2·product for unit signatures
};

/// Posting lists of (image, d_i) per node over L2-normalized signatures.
class InvertedFile {
 public:
  InvertedFile() = default;
  /// Image ids are positions in `db`. Throws InvalidArgument unless every signature is L2.
  explicit InvertedFile(std::span<const Signature> db);

  std::size_t image_count() const { return image_count_; }
  const std::vector<std::pair<int, double>>& postings(int node) const;

  /// Every database image, by descending product then ascending id.
  std::vector<RankedImage> query(const Signature& q) const;

  void save(std::ostream& out) const;
  static InvertedFile load(std::istream& in);

 private:
  std::size_t image_count_ = 0;
  std::vector<std::vector<std::pair<int, double>>> postings_;  // indexed by node id
  std::vector<double> norms2_;                                 // ‖d‖² per image
};

struct KnnResult {
  std::string label;
  std::vector<std::pair<std::string, int>> votes;  ///< sorted by label
};

/// Majority label among the first k_nn ranked images; ties go to the smaller
/// summed distance, then the lexicographically smaller label.
KnnResult classify_knn(std::span<const RankedImage> ranking, std::span<const std::string> labels,
                       int k_nn);

}  // namespace robovis::vtree
