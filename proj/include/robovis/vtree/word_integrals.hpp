#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "robovis/imaging/geometry.hpp"
#include "robovis/vtree/vocabulary_tree.hpp"

namespace robovis::vtree {

struct WordPoint {
  double x = 0.0, y = 0.0;  ///< image coordinates; counted at pixel (floor x, floor y)
  int word = 0;
};

/// Per-word summed-area tables of feature occurrences. Each table is stored
/// over the word's own distinct pixel rows and columns, which gives the same
/// four-corner sums as a full-resolution table at a fraction of the memory.
class WordIntegralImages {
 public:
  WordIntegralImages(int width, int height, std::span<const WordPoint> points);

  int width() const { return width_; }
  int height() const { return height_; }
  /// Number of distinct words present.
  int word_count() const { return static_cast<int>(tables_.size()); }

  /// Count of word occurrences at pixels in [0,x) x [0,y).
  std::int64_t at(int word_slot, int x, int y) const;

  /// Per-word counts inside the window, zero entries omitted.
  /// Throws BoundsError when the window leaves the image.
  WordCounts window_histogram(const Window& w) const;

 private:
  struct Table {
    int word;
    std::vector<int> xs, ys;            // sorted distinct pixel columns / rows
    std::vector<std::int64_t> sums;     // (xs.size()+1) x (ys.size()+1), row-major by y
  };
  int width_, height_;
  std::vector<Table> tables_;  // sorted by word
};

}  // namespace robovis::vtree
