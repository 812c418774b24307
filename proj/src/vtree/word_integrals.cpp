#include "robovis/vtree/word_integrals.hpp"

#include <algorithm>
#include <cmath>

#include "robovis/error.hpp"

namespace robovis::vtree {

WordIntegralImages::WordIntegralImages(int width, int height, std::span<const WordPoint> points)
    : width_(width), height_(height) {
  if (width <= 0 || height <= 0) throw InvalidArgument("word integral images need a positive size");
  struct Pixel {
    int word, x, y;
  };
  std::vector<Pixel> px;
  px.reserve(points.size());
  for (const WordPoint& p : points)
    px.push_back({p.word, std::clamp(static_cast<int>(std::floor(p.x)), 0, width - 1),
                  std::clamp(static_cast<int>(std::floor(p.y)), 0, height - 1)});
  std::sort(px.begin(), px.end(), [](const Pixel& a, const Pixel& b) {
    return a.word < b.word || (a.word == b.word && (a.y < b.y || (a.y == b.y && a.x < b.x)));
  });

  for (std::size_t begin = 0; begin < px.size();) {
    std::size_t end = begin;
    while (end < px.size() && px[end].word == px[begin].word) ++end;
    Table t;
    t.word = px[begin].word;
    for (std::size_t i = begin; i < end; ++i) {
      t.xs.push_back(px[i].x);
      t.ys.push_back(px[i].y);
    }
    std::sort(t.xs.begin(), t.xs.end());
    t.xs.erase(std::unique(t.xs.begin(), t.xs.end()), t.xs.end());
    std::sort(t.ys.begin(), t.ys.end());
    t.ys.erase(std::unique(t.ys.begin(), t.ys.end()), t.ys.end());
    const std::size_t nx = t.xs.size() + 1, ny = t.ys.size() + 1;
    t.sums.assign(nx * ny, 0);
    for (std::size_t i = begin; i < end; ++i) {
      const auto xi = std::lower_bound(t.xs.begin(), t.xs.end(), px[i].x) - t.xs.begin() + 1;
      const auto yi = std::lower_bound(t.ys.begin(), t.ys.end(), px[i].y) - t.ys.begin() + 1;
      ++t.sums[yi * nx + xi];
    }
    for (std::size_t y = 1; y < ny; ++y)
      for (std::size_t x = 1; x < nx; ++x)
        t.sums[y * nx + x] += t.sums[(y - 1) * nx + x] + t.sums[y * nx + x - 1] - t.sums[(y - 1) * nx + x - 1];
    tables_.push_back(std::move(t));
    begin = end;
  }
}

std::int64_t WordIntegralImages::at(int slot, int x, int y) const {
  const Table& t = tables_[slot];
  const auto a = std::lower_bound(t.xs.begin(), t.xs.end(), x) - t.xs.begin();
  const auto b = std::lower_bound(t.ys.begin(), t.ys.end(), y) - t.ys.begin();
  return t.sums[b * (t.xs.size() + 1) + a];
}

WordCounts WordIntegralImages::window_histogram(const Window& w) const {
  if (!w.box().inside({width_, height_}))
    throw BoundsError("window " + to_string(w.box()) + " exceeds the " + std::to_string(width_) + "x" +
                      std::to_string(height_) + " image");
  const Corner tl = w.top_left(), tr = w.top_right(), bl = w.bottom_left(), br = w.bottom_right();
  WordCounts out;
  for (int s = 0; s < static_cast<int>(tables_.size()); ++s) {
    const std::int64_t h = at(s, br.x, br.y) + at(s, tl.x, tl.y) - at(s, tr.x, tr.y) - at(s, bl.x, bl.y);
    if (h > 0) out.emplace_back(tables_[s].word, static_cast<int>(h));
  }
  return out;
}

}  // namespace robovis::vtree
