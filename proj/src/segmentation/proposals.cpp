#include "robovis/segmentation/proposals.hpp"

#include <cmath>
#include <cstdlib>

#include "robovis/error.hpp"

namespace robovis::seg {

void ProposalConfig::validate() const {
  if (tolerance <= 0) throw InvalidArgument("flood tolerance must be > 0");
  if (min_area < 1) throw InvalidArgument("min_area must be >= 1");
  if (multipliers.empty()) throw InvalidArgument("at least one window multiplier is required");
  for (double m : multipliers)
    if (!(m > 0)) throw InvalidArgument("window multipliers must be positive");
}

Segmentation floodcanny(const Image& img, const EdgeMap& edges, const ProposalConfig& cfg) {
  cfg.validate();
  const int w = img.width(), h = img.height();
  if (edges.width != w || edges.height != h) throw InvalidArgument("edge map size differs from the image");
  Segmentation seg{w, h, std::vector<int>(static_cast<std::size_t>(w) * h, 0), {}};
  std::vector<std::uint8_t> used(edges.edges);  // edges count as consumed
  const std::uint8_t* pix = img.pixels().data();
  std::vector<std::size_t> queue;
  queue.reserve(static_cast<std::size_t>(w) * h);

  for (std::size_t s = 0; s < used.size(); ++s) {
    if (used[s]) continue;
    const int seed_value = pix[s];
    queue.clear();
    queue.push_back(s);
    used[s] = 1;
    int x0 = w, y0 = h, x1 = -1, y1 = -1;
    for (std::size_t head = 0; head < queue.size(); ++head) {
      const std::size_t p = queue[head];
      const int x = static_cast<int>(p % w), y = static_cast<int>(p / w);
      x0 = std::min(x0, x), x1 = std::max(x1, x);
      y0 = std::min(y0, y), y1 = std::max(y1, y);
      auto visit = [&](std::size_t q) {
        if (!used[q] && std::abs(pix[q] - seed_value) <= cfg.tolerance) {
          used[q] = 1;
          queue.push_back(q);
        }
      };
      if (x > 0) visit(p - 1);
      if (x < w - 1) visit(p + 1);
      if (y > 0) visit(p - w);
      if (y < h - 1) visit(p + w);
    }
    if (static_cast<int>(queue.size()) < cfg.min_area) continue;
    Region r;
    r.label = static_cast<int>(seg.regions.size()) + 1;
    r.seed = {static_cast<int>(s % w), static_cast<int>(s / w)};
    r.area = static_cast<int>(queue.size());
    r.box = {x0, y0, x1 + 1, y1 + 1};
    for (std::size_t p : queue) seg.labels[p] = r.label;
    seg.regions.push_back(r);
  }
  return seg;
}

Segmentation floodcanny(const Image& img, const ProposalConfig& cfg) {
  return floodcanny(img, canny(img, cfg.canny_low, cfg.canny_high), cfg);
}

std::vector<BoundingBox> region_windows(const Region& region, ImageSize dims, const ProposalConfig& cfg) {
  std::vector<BoundingBox> out;
  const double cx = region.box.center_x(), cy = region.box.center_y();
  for (double m : cfg.multipliers) {
    const double ww = region.box.width() * m, hh = region.box.height() * m;
    const int x0 = static_cast<int>(std::lround(cx - ww / 2)), y0 = static_cast<int>(std::lround(cy - hh / 2));
    const BoundingBox b{x0, y0, x0 + std::max(1, static_cast<int>(std::lround(ww))),
                        y0 + std::max(1, static_cast<int>(std::lround(hh)))};
    const BoundingBox c = clip(b, dims);
    if (c.valid()) out.push_back(c);
  }
  return out;
}

std::vector<BoundingBox> proposal_windows(const Segmentation& seg, const ProposalConfig& cfg) {
  std::vector<BoundingBox> out;
  for (const Region& r : seg.regions) {
    const auto ws = region_windows(r, {seg.width, seg.height}, cfg);
    out.insert(out.end(), ws.begin(), ws.end());
  }
  return out;
}

std::vector<BoundingBox> sliding_windows(ImageSize dims, int step, std::span<const ImageSize> shapes) {
  if (step < 1) throw InvalidArgument("sliding-window step must be >= 1");
  std::vector<BoundingBox> out;
  for (const ImageSize& s : shapes) {
    if (s.width < 1 || s.height < 1 || s.width > dims.width || s.height > dims.height) continue;
    for (int y = 0; y + s.height <= dims.height; y += step)
      for (int x = 0; x + s.width <= dims.width; x += step) out.push_back({x, y, x + s.width, y + s.height});
  }
  return out;
}

Image label_image(const Segmentation& seg) {
  Image out(seg.width, seg.height);
  for (std::size_t i = 0; i < seg.labels.size(); ++i)
    if (seg.labels[i] > 0) out.pixels()[i] = static_cast<std::uint8_t>(1 + (seg.labels[i] * 97) % 255);
  return out;
}

}  // namespace robovis::seg
