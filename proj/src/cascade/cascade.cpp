#include "robovis/cascade/cascade.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <istream>
#include <numbers>
#include <numeric>
#include <ostream>
#include <sstream>

#include "robovis/error.hpp"
#include "robovis/imaging/filters.hpp"
#include "robovis/random.hpp"

namespace robovis::cascade {

namespace {

bool run_stages(const Cascade& c, const IntegralImage& ii, int x, int y, double sigma, double* margin,
                int stage_limit) {
  const std::size_t limit =
      stage_limit < 0 ? c.stages.size() : std::min<std::size_t>(c.stages.size(), static_cast<std::size_t>(stage_limit));
  double m = 0;
  for (std::size_t s = 0; s < limit; ++s) {
    const Stage& stage = c.stages[s];
    double sum = 0;
    for (const Stump& st : stage.stumps) {
      const HaarFeature& f = st.feature;
      if (st.fires(normalize_response(haar_raw_unchecked(f, ii, x, y), sigma, f.cell_w * f.cell_h))) sum += st.alpha;
    }
    m = sum - stage.threshold;
    if (sum < stage.threshold) {
      if (margin) *margin = m;
      return false;
    }
  }
  if (margin) *margin = m;
  return true;
}

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace

bool Cascade::accepts(const IntegralImage& ii, const IntegralImage& sq, int x, int y, double* margin,
                      int stage_limit) const {
  if (x < 0 || y < 0 || x + window_w > ii.width() || y + window_h > ii.height())
    throw BoundsError("cascade window leaves the image");
  return run_stages(*this, ii, x, y, window_sigma(ii, sq, x, y, window_w, window_h), margin, stage_limit);
}

bool Cascade::accepts(const Sample& s, double* margin, int stage_limit) const {
  if (s.ii.width() != window_w || s.ii.height() != window_h) throw InvalidArgument("sample size differs from window");
  return run_stages(*this, s.ii, 0, 0, s.sigma, margin, stage_limit);
}

void Cascade::save(std::ostream& out) const {
  out << "robovis-cascade 1\n";
  out << "class " << class_name << "\n";
  out << "window " << window_w << " " << window_h << "\n";
  out << "stages " << stages.size() << "\n";
  for (const Stage& st : stages) {
    out << "stage " << st.stumps.size() << " " << fmt(st.threshold) << " " << fmt(st.detection_rate) << " "
        << fmt(st.false_positive_rate) << "\n";
    for (std::size_t i = 0; i < st.stumps.size(); ++i) {
      const Stump& s = st.stumps[i];
      const HaarFeature& f = s.feature;
      out << "stump " << static_cast<int>(f.kind) << " " << f.x << " " << f.y << " " << f.cell_w << " " << f.cell_h
          << " " << fmt(s.threshold) << " " << s.polarity << " " << fmt(s.alpha) << " " << fmt(st.stump_errors[i])
          << " " << fmt(st.error_bound[i]) << "\n";
    }
  }
}

Cascade Cascade::load(std::istream& in) {
  Cascade c;
  int line_no = 0;
  std::string line;
  auto next = [&](const char* keyword) {
    if (!std::getline(in, line)) throw FormatError(std::string("unexpected end of cascade file, wanted ") + keyword, line_no + 1);
    ++line_no;
    std::istringstream ss(line);
    std::string key;
    ss >> key;
    if (key != keyword) throw FormatError(std::string("expected '") + keyword + "'", line_no);
    return ss;
  };
  auto check = [&](std::istringstream& ss) {
    if (ss.fail()) throw FormatError("malformed field", line_no);
    std::string extra;
    if (ss >> extra) throw FormatError("trailing data", line_no);
  };
  {
    auto ss = next("robovis-cascade");
    int version = 0;
    ss >> version;
    check(ss);
    if (version != 1) throw FormatError("unsupported cascade version", line_no);
  }
  {
    next("class");
    c.class_name = line.size() > 6 ? line.substr(6) : std::string();
  }
  {
    auto ss = next("window");
    ss >> c.window_w >> c.window_h;
    check(ss);
    if (c.window_w < 2 || c.window_h < 2) throw FormatError("bad window size", line_no);
  }
  std::size_t n_stages = 0;
  {
    auto ss = next("stages");
    ss >> n_stages;
    check(ss);
  }
  for (std::size_t s = 0; s < n_stages; ++s) {
    Stage st;
    std::size_t n_stumps = 0;
    {
      auto ss = next("stage");
      ss >> n_stumps >> st.threshold >> st.detection_rate >> st.false_positive_rate;
      check(ss);
    }
    for (std::size_t i = 0; i < n_stumps; ++i) {
      auto ss = next("stump");
      Stump sp;
      int kind = -1;
      double err = 0, bound = 0;
      ss >> kind >> sp.feature.x >> sp.feature.y >> sp.feature.cell_w >> sp.feature.cell_h >> sp.threshold >>
          sp.polarity >> sp.alpha >> err >> bound;
      check(ss);
      if (kind < 0 || kind > 3) throw FormatError("unknown feature kind", line_no);
      sp.feature.kind = static_cast<HaarKind>(kind);
      if (sp.feature.cell_w < 1 || sp.feature.cell_h < 1 || !sp.feature.fits(c.window_w, c.window_h))
        throw FormatError("feature outside the window", line_no);
      if (sp.polarity != 1 && sp.polarity != -1) throw FormatError("polarity must be +1 or -1", line_no);
      st.stumps.push_back(sp);
      st.stump_errors.push_back(err);
      st.error_bound.push_back(bound);
    }
    c.stages.push_back(std::move(st));
  }
  return c;
}

std::vector<PyramidLevel> build_pyramid(const Image& img, double factor, int min_w, int min_h) {
  if (!(factor > 1.0)) throw InvalidArgument("pyramid factor must exceed 1");
  std::vector<PyramidLevel> levels;
  for (int k = 0;; ++k) {
    const double s = std::pow(factor, k);
    const int w = static_cast<int>(std::floor(img.width() / s));
    const int h = static_cast<int>(std::floor(img.height() / s));
    if (w < min_w || h < min_h) break;
    PyramidLevel l;
    l.scale = s;
    if (k == 0) {
      l.image = img;
    } else {
      l.image = resize_bilinear(gaussian_blur(img, 0.5 * std::sqrt(s * s - 1.0)), w, h);
    }
    l.ii = IntegralImage::of(l.image);
    l.sq = IntegralImage::of_squares(l.image);
    levels.push_back(std::move(l));
  }
  return levels;
}

Cascade train_cascade(std::span<const Image> positives, std::span<const Image> negative_pool, const BoostConfig& cfg,
                      std::string class_name, TrainingLog* log) {
  cfg.validate();
  if (positives.empty()) throw InvalidArgument("no positive windows");
  if (negative_pool.empty()) throw InvalidArgument("empty negative pool");
  Cascade c;
  c.class_name = std::move(class_name);
  c.window_w = cfg.window_w;
  c.window_h = cfg.window_h;

  std::vector<HaarFeature> pool = enumerate_features(cfg.window_w, cfg.window_h);
  if (pool.size() > static_cast<std::size_t>(cfg.feature_pool)) {
    Rng prng(derive_seed(cfg.seed, 1));
    prng.shuffle(pool.begin(), pool.end());
    pool.resize(static_cast<std::size_t>(cfg.feature_pool));
  }

  std::vector<Sample> pos;
  pos.reserve(positives.size());
  for (const Image& p : positives) {
    if (p.width() != cfg.window_w || p.height() != cfg.window_h)
      throw InvalidArgument("positive windows must match the base window size");
    pos.push_back(make_sample(p));
  }

  // Every (image, level, x, y) is equally likely, so mining acceptance rates are per-window rates.
  std::vector<PyramidLevel> levels;
  std::vector<std::uint64_t> cumulative;
  std::uint64_t total_windows = 0;
  for (const Image& img : negative_pool) {
    for (PyramidLevel& l : build_pyramid(img, 1.25, cfg.window_w, cfg.window_h)) {
      total_windows += static_cast<std::uint64_t>(l.image.width() - cfg.window_w + 1) *
                       static_cast<std::uint64_t>(l.image.height() - cfg.window_h + 1);
      cumulative.push_back(total_windows);
      levels.push_back(std::move(l));
    }
  }
  if (total_windows == 0) throw InvalidArgument("negative images are smaller than the window");

  TrainingLog local;
  TrainingLog& lg = log ? *log : local;
  lg = {};
  for (int s = 0; s < cfg.max_stages; ++s) {
    std::vector<const Sample*> pos_s;
    for (const Sample& p : pos)
      if (c.accepts(p)) pos_s.push_back(&p);
    if (pos_s.empty()) {
      lg.warnings.push_back("no positives survive stage " + std::to_string(s) + "; stopping");
      break;
    }

    Rng mrng(derive_seed(cfg.seed, 100 + static_cast<std::uint64_t>(s)));
    std::vector<Sample> neg;
    neg.reserve(static_cast<std::size_t>(cfg.negatives_per_stage));
    long long attempts = 0;
    while (neg.size() < static_cast<std::size_t>(cfg.negatives_per_stage) && attempts < cfg.max_mining_attempts) {
      ++attempts;
      const std::uint64_t r = mrng.below(total_windows);
      const std::size_t li = static_cast<std::size_t>(std::upper_bound(cumulative.begin(), cumulative.end(), r) -
                                                      cumulative.begin());
      const PyramidLevel& l = levels[li];
      const std::uint64_t local_idx = r - (li ? cumulative[li - 1] : 0);
      const auto cols = static_cast<std::uint64_t>(l.image.width() - cfg.window_w + 1);
      const int x = static_cast<int>(local_idx % cols), y = static_cast<int>(local_idx / cols);
      if (!c.accepts(l.ii, l.sq, x, y)) continue;
      Image crop(cfg.window_w, cfg.window_h);
      for (int yy = 0; yy < cfg.window_h; ++yy)
        for (int xx = 0; xx < cfg.window_w; ++xx) crop.at(xx, yy) = l.image.at(x + xx, y + yy);
      neg.push_back(make_sample(crop));
    }
    if (neg.size() < static_cast<std::size_t>(cfg.negatives_per_stage)) {
      lg.warnings.push_back("mined only " + std::to_string(neg.size()) + " of " +
                            std::to_string(cfg.negatives_per_stage) + " negatives in " + std::to_string(attempts) +
                            " attempts before stage " + std::to_string(s) + "; stopping");
      break;
    }
    std::vector<const Sample*> neg_s;
    for (const Sample& n : neg) neg_s.push_back(&n);

    Stage stage = train_stage(pos_s, neg_s, pool, cfg);
    lg.stages.push_back({pos_s.size(), neg_s.size(), attempts, stage.detection_rate, stage.false_positive_rate});
    c.stages.push_back(std::move(stage));
  }
  return c;
}

void ScanConfig::validate() const {
  if (!(scale_factor > 1.0)) throw InvalidArgument("scale_factor must exceed 1");
  if (step < 1) throw InvalidArgument("step must be positive");
  if (min_neighbors < 0) throw InvalidArgument("min_neighbors must be non-negative");
  if (!(group_overlap > 0 && group_overlap <= 1)) throw InvalidArgument("group_overlap must be in (0,1]");
}

std::vector<RawHit> scan_cascade(const Image& img, const Cascade& c, const ScanConfig& cfg,
                                 std::size_t* windows_evaluated) {
  cfg.validate();
  std::vector<RawHit> hits;
  std::size_t evaluated = 0;
  const double aspect = static_cast<double>(c.window_h) / c.window_w;
  for (const PyramidLevel& l : build_pyramid(img, cfg.scale_factor, c.window_w, c.window_h)) {
    const int side_w = static_cast<int>(std::lround(c.window_w * l.scale));
    const int side_h = static_cast<int>(std::lround(side_w * aspect));
    for (int y = 0; y + c.window_h <= l.image.height(); y += cfg.step) {
      for (int x = 0; x + c.window_w <= l.image.width(); x += cfg.step) {
        ++evaluated;
        double margin = 0;
        if (!c.accepts(l.ii, l.sq, x, y, &margin)) continue;
        const int x0 = std::clamp(static_cast<int>(std::lround(x * l.scale)), 0, std::max(0, img.width() - side_w));
        const int y0 = std::clamp(static_cast<int>(std::lround(y * l.scale)), 0, std::max(0, img.height() - side_h));
        hits.push_back({BoundingBox{x0, y0, x0 + side_w, y0 + side_h}, margin});
      }
    }
  }
  if (windows_evaluated) *windows_evaluated = evaluated;
  return hits;
}

std::vector<RawHit> group_hits(const std::vector<RawHit>& hits, int min_neighbors, double overlap) {
  const std::size_t n = hits.size();
  std::vector<std::size_t> parent(n);
  std::iota(parent.begin(), parent.end(), std::size_t{0});
  auto find = [&](std::size_t i) {
    while (parent[i] != i) i = parent[i] = parent[parent[i]];
    return i;
  };
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j)
      if (overlap_ratio(hits[i].box, hits[j].box, false) >= overlap) {
        const std::size_t a = find(i), b = find(j);
        if (a != b) parent[std::max(a, b)] = std::min(a, b);
      }
  struct Acc {
    double x = 0, y = 0, w = 0, h = 0, score = 0;
    std::size_t count = 0;
  };
  std::vector<Acc> acc(n);
  for (std::size_t i = 0; i < n; ++i) {
    Acc& a = acc[find(i)];
    a.x += hits[i].box.x_min;
    a.y += hits[i].box.y_min;
    a.w += hits[i].box.width();
    a.h += hits[i].box.height();
    a.score += hits[i].margin;
    ++a.count;
  }
  std::vector<RawHit> out;
  for (std::size_t i = 0; i < n; ++i) {
    const Acc& a = acc[i];
    if (a.count == 0 || a.count < static_cast<std::size_t>(min_neighbors) + 1) continue;
    const double k = static_cast<double>(a.count);
    const int x0 = static_cast<int>(std::lround(a.x / k)), y0 = static_cast<int>(std::lround(a.y / k));
    const int w = static_cast<int>(std::lround(a.w / k)), h = static_cast<int>(std::lround(a.h / k));
    out.push_back({BoundingBox{x0, y0, x0 + w, y0 + h}, a.score});
  }
  std::stable_sort(out.begin(), out.end(), [](const RawHit& a, const RawHit& b) { return a.margin > b.margin; });
  return out;
}

std::vector<Detection> detect_cascade(const Image& img, const Cascade& c, const ScanConfig& cfg,
                                      const std::string& frame) {
  std::vector<Detection> out;
  for (const RawHit& h : group_hits(scan_cascade(img, c, cfg), cfg.min_neighbors, cfg.group_overlap))
    out.push_back({frame, c.class_name, h.box, h.margin});
  return out;
}

std::vector<Image> synth_views(const Image& img, int n, std::uint64_t seed) {
  if (n < 1) throw InvalidArgument("synth_views needs n >= 1");
  if (img.empty()) throw InvalidArgument("empty image");
  const double cx = 0.5 * (img.width() - 1), cy = 0.5 * (img.height() - 1);
  const double mean = img.mean();
  std::vector<Image> out;
  out.reserve(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    Rng rng(derive_seed(seed, static_cast<std::uint64_t>(i)));
    const double theta = rng.uniform(-15.0, 15.0) * std::numbers::pi / 180.0;
    const double scale = rng.uniform(0.9, 1.1);
    const double shear = rng.uniform(-0.1, 0.1);
    const double brightness = rng.uniform(-10.0, 10.0);
    const double contrast = rng.uniform(0.9, 1.1);
    const double co = std::cos(theta), si = std::sin(theta);
    // scale · rotation · shear, about the image centre
    const double a = scale * co, b = scale * (co * shear - si);
    const double c = scale * si, d = scale * (si * shear + co);
    const AffineMatrix m{a, b, cx - a * cx - b * cy, c, d, cy - c * cx - d * cy};
    Image v = warp_affine_reflect(img, m, img.width(), img.height());
    for (std::uint8_t& p : v.pixels()) {
      const double q = (p - mean) * contrast + mean + brightness;
      p = static_cast<std::uint8_t>(std::clamp(std::lround(q), 0L, 255L));
    }
    out.push_back(std::move(v));
  }
  return out;
}

}  // namespace robovis::cascade
