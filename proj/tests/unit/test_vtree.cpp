#include <algorithm>
#include <cmath>
#include <map>
#include <sstream>

#include "doctest.h"
#include "robovis/error.hpp"
#include "robovis/matching/descriptor_set.hpp"
#include "robovis/vtree/detector.hpp"
#include "support/descriptors.hpp"

using namespace robovis;
using namespace robovis::vtree;
using features::Descriptor;

namespace {

// Descriptors drawn around a fixed set of centres.
std::vector<Descriptor> clustered(int n, int centres, double sigma, Rng& rng) {
  std::vector<Descriptor> c, out;
  for (int i = 0; i < centres; ++i) c.push_back(testing::random_descriptor(rng));
  for (int i = 0; i < n; ++i) out.push_back(testing::perturb(c[rng.below(centres)], sigma, rng));
  return out;
}

std::vector<Descriptor> shared_centres() {
  Rng rng(100);
  std::vector<Descriptor> c;
  for (int i = 0; i < 150; ++i) c.push_back(testing::random_descriptor(rng));
  return c;
}

const VocabularyTree& shared_tree() {
  static const VocabularyTree t = [] {
    Rng rng(101);
    const auto c = shared_centres();
    std::vector<Descriptor> data;
    for (int i = 0; i < 6000; ++i) data.push_back(testing::perturb(c[rng.below(c.size())], 0.05, rng));
    return VocabularyTree::train(data, {4, 3, 20, 9});
  }();
  return t;
}

// Per-node counts by walking every descriptor's path.
std::map<int, double> direct_counts(const VocabularyTree& t, std::span<const Descriptor> ds) {
  std::map<int, double> m;
  for (const auto& d : ds)
    for (int id : t.path(d)) m[id] += 1;
  return m;
}

}  // namespace

TEST_CASE("tree config and training preconditions") {
  CHECK_THROWS_AS(TreeConfig({1, 2, 10, 0}).validate(), InvalidArgument);
  CHECK_THROWS_AS(TreeConfig({2, 0, 10, 0}).validate(), InvalidArgument);
  Rng rng(1);
  std::vector<Descriptor> few(3, testing::random_descriptor(rng));
  CHECK_THROWS_AS(VocabularyTree::train(few, {4, 2, 10, 0}), InvalidArgument);
}

TEST_CASE("two separated clusters split exactly into two leaves") {
  Descriptor a{}, b{};
  a[0] = 1;
  b[64] = 1;
  Rng rng(2);
  std::vector<Descriptor> data;
  for (int i = 0; i < 100; ++i) data.push_back(testing::perturb(a, 0.01, rng));
  for (int i = 0; i < 100; ++i) data.push_back(testing::perturb(b, 0.01, rng));
  const auto t = VocabularyTree::train(data, {2, 1, 20, 3});
  REQUIRE(t.leaf_count() == 2);
  const int wa = t.quantize(data[0]);
  for (int i = 0; i < 200; ++i) CHECK(t.quantize(data[i]) == (i < 100 ? wa : 1 - wa));
}

TEST_CASE("identical descriptors give a single leaf") {
  Rng rng(3);
  const std::vector<Descriptor> same(50, testing::random_descriptor(rng));
  const auto t = VocabularyTree::train(same, {10, 4, 20, 0});
  CHECK(t.leaf_count() == 1);
  CHECK(t.quantize(same[0]) == 0);
  CHECK(t.path(same[0]).empty());
}

TEST_CASE("branch 10 depth 4 on 50k descriptors") {
  Rng rng(4);
  const auto data = clustered(50000, 2000, 0.05, rng);
  const auto t = VocabularyTree::train(data, TreeConfig::detection_preset());
  CHECK(t.leaf_count() <= 10000);
  CHECK(t.leaf_count() > 1000);
  for (std::size_t i = 0; i < data.size(); i += 7) {
    const auto p = t.path(data[i]);
    REQUIRE(!p.empty());
    CHECK(p.size() <= 4u);
    CHECK(t.node(p.back()).leaf_index == t.quantize(data[i]));
  }
}

TEST_CASE("quantization: leaf centroids are fixed points; greedy mostly agrees with flat search") {
  const auto& t = shared_tree();
  for (int w = 0; w < t.leaf_count(); ++w) CHECK(t.quantize(t.node(t.leaf_node(w)).centroid) == w);
  // Queries from the training distribution; far off-distribution queries alias much more.
  Rng rng(5);
  const auto c = shared_centres();
  int agree = 0;
  for (int i = 0; i < 1000; ++i) {
    const auto d = testing::perturb(c[rng.below(c.size())], 0.05, rng);
    int best = 0;
    float bd = 1e30f;
    for (int w = 0; w < t.leaf_count(); ++w) {
      const float dist = matching::l2_squared(d, t.node(t.leaf_node(w)).centroid);
      if (dist < bd) bd = dist, best = w;
    }
    agree += t.quantize(d) == best;
  }
  MESSAGE("greedy/flat agreement " << agree << "/1000");
  CHECK(agree >= 850);
}

TEST_CASE("training is seed deterministic") {
  Rng r1(6), r2(6);
  std::stringstream a, b;
  VocabularyTree::train(clustered(2000, 40, 0.05, r1), {5, 2, 20, 1}).save(a);
  VocabularyTree::train(clustered(2000, 40, 0.05, r2), {5, 2, 20, 1}).save(b);
  CHECK(a.str() == b.str());
}

TEST_CASE("entropy weights") {
  const auto& t = shared_tree();
  // 100 images; the first 10 contain word 0, all contain word 1.
  std::vector<WordCounts> images(100);
  for (int i = 0; i < 100; ++i) {
    images[i].emplace_back(1, 1);
    if (i < 10) images[i].insert(images[i].begin(), {0, 2});
  }
  const auto w = compute_weights(t, images);
  CHECK(w[t.leaf_node(1)] == 0.0);
  CHECK(w[t.leaf_node(0)] == doctest::Approx(std::log(10.0)).epsilon(1e-12));
  CHECK(std::abs(w[t.leaf_node(0)] - 2.302585) < 1e-6);
  // Ancestors of word 0 are reached by at least those 10 images.
  const int parent = t.node(t.leaf_node(0)).parent;
  CHECK(w[parent] <= w[t.leaf_node(0)]);
  CHECK(w[0] == 0.0);
  // Nodes no image reaches stay at zero.
  CHECK(w[t.leaf_node(t.leaf_count() - 1)] == 0.0);
}

TEST_CASE("signatures") {
  Rng rng(7);
  Descriptor a{}, b{};
  a[0] = 1;
  b[64] = 1;
  std::vector<Descriptor> data;
  for (int i = 0; i < 20; ++i) data.push_back(i < 10 ? a : b);
  auto t = VocabularyTree::train(data, {2, 1, 10, 0});
  const std::vector<std::vector<Descriptor>> db = {{a}, {b}};
  t.set_weights(compute_weights(t, db));
  const auto s = make_signature(std::vector<Descriptor>{a, a, a}, t, Norm::L1);
  REQUIRE(s.entries.size() == 1);
  CHECK(s.entries[0].second == 1.0);
  CHECK_THROWS_AS(make_signature(std::vector<Descriptor>{}, t, Norm::L1), InvalidArgument);

  auto big = shared_tree();
  std::vector<std::vector<Descriptor>> images;
  for (int i = 0; i < 30; ++i) images.push_back(clustered(60, 5, 0.05, rng));
  big.set_weights(compute_weights(big, images));
  for (const auto& img : images) {
    for (Norm norm : {Norm::L1, Norm::L2}) {
      const auto sig = make_signature(img, big, norm);
      auto shuffled = img;
      rng.shuffle(shuffled.begin(), shuffled.end());
      const auto sig2 = make_signature(shuffled, big, norm);
      CHECK(sig.entries == sig2.entries);

      std::vector<std::pair<int, double>> expect;
      double total = 0;
      for (const auto& [id, n] : direct_counts(big, img)) {
        const double v = n * big.weights()[id];
        if (v > 0) expect.emplace_back(id, v), total += norm == Norm::L1 ? v : v * v;
      }
      if (norm == Norm::L2) total = std::sqrt(total);
      REQUIRE(expect.size() == sig.entries.size());
      for (std::size_t i = 0; i < expect.size(); ++i) {
        CHECK(expect[i].first == sig.entries[i].first);
        CHECK(std::abs(expect[i].second / total - sig.entries[i].second) < 1e-12);
      }
    }
  }
}

TEST_CASE("scores") {
  Signature q{{{1, 0.5}, {2, 0.5}}, Norm::L1}, d{{{3, 0.25}, {4, 0.75}}, Norm::L1};
  CHECK(score(q, q) == 0.0);
  CHECK(score(q, d) == doctest::Approx(2.0));
  Signature l2{{{1, 1.0}}, Norm::L2};
  CHECK_THROWS_AS(score(q, l2), InvalidArgument);

  Rng rng(8);
  auto random_sig = [&] {
    Signature s;
    s.norm = Norm::L2;
    double n = 0;
    for (int id = 0; id < 200; ++id)
      if (rng.uniform() < 0.1) {
        const double v = rng.uniform(0.01, 1.0);
        s.entries.emplace_back(id, v);
        n += v * v;
      }
    for (auto& e : s.entries) e.second /= std::sqrt(n);
    return s;
  };
  for (int i = 0; i < 1000; ++i) {
    const auto a = random_sig(), b = random_sig();
    const double s = score(a, b);
    CHECK(std::abs((2 - 2 * dot(a, b)) - s * s) <= 1e-9);
  }
}

TEST_CASE("inverted file ranks like exhaustive L2 scoring") {
  auto t = shared_tree();
  Rng rng(9);
  std::vector<WordCounts> words;
  for (int i = 0; i < 50; ++i) words.push_back(t.quantize_all(clustered(80, 6, 0.05, rng)));
  t.set_weights(compute_weights(t, words));
  std::vector<Signature> db;
  for (const auto& w : words) db.push_back(make_signature(w, t, Norm::L2, Scope::LeavesOnly));
  const InvertedFile inv(db);
  for (int i = 0; i < 50; ++i) {
    const auto ranking = inv.query(db[i]);
    REQUIRE(ranking.size() == 50);
    CHECK(ranking[0].image_id == i);
    CHECK(ranking[0].distance <= 1e-9);
    for (const auto& r : ranking) {
      const double s = score(db[i], db[r.image_id]);
      CHECK(std::abs(r.distance - s * s) <= 1e-9);
      if (r.product == 0.0) CHECK(r.distance == doctest::Approx(2.0));
    }
  }
  CHECK(InvertedFile(std::span<const Signature>{}).query(db[0]).empty());
  Signature l1 = db[0];
  l1.norm = Norm::L1;
  CHECK_THROWS_AS(InvertedFile(std::span(&l1, 1)), InvalidArgument);
}

TEST_CASE("kNN voting") {
  std::vector<std::string> labels = {"A", "B", "A", "B", "A", "A", "B", "A", "B", "A"};
  std::vector<RankedImage> ranking;
  for (int i = 0; i < 10; ++i) ranking.push_back({i, 1.0 - 0.05 * i, 0.1 * i});
  CHECK(classify_knn(ranking, labels, 1).label == "A");
  const auto r = classify_knn(ranking, labels, 10);
  CHECK(r.label == "A");
  CHECK(r.votes == std::vector<std::pair<std::string, int>>{{"A", 6}, {"B", 4}});
  // 2 vs 2: B's summed distance 0.1+0.3 beats A's 0+0.2? No: A=0.2 < B=0.4.
  CHECK(classify_knn(ranking, labels, 4).label == "A");
  std::vector<std::string> swapped = {"B", "A", "B", "A"};
  CHECK(classify_knn(ranking, swapped, 4).label == "B");
  // Equal votes and distances fall back to the label.
  std::vector<RankedImage> flat = {{0, 0, 1.0}, {1, 0, 1.0}};
  std::vector<std::string> zy = {"z", "y"};
  CHECK(classify_knn(flat, zy, 2).label == "y");
}

TEST_CASE("word integral images") {
  std::vector<WordPoint> one = {{10.4, 10.9, 7}};
  const WordIntegralImages w1(64, 48, one);
  auto full = w1.window_histogram(Window(0, 0, 64, 48));
  CHECK(full == WordCounts{{7, 1}});
  CHECK(w1.window_histogram(Window(11, 0, 64, 48)).empty());
  CHECK_THROWS_AS(w1.window_histogram(Window(0, 0, 65, 48)), BoundsError);

  Rng rng(10);
  for (int img = 0; img < 10; ++img) {
    std::vector<WordPoint> pts;
    for (int i = 0; i < 400; ++i) pts.push_back({rng.uniform(0, 320), rng.uniform(0, 240), int(rng.below(30))});
    const WordIntegralImages wii(320, 240, pts);
    for (int k = 0; k < 100; ++k) {
      const int x0 = rng.range(0, 318), y0 = rng.range(0, 238);
      const int x1 = rng.range(x0 + 1, 320), y1 = rng.range(y0 + 1, 240);
      std::map<int, int> direct;
      for (const auto& p : pts) {
        const int px = int(std::floor(p.x)), py = int(std::floor(p.y));
        if (px >= x0 && px < x1 && py >= y0 && py < y1) ++direct[p.word];
      }
      const WordCounts expect(direct.begin(), direct.end());
      CHECK(wii.window_histogram(Window(x0, y0, x1, y1)) == expect);
    }
  }
}

TEST_CASE("vocabulary model round trip and window classification") {
  Rng rng(11);
  // Two classes with distinct descriptor centres, plus background.
  std::vector<Descriptor> ca, cb, cbg;
  for (int i = 0; i < 8; ++i) ca.push_back(testing::random_descriptor(rng));
  for (int i = 0; i < 8; ++i) cb.push_back(testing::random_descriptor(rng));
  for (int i = 0; i < 8; ++i) cbg.push_back(testing::random_descriptor(rng));
  auto make_image = [&](const std::vector<Descriptor>& c) {
    features::FeatureSet fs;
    for (int i = 0; i < 40; ++i) {
      fs.keypoints.push_back({float(rng.uniform(0, 100)), float(rng.uniform(0, 100)), 2, 0, 0});
      fs.descriptors.push_back(testing::perturb(c[rng.below(c.size())], 0.03, rng));
      fs.flags.push_back(0);
    }
    return fs;
  };
  std::vector<features::FeatureSet> train;
  std::vector<std::string> labels;
  std::vector<Descriptor> all;
  for (int i = 0; i < 10; ++i) {
    for (const auto* c : {&ca, &cb, &cbg}) {
      train.push_back(make_image(*c));
      labels.push_back(c == &ca ? "a" : c == &cb ? "b" : kBackgroundLabel);
      all.insert(all.end(), train.back().descriptors.begin(), train.back().descriptors.end());
    }
  }
  const auto model = VocabModel::build(VocabularyTree::train(all, {4, 3, 20, 5}), train, labels);
  std::stringstream buf;
  model.save(buf);
  const auto loaded = VocabModel::load(buf);
  std::stringstream again;
  loaded.save(again);
  CHECK(again.str() == buf.str());

  const auto test = make_image(ca);
  CHECK(model.classify(model.tree.quantize_all(test.descriptors), 5).label == "a");
  const std::vector<BoundingBox> windows = {make_box(0, 0, 101, 101), make_box(0, 0, 2, 2)};
  const auto dets = classify_windows(model, test, 101, 101, windows, {});
  REQUIRE(dets.size() == 1);
  CHECK(dets[0].class_name == "a");
  CHECK(classify_windows(model, make_image(cbg), 101, 101, windows, {}).empty());
}
