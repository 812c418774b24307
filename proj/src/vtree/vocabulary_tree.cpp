#include "robovis/vtree/vocabulary_tree.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <deque>
#include <istream>
#include <ostream>

#include "robovis/error.hpp"
#include "robovis/matching/descriptor_set.hpp"
#include "robovis/random.hpp"
#include "serialize.hpp"

namespace robovis::vtree {

using features::Descriptor;
using matching::l2_squared;

void TreeConfig::validate() const {
  if (k < 2) throw InvalidArgument("branch factor k must be >= 2");
  if (depth < 1) throw InvalidArgument("tree depth must be >= 1");
  if (max_iters < 1) throw InvalidArgument("k-means needs >= 1 iteration");
}

namespace {

constexpr char kTreeMagic[4] = {'R', 'V', 'V', 'T'};
constexpr std::uint32_t kTreeVersion = 1;

struct Clustering {
  std::vector<Descriptor> centers;
  std::vector<int> assign;
};

Descriptor mean_of(std::span<const Descriptor> data, std::span<const int> idx) {
  std::array<double, features::kDescriptorSize> acc{};
  for (int i : idx)
    for (int d = 0; d < features::kDescriptorSize; ++d) acc[d] += data[i][d];
  Descriptor out;
  for (int d = 0; d < features::kDescriptorSize; ++d)
    out[d] = static_cast<float>(acc[d] / static_cast<double>(idx.size()));
  return out;
}

int nearest(const Descriptor& p, std::span<const Descriptor> centers) {
  int best = 0;
  float bd = l2_squared(p, centers[0]);
  for (int c = 1; c < static_cast<int>(centers.size()); ++c) {
    const float d = l2_squared(p, centers[c]);
    if (d < bd) bd = d, best = c;
  }
  return best;
}

Clustering kmeans(std::span<const Descriptor> data, std::span<const int> idx, int k, int max_iters,
                  Rng& rng) {
  const std::size_t n = idx.size();
  Clustering cl;
  // k-means++ seeding; stops early once every point coincides with a centre.
  cl.centers.push_back(data[idx[rng.below(n)]]);
  std::vector<double> d2(n);
  for (std::size_t i = 0; i < n; ++i) d2[i] = l2_squared(data[idx[i]], cl.centers[0]);
  while (static_cast<int>(cl.centers.size()) < k) {
    double sum = 0;
    for (double v : d2) sum += v;
    if (!(sum > 0)) break;
    const double r = rng.uniform() * sum;
    double acc = 0;
    std::size_t pick = n;
    for (std::size_t i = 0; i < n; ++i) {
      if (d2[i] <= 0) continue;
      acc += d2[i];
      pick = i;
      if (acc > r) break;
    }
    cl.centers.push_back(data[idx[pick]]);
    for (std::size_t i = 0; i < n; ++i)
      d2[i] = std::min(d2[i], double(l2_squared(data[idx[i]], cl.centers.back())));
  }

  const int kc = static_cast<int>(cl.centers.size());
  cl.assign.assign(n, -1);
  std::vector<std::vector<int>> members(kc);
  for (int it = 0; it < max_iters; ++it) {
    bool changed = false;
    for (std::size_t i = 0; i < n; ++i) {
      const int c = nearest(data[idx[i]], cl.centers);
      changed |= c != cl.assign[i];
      cl.assign[i] = c;
    }
    if (!changed) break;
    for (auto& m : members) m.clear();
    for (std::size_t i = 0; i < n; ++i) members[cl.assign[i]].push_back(idx[i]);
    for (int c = 0; c < kc; ++c)
      if (!members[c].empty()) cl.centers[c] = mean_of(data, members[c]);
    // Empty cluster: take the point farthest from the centre of the largest cluster.
    for (int c = 0; c < kc; ++c) {
      if (!members[c].empty()) continue;
      int big = 0;
      for (int j = 1; j < kc; ++j)
        if (members[j].size() > members[big].size()) big = j;
      if (members[big].size() < 2) break;
      std::size_t far = 0;
      float fd = -1;
      for (std::size_t j = 0; j < members[big].size(); ++j) {
        const float d = l2_squared(data[members[big][j]], cl.centers[big]);
        if (d > fd) fd = d, far = j;
      }
      cl.centers[c] = data[members[big][far]];
      members[c].push_back(members[big][far]);
      members[big].erase(members[big].begin() + static_cast<std::ptrdiff_t>(far));
      cl.centers[big] = mean_of(data, members[big]);
    }
  }
  for (std::size_t i = 0; i < n; ++i) cl.assign[i] = nearest(data[idx[i]], cl.centers);
  return cl;
}

bool all_identical(std::span<const Descriptor> data, std::span<const int> idx) {
  for (int i : idx)
    if (std::memcmp(data[i].data(), data[idx[0]].data(), sizeof(Descriptor)) != 0) return false;
  return true;
}

}  // namespace

VocabularyTree VocabularyTree::train(std::span<const Descriptor> data, const TreeConfig& cfg) {
  cfg.validate();
  if (static_cast<int>(data.size()) < cfg.k)
    throw InvalidArgument("need at least k=" + std::to_string(cfg.k) + " descriptors to train, got " +
                          std::to_string(data.size()));
  VocabularyTree t;
  t.cfg_ = cfg;
  std::vector<int> all(data.size());
  for (std::size_t i = 0; i < all.size(); ++i) all[i] = static_cast<int>(i);
  Node root;
  root.centroid = mean_of(data, all);
  t.nodes_.push_back(root);

  std::deque<std::pair<int, std::vector<int>>> queue;
  queue.emplace_back(0, std::move(all));
  while (!queue.empty()) {
    auto [id, idx] = std::move(queue.front());
    queue.pop_front();
    const int level = t.nodes_[id].level;
    if (level >= cfg.depth || static_cast<int>(idx.size()) < cfg.k || all_identical(data, idx)) continue;
    Rng rng(derive_seed(cfg.seed, static_cast<std::uint64_t>(id)));
    const Clustering cl = kmeans(data, idx, cfg.k, cfg.max_iters, rng);
    std::vector<std::vector<int>> groups(cl.centers.size());
    for (std::size_t i = 0; i < idx.size(); ++i) groups[cl.assign[i]].push_back(idx[i]);
    const auto nonempty = std::count_if(groups.begin(), groups.end(), [](auto& g) { return !g.empty(); });
    if (nonempty < 2) continue;
    t.nodes_[id].first_child = static_cast<int>(t.nodes_.size());
    t.nodes_[id].child_count = static_cast<int>(nonempty);
    for (std::size_t c = 0; c < groups.size(); ++c) {
      if (groups[c].empty()) continue;
      Node child;
      child.centroid = cl.centers[c];
      child.parent = id;
      child.level = level + 1;
      queue.emplace_back(static_cast<int>(t.nodes_.size()), std::move(groups[c]));
      t.nodes_.push_back(child);
    }
  }
  for (std::size_t i = 0; i < t.nodes_.size(); ++i)
    if (t.nodes_[i].child_count == 0) {
      t.nodes_[i].leaf_index = static_cast<int>(t.leaf_nodes_.size());
      t.leaf_nodes_.push_back(static_cast<int>(i));
    }
  t.weights_.assign(t.nodes_.size(), 0.0);
  return t;
}

std::vector<int> VocabularyTree::path(const Descriptor& d) const {
  std::vector<int> out;
  int id = 0;
  while (nodes_[id].child_count > 0) {
    const Node& n = nodes_[id];
    int best = n.first_child;
    float bd = l2_squared(d, nodes_[best].centroid);
    for (int c = n.first_child + 1; c < n.first_child + n.child_count; ++c) {
      const float dist = l2_squared(d, nodes_[c].centroid);
      if (dist < bd) bd = dist, best = c;
    }
    out.push_back(best);
    id = best;
  }
  return out;
}

int VocabularyTree::quantize(const Descriptor& d) const {
  int id = 0;
  while (nodes_[id].child_count > 0) {
    const Node& n = nodes_[id];
    int best = n.first_child;
    float bd = l2_squared(d, nodes_[best].centroid);
    for (int c = n.first_child + 1; c < n.first_child + n.child_count; ++c) {
      const float dist = l2_squared(d, nodes_[c].centroid);
      if (dist < bd) bd = dist, best = c;
    }
    id = best;
  }
  return nodes_[id].leaf_index;
}

WordCounts VocabularyTree::quantize_all(std::span<const Descriptor> ds) const {
  std::vector<int> words;
  words.reserve(ds.size());
  for (const auto& d : ds) words.push_back(quantize(d));
  std::sort(words.begin(), words.end());
  WordCounts out;
  for (int w : words) {
    if (!out.empty() && out.back().first == w)
      ++out.back().second;
    else
      out.emplace_back(w, 1);
  }
  return out;
}

void VocabularyTree::set_weights(std::vector<double> w) {
  if (w.size() != nodes_.size()) throw InvalidArgument("one weight per tree node required");
  weights_ = std::move(w);
}

std::vector<double> compute_weights(const VocabularyTree& tree, std::span<const WordCounts> images) {
  const std::size_t m = tree.node_count();
  std::vector<int> n_i(m, 0), stamp(m, -1);
  for (std::size_t img = 0; img < images.size(); ++img)
    for (const auto& [word, count] : images[img]) {
      if (count <= 0) continue;
      for (int id = tree.leaf_node(word); id >= 0 && stamp[id] != int(img); id = tree.node(id).parent) {
        stamp[id] = static_cast<int>(img);
        ++n_i[id];
      }
    }
  std::vector<double> w(m, 0.0);
  const double n = static_cast<double>(images.size());
  for (std::size_t i = 0; i < m; ++i)
    if (n_i[i] > 0) w[i] = std::log(n / n_i[i]);
  return w;
}

std::vector<double> compute_weights(const VocabularyTree& tree,
                                    std::span<const std::vector<Descriptor>> images) {
  std::vector<WordCounts> words;
  for (const auto& img : images) words.push_back(tree.quantize_all(img));
  return compute_weights(tree, words);
}

void VocabularyTree::save(std::ostream& out) const {
  io::put_magic(out, kTreeMagic, kTreeVersion);
  io::put<std::int32_t>(out, cfg_.k);
  io::put<std::int32_t>(out, cfg_.depth);
  io::put<std::int32_t>(out, cfg_.max_iters);
  io::put<std::uint64_t>(out, cfg_.seed);
  io::put<std::uint64_t>(out, nodes_.size());
  for (std::size_t i = 0; i < nodes_.size(); ++i) {
    const Node& n = nodes_[i];
    io::put<std::int32_t>(out, n.parent);
    io::put<std::int32_t>(out, n.first_child);
    io::put<std::int32_t>(out, n.child_count);
    io::put<std::int32_t>(out, n.level);
    io::put<std::int32_t>(out, n.leaf_index);
    io::put<double>(out, weights_[i]);
    io::put_array(out, n.centroid);
  }
}

VocabularyTree VocabularyTree::load(std::istream& in) {
  io::expect_magic(in, kTreeMagic, kTreeVersion, "vocabulary tree");
  VocabularyTree t;
  t.cfg_.k = io::get<std::int32_t>(in);
  t.cfg_.depth = io::get<std::int32_t>(in);
  t.cfg_.max_iters = io::get<std::int32_t>(in);
  t.cfg_.seed = io::get<std::uint64_t>(in);
  t.nodes_.resize(io::get<std::uint64_t>(in));
  t.weights_.resize(t.nodes_.size());
  for (std::size_t i = 0; i < t.nodes_.size(); ++i) {
    Node& n = t.nodes_[i];
    n.parent = io::get<std::int32_t>(in);
    n.first_child = io::get<std::int32_t>(in);
    n.child_count = io::get<std::int32_t>(in);
    n.level = io::get<std::int32_t>(in);
    n.leaf_index = io::get<std::int32_t>(in);
    t.weights_[i] = io::get<double>(in);
    io::get_array(in, n.centroid);
    if (n.leaf_index >= 0) t.leaf_nodes_.push_back(static_cast<int>(i));
  }
  return t;
}

void VocabularyTree::write_text(std::ostream& out) const {
  char buf[64];
  for (std::size_t i = 0; i < nodes_.size(); ++i) {
    const Node& n = nodes_[i];
    out << i << ' ' << n.parent << ' ' << n.level << ' ' << n.leaf_index;
    std::snprintf(buf, sizeof buf, " %.17g", weights_[i]);
    out << buf;
    for (float v : n.centroid) {
      std::snprintf(buf, sizeof buf, " %.9g", v);
      out << buf;
    }
    out << '\n';
  }
}

}  // namespace robovis::vtree
