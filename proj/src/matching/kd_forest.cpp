#include "robovis/matching/kd_forest.hpp"

#include <algorithm>
#include <bit>
#include <cstring>
#include <istream>
#include <numeric>
#include <ostream>
#include <queue>

#include "robovis/error.hpp"
#include "robovis/features/feature_io.hpp"
#include "robovis/random.hpp"

namespace robovis::matching {

void TwoNearest::offer(std::size_t i, float d, const DescriptorSet& db) {
  auto less = [](float da, std::size_t ia, float dbv, std::size_t ib) {
    return da < dbv || (da == dbv && ia < ib);
  };
  if (best == kNone || less(d, i, best_dist, best)) {
    if (best != kNone && !(db.owner(i) == db.owner(best))) {
      second = best;
      second_dist = best_dist;
    }
    best = i;
    best_dist = d;
  } else if (!(db.owner(i) == db.owner(best)) &&
             (second == kNone || less(d, i, second_dist, second))) {
    second = i;
    second_dist = d;
  }
}

TwoNearest brute_force_two_nearest(const features::Descriptor& q, const DescriptorSet& db) {
  TwoNearest r;
  for (std::size_t i = 0; i < db.size(); ++i) r.offer(i, l2_squared(q, db[i]), db);
  return r;
}

namespace {
constexpr int kVarianceSample = 100;
constexpr char kIndexMagic[4] = {'R', 'V', 'I', 'X'};
constexpr std::uint32_t kIndexVersion = 1;
}  // namespace

KdForest::KdForest(DescriptorSet db, ForestParams params) : db_(std::move(db)), params_(params) {
  if (db_.size() < 2)
    throw InvalidArgument("index needs at least 2 descriptors to form a second-best distance");
  if (params_.trees < 1 || params_.top_variance_dims < 1)
    throw InvalidArgument("forest needs >= 1 tree and >= 1 candidate split dimension");
  trees_.resize(params_.trees);
  for (int t = 0; t < params_.trees; ++t) build_tree(trees_[t], derive_seed(params_.seed, t));
}

void KdForest::build_tree(Tree& tree, std::uint64_t seed) const {
  constexpr int D = DescriptorSet::kDimension;
  Rng rng(seed);
  tree.perm.resize(db_.size());
  std::iota(tree.perm.begin(), tree.perm.end(), 0);
  tree.nodes.clear();
  tree.nodes.reserve(2 * db_.size());

  auto variances = [&](int begin, int end, int limit, std::array<double, D>& mean,
                       std::array<double, D>& var) {
    const int n = std::min(end - begin, limit);
    mean.fill(0.0);
    var.fill(0.0);
    for (int i = begin; i < begin + n; ++i) {
      const auto& v = db_[tree.perm[i]];
      for (int d = 0; d < D; ++d) mean[d] += v[d];
    }
    for (int d = 0; d < D; ++d) mean[d] /= n;
    for (int i = begin; i < begin + n; ++i) {
      const auto& v = db_[tree.perm[i]];
      for (int d = 0; d < D; ++d) {
        const double e = v[d] - mean[d];
        var[d] += e * e;
      }
    }
  };

  // Iterative build: (node index, begin, end)
  struct Pending {
    int node, begin, end;
  };
  std::vector<Pending> stack;
  tree.nodes.push_back({});
  stack.push_back({0, 0, static_cast<int>(db_.size())});
  while (!stack.empty()) {
    const Pending job = stack.back();
    stack.pop_back();
    Node node;
    node.begin = job.begin;
    node.end = job.end;
    if (job.end - job.begin <= 1) {
      tree.nodes[job.node] = node;
      continue;
    }
    std::array<double, D> mean, var;
    variances(job.begin, job.end, kVarianceSample, mean, var);
    if (*std::max_element(var.begin(), var.end()) == 0.0)
      variances(job.begin, job.end, job.end - job.begin, mean, var);
    if (*std::max_element(var.begin(), var.end()) == 0.0) {
      tree.nodes[job.node] = node;  // identical points share one leaf
      continue;
    }
    std::array<int, D> order;
    std::iota(order.begin(), order.end(), 0);
    const int top = std::min(params_.top_variance_dims, D);
    std::partial_sort(order.begin(), order.begin() + top, order.end(),
                      [&](int a, int b) { return var[a] > var[b] || (var[a] == var[b] && a < b); });
    const int dim = order[rng.below(static_cast<std::uint64_t>(top))];
    float split = static_cast<float>(mean[dim]);

    auto first = tree.perm.begin() + job.begin, last = tree.perm.begin() + job.end;
    auto mid = std::partition(first, last, [&](int p) { return db_[p][dim] < split; });
    if (mid == first || mid == last) {
      mid = first + (last - first) / 2;
      std::nth_element(first, mid, last, [&](int a, int b) {
        return db_[a][dim] < db_[b][dim] || (db_[a][dim] == db_[b][dim] && a < b);
      });
      split = db_[*mid][dim];
    }
    node.dim = dim;
    node.split = split;
    node.left = static_cast<int>(tree.nodes.size());
    node.right = node.left + 1;
    tree.nodes.push_back({});
    tree.nodes.push_back({});
    tree.nodes[job.node] = node;
    const int m = static_cast<int>(mid - tree.perm.begin());
    stack.push_back({node.right, m, job.end});
    stack.push_back({node.left, job.begin, m});
  }
}

TwoNearest KdForest::search(const features::Descriptor& q, int checks, Scratch& scratch) const {
  if (checks == kUnlimitedChecks) return brute_force_two_nearest(q, db_);

  if (scratch.stamp.size() != db_.size()) {
    scratch.stamp.assign(db_.size(), 0);
    scratch.epoch = 0;
  }
  if (++scratch.epoch == 0) {
    std::fill(scratch.stamp.begin(), scratch.stamp.end(), 0);
    scratch.epoch = 1;
  }

  struct Branch {
    float bound;
    int tree;
    int node;
    bool operator>(const Branch& o) const {
      return bound > o.bound || (bound == o.bound && (tree > o.tree || (tree == o.tree && node > o.node)));
    }
  };
  std::priority_queue<Branch, std::vector<Branch>, std::greater<>> heap;
  TwoNearest result;
  int checked = 0;

  auto descend = [&](int t, int node, float bound) {
    const Tree& tr = trees_[t];
    while (tr.nodes[node].dim >= 0) {
      const Node& n = tr.nodes[node];
      const float diff = q[n.dim] - n.split;
      const int near = diff < 0 ? n.left : n.right;
      const int far = diff < 0 ? n.right : n.left;
      heap.push({bound + diff * diff, t, far});
      node = near;
    }
    const Node& leaf = tr.nodes[node];
    for (int i = leaf.begin; i < leaf.end; ++i) {
      const int p = tr.perm[i];
      if (scratch.stamp[p] == scratch.epoch) continue;
      scratch.stamp[p] = scratch.epoch;
      result.offer(static_cast<std::size_t>(p), l2_squared(q, db_[p]), db_);
      ++checked;
    }
  };

  for (int t = 0; t < static_cast<int>(trees_.size()); ++t) descend(t, 0, 0.0f);
  while (!heap.empty() && checked < checks) {
    const Branch b = heap.top();
    heap.pop();
    if (b.bound >= result.second_dist) continue;
    descend(b.tree, b.node, b.bound);
  }
  return result;
}

namespace {

template <typename T>
void put(std::ostream& out, const T& v) {
  out.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <typename T>
T get(std::istream& in) {
  T v{};
  if (!in.read(reinterpret_cast<char*>(&v), sizeof(T))) throw FormatError("truncated index file");
  return v;
}

}  // namespace

void KdForest::save(std::ostream& out) const {
  out.write(kIndexMagic, 4);
  put(out, kIndexVersion);
  put(out, features::kFeatureDumpVersion);
  put<std::uint32_t>(out, DescriptorSet::kDimension);
  put<std::uint64_t>(out, db_.size());
  put<std::int32_t>(out, params_.trees);
  put<std::int32_t>(out, params_.top_variance_dims);
  put<std::uint64_t>(out, params_.seed);
  for (std::size_t i = 0; i < db_.size(); ++i) {
    put<std::int32_t>(out, db_.owner(i).model_id);
    put<std::int32_t>(out, db_.owner(i).keypoint_index);
    out.write(reinterpret_cast<const char*>(db_[i].data()), sizeof(features::Descriptor));
  }
  for (const Tree& t : trees_) {
    put<std::uint64_t>(out, t.nodes.size());
    for (const Node& n : t.nodes) {
      put<std::int32_t>(out, n.dim);
      put<float>(out, n.split);
      put<std::int32_t>(out, n.left);
      put<std::int32_t>(out, n.right);
      put<std::int32_t>(out, n.begin);
      put<std::int32_t>(out, n.end);
    }
    out.write(reinterpret_cast<const char*>(t.perm.data()),
              static_cast<std::streamsize>(t.perm.size() * sizeof(int)));
  }
}

KdForest KdForest::load(std::istream& in) {
  char magic[4];
  if (!in.read(magic, 4) || std::memcmp(magic, kIndexMagic, 4) != 0)
    throw FormatError("not an index file");
  if (get<std::uint32_t>(in) != kIndexVersion) throw FormatError("unsupported index version");
  if (get<std::uint32_t>(in) != features::kFeatureDumpVersion ||
      get<std::uint32_t>(in) != DescriptorSet::kDimension)
    throw FormatError("index built for a different descriptor format; rebuild it");
  KdForest f;
  const auto m = get<std::uint64_t>(in);
  f.params_.trees = get<std::int32_t>(in);
  f.params_.top_variance_dims = get<std::int32_t>(in);
  f.params_.seed = get<std::uint64_t>(in);
  for (std::uint64_t i = 0; i < m; ++i) {
    OwnerTag tag;
    tag.model_id = get<std::int32_t>(in);
    tag.keypoint_index = get<std::int32_t>(in);
    features::Descriptor d;
    if (!in.read(reinterpret_cast<char*>(d.data()), sizeof d)) throw FormatError("truncated index file");
    f.db_.add(d, tag);
  }
  f.trees_.resize(f.params_.trees);
  for (Tree& t : f.trees_) {
    t.nodes.resize(get<std::uint64_t>(in));
    for (Node& n : t.nodes) {
      n.dim = get<std::int32_t>(in);
      n.split = get<float>(in);
      n.left = get<std::int32_t>(in);
      n.right = get<std::int32_t>(in);
      n.begin = get<std::int32_t>(in);
      n.end = get<std::int32_t>(in);
    }
    t.perm.resize(m);
    if (!in.read(reinterpret_cast<char*>(t.perm.data()), static_cast<std::streamsize>(m * sizeof(int))))
      throw FormatError("truncated index file");
  }
  return f;
}

}  // namespace robovis::matching
