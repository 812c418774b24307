#include "robovis/vtree/signature.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include "robovis/error.hpp"
#include "serialize.hpp"

namespace robovis::vtree {

Signature make_signature(const WordCounts& words, const VocabularyTree& tree, Norm norm, Scope scope) {
  std::map<int, double> counts;
  for (const auto& [word, c] : words) {
    if (c <= 0) continue;
    const int leaf = tree.leaf_node(word);
    if (scope == Scope::LeavesOnly) {
      counts[leaf] += c;
      continue;
    }
    for (int id = leaf; id > 0; id = tree.node(id).parent) counts[id] += c;
  }
  if (counts.empty()) throw InvalidArgument("cannot build a signature for an image without features");

  Signature s;
  s.norm = norm;
  const auto& w = tree.weights();
  double total = 0.0;
  for (const auto& [id, n] : counts) {
    const double v = n * w[id];
    if (!(v > 0)) continue;
    s.entries.emplace_back(id, v);
    total += norm == Norm::L1 ? v : v * v;
  }
  if (norm == Norm::L2) total = std::sqrt(total);
  for (auto& e : s.entries) e.second /= total;
  return s;
}

Signature make_signature(std::span<const features::Descriptor> ds, const VocabularyTree& tree,
                         Norm norm, Scope scope) {
  return make_signature(tree.quantize_all(ds), tree, norm, scope);
}

namespace {

// Calls f(q_i, d_i) over the union of both supports, missing entries as 0.
template <typename F>
void merge(const Signature& q, const Signature& d, F f) {
  auto a = q.entries.begin(), b = d.entries.begin();
  while (a != q.entries.end() || b != d.entries.end()) {
    if (b == d.entries.end() || (a != q.entries.end() && a->first < b->first)) {
      f(a->second, 0.0);
      ++a;
    } else if (a == q.entries.end() || b->first < a->first) {
      f(0.0, b->second);
      ++b;
    } else {
      f(a->second, b->second);
      ++a, ++b;
    }
  }
}

}  // namespace

double score(const Signature& q, const Signature& d) {
  if (q.norm != d.norm) throw InvalidArgument("signatures were normalized in different norms");
  double acc = 0.0;
  if (q.norm == Norm::L1) {
    merge(q, d, [&](double x, double y) { acc += std::abs(x - y); });
    return acc;
  }
  merge(q, d, [&](double x, double y) { acc += (x - y) * (x - y); });
  return std::sqrt(acc);
}

double dot(const Signature& q, const Signature& d) {
  double acc = 0.0;
  merge(q, d, [&](double x, double y) { acc += x * y; });
  return acc;
}

InvertedFile::InvertedFile(std::span<const Signature> db) : image_count_(db.size()) {
  for (std::size_t i = 0; i < db.size(); ++i) {
    if (db[i].norm != Norm::L2) throw InvalidArgument("the inverted file needs L2-normalized signatures");
    for (const auto& [node, v] : db[i].entries) {
      if (node >= static_cast<int>(postings_.size())) postings_.resize(node + 1);
      postings_[node].emplace_back(static_cast<int>(i), v);
    }
  }
  norms2_.assign(db.size(), 0.0);
  for (std::size_t i = 0; i < db.size(); ++i)
    for (const auto& e : db[i].entries) norms2_[i] += e.second * e.second;
}

const std::vector<std::pair<int, double>>& InvertedFile::postings(int node) const {
  static const std::vector<std::pair<int, double>> kEmpty;
  return node >= 0 && node < static_cast<int>(postings_.size()) ? postings_[node] : kEmpty;
}

std::vector<RankedImage> InvertedFile::query(const Signature& q) const {
  if (q.norm != Norm::L2) throw InvalidArgument("inverted-file queries need an L2-normalized signature");
  std::vector<double> acc(image_count_, 0.0);
  double qq = 0.0;
  for (const auto& [node, v] : q.entries) {
    qq += v * v;
    for (const auto& [img, d] : postings(node)) acc[img] += v * d;
  }
  std::vector<RankedImage> out(image_count_);
  for (std::size_t i = 0; i < image_count_; ++i) {
    // ‖q − d‖² = ‖q‖² + ‖d‖² − 2Σq·d, which is 2 − 2Σq·d for unit signatures.
    const double dist2 = qq + norms2_[i] - 2.0 * acc[i];
    out[i] = {static_cast<int>(i), acc[i], std::max(0.0, dist2)};
  }
  std::sort(out.begin(), out.end(), [](const RankedImage& a, const RankedImage& b) {
    return a.product > b.product || (a.product == b.product && a.image_id < b.image_id);
  });
  return out;
}

namespace {
constexpr char kIndexMagic[4] = {'R', 'V', 'I', 'F'};
constexpr std::uint32_t kIndexVersion = 1;
}  // namespace

void InvertedFile::save(std::ostream& out) const {
  io::put_magic(out, kIndexMagic, kIndexVersion);
  io::put<std::uint64_t>(out, image_count_);
  for (double v : norms2_) io::put<double>(out, v);
  io::put<std::uint64_t>(out, postings_.size());
  for (const auto& list : postings_) {
    io::put<std::uint64_t>(out, list.size());
    for (const auto& [img, v] : list) {
      io::put<std::int32_t>(out, img);
      io::put<double>(out, v);
    }
  }
}

InvertedFile InvertedFile::load(std::istream& in) {
  io::expect_magic(in, kIndexMagic, kIndexVersion, "inverted file");
  InvertedFile f;
  f.image_count_ = io::get<std::uint64_t>(in);
  f.norms2_.resize(f.image_count_);
  for (double& v : f.norms2_) v = io::get<double>(in);
  f.postings_.resize(io::get<std::uint64_t>(in));
  for (auto& list : f.postings_) {
    list.resize(io::get<std::uint64_t>(in));
    for (auto& [img, v] : list) {
      img = io::get<std::int32_t>(in);
      v = io::get<double>(in);
    }
  }
  return f;
}

KnnResult classify_knn(std::span<const RankedImage> ranking, std::span<const std::string> labels,
                       int k_nn) {
  if (k_nn < 1) throw InvalidArgument("k_nn must be >= 1");
  std::map<std::string, std::pair<int, double>> tally;  // label -> (votes, summed distance)
  const std::size_t n = std::min<std::size_t>(ranking.size(), static_cast<std::size_t>(k_nn));
  for (std::size_t i = 0; i < n; ++i) {
    auto& t = tally[labels[ranking[i].image_id]];
    ++t.first;
    t.second += ranking[i].distance;
  }
  KnnResult r;
  const std::pair<int, double>* best = nullptr;
  for (const auto& [label, t] : tally) {
    r.votes.emplace_back(label, t.first);
    if (!best || t.first > best->first || (t.first == best->first && t.second < best->second)) {
      best = &t;
      r.label = label;
    }
  }
  return r;
}

}  // namespace robovis::vtree
