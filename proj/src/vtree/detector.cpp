#include "robovis/vtree/detector.hpp"

#include <istream>
#include <ostream>

#include "robovis/error.hpp"
#include "serialize.hpp"

namespace robovis::vtree {

VocabModel VocabModel::build(VocabularyTree tree, std::span<const features::FeatureSet> images,
                             std::vector<std::string> labels) {
  if (images.size() != labels.size()) throw InvalidArgument("one label per database image required");
  std::vector<WordCounts> words;
  words.reserve(images.size());
  for (const auto& fs : images) words.push_back(tree.quantize_all(fs.descriptors));
  tree.set_weights(compute_weights(tree, words));
  std::vector<Signature> sigs;
  for (const auto& w : words) sigs.push_back(make_signature(w, tree, Norm::L2, Scope::LeavesOnly));
  VocabModel m{std::move(tree), InvertedFile(sigs), std::move(labels)};
  return m;
}

Signature VocabModel::signature(const WordCounts& words) const {
  return make_signature(words, tree, Norm::L2, Scope::LeavesOnly);
}

KnnResult VocabModel::classify(const WordCounts& words, int k_nn) const {
  const auto ranking = index.query(signature(words));
  return classify_knn(ranking, labels, k_nn);
}

namespace {
constexpr char kModelMagic[4] = {'R', 'V', 'V', 'M'};
constexpr std::uint32_t kModelVersion = 1;
}  // namespace

void VocabModel::save(std::ostream& out) const {
  io::put_magic(out, kModelMagic, kModelVersion);
  tree.save(out);
  index.save(out);
  io::put<std::uint64_t>(out, labels.size());
  for (const auto& l : labels) io::put_string(out, l);
}

VocabModel VocabModel::load(std::istream& in) {
  io::expect_magic(in, kModelMagic, kModelVersion, "vocabulary model");
  VocabModel m{VocabularyTree::load(in), InvertedFile::load(in), {}};
  m.labels.resize(io::get<std::uint64_t>(in));
  for (auto& l : m.labels) l = io::get_string(in);
  if (m.labels.size() != m.index.image_count()) throw FormatError("label count does not match the index");
  return m;
}

std::vector<Detection> classify_windows(const VocabModel& model, const features::FeatureSet& image,
                                        int width, int height, std::span<const BoundingBox> windows,
                                        const WindowClassifierConfig& cfg, const std::string& frame) {
  std::vector<WordPoint> pts;
  pts.reserve(image.size());
  for (std::size_t i = 0; i < image.size(); ++i)
    pts.push_back({image.keypoints[i].x, image.keypoints[i].y, model.tree.quantize(image.descriptors[i])});
  const WordIntegralImages wii(width, height, pts);

  std::vector<Detection> out;
  for (const BoundingBox& box : windows) {
    const WordCounts h = wii.window_histogram(Window(box));
    int total = 0;
    for (const auto& e : h) total += e.second;
    if (total < cfg.min_features) continue;
    const Signature sig = model.signature(h);
    if (sig.entries.empty()) continue;
    const KnnResult r = classify_knn(model.index.query(sig), model.labels, cfg.k_nn);
    if (r.label.empty() || r.label == kBackgroundLabel) continue;
    int votes = 0;
    for (const auto& [label, v] : r.votes)
      if (label == r.label) votes = v;
    out.push_back({frame, r.label, box, static_cast<double>(votes) / cfg.k_nn});
  }
  return out;
}

}  // namespace robovis::vtree
