#include "robovis/eval/benchmark.hpp"

#include <algorithm>
#include <chrono>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "robovis/error.hpp"
#include "robovis/imaging/pnm_io.hpp"

namespace robovis::eval {

namespace fs = std::filesystem;

std::vector<AnnotationRecord> Dataset::truth() const {
  std::vector<AnnotationRecord> out;
  for (const Scene& s : frames) out.insert(out.end(), s.truth.begin(), s.truth.end());
  return out;
}

Dataset load_dataset(const std::string& dir) {
  const fs::path root(dir);
  std::ifstream list(root / "frames.txt");
  if (!list) throw Error("cannot open " + (root / "frames.txt").string());
  Dataset data;
  std::string name;
  while (std::getline(list, name)) {
    if (name.empty() || name[0] == '#') continue;
    data.frames.push_back({name, read_pnm((root / name).string()), {}});
  }
  std::vector<AnnotationRecord> truth;
  if (fs::exists(root / "annotations.txt")) truth = load_annotations((root / "annotations.txt").string());
  for (AnnotationRecord& r : truth) {
    auto it = std::find_if(data.frames.begin(), data.frames.end(), [&](const Scene& s) { return s.frame == r.frame; });
    if (it == data.frames.end()) throw FormatError("annotation for unlisted frame " + r.frame);
    it->truth.push_back(std::move(r));
  }
  return data;
}

void save_dataset(const std::string& dir, const Dataset& data) {
  const fs::path root(dir);
  fs::create_directories(root);
  std::ofstream list(root / "frames.txt");
  std::ofstream ann(root / "annotations.txt");
  for (const Scene& s : data.frames) {
    list << s.frame << '\n';
    fs::create_directories((root / s.frame).parent_path());
    write_pgm((root / s.frame).string(), s.image);
    write_annotations(ann, s.truth);
  }
  if (!list || !ann) throw Error("failed writing dataset to " + dir);
}

BenchmarkResult run_benchmark(const Dataset& data, const Detector& detect, const std::string& method,
                              const MetricConfig& cfg) {
  cfg.validate();
  BenchmarkResult r;
  for (const Scene& s : data.frames) {
    const auto t0 = std::chrono::steady_clock::now();
    std::vector<Detection> dets = detect(s.image, s.frame);
    r.frame_ms.push_back(std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count());
    for (Detection& d : dets) {
      d.frame = s.frame;
      r.detections.push_back(std::move(d));
    }
  }
  r.report = EvalReport::build(method, static_cast<long>(data.frames.size()), r.detections, data.truth(), cfg);
  r.timing = timing_stats(r.frame_ms);
  return r;
}

void write_benchmark(const std::string& dir, const BenchmarkResult& r) {
  const fs::path root(dir);
  fs::create_directories(root);
  auto put = [&](const char* name, const std::string& text) {
    std::ofstream out(root / name, std::ios::binary);
    out << text;
    if (!out) throw Error("failed writing " + (root / name).string());
  };
  put("report.json", r.report.to_json().dump(2) + "\n");
  put("table.txt", r.report.table_text());
  put("overlap.csv", r.report.overlap_csv());
  std::ostringstream dets;
  write_detections(dets, r.detections);
  put("detections.txt", dets.str());
  nlohmann::json t = to_json(r.timing);
  t["frame_ms"] = r.frame_ms;
  put("timing.json", t.dump(2) + "\n");
}

std::vector<Detection> suppress_overlaps(std::vector<Detection> dets, double iou) {
  std::stable_sort(dets.begin(), dets.end(), [](const Detection& a, const Detection& b) { return a.score > b.score; });
  std::vector<Detection> kept;
  for (Detection& d : dets) {
    const bool clash = std::any_of(kept.begin(), kept.end(), [&](const Detection& k) {
      return k.frame == d.frame && k.class_name == d.class_name && overlap_ratio(k.box, d.box, false) > iou;
    });
    if (!clash) kept.push_back(std::move(d));
  }
  return kept;
}

}  // namespace robovis::eval
