#include "commands.hpp"

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <sstream>

#include "robovis/eval/methods.hpp"
#include "robovis/features/feature_io.hpp"
#include "robovis/imaging/pnm_io.hpp"

namespace robovis::cli {

namespace fs = std::filesystem;

namespace {

struct ListEntry {
  std::string label;
  fs::path path;
};

// "path" or "label path" per line; paths are relative to the list file.
std::vector<ListEntry> read_list(const std::string& file) {
  std::ifstream in(file);
  if (!in) throw Error("cannot open list " + file);
  const fs::path base = fs::path(file).parent_path();
  std::vector<ListEntry> out;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line[0] == '#') continue;
    std::istringstream ss(line);
    std::string a, b, extra;
    ss >> a >> b >> extra;
    if (a.empty()) continue;
    if (!extra.empty()) throw FormatError(file + ": expected 'path' or 'label path'", line_no);
    out.push_back(b.empty() ? ListEntry{"", base / a} : ListEntry{a, base / b});
  }
  return out;
}

void write_list(const fs::path& file, const std::vector<std::pair<std::string, std::string>>& rows) {
  std::ofstream out(file);
  for (const auto& [label, path] : rows) out << (label.empty() ? "" : label + " ") << path << '\n';
  if (!out) throw Error("failed writing " + file.string());
}

std::vector<Image> read_images(const std::string& list) {
  std::vector<Image> out;
  for (const ListEntry& e : read_list(list)) out.push_back(read_pnm(e.path));
  return out;
}

void write_text_file(const std::string& path, const std::string& text) {
  if (const fs::path parent = fs::path(path).parent_path(); !parent.empty()) fs::create_directories(parent);
  std::ofstream out(path, std::ios::binary);
  out << text;
  if (!out) throw Error("failed writing " + path);
}

features::ScaleSpaceConfig scale_space(Config& c, const std::string& p) {
  features::ScaleSpaceConfig s;
  s.octaves = c.get(p + ".octaves", s.octaves);
  s.scales_per_octave = c.get(p + ".scales_per_octave", s.scales_per_octave);
  s.initial_sigma = c.get(p + ".initial_sigma", s.initial_sigma);
  s.contrast_threshold = c.get(p + ".contrast_threshold", s.contrast_threshold);
  s.edge_ratio_threshold = c.get(p + ".edge_ratio_threshold", s.edge_ratio_threshold);
  s.upsample = c.get(p + ".upsample", s.upsample);
  s.validate();
  return s;
}

sift::SiftPipelineConfig sift_config(Config& c) {
  sift::SiftPipelineConfig s = sift::table_preset(c.get("sift.preset", 5));
  s.scale_space = scale_space(c, "sift.scale_space");
  s.match.distance_ratio = c.get("sift.match.distance_ratio", s.match.distance_ratio);
  s.match.approx = c.get("sift.match.approx", s.match.approx);
  s.match.approx_checks = c.get("sift.match.approx_checks", s.match.approx_checks);
  s.hough.location_bin_fraction = c.get("sift.hough.location_bin_fraction", s.hough.location_bin_fraction);
  s.hough.orientation_bin = c.get("sift.hough.orientation_bin", s.hough.orientation_bin);
  s.hough.scale_bin_base = c.get("sift.hough.scale_bin_base", s.hough.scale_bin_base);
  s.hough.min_votes = c.get("sift.hough.min_votes", s.hough.min_votes);
  s.hough.nms = c.get("sift.hough.nms", s.hough.nms);
  s.use_ransac = c.get("sift.use_ransac", s.use_ransac);
  s.use_irls = c.get("sift.use_irls", s.use_irls);
  s.use_heuristics = c.get("sift.use_heuristics", s.use_heuristics);
  s.ransac.iterations = c.get("sift.ransac.iterations", s.ransac.iterations);
  s.ransac.inlier_px = c.get("sift.ransac.inlier_px", s.ransac.inlier_px);
  s.irls.max_iters = c.get("sift.irls.max_iters", s.irls.max_iters);
  s.irls.tol = c.get("sift.irls.tol", s.irls.tol);
  s.irls.tuning = c.get("sift.irls.tuning", s.irls.tuning);
  s.irls.min_scale = c.get("sift.irls.min_scale", s.irls.min_scale);
  s.irls.l1_iters = c.get("sift.irls.l1_iters", s.irls.l1_iters);
  s.heuristics.min_center_separation = c.get("sift.heuristics.min_center_separation", s.heuristics.min_center_separation);
  s.heuristics.min_xy_scale_ratio = c.get("sift.heuristics.min_xy_scale_ratio", s.heuristics.min_xy_scale_ratio);
  s.seed = c.get<std::uint64_t>("sift.seed", s.seed);
  s.validate();
  return s;
}

std::vector<sift::ObjectModel> sift_models(const std::string& list, const features::ScaleSpaceConfig& ss) {
  std::vector<sift::ObjectModel> models;
  for (const ListEntry& e : read_list(list)) {
    if (e.label.empty()) throw FormatError("model list " + list + " needs 'class path' lines");
    models.push_back(sift::make_model(static_cast<int>(models.size()), e.label, read_pnm(e.path), ss));
  }
  if (models.empty()) throw InvalidArgument("model list " + list + " is empty");
  return models;
}

eval::VtreeDetectorConfig vtree_config(Config& c) {
  eval::VtreeDetectorConfig v;
  const std::string src = c.get<std::string>("vtree.proposals", "floodcanny");
  if (src == "floodcanny")
    v.proposals = eval::ProposalSource::Floodcanny;
  else if (src == "sliding")
    v.proposals = eval::ProposalSource::Sliding;
  else
    throw InvalidArgument("vtree.proposals must be floodcanny or sliding");
  v.proposal.tolerance = c.get("vtree.floodcanny.tolerance", v.proposal.tolerance);
  v.proposal.min_area = c.get("vtree.floodcanny.min_area", v.proposal.min_area);
  v.proposal.multipliers = c.get("vtree.floodcanny.multipliers", v.proposal.multipliers);
  v.proposal.canny_low = c.get("vtree.floodcanny.canny_low", v.proposal.canny_low);
  v.proposal.canny_high = c.get("vtree.floodcanny.canny_high", v.proposal.canny_high);
  v.proposal.validate();
  v.sliding_step = c.get("vtree.sliding_step", v.sliding_step);
  if (c.has("vtree.sliding_shapes")) {
    v.sliding_shapes.clear();
    for (const auto& wh : c.get<std::vector<std::vector<int>>>("vtree.sliding_shapes", {})) {
      if (wh.size() != 2) throw InvalidArgument("vtree.sliding_shapes entries are [width, height]");
      v.sliding_shapes.push_back({wh[0], wh[1]});
    }
  }
  v.classifier.k_nn = c.get("vtree.k_nn", v.classifier.k_nn);
  v.classifier.min_features = c.get("vtree.min_features", v.classifier.min_features);
  v.scale_space = scale_space(c, "vtree.scale_space");
  v.nms_iou = c.get("vtree.nms_iou", v.nms_iou);
  return v;
}

cascade::ScanConfig scan_config(Config& c) {
  cascade::ScanConfig s;
  s.scale_factor = c.get("cascade.scan.scale_factor", s.scale_factor);
  s.step = c.get("cascade.scan.step", s.step);
  s.min_neighbors = c.get("cascade.scan.min_neighbors", s.min_neighbors);
  s.group_overlap = c.get("cascade.scan.group_overlap", s.group_overlap);
  s.validate();
  return s;
}

std::vector<cascade::Cascade> load_cascades(Config& c) {
  std::vector<cascade::Cascade> out;
  for (const std::string& path : c.require<std::vector<std::string>>("cascade.models")) {
    std::ifstream in(path);
    if (!in) throw Error("cannot open cascade model " + path);
    out.push_back(cascade::Cascade::load(in));
  }
  if (out.empty()) throw InvalidArgument("cascade.models is empty");
  return out;
}

vtree::VocabModel load_vocab(Config& c) {
  const std::string path = c.require<std::string>("vtree.model");
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open vocabulary model " + path);
  return vtree::VocabModel::load(in);
}

// Loads everything the method needs before any image is touched.
struct MethodRuntime {
  std::unique_ptr<sift::SiftRecognizer> sift;
  std::unique_ptr<vtree::VocabModel> vocab;
  std::vector<cascade::Cascade> cascades;
  eval::Detector detect;
};

MethodRuntime make_method(Config& c, const std::string& method) {
  MethodRuntime m;
  if (method == "sift") {
    const sift::SiftPipelineConfig cfg = sift_config(c);
    m.sift = std::make_unique<sift::SiftRecognizer>(sift_models(c.require<std::string>("sift.models"), cfg.scale_space), cfg);
    m.detect = eval::sift_detector(*m.sift);
  } else if (method == "vtree") {
    m.vocab = std::make_unique<vtree::VocabModel>(load_vocab(c));
    m.detect = eval::vtree_detector(*m.vocab, vtree_config(c));
  } else if (method == "cascade") {
    m.cascades = load_cascades(c);
    m.detect = eval::cascade_detector(m.cascades, scan_config(c));
  } else {
    throw InvalidArgument("method must be sift, vtree or cascade");
  }
  return m;
}

eval::MetricConfig metric_config(Config& c) {
  eval::MetricConfig m;
  m.beta = c.get("metric.beta", m.beta);
  m.overlap = c.get("metric.overlap", m.overlap);
  m.mode = eval::parse_overlap_mode(c.get<std::string>("metric.mode", eval::to_string(m.mode)));
  m.validate();
  return m;
}

std::string resolve_method(Config& c, const std::string& flag) {
  const std::string from_config = c.get<std::string>("method", "");
  if (!flag.empty() && !from_config.empty() && flag != from_config)
    throw InvalidArgument("--method " + flag + " contradicts config method " + from_config);
  const std::string m = flag.empty() ? from_config : flag;
  if (m.empty()) throw InvalidArgument("no method given (--method or config 'method')");
  return m;
}

}  // namespace

int run_extract(Config& c) {
  const std::string image = c.require<std::string>("image");
  const std::string out = c.require<std::string>("out");
  const std::string format = c.get<std::string>("format", "binary");
  const features::ScaleSpaceConfig ss = scale_space(c, "scale_space");
  c.finish();
  const features::FeatureSet fs = features::extract_features(read_pnm(image), ss);
  if (format == "binary") {
    features::save_features(out, fs);
  } else if (format == "text") {
    std::ostringstream text;
    features::write_features_text(text, fs);
    write_text_file(out, text.str());
  } else {
    throw InvalidArgument("format must be binary or text");
  }
  std::cerr << "extract: " << fs.size() << " features -> " << out << "\n";
  return 0;
}

int run_train_tree(Config& c) {
  std::vector<eval::ObjectImage> objects;
  for (const ListEntry& e : read_list(c.require<std::string>("models"))) {
    if (e.label.empty()) throw FormatError("model list needs 'class path' lines");
    objects.push_back({e.label, read_pnm(e.path)});
  }
  std::vector<Image> backgrounds;
  if (c.has("backgrounds")) backgrounds = read_images(c.require<std::string>("backgrounds"));
  const std::string out = c.require<std::string>("out");
  eval::VtreeTrainingConfig t;
  t.tree.k = c.get("tree.k", t.tree.k);
  t.tree.depth = c.get("tree.depth", t.tree.depth);
  t.tree.max_iters = c.get("tree.max_iters", t.tree.max_iters);
  t.tree.validate();
  t.scale_space = scale_space(c, "scale_space");
  t.views_per_object = c.get("views_per_object", t.views_per_object);
  t.background_crops = c.get("background_crops", t.background_crops);
  t.crop_size = c.get("crop_size", t.crop_size);
  t.seed = c.require<std::uint64_t>("seed");
  c.finish();
  const vtree::VocabModel model = eval::train_vocab_model(objects, backgrounds, t);
  std::ostringstream bytes;
  model.save(bytes);
  write_text_file(out, bytes.str());
  std::cerr << "train-tree: " << model.tree.leaf_count() << " words, " << model.labels.size()
            << " database images -> " << out << "\n";
  return 0;
}

int run_train_cascade(Config& c) {
  std::vector<Image> positives = read_images(c.require<std::string>("positives"));
  const std::vector<Image> negatives = read_images(c.require<std::string>("negatives"));
  const std::string out = c.require<std::string>("out");
  const std::string name = c.require<std::string>("class");
  const int views = c.get("views", 0);
  cascade::BoostConfig b;
  b.min_detection_rate = c.get("boost.min_detection_rate", b.min_detection_rate);
  b.max_false_positive_rate = c.get("boost.max_false_positive_rate", b.max_false_positive_rate);
  b.max_stumps = c.get("boost.max_stumps", b.max_stumps);
  b.max_stages = c.get("boost.max_stages", b.max_stages);
  b.negatives_per_stage = c.get("boost.negatives_per_stage", b.negatives_per_stage);
  b.feature_pool = c.get("boost.feature_pool", b.feature_pool);
  b.max_mining_attempts = c.get("boost.max_mining_attempts", b.max_mining_attempts);
  b.window_w = c.get("boost.window_width", b.window_w);
  b.window_h = c.get("boost.window_height", b.window_h);
  b.seed = c.require<std::uint64_t>("seed");
  c.finish();
  if (views > 0) {
    const std::size_t base = positives.size();
    for (std::size_t i = 0; i < base; ++i)
      for (Image& v : cascade::synth_views(positives[i], views, derive_seed(b.seed, 1000 + i))) positives.push_back(std::move(v));
  }
  cascade::TrainingLog log;
  const cascade::Cascade model = cascade::train_cascade(positives, negatives, b, name, &log);
  std::ostringstream text;
  model.save(text);
  write_text_file(out, text.str());
  for (std::size_t s = 0; s < log.stages.size(); ++s)
    std::fprintf(stderr, "stage %zu: %zu stumps, %zu positives, %zu negatives (%lld windows tried), d=%.4f f=%.4f\n", s,
                 model.stages[s].stumps.size(), log.stages[s].positives, log.stages[s].negatives,
                 log.stages[s].mining_attempts, log.stages[s].detection_rate, log.stages[s].false_positive_rate);
  for (const std::string& w : log.warnings) std::cerr << "warning: " << w << "\n";
  std::cerr << "train-cascade: " << model.stages.size() << " stages -> " << out << "\n";
  return 0;
}

int run_detect(Config& c, const std::string& flag) {
  const std::string method = resolve_method(c, flag);
  const std::string image = c.require<std::string>("image");
  const std::string frame = c.get<std::string>("frame", fs::path(image).filename().string());
  const std::string out = c.get<std::string>("out", "");
  MethodRuntime m = make_method(c, method);
  c.finish();
  const std::vector<Detection> dets = m.detect(read_pnm(image), frame);
  std::ostringstream text;
  eval::write_detections(text, dets);
  if (out.empty())
    std::cout << text.str();
  else
    write_text_file(out, text.str());
  return 0;
}

int run_bench(Config& c, const std::string& flag) {
  const std::string method = resolve_method(c, flag);
  const std::string dataset = c.require<std::string>("dataset");
  const std::string out = c.require<std::string>("out");
  const eval::MetricConfig metric = metric_config(c);
  MethodRuntime m = make_method(c, method);
  c.finish();
  const eval::BenchmarkResult r = eval::run_benchmark(eval::load_dataset(dataset), m.detect, method, metric);
  eval::write_benchmark(out, r);
  std::cout << r.report.table_text();
  return 0;
}

int run_synth(Config& c) {
  const std::string task = c.require<std::string>("task");
  const fs::path out = c.require<std::string>("out");
  const auto seed = c.require<std::uint64_t>("seed");
  const int scenes = c.get("scenes", 50);
  const int null_scenes = c.get("null_scenes", 0);
  const int width = c.get("width", 640), height = c.get("height", 480);
  fs::create_directories(out / "frames");
  eval::Dataset data;
  auto frame_name = [](const char* prefix, int i) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "frames/%s%04d.pgm", prefix, i);
    return std::string(buf);
  };

  if (task == "posters" || task == "textureless") {
    const int objects = c.get("objects", task == "posters" ? 5 : 3);
    const int ow = c.get("object_width", task == "posters" ? 160 : 200);
    const int oh = c.get("object_height", task == "posters" ? 120 : 150);
    const int n_bg = c.get("backgrounds", 10);
    eval::SceneSpec spec;
    spec.width = width;
    spec.height = height;
    spec.min_instances = c.get("scene.min_instances", 1);
    spec.max_instances = c.get("scene.max_instances", task == "posters" ? 3 : 2);
    spec.min_scale = c.get("scene.min_scale", task == "posters" ? 0.8 : 0.8);
    spec.max_scale = c.get("scene.max_scale", task == "posters" ? 1.5 : 1.2);
    spec.max_rotation = c.get("scene.max_rotation", task == "posters" ? 3.14159 : 0.3);
    spec.max_shear = c.get("scene.max_shear", spec.max_shear);
    spec.blur_probability = c.get("scene.blur_probability", spec.blur_probability);
    spec.illumination_probability = c.get("scene.illumination_probability", spec.illumination_probability);
    spec.occlusion_probability = c.get("scene.occlusion_probability", spec.occlusion_probability);
    c.finish();
    fs::create_directories(out / "models");
    fs::create_directories(out / "backgrounds");
    std::vector<eval::ObjectImage> objs;
    std::vector<std::pair<std::string, std::string>> model_rows, bg_rows;
    for (int k = 0; k < objects; ++k) {
      const std::uint64_t s = derive_seed(seed, 100 + static_cast<std::uint64_t>(k));
      const std::string name = (task == "posters" ? "poster" : "flat") + std::to_string(k);
      objs.push_back({name, task == "posters" ? eval::textured_object(ow, oh, s) : eval::textureless_object(ow, oh, s)});
      write_pgm(out / "models" / (name + ".pgm"), objs.back().image);
      model_rows.push_back({name, "models/" + name + ".pgm"});
    }
    // Training backgrounds are written out; scenes use a disjoint set.
    std::vector<Image> scene_bgs;
    for (int i = 0; i < n_bg; ++i) {
      const std::string rel = "backgrounds/bg" + std::to_string(i) + ".pgm";
      write_pgm(out / rel, eval::clutter_background(width, height, derive_seed(seed, 200 + static_cast<std::uint64_t>(i))));
      bg_rows.push_back({"", rel});
      scene_bgs.push_back(eval::clutter_background(width, height, derive_seed(seed, 300 + static_cast<std::uint64_t>(i))));
    }
    write_list(out / "models.txt", model_rows);
    write_list(out / "backgrounds.txt", bg_rows);
    for (int i = 0; i < scenes; ++i)
      data.frames.push_back(eval::generate_synthetic_scene(objs, scene_bgs, spec,
                                                           derive_seed(seed, 10000 + static_cast<std::uint64_t>(i)),
                                                           frame_name("scene", i)));
    for (int i = 0; i < null_scenes; ++i)
      data.frames.push_back({frame_name("null", i),
                             eval::clutter_background(width, height, derive_seed(seed, 20000 + static_cast<std::uint64_t>(i))),
                             {}});
  } else if (task == "blobs") {
    const int positives = c.get("positives", 500);
    const int negatives = c.get("negatives", 20);
    const int nw = c.get("negative_width", 320), nh = c.get("negative_height", 240);
    const int per_scene = c.get("per_scene", 3);
    const int min_side = c.get("min_side", 24), max_side = c.get("max_side", 72);
    const int window = c.get("window", 24);
    c.finish();
    fs::create_directories(out / "positives");
    fs::create_directories(out / "negatives");
    std::vector<std::pair<std::string, std::string>> pos_rows, neg_rows;
    for (int i = 0; i < positives; ++i) {
      const std::string rel = frame_name("p", i).replace(0, 6, "positives");
      write_pgm(out / rel, eval::blob_window(window, derive_seed(seed, 1'000'000 + static_cast<std::uint64_t>(i))));
      pos_rows.push_back({"", rel});
    }
    for (int i = 0; i < negatives; ++i) {
      const std::string rel = frame_name("n", i).replace(0, 6, "negatives");
      write_pgm(out / rel, eval::blob_free_clutter(nw, nh, derive_seed(seed, 2'000'000 + static_cast<std::uint64_t>(i))));
      neg_rows.push_back({"", rel});
    }
    write_list(out / "positives.txt", pos_rows);
    write_list(out / "negatives.txt", neg_rows);
    for (int i = 0; i < scenes; ++i)
      data.frames.push_back(eval::blob_scene(width, height, per_scene, min_side, max_side,
                                             derive_seed(seed, 10000 + static_cast<std::uint64_t>(i)), frame_name("scene", i)));
    for (int i = 0; i < null_scenes; ++i)
      data.frames.push_back({frame_name("null", i),
                             eval::blob_free_clutter(width, height, derive_seed(seed, 20000 + static_cast<std::uint64_t>(i))),
                             {}});
  } else {
    throw InvalidArgument("task must be posters, textureless or blobs");
  }
  eval::save_dataset(out.string(), data);
  std::cerr << "synth: " << data.frames.size() << " frames -> " << out.string() << "\n";
  return 0;
}

}  // namespace robovis::cli
