#include "robovis/eval/report.hpp"

#include <algorithm>
#include <cstdio>
#include <sstream>

#include "robovis/error.hpp"

namespace robovis::eval {

namespace {

using nlohmann::json;

ClassRow make_row(const std::string& name, const ConfusionCounts& c, double beta) {
  return {name, c, compute_metrics(c, beta)};
}

json row_json(const ClassRow& r) {
  return {{"name", r.name},
          {"tp", r.counts.tp},
          {"fp", r.counts.fp},
          {"fn", r.counts.fn},
          {"precision", r.metrics.precision},
          {"recall", r.metrics.recall},
          {"f", r.metrics.f},
          {"precision_defined", r.metrics.precision_defined},
          {"recall_defined", r.metrics.recall_defined},
          {"f_defined", r.metrics.f_defined}};
}

ClassRow row_from_json(const json& j, double beta) {
  ConfusionCounts c{j.at("tp").get<long>(), j.at("fp").get<long>(), j.at("fn").get<long>()};
  return make_row(j.at("name").get<std::string>(), c, beta);
}

json condition_json(const ConditionRow& r) {
  return {{"name", r.name},
          {"flags", r.flags},
          {"instances", r.instances},
          {"detected", r.detected},
          {"recall", r.recall},
          {"defined", r.defined}};
}

ConditionRow condition_from_json(const json& j) {
  ConditionRow r{j.at("name").get<std::string>(), j.at("flags").get<ConditionFlags>(), j.at("instances").get<long>(),
                 j.at("detected").get<long>()};
  r.defined = r.instances > 0;
  r.recall = r.defined ? static_cast<double>(r.detected) / static_cast<double>(r.instances) : 0.0;
  return r;
}

std::string num(double v, bool defined) {
  if (!defined) return "undef";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3f", v);
  return buf;
}

}  // namespace

TimingStats timing_stats(std::span<const double> frame_ms) {
  TimingStats t;
  t.frames = static_cast<long>(frame_ms.size());
  for (double v : frame_ms) {
    t.total_ms += v;
    t.max_ms = std::max(t.max_ms, v);
  }
  t.mean_ms = t.frames ? t.total_ms / static_cast<double>(t.frames) : 0.0;
  return t;
}

nlohmann::json to_json(const TimingStats& t) {
  return {{"frames", t.frames}, {"total_ms", t.total_ms}, {"mean_ms", t.mean_ms}, {"max_ms", t.max_ms}};
}

EvalReport EvalReport::build(const std::string& method, long frames, std::span<const Detection> dets,
                             std::span<const AnnotationRecord> truth, const MetricConfig& cfg) {
  const MatchResult m = match_detections(dets, truth, cfg);
  EvalReport r;
  r.method = method;
  r.config = cfg;
  r.frames = frames;
  for (const auto& [name, c] : m.per_class) r.classes.push_back(make_row(name, c, cfg.beta));
  r.total = make_row("total", m.total, cfg.beta);
  r.conditions = condition_breakdown(m, truth);
  r.sizes = size_breakdown(m, truth);
  r.overlap = overlap_histogram(m);
  return r;
}

nlohmann::json EvalReport::to_json() const {
  json j;
  j["format"] = "robovis-eval-report";
  j["version"] = 1;
  j["method"] = method;
  j["config"] = {{"beta", config.beta}, {"overlap", config.overlap}, {"mode", to_string(config.mode)}};
  j["frames"] = frames;
  j["classes"] = json::array();
  for (const ClassRow& c : classes) j["classes"].push_back(row_json(c));
  j["total"] = row_json(total);
  j["conditions"] = json::array();
  for (const ConditionRow& c : conditions) j["conditions"].push_back(condition_json(c));
  j["sizes"] = json::array();
  for (const ConditionRow& c : sizes) j["sizes"].push_back(condition_json(c));
  j["overlap_histogram"] = {{"counts", overlap.counts},
                            {"cumulative", overlap.cumulative},
                            {"true_positives", overlap.total},
                            {"empty", overlap.empty()},
                            {"iou", overlap.values}};
  return j;
}

EvalReport EvalReport::from_json(const nlohmann::json& j) {
  if (j.value("format", "") != "robovis-eval-report" || j.value("version", 0) != 1)
    throw FormatError("not a version 1 evaluation report");
  EvalReport r;
  r.method = j.at("method").get<std::string>();
  r.config.beta = j.at("config").at("beta").get<double>();
  r.config.overlap = j.at("config").at("overlap").get<double>();
  r.config.mode = parse_overlap_mode(j.at("config").at("mode").get<std::string>());
  r.frames = j.at("frames").get<long>();
  for (const json& c : j.at("classes")) r.classes.push_back(row_from_json(c, r.config.beta));
  r.total = row_from_json(j.at("total"), r.config.beta);
  for (const json& c : j.at("conditions")) r.conditions.push_back(condition_from_json(c));
  for (const json& c : j.at("sizes")) r.sizes.push_back(condition_from_json(c));
  MatchResult m;
  for (double v : j.at("overlap_histogram").at("iou").get<std::vector<double>>()) {
    m.truth_match.push_back(0);
    m.truth_iou.push_back(v);
  }
  r.overlap = overlap_histogram(m);
  return r;
}

std::string EvalReport::table_text() const {
  std::ostringstream out;
  char line[256];
  out << "method: " << method << "  frames: " << frames << "  overlap: " << to_string(config.mode) << " >= "
      << config.overlap << "  beta: " << config.beta << "\n\n";
  std::snprintf(line, sizeof line, "%-24s %6s %6s %6s %10s %10s %10s\n", "class", "TP", "FP", "FN", "precision",
                "recall", "f");
  out << line;
  auto put = [&](const ClassRow& r) {
    std::snprintf(line, sizeof line, "%-24s %6ld %6ld %6ld %10s %10s %10s\n", r.name.c_str(), r.counts.tp,
                  r.counts.fp, r.counts.fn, num(r.metrics.precision, r.metrics.precision_defined).c_str(),
                  num(r.metrics.recall, r.metrics.recall_defined).c_str(),
                  num(r.metrics.f, r.metrics.f_defined).c_str());
    out << line;
  };
  for (const ClassRow& r : classes) put(r);
  put(total);
  auto rows = [&](const char* title, const std::vector<ConditionRow>& rs) {
    out << "\n";
    std::snprintf(line, sizeof line, "%-28s %9s %9s %8s\n", title, "instances", "detected", "recall");
    out << line;
    for (const ConditionRow& r : rs) {
      std::snprintf(line, sizeof line, "%-28s %9ld %9ld %8s\n", r.name.c_str(), r.instances, r.detected,
                    num(r.recall, r.defined).c_str());
      out << line;
    }
  };
  rows("condition", conditions);
  rows("size", sizes);
  out << "\noverlap (IoU of true positives)";
  if (overlap.empty()) {
    out << ": no true positives\n";
  } else {
    out << ", " << overlap.total << " matches, " << num(overlap.fraction_above(0.8), true) << " above 0.8\n";
  }
  return out.str();
}

std::string EvalReport::overlap_csv() const {
  std::ostringstream out;
  out << "bin_lower,bin_upper,count,cumulative\n";
  char line[96];
  for (std::size_t k = 0; k < 10; ++k) {
    std::snprintf(line, sizeof line, "%.1f,%.1f,%ld,%.6f\n", k / 10.0, (k + 1) / 10.0, overlap.counts[k],
                  overlap.cumulative[k]);
    out << line;
  }
  return out.str();
}

}  // namespace robovis::eval
