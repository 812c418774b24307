#include <iostream>

#include "CLI11.hpp"
#include "commands.hpp"

using robovis::cli::Config;

int main(int argc, char** argv) {
  CLI::App app{"robovis: object recognition pipelines and detection benchmark"};
  app.require_subcommand(1);

  std::string config_path, method;
  std::vector<std::string> overrides;
  auto add_common = [&](CLI::App* sub) {
    sub->add_option("-c,--config", config_path, "JSON config file");
    sub->add_option("--set", overrides, "override a config key: key.path=value")->take_all();
  };
  CLI::App* extract = app.add_subcommand("extract", "extract DoG keypoints and descriptors from an image");
  CLI::App* train_tree = app.add_subcommand("train-tree", "train a vocabulary tree and its image database");
  CLI::App* train_cascade = app.add_subcommand("train-cascade", "train a boosted Haar cascade");
  CLI::App* detect = app.add_subcommand("detect", "run one detector on one image");
  CLI::App* bench = app.add_subcommand("bench", "run a detector over a dataset and write evaluation reports");
  CLI::App* synth = app.add_subcommand("synth", "generate a synthetic dataset");
  for (CLI::App* sub : {extract, train_tree, train_cascade, detect, bench, synth}) add_common(sub);
  detect->add_option("--method", method, "sift, vtree or cascade");
  bench->add_option("--method", method, "sift, vtree or cascade");

  CLI11_PARSE(app, argc, argv);

  try {
    Config cfg = Config::load(config_path);
    for (const std::string& o : overrides) cfg.set(o);
    if (*extract) return robovis::cli::run_extract(cfg);
    if (*train_tree) return robovis::cli::run_train_tree(cfg);
    if (*train_cascade) return robovis::cli::run_train_cascade(cfg);
    if (*detect) return robovis::cli::run_detect(cfg, method);
    if (*bench) return robovis::cli::run_bench(cfg, method);
    if (*synth) return robovis::cli::run_synth(cfg);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 1;
}
