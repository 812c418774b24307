#pragma once

#include <string>

#include "config.hpp"

namespace robovis::cli {

int run_extract(Config& cfg);
int run_train_tree(Config& cfg);
int run_train_cascade(Config& cfg);
int run_detect(Config& cfg, const std::string& method);
int run_bench(Config& cfg, const std::string& method);
int run_synth(Config& cfg);

}  // namespace robovis::cli
