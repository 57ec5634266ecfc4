#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "painbvp/evaluation.hpp"
#include "painbvp/extraction.hpp"
#include "painbvp/learn/grid_search.hpp"
#include "painbvp/synth.hpp"

namespace painbvp {

struct ModelConfig {
  learn::Family family = learn::Family::kGbt;
  learn::HyperParams params;               // fixed hyperparameters (also the base for grid points)
  std::optional<learn::HyperGrid> grid;    // empty: the family's default grid
  bool grid_search = true;
};

/// Every tunable of a run. Defaults follow the published protocol: 8 Hz
/// filter, 5 s windows at 50% overlap, 5 folds, 16% tuning holdout.
struct RunConfig {
  std::uint64_t seed = 1;
  std::size_t threads = 0;  // 0 = hardware concurrency
  ExtractionConfig extraction;
  SynthConfig synth;
  std::size_t n_subjects = 32;
  bool normalize_per_subject = true;
  std::string task = "LP-MP-HP";
  ModelConfig model;
  CvOptions cv;
  double tuning_fraction = 0.16;
  std::string importance_task = "NP-LP-MP-HP";
  std::size_t importance_trees = 100;
  double importance_threshold = 0.025;
  std::vector<std::string> stats_features = {"rr_mean_ms", "ami2_tau5", "sdell_ms2", "dn_hist_mode5"};
};

/// Throws kInvalidConfiguration naming the offending field.
void validate(const RunConfig& config);

/// Overlays a JSON document on the defaults; unknown keys are rejected.
RunConfig config_from_json(std::string_view text, RunConfig base = {});
RunConfig load_config(const std::filesystem::path& path, RunConfig base = {});
/// Complete effective configuration as JSON (stable key order).
std::string config_to_json(const RunConfig& config, int indent = 2);

}  // namespace painbvp
