#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "painbvp/learn/model.hpp"

namespace painbvp::learn {

/// Parameter name to candidate values. Enumeration is lexicographic over
/// names (std::map order) with the last name varying fastest.
using HyperGrid = std::map<std::string, std::vector<double>>;

std::vector<HyperParams> enumerate_grid(const HyperGrid& grid);

/// Train on `train`, score on `tuning`. Exactly one of the label / target
/// pairs is used, according to the family.
struct SearchData {
  const Matrix* train_x = nullptr;
  const Matrix* tuning_x = nullptr;
  std::span<const int> train_labels;
  std::span<const int> tuning_labels;
  std::span<const double> train_targets;
  std::span<const double> tuning_targets;
};

struct GridPointResult {
  HyperParams params;
  std::optional<double> score;  // empty when training failed
  std::string error;
};

struct GridSearchResult {
  HyperParams best;
  double best_score = 0.0;
  std::string metric;  // "f1_macro" (higher is better) or "mae" (lower is better)
  std::vector<GridPointResult> points;
};

/// Exhaustive search; ties go to the earliest grid point. Failing points are
/// skipped and logged; if every point fails, throws kSearchFailed.
GridSearchResult grid_search(Family family, const HyperGrid& grid, const SearchData& data, std::uint64_t seed);

/// Shipped default grid for a family.
HyperGrid default_grid(Family family);

}  // namespace painbvp::learn
