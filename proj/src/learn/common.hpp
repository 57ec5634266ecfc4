#pragma once

#include <cmath>
#include <string>

#include "painbvp/error.hpp"
#include "painbvp/learn/model.hpp"

namespace painbvp::learn::detail {

double real_param(const HyperParams& params, const std::string& name);
std::size_t count_param(const HyperParams& params, const std::string& name);

void check_training_data(const Matrix& x, std::size_t n_targets);
/// Encodes labels and requires at least two classes.
EncodedLabels encode_classifier_labels(std::span<const int> labels);

/// Softmax of `scores` in place.
void softmax(std::span<double> scores);

inline double sigmoid(double z) {
  return z >= 0.0 ? 1.0 / (1.0 + std::exp(-z)) : std::exp(z) / (1.0 + std::exp(z));
}

}  // namespace painbvp::learn::detail
