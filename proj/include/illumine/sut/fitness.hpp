#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <span>
#include <stdexcept>

namespace illumine::sut {

/// conf[expected] minus the best other confidence; negative means misclassified.
inline double fitness_classification(std::span<const double> confidences, int expected_label) {
  if (confidences.size() != 10) throw std::invalid_argument("fitness_classification: need 10 confidences");
  if (expected_label < 0 || expected_label > 9) throw std::invalid_argument("fitness_classification: label outside 0-9");
  double sum = 0.0;
  for (double c : confidences) {
    if (!std::isfinite(c) || c < 0.0) throw std::invalid_argument("fitness_classification: invalid confidence");
    sum += c;
  }
  if (std::abs(sum - 1.0) > 1e-6) throw std::invalid_argument("fitness_classification: confidences do not sum to 1");
  double other = -std::numeric_limits<double>::infinity();
  for (int k = 0; k < 10; ++k)
    if (k != expected_label) other = std::max(other, confidences[static_cast<std::size_t>(k)]);
  return confidences[static_cast<std::size_t>(expected_label)] - other;
}

} // namespace illumine::sut
