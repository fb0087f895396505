#pragma once

#include <cstddef>
#include <vector>

namespace tennet {

// Affine maps between raw and model units, fitted on training data only.
//   x_i = (X_i - x_min[i]) / (x_max[i] - x_min[i])        -> [0, 1]
//   y   = (Y - y_mean) / (y_max - y_min)                  -> zero mean
struct NormalizationParams {
  std::vector<double> x_min;
  std::vector<double> x_max;
  double y_mean = 0.0;
  double y_min = 0.0;
  double y_max = 1.0;

  int dim() const { return static_cast<int>(x_min.size()); }

  // Scale of the output map; multiplies normalized model values.
  double y_scale() const { return y_max - y_min; }

  bool operator==(const NormalizationParams&) const = default;
};

// Throws ValidationError unless every x_max > x_min, y_max > y_min, and
// all fields are finite.
void validate(const NormalizationParams& norm);

inline double normalize_input(const NormalizationParams& n, int i, double X) {
  return (X - n.x_min[i]) / (n.x_max[i] - n.x_min[i]);
}

inline double denormalize_input(const NormalizationParams& n, int i, double x) {
  return n.x_min[i] + x * (n.x_max[i] - n.x_min[i]);
}

inline double normalize_output(const NormalizationParams& n, double Y) {
  return (Y - n.y_mean) / (n.y_max - n.y_min);
}

inline double denormalize_output(const NormalizationParams& n, double y) {
  return y * (n.y_max - n.y_min) + n.y_mean;
}

}  // namespace tennet
