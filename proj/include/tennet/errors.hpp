#pragma once

#include <stdexcept>
#include <string>

namespace tennet {

// Root of the library's exception hierarchy.
struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Dimensions or sizes that do not line up (wrong input width, mismatched
// weight shapes, dataset/model dimension disagreement).
struct ShapeError : Error {
  using Error::Error;
};

// Invalid values: non-finite parameters or inputs, empty architectures,
// non-positive node counts, inverted intervals, bad configuration.
struct ValidationError : Error {
  using Error::Error;
};

// Malformed file content (CSV rows, model containers, config values).
struct ParseError : Error {
  using Error::Error;
};

// Prediction weight function whose support has zero measure inside the
// integration domain.
struct DegenerateWeightError : Error {
  using Error::Error;
};

// Training loss left the representable range.
class DivergenceError : public Error {
 public:
  DivergenceError(int epoch, const std::string& message)
      : Error(message), epoch_(epoch) {}

  // 1-based epoch at which the non-finite loss was observed.
  int epoch() const { return epoch_; }

 private:
  int epoch_;
};

}  // namespace tennet
