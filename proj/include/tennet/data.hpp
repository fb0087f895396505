#pragma once

#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "tennet/matrix.hpp"
#include "tennet/normalization.hpp"

namespace tennet {

// Samples in original units, as read from files or generators.
// Columns: d input names followed by the target name.
struct RawDataset {
  std::vector<std::string> columns;
  Matrix x;               // n x d
  std::vector<double> y;  // n

  int size() const { return x.rows(); }
  int dim() const { return x.cols(); }
};

// Samples in model units: inputs in [0,1]^d, targets mean-centered and
// range-scaled. Carries the transform that produced it.
struct Dataset {
  Matrix x;
  std::vector<double> y;
  NormalizationParams norm;

  int size() const { return x.rows(); }
  int dim() const { return x.cols(); }
};

// Throws ShapeError/ValidationError on inconsistent sizes, empty data, or
// non-finite values.
void validate(const RawDataset& raw);
void validate(const Dataset& data);

// Per-dimension min/max of inputs, mean/min/max of targets. Throws
// ValidationError naming the column when a range is degenerate.
NormalizationParams normalize_fit(const RawDataset& raw);

// Applies the affine maps. Raw inputs outside the fitted range are
// clamped into [0,1]; *clamped (when given) receives how many values
// needed clamping so callers can warn.
Dataset normalize_apply(const RawDataset& raw, const NormalizationParams& params,
                        int* clamped = nullptr);

enum class SyntheticFn { SumSines, ProdExp };

const char* to_string(SyntheticFn fn);
SyntheticFn synthetic_fn_from_string(const std::string& name);

// Target value at one point of the unit hypercube.
double synthetic_value(SyntheticFn fn, std::span<const double> x);

// n i.i.d. uniform points in [0,1]^8 with exact function values, no noise.
RawDataset gen_synthetic(SyntheticFn fn, int n, std::uint64_t seed);

// Closed-form integrals of the synthetic targets over [0,1]^8, used to
// report integration errors against the fitted model.
struct ReferenceIntegrals {
  double integral = 0.0;
  double integral_squared = 0.0;
};
ReferenceIntegrals synthetic_reference_integrals(SyntheticFn fn);

// CSV: UTF-8, comma-separated, one header row; columns 1..d are inputs,
// the last column is the target. Parse errors name row and column.
RawDataset load_csv(const std::string& path);
RawDataset read_csv(std::istream& in, const std::string& name);
void save_csv(const RawDataset& raw, const std::string& path);
void write_csv(const RawDataset& raw, std::ostream& out);

// Seeded uniform shuffle; first floor(n * train / (train + val)) indices
// go to the first part. Throws ValidationError when n < train + val.
std::pair<std::vector<int>, std::vector<int>> split_indices(
    int n, int train_parts, int val_parts, std::uint64_t seed);

RawDataset subset(const RawDataset& raw, std::span<const int> rows);
Dataset subset(const Dataset& data, std::span<const int> rows);

std::pair<RawDataset, RawDataset> split_train_val(const RawDataset& raw,
                                                  int train_parts, int val_parts,
                                                  std::uint64_t seed);
std::pair<Dataset, Dataset> split_train_val(const Dataset& data,
                                            int train_parts, int val_parts,
                                            std::uint64_t seed);

}  // namespace tennet
