#pragma once

#include <iosfwd>
#include <span>
#include <vector>

#include "tennet/data.hpp"
#include "tennet/diff.hpp"
#include "tennet/model.hpp"

namespace tennet {

// Gradient of Psi with respect to its inputs:
//   component i = sum_j phi'[i][j](x_i) * prod_{k!=i} phi[k][j](x_k).
// Works in the model's own coordinates (normalization is not applied).
std::vector<double> tnn_gradient(const TnnModel& model, std::span<const double> x);

// Laplacian: sum_i sum_j phi''[i][j](x_i) * prod_{k!=i} phi[k][j](x_k).
double tnn_laplacian(const TnnModel& model, std::span<const double> x);

// Same formulas over an explicit d x p table of factor jets; lets tests
// substitute analytic factors for the subnetworks.
std::vector<double> gradient_from_factor_jets(
    const std::vector<std::vector<Jet2>>& jets);
double laplacian_from_factor_jets(const std::vector<std::vector<Jet2>>& jets);

struct SensitivityRow {
  int index = 0;
  std::vector<double> x_raw;     // original units, for locating the point
  std::vector<double> gradient;  // normalized input units
  double gradient_norm = 0.0;
  double laplacian = 0.0;
};

struct SensitivityReport {
  std::vector<SensitivityRow> rows;
};

// Gradient, Euclidean norm, and Laplacian at every sample, in dataset
// order. The Dataset overload evaluates at its normalized points and
// echoes raw inputs through the dataset's transform; the RawDataset
// overload requires the model to carry normalization.
SensitivityReport sensitivity_report(const TnnModel& model, const Dataset& data);
SensitivityReport sensitivity_report(const TnnModel& model, const RawDataset& raw);

// Header: index,x_1..x_d,grad_1..grad_d,grad_norm,laplacian
void write_sensitivity_csv(const SensitivityReport& report, std::ostream& out);

}  // namespace tennet
