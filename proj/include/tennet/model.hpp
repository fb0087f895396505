#pragma once

#include <cstdint>
#include <initializer_list>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "tennet/matrix.hpp"
#include "tennet/normalization.hpp"
#include "tennet/rng.hpp"

namespace tennet {

enum class ModelKind { Tnn, Ffn, Rbn };

const char* to_string(ModelKind kind);
ModelKind model_kind_from_string(const std::string& name);

// Layer sizes of a multilayer perceptron. Hidden layers apply tanh, the
// output layer is affine with identity activation.
struct MlpArch {
  int input_width = 1;
  std::vector<int> hidden_widths;
  int output_width = 1;

  // Number of hidden layers.
  int depth() const { return static_cast<int>(hidden_widths.size()); }

  // Number of affine layers (hidden + output).
  int layer_count() const { return depth() + 1; }

  int layer_in(int l) const {
    return l == 0 ? input_width : hidden_widths[l - 1];
  }

  int layer_out(int l) const {
    return l == depth() ? output_width : hidden_widths[l];
  }

  std::size_t param_count() const;

  bool operator==(const MlpArch&) const = default;
};

// Weights and biases matching an MlpArch: weights[l] is
// layer_out(l) x layer_in(l), biases[l] has layer_out(l) entries.
struct MlpParams {
  std::vector<Matrix> weights;
  std::vector<std::vector<double>> biases;

  bool operator==(const MlpParams&) const = default;
};

struct Subnetwork {
  MlpArch arch;
  MlpParams params;
};

// Rank-p separable network over d scalar inputs:
//   Psi(x) = sum_{j<p} prod_{i<d} phi[i][j](x_i)
// where subnetwork i maps the scalar x_i to the p factor values
// phi[i][0..p-1]. The optional normalization is attached by training and
// interprets raw inputs/outputs.
struct TnnModel {
  int dim = 0;
  int rank = 0;
  std::vector<Subnetwork> subnets;
  std::optional<NormalizationParams> norm;
};

// Plain fully connected baseline: d inputs, one output.
struct FfnModel {
  MlpArch arch;
  MlpParams params;
  std::optional<NormalizationParams> norm;
};

// Gaussian radial-basis parameters: unit k responds with
// exp(-|x - center_k|^2 / (2 sigma_k^2)); the readout is affine.
struct RbnParams {
  Matrix centers;               // units x dim
  std::vector<double> sigmas;   // units, positive
  std::vector<double> weights;  // units
  double bias = 0.0;

  bool operator==(const RbnParams&) const = default;
};

struct RbnModel {
  RbnParams params;
  std::optional<NormalizationParams> norm;

  int units() const { return params.centers.rows(); }
  int dim() const { return params.centers.cols(); }
};

// Validation throws ShapeError for size mismatches and ValidationError
// for empty/non-positive sizes or non-finite parameter values.
void validate(const MlpArch& arch);
void validate(const MlpArch& arch, const MlpParams& params);
void validate(const TnnModel& model);
void validate(const FfnModel& model);
void validate(const RbnModel& model);

// Weight init: U(-1/sqrt(fan_in), 1/sqrt(fan_in)); biases zero.
MlpParams init_mlp_params(const MlpArch& arch, Rng& rng);

// Constructors used by the CLI defaults. hidden_widths applies to every
// subnetwork; rank is the shared output width p.
TnnModel make_tnn(int dim, int rank, const std::vector<int>& hidden_widths,
                  std::uint64_t seed);
FfnModel make_ffn(int dim, const std::vector<int>& hidden_widths,
                  std::uint64_t seed);
// Centers U(0,1)^d, sigmas 1, readout weights U(-1/sqrt(units), ...).
RbnModel make_rbn(int dim, int units, std::uint64_t seed);

// Single-point forward passes. Inputs are validated (shape, finiteness).
std::vector<double> mlp_forward(const MlpArch& arch, const MlpParams& params,
                                std::span<const double> input);
double tnn_forward(const TnnModel& model, std::span<const double> x);
double ffn_forward(const FfnModel& model, std::span<const double> x);
double rbn_forward(const RbnModel& model, std::span<const double> x);

// Braced-list conveniences for the forward passes above.
inline std::vector<double> mlp_forward(const MlpArch& arch,
                                       const MlpParams& params,
                                       std::initializer_list<double> input) {
  return mlp_forward(arch, params,
                     std::span<const double>(input.begin(), input.size()));
}
inline double tnn_forward(const TnnModel& model,
                          std::initializer_list<double> x) {
  return tnn_forward(model, std::span<const double>(x.begin(), x.size()));
}
inline double ffn_forward(const FfnModel& model,
                          std::initializer_list<double> x) {
  return ffn_forward(model, std::span<const double>(x.begin(), x.size()));
}
inline double rbn_forward(const RbnModel& model,
                          std::initializer_list<double> x) {
  return rbn_forward(model, std::span<const double>(x.begin(), x.size()));
}

// Factor values phi[i][0..rank-1](x_i) of one subnetwork.
std::vector<double> subnetwork_values(const TnnModel& model, int i, double x_i);

std::size_t param_count(const TnnModel& model);
std::size_t param_count(const FfnModel& model);
std::size_t param_count(const RbnModel& model);

}  // namespace tennet
