#pragma once

#include <span>
#include <vector>

#include "tennet/matrix.hpp"
#include "tennet/model.hpp"

namespace tennet {

// Second-order Taylor coefficients with respect to one scalar direction:
// value, first and second derivative.
struct Jet2 {
  double value = 0.0;
  double d1 = 0.0;
  double d2 = 0.0;
};

// Forward pass of one scalar-input MLP carrying (value, d/dx, d2/dx2)
// through every layer. The value channel performs the identical
// floating-point operations as mlp_forward, so both agree bitwise.
std::vector<Jet2> subnetwork_jet(const MlpArch& arch, const MlpParams& params,
                                 double x);

// Loss gradient laid out exactly like the parameters it refers to.
// Tnn: one MlpParams block per subnetwork. Ffn: a single block.
// Rbn: the rbn field.
struct ParamGradient {
  ModelKind kind = ModelKind::Tnn;
  std::vector<MlpParams> blocks;
  RbnParams rbn;
};

ParamGradient zeros_like(const TnnModel& model);
ParamGradient zeros_like(const FfnModel& model);
ParamGradient zeros_like(const RbnModel& model);

// Flat views over all trainable parameters in a fixed order (per block:
// layer weights then biases; rbn: centers, sigmas, weights, bias). The
// gradient overload produces the same order, so optimizer updates can
// walk both in lockstep.
std::vector<std::span<double>> param_spans(TnnModel& model);
std::vector<std::span<double>> param_spans(FfnModel& model);
std::vector<std::span<double>> param_spans(RbnModel& model);
std::vector<std::span<double>> param_spans(ParamGradient& grad);

// Scratch buffers reused between calls of the batched evaluators. Pass
// the same object every epoch to avoid reallocation; contents are an
// implementation detail.
struct BatchWorkspace {
  std::vector<std::vector<Matrix>> acts;
  std::vector<Matrix> factors;
  std::vector<Matrix> prefix;
  std::vector<Matrix> suffix;
  Matrix delta_a;
  Matrix delta_b;
  Matrix responses;
  Matrix dist2;
  std::vector<double> preds;
  std::vector<double> residual2;
};

// Full-batch mean squared error and its parameter gradient in one pass.
// X is n x dim (normalized units), y has n entries. grad is resized and
// zeroed internally. Returns the MSE.
double batch_mse_and_gradient(const TnnModel& model, const Matrix& X,
                              std::span<const double> y, ParamGradient& grad,
                              BatchWorkspace& ws);
double batch_mse_and_gradient(const FfnModel& model, const Matrix& X,
                              std::span<const double> y, ParamGradient& grad,
                              BatchWorkspace& ws);
double batch_mse_and_gradient(const RbnModel& model, const Matrix& X,
                              std::span<const double> y, ParamGradient& grad,
                              BatchWorkspace& ws);

// Forward-only MSE over a batch, reusing workspace buffers.
double batch_mse(const TnnModel& model, const Matrix& X,
                 std::span<const double> y, BatchWorkspace& ws);
double batch_mse(const FfnModel& model, const Matrix& X,
                 std::span<const double> y, BatchWorkspace& ws);
double batch_mse(const RbnModel& model, const Matrix& X,
                 std::span<const double> y, BatchWorkspace& ws);

// Predictions for every row of X (normalized units, no gradient).
std::vector<double> batch_predict(const TnnModel& model, const Matrix& X);
std::vector<double> batch_predict(const FfnModel& model, const Matrix& X);
std::vector<double> batch_predict(const RbnModel& model, const Matrix& X);

// Convenience wrappers allocating their own workspace.
ParamGradient loss_param_gradient(const TnnModel& model, const Matrix& X,
                                  std::span<const double> y);
ParamGradient loss_param_gradient(const FfnModel& model, const Matrix& X,
                                  std::span<const double> y);
ParamGradient loss_param_gradient(const RbnModel& model, const Matrix& X,
                                  std::span<const double> y);

}  // namespace tennet
