#include "tennet/training.hpp"

#include <cmath>
#include <cstdio>
#include <ostream>
#include <string>

#include "tennet/errors.hpp"

namespace tennet {

void validate(const TrainingConfig& config) {
  const bool lr_ok = std::isfinite(config.initial_lr) && config.initial_lr > 0.0;
  const bool factor_ok = config.lr_factor > 0.0 && config.lr_factor < 1.0;
  const bool beta_ok = config.adam_beta1 >= 0.0 && config.adam_beta1 < 1.0 &&
                       config.adam_beta2 >= 0.0 && config.adam_beta2 < 1.0;
  if (!lr_ok || !factor_ok || !beta_ok || !(config.adam_eps > 0.0)) {
    throw ValidationError("training config: bad optimizer constants");
  }
  if (config.lr_patience < 1 || config.early_stop_patience < 1) {
    throw ValidationError("training config: patience values must be >= 1");
  }
  if (config.split_train < 1 || config.split_val < 1) {
    throw ValidationError("training config: split ratio parts must be positive");
  }
  if (config.max_epochs < 1) {
    throw ValidationError("training config: max_epochs must be >= 1");
  }
}

AdamState make_adam_state(std::size_t param_count) {
  AdamState state;
  state.m.assign(param_count, 0.0);
  state.v.assign(param_count, 0.0);
  return state;
}

double mse_loss(std::span<const double> predictions,
                std::span<const double> targets) {
  if (predictions.size() != targets.size())
    throw ShapeError("mse_loss: prediction/target lengths differ");
  if (predictions.empty()) throw ValidationError("mse_loss: empty batch");
  double sum = 0.0;
  for (std::size_t i = 0; i < predictions.size(); ++i) {
    const double r = predictions[i] - targets[i];
    sum += r * r;
  }
  return sum / static_cast<double>(predictions.size());
}

void adam_step(AdamState& state, std::span<const std::span<double>> params,
               std::span<const std::span<double>> grads, double lr,
               const TrainingConfig& config) {
  if (params.size() != grads.size()) {
    throw ShapeError("adam_step: parameter/gradient block counts differ");
  }
  std::size_t total = 0;
  for (std::size_t b = 0; b < params.size(); ++b) {
    if (params[b].size() != grads[b].size()) {
      throw ShapeError("adam_step: block size mismatch");
    }
    total += params[b].size();
  }
  if (total != state.m.size()) {
    throw ShapeError("adam_step: state sized for " + std::to_string(state.m.size()) +
                     " parameters, got " + std::to_string(total));
  }
  state.t += 1;
  state.beta1_pow *= config.adam_beta1;
  state.beta2_pow *= config.adam_beta2;
  const double c1 = 1.0 - state.beta1_pow;
  const double c2 = 1.0 - state.beta2_pow;
  std::size_t k = 0;
  for (std::size_t b = 0; b < params.size(); ++b) {
    double* p = params[b].data();
    const double* g = grads[b].data();
    const std::size_t len = params[b].size();
    for (std::size_t i = 0; i < len; ++i, ++k) {
      const double gi = g[i];
      const double m = config.adam_beta1 * state.m[k] + (1.0 - config.adam_beta1) * gi;
      const double v = config.adam_beta2 * state.v[k] + (1.0 - config.adam_beta2) * gi * gi;
      state.m[k] = m;
      state.v[k] = v;
      p[i] -= lr * (m / c1) / (std::sqrt(v / c2) + config.adam_eps);
    }
  }
}

PlateauState make_plateau_state(double initial_lr) {
  PlateauState state;
  state.lr = initial_lr;
  return state;
}

double plateau_step(PlateauState& state, double val_mse,
                    const TrainingConfig& config) {
  if (val_mse < state.best) {
    state.best = val_mse;
    state.bad_epochs = 0;
  } else if (++state.bad_epochs >= config.lr_patience) {
    state.lr *= config.lr_factor;
    state.bad_epochs = 0;
  }
  return state.lr;
}

bool early_stop_step(EarlyStopState& state, double val_mse,
                     const TrainingConfig& config) {
  if (val_mse < state.best) {
    state.best = val_mse;
    state.bad_epochs = 0;
    return false;
  }
  return ++state.bad_epochs >= config.early_stop_patience;
}

void write_history_csv(const RunHistory& history, std::ostream& out) {
  out << "epoch,train_mse,val_mse,lr\n";
  char buf[32];
  for (int e = 0; e < history.epochs(); ++e) {
    const std::size_t es = static_cast<std::size_t>(e);
    out << (e + 1);
    std::snprintf(buf, sizeof buf, "%.16e", history.train_mse[es]);
    out << ',' << buf;
    std::snprintf(buf, sizeof buf, "%.16e", history.val_mse[es]);
    out << ',' << buf;
    std::snprintf(buf, sizeof buf, "%.16e", history.lr[es]);
    out << ',' << buf << '\n';
  }
}

namespace {

std::size_t span_total(const std::vector<std::span<double>>& spans) {
  std::size_t total = 0;
  for (const std::span<double>& s : spans) total += s.size();
  return total;
}

void snapshot_params(const std::vector<std::span<double>>& spans,
                     std::vector<double>& out) {
  out.resize(span_total(spans));
  std::size_t k = 0;
  for (const std::span<double>& s : spans) {
    for (double v : s) out[k++] = v;
  }
}

void restore_params(const std::vector<double>& snapshot,
                    const std::vector<std::span<double>>& spans) {
  std::size_t k = 0;
  for (const std::span<double>& s : spans) {
    for (double& v : s) v = snapshot[k++];
  }
}

template <typename Model>
RunHistory train_impl(Model& model, const Dataset& train_data,
                      const Dataset& val_data, const TrainingConfig& config) {
  validate(config);
  validate(model);
  validate(train_data);
  validate(val_data);
  if (!(train_data.norm == val_data.norm)) {
    throw ValidationError("train: train and validation sets must share normalization");
  }

  ParamGradient grad = zeros_like(model);
  const std::vector<std::span<double>> p_spans = param_spans(model);
  const std::vector<std::span<double>> g_spans = param_spans(grad);
  AdamState adam = make_adam_state(span_total(p_spans));
  PlateauState plateau = make_plateau_state(config.initial_lr);
  EarlyStopState stop;
  BatchWorkspace ws_train;
  BatchWorkspace ws_val;
  RunHistory history;
  std::vector<double> best_params;

  for (int epoch = 1; epoch <= config.max_epochs; ++epoch) {
    const double train_mse =
        batch_mse_and_gradient(model, train_data.x, train_data.y, grad, ws_train);
    const double val_mse = batch_mse(model, val_data.x, val_data.y, ws_val);
    if (!std::isfinite(train_mse) || !std::isfinite(val_mse)) {
      throw DivergenceError(epoch, "train: loss became non-finite at epoch " +
                                       std::to_string(epoch));
    }
    if (val_mse < history.best_val_mse) {
      history.best_val_mse = val_mse;
      history.best_epoch = epoch;
      snapshot_params(p_spans, best_params);
    }
    const bool stop_now = early_stop_step(stop, val_mse, config);
    const double lr = stop_now ? plateau.lr : plateau_step(plateau, val_mse, config);
    history.train_mse.push_back(train_mse);
    history.val_mse.push_back(val_mse);
    history.lr.push_back(lr);
    if (stop_now) {
      history.early_stopped = true;
      break;
    }
    adam_step(adam, p_spans, g_spans, lr, config);
  }
  history.stopped_epoch = history.epochs();
  restore_params(best_params, p_spans);
  model.norm = train_data.norm;
  return history;
}

template <typename Model>
RunHistory train_split_impl(Model& model, const Dataset& data,
                            const TrainingConfig& config) {
  validate(config);
  const auto [train_part, val_part] =
      split_train_val(data, config.split_train, config.split_val, config.seed);
  return train_impl(model, train_part, val_part, config);
}

}  // namespace

RunHistory train(TnnModel& model, const Dataset& train_data,
                 const Dataset& val_data, const TrainingConfig& config) {
  return train_impl(model, train_data, val_data, config);
}

RunHistory train(FfnModel& model, const Dataset& train_data,
                 const Dataset& val_data, const TrainingConfig& config) {
  return train_impl(model, train_data, val_data, config);
}

RunHistory train(RbnModel& model, const Dataset& train_data,
                 const Dataset& val_data, const TrainingConfig& config) {
  return train_impl(model, train_data, val_data, config);
}

RunHistory train(TnnModel& model, const Dataset& data, const TrainingConfig& config) {
  return train_split_impl(model, data, config);
}

RunHistory train(FfnModel& model, const Dataset& data, const TrainingConfig& config) {
  return train_split_impl(model, data, config);
}

RunHistory train(RbnModel& model, const Dataset& data, const TrainingConfig& config) {
  return train_split_impl(model, data, config);
}

}  // namespace tennet
