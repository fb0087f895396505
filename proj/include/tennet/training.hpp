#pragma once

#include <cstdint>
#include <iosfwd>
#include <limits>
#include <span>
#include <vector>

#include "tennet/data.hpp"
#include "tennet/diff.hpp"
#include "tennet/model.hpp"

namespace tennet {

struct TrainingConfig {
  double initial_lr = 1e-3;
  double lr_factor = 0.5;
  int lr_patience = 500;
  int early_stop_patience = 1000;
  int split_train = 9;
  int split_val = 1;
  int max_epochs = 200000;
  std::uint64_t seed = 1;
  double adam_beta1 = 0.9;
  double adam_beta2 = 0.999;
  double adam_eps = 1e-8;
};

void validate(const TrainingConfig& config);

// Moment accumulators over the flattened parameter vector. The running
// beta powers back the bias correction without calling pow each step.
struct AdamState {
  std::vector<double> m;
  std::vector<double> v;
  std::int64_t t = 0;
  double beta1_pow = 1.0;
  double beta2_pow = 1.0;
};

AdamState make_adam_state(std::size_t param_count);

double mse_loss(std::span<const double> predictions,
                std::span<const double> targets);

// One bias-corrected Adam update over matching flat views.
void adam_step(AdamState& state, std::span<const std::span<double>> params,
               std::span<const std::span<double>> grads, double lr,
               const TrainingConfig& config);

// Learning-rate plateau scheduler: halves lr after lr_patience epochs
// without strict validation improvement.
struct PlateauState {
  double best = std::numeric_limits<double>::infinity();
  int bad_epochs = 0;
  double lr = 0.0;
};

PlateauState make_plateau_state(double initial_lr);
double plateau_step(PlateauState& state, double val_mse,
                    const TrainingConfig& config);

struct EarlyStopState {
  double best = std::numeric_limits<double>::infinity();
  int bad_epochs = 0;
};

bool early_stop_step(EarlyStopState& state, double val_mse,
                     const TrainingConfig& config);

// Epoch-grain record of one run. Row e holds the losses of the
// parameters entering epoch e+1's update and the lr that update used;
// best_epoch is the 1-based row of the restored parameters.
struct RunHistory {
  std::vector<double> train_mse;
  std::vector<double> val_mse;
  std::vector<double> lr;
  double best_val_mse = std::numeric_limits<double>::infinity();
  int best_epoch = 0;
  int stopped_epoch = 0;
  bool early_stopped = false;

  int epochs() const { return static_cast<int>(train_mse.size()); }
};

// CSV: epoch,train_mse,val_mse,lr (epoch 1-based, floats at 17 digits).
void write_history_csv(const RunHistory& history, std::ostream& out);

// Full-batch loop: evaluate, snapshot best-validation parameters, check
// early stopping, schedule lr, Adam update. The model ends at the best
// validation epoch, with the datasets' normalization attached. Both
// datasets must share one normalization. Non-finite loss aborts with
// DivergenceError naming the epoch.
RunHistory train(TnnModel& model, const Dataset& train_data,
                 const Dataset& val_data, const TrainingConfig& config);
RunHistory train(FfnModel& model, const Dataset& train_data,
                 const Dataset& val_data, const TrainingConfig& config);
RunHistory train(RbnModel& model, const Dataset& train_data,
                 const Dataset& val_data, const TrainingConfig& config);

// Splits per config (seeded shuffle, split_train : split_val), then runs
// the loop above.
RunHistory train(TnnModel& model, const Dataset& data, const TrainingConfig& config);
RunHistory train(FfnModel& model, const Dataset& data, const TrainingConfig& config);
RunHistory train(RbnModel& model, const Dataset& data, const TrainingConfig& config);

}  // namespace tennet
