#include <cmath>
#include <sstream>
#include <string>
#include <vector>

#include <doctest.h>

#include "oracles.hpp"
#include "tennet/diff.hpp"
#include "tennet/errors.hpp"
#include "tennet/training.hpp"

using namespace tennet;

namespace {

NormalizationParams unit_norm(int dim) {
  NormalizationParams p;
  p.x_min.assign(static_cast<std::size_t>(dim), 0.0);
  p.x_max.assign(static_cast<std::size_t>(dim), 1.0);
  p.y_mean = 0.0;
  p.y_min = -1.0;
  p.y_max = 1.0;
  return p;
}

Dataset random_dataset(int n, int dim, std::uint64_t seed, double y_value) {
  Dataset data;
  data.x = Matrix(n, dim);
  Rng rng(seed);
  for (int r = 0; r < n; ++r)
    for (int c = 0; c < dim; ++c) data.x(r, c) = rng.uniform(0.0, 1.0);
  data.y.assign(static_cast<std::size_t>(n), y_value);
  data.norm = unit_norm(dim);
  return data;
}

// Model whose parameters are all exactly zero: its value and its full loss
// gradient vanish identically, so training leaves it untouched.
TnnModel zero_tnn(int dim, int rank) {
  TnnModel model = make_tnn(dim, rank, {3}, 1);
  for (Subnetwork& sub : model.subnets) {
    for (Matrix& w : sub.params.weights) w.fill(0.0);
    for (std::vector<double>& b : sub.params.biases)
      std::fill(b.begin(), b.end(), 0.0);
  }
  return model;
}

}  // namespace

TEST_CASE("mse_loss: hand values and shape errors") {
  std::vector<double> p1 = {1.0, 1.0}, t1 = {1.0, 1.0};
  CHECK(mse_loss(p1, t1) == 0.0);
  std::vector<double> p2 = {1.0, -1.0}, t2 = {0.0, 0.0};
  CHECK(mse_loss(p2, t2) == 1.0);
  std::vector<double> p3 = {0.5, -0.5}, t3 = {0.0, 0.0};
  CHECK(mse_loss(p3, t3) == 0.25);
  std::vector<double> p4 = {1.0}, t4 = {1.0, 2.0};
  CHECK_THROWS_AS(mse_loss(p4, t4), ShapeError);
  std::vector<double> p5, t5;
  CHECK_THROWS_AS(mse_loss(p5, t5), ValidationError);
}

TEST_CASE("adam_step: first update against the closed form") {
  TrainingConfig cfg;
  std::vector<double> theta = {0.0};
  std::vector<double> grad = {2.0};
  std::vector<std::span<double>> ps = {std::span<double>(theta)};
  std::vector<std::span<double>> gs = {std::span<double>(grad)};
  AdamState state = make_adam_state(1);
  adam_step(state, ps, gs, 1e-3, cfg);
  // Bias correction makes the first step lr * g / (|g| + eps).
  const double expected = -(1e-3 * 2.0 / (2.0 + 1e-8));
  CHECK(theta[0] == doctest::Approx(expected).epsilon(1e-12));
  CHECK(state.t == 1);

  // Negative gradients move parameters up by (almost exactly) lr.
  std::vector<double> theta2 = {0.0};
  std::vector<double> grad2 = {-5.0};
  std::vector<std::span<double>> ps2 = {std::span<double>(theta2)};
  std::vector<std::span<double>> gs2 = {std::span<double>(grad2)};
  AdamState s2 = make_adam_state(1);
  adam_step(s2, ps2, gs2, 1e-3, cfg);
  CHECK(theta2[0] > 0.0);
  CHECK(theta2[0] == doctest::Approx(1e-3).epsilon(1e-6));
}

TEST_CASE("adam_step: zero gradient leaves parameters bit-identical") {
  TrainingConfig cfg;
  std::vector<double> theta = {0.125, -2.75, 1e-9};
  std::vector<double> before = theta;
  std::vector<double> grad = {0.0, 0.0, 0.0};
  std::vector<std::span<double>> ps = {std::span<double>(theta)};
  std::vector<std::span<double>> gs = {std::span<double>(grad)};
  AdamState state = make_adam_state(3);
  for (int k = 0; k < 5; ++k) adam_step(state, ps, gs, 1e-3, cfg);
  CHECK(theta == before);
}

TEST_CASE("adam_step: running beta powers track pow()") {
  TrainingConfig cfg;
  std::vector<double> theta = {1.0};
  std::vector<double> grad = {0.5};
  std::vector<std::span<double>> ps = {std::span<double>(theta)};
  std::vector<std::span<double>> gs = {std::span<double>(grad)};
  AdamState state = make_adam_state(1);
  for (int k = 1; k <= 25; ++k) {
    adam_step(state, ps, gs, 1e-4, cfg);
    CHECK(state.beta1_pow == doctest::Approx(std::pow(0.9, k)).epsilon(1e-12));
    CHECK(state.beta2_pow == doctest::Approx(std::pow(0.999, k)).epsilon(1e-12));
  }
}

TEST_CASE("plateau scheduler halves after exactly `patience` bad epochs") {
  TrainingConfig cfg;
  cfg.lr_patience = 500;
  PlateauState state = make_plateau_state(1e-3);
  CHECK(plateau_step(state, 1.0, cfg) == 1e-3);  // first value improves
  for (int k = 0; k < 499; ++k) CHECK(plateau_step(state, 1.0, cfg) == 1e-3);
  CHECK(plateau_step(state, 1.0, cfg) == 5e-4);  // 500th bad epoch
  // A second full plateau halves again.
  for (int k = 0; k < 499; ++k) CHECK(plateau_step(state, 1.0, cfg) == 5e-4);
  CHECK(plateau_step(state, 1.0, cfg) == 2.5e-4);
}

TEST_CASE("plateau scheduler resets on improvement") {
  TrainingConfig cfg;
  cfg.lr_patience = 500;
  PlateauState state = make_plateau_state(1e-3);
  plateau_step(state, 1.0, cfg);
  for (int k = 0; k < 499; ++k) plateau_step(state, 1.0, cfg);
  CHECK(plateau_step(state, 0.9, cfg) == 1e-3);  // improvement at epoch 499
  for (int k = 0; k < 499; ++k) CHECK(plateau_step(state, 0.9, cfg) == 1e-3);
  CHECK(plateau_step(state, 0.9, cfg) == 5e-4);
}

TEST_CASE("early stopping fires after patience+1 evaluations of a flat loss") {
  TrainingConfig cfg;
  cfg.early_stop_patience = 1000;
  EarlyStopState state;
  int fired_at = 0;
  for (int epoch = 1; epoch <= 1200; ++epoch) {
    if (early_stop_step(state, 1.0, cfg)) {
      fired_at = epoch;
      break;
    }
  }
  CHECK(fired_at == 1001);
  // A strictly improving sequence never stops.
  EarlyStopState improving;
  for (int epoch = 1; epoch <= 3000; ++epoch)
    CHECK_FALSE(early_stop_step(improving, 1.0 / epoch, cfg));
}

TEST_CASE("training a zero model on constant targets stops early, untouched") {
  // All-zero parameters give an identically-zero gradient, so every epoch
  // sees the same validation loss and the early-stopping counter runs out.
  TnnModel model = zero_tnn(2, 1);
  Dataset tr = random_dataset(30, 2, 3, 0.25);
  Dataset va = random_dataset(10, 2, 4, 0.25);
  TrainingConfig cfg;
  cfg.early_stop_patience = 50;
  cfg.lr_patience = 20;
  cfg.max_epochs = 500;
  RunHistory hist = train(model, tr, va, cfg);
  CHECK(hist.early_stopped);
  CHECK(hist.stopped_epoch == 51);
  CHECK(hist.epochs() == 51);
  CHECK(hist.best_epoch == 1);
  for (double v : hist.train_mse) CHECK(v == 0.0625);
  for (double v : hist.val_mse) CHECK(v == 0.0625);
  // The scheduler halved at bad-epoch counts 20 and 40.
  CHECK(hist.lr.front() == 1e-3);
  CHECK(hist.lr[20] == 5e-4);
  CHECK(hist.lr[40] == 2.5e-4);
  // Parameters never moved.
  for (const Subnetwork& sub : model.subnets)
    for (const Matrix& w : sub.params.weights)
      for (int r = 0; r < w.rows(); ++r)
        for (int c = 0; c < w.cols(); ++c) CHECK(w(r, c) == 0.0);
  // Normalization from the training split is attached.
  REQUIRE(model.norm.has_value());
  CHECK(*model.norm == tr.norm);
}

TEST_CASE("training fits an easy target and restores its best epoch") {
  TnnModel model = make_tnn(2, 1, {5}, 7);
  Dataset tr = random_dataset(40, 2, 11, 0.0);
  Dataset va = random_dataset(12, 2, 12, 0.0);
  TrainingConfig cfg;
  cfg.max_epochs = 3000;
  RunHistory hist = train(model, tr, va, cfg);
  REQUIRE(hist.epochs() >= 1);
  // The best validation loss in the history is what the restored model
  // reproduces, bit for bit.
  BatchWorkspace ws;
  const double val_now = batch_mse(model, va.x, va.y, ws);
  CHECK(val_now == hist.best_val_mse);
  const double train_now = batch_mse(model, tr.x, tr.y, ws);
  CHECK(train_now
        == hist.train_mse[static_cast<std::size_t>(hist.best_epoch - 1)]);
  double min_val = hist.val_mse[0];
  for (double v : hist.val_mse) min_val = std::min(min_val, v);
  CHECK(hist.best_val_mse == min_val);
  // Fitting the zero function should be essentially exact.
  CHECK(hist.best_val_mse < 1e-10);
  // Learning rates only ever decrease, by exact halvings.
  for (std::size_t e = 1; e < hist.lr.size(); ++e) {
    CHECK(hist.lr[e] <= hist.lr[e - 1]);
    const double ratio = hist.lr[e] / hist.lr[0];
    const double k = std::round(-std::log2(ratio));
    CHECK(std::abs(ratio - std::pow(0.5, k)) < 1e-15);
  }
}

TEST_CASE("training is deterministic given the seed") {
  Dataset data = random_dataset(50, 2, 21, 0.1);
  TrainingConfig cfg;
  cfg.max_epochs = 200;
  cfg.seed = 5;
  TnnModel m1 = make_tnn(2, 2, {4}, 9);
  TnnModel m2 = make_tnn(2, 2, {4}, 9);
  RunHistory h1 = train(m1, data, cfg);
  RunHistory h2 = train(m2, data, cfg);
  CHECK(h1.train_mse == h2.train_mse);
  CHECK(h1.val_mse == h2.val_mse);
  CHECK(h1.lr == h2.lr);
  CHECK(h1.best_epoch == h2.best_epoch);
  for (std::size_t i = 0; i < m1.subnets.size(); ++i)
    CHECK(m1.subnets[i].params == m2.subnets[i].params);
}

TEST_CASE("divergence is reported with the epoch that produced it") {
  TnnModel model = make_tnn(2, 2, {4}, 31);
  oracles::randomize_params(model, 32);
  Dataset tr = random_dataset(20, 2, 33, 0.5);
  Dataset va = random_dataset(8, 2, 34, 0.5);
  TrainingConfig cfg;
  cfg.initial_lr = 1e300;
  cfg.max_epochs = 10;
  try {
    train(model, tr, va, cfg);
    FAIL("expected DivergenceError");
  } catch (const DivergenceError& e) {
    CHECK(e.epoch() == 2);
  }
}

TEST_CASE("both datasets must share one normalization") {
  TnnModel model = make_tnn(2, 1, {3}, 41);
  Dataset tr = random_dataset(20, 2, 42, 0.0);
  Dataset va = random_dataset(8, 2, 43, 0.0);
  va.norm.y_mean = 99.0;
  TrainingConfig cfg;
  cfg.max_epochs = 5;
  CHECK_THROWS_AS(train(model, tr, va, cfg), ValidationError);
}

TEST_CASE("training config validation") {
  TrainingConfig cfg;
  SUBCASE("non-positive learning rate") {
    cfg.initial_lr = 0.0;
    CHECK_THROWS_AS(validate(cfg), ValidationError);
  }
  SUBCASE("factor outside (0, 1)") {
    cfg.lr_factor = 1.5;
    CHECK_THROWS_AS(validate(cfg), ValidationError);
  }
  SUBCASE("non-positive epochs") {
    cfg.max_epochs = 0;
    CHECK_THROWS_AS(validate(cfg), ValidationError);
  }
  SUBCASE("non-positive patience") {
    cfg.lr_patience = 0;
    CHECK_THROWS_AS(validate(cfg), ValidationError);
  }
}

TEST_CASE("history CSV: header, 1-based epochs, full precision") {
  RunHistory hist;
  hist.train_mse = {0.5, 0.25};
  hist.val_mse = {0.75, 0.5};
  hist.lr = {1e-3, 1e-3};
  std::ostringstream out;
  write_history_csv(hist, out);
  std::istringstream in(out.str());
  std::string line;
  REQUIRE(std::getline(in, line));
  CHECK(line == "epoch,train_mse,val_mse,lr");
  REQUIRE(std::getline(in, line));
  CHECK(line.substr(0, 2) == "1,");
  CHECK(line.find("5.0000000000000000e-01") != std::string::npos);
  REQUIRE(std::getline(in, line));
  CHECK(line.substr(0, 2) == "2,");
}

TEST_CASE("baseline models train through the same loop") {
  Dataset tr = random_dataset(30, 2, 51, 0.2);
  Dataset va = random_dataset(10, 2, 52, 0.2);
  TrainingConfig cfg;
  cfg.max_epochs = 300;
  SUBCASE("dense baseline") {
    FfnModel model = make_ffn(2, {8}, 53);
    RunHistory hist = train(model, tr, va, cfg);
    CHECK(hist.epochs() >= 1);
    CHECK(hist.best_val_mse < 0.04);  // constant 0.2 is easy to fit
    BatchWorkspace ws;
    CHECK(batch_mse(model, va.x, va.y, ws) == hist.best_val_mse);
  }
  SUBCASE("radial baseline") {
    RbnModel model = make_rbn(2, 10, 54);
    RunHistory hist = train(model, tr, va, cfg);
    CHECK(hist.epochs() >= 1);
    CHECK(hist.best_val_mse < 0.04);
    BatchWorkspace ws;
    CHECK(batch_mse(model, va.x, va.y, ws) == hist.best_val_mse);
  }
}
