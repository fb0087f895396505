#include "tennet/diff.hpp"

#include <cmath>
#include <string>

#include "tennet/errors.hpp"

namespace tennet {

namespace {

// --- batched MLP kernels ------------------------------------------------
// Activations are stored per layer: acts[0] is the n x in input, acts[l+1]
// the n x out result of affine layer l (post-tanh for hidden layers).

void affine_forward(const Matrix& w, const std::vector<double>& b,
                    const Matrix& a, Matrix& z) {
  const int n = a.rows();
  const int out = w.rows();
  const int in = w.cols();
  z.resize(n, out);
  for (int s = 0; s < n; ++s) {
    const double* as = a.row(s);
    double* zs = z.row(s);
    for (int o = 0; o < out; ++o) zs[o] = dot(w.row(o), as, in) + b[static_cast<std::size_t>(o)];
  }
}

void tanh_inplace(Matrix& z) {
  double* p = z.data();
  const std::size_t n = z.size();
  for (std::size_t i = 0; i < n; ++i) p[i] = std::tanh(p[i]);
}

// Fills acts[1..layer_count]; acts[0] must already hold the input batch.
void mlp_batch_forward(const MlpArch& arch, const MlpParams& params,
                       std::vector<Matrix>& acts) {
  acts.resize(static_cast<std::size_t>(arch.layer_count()) + 1);
  for (int l = 0; l < arch.layer_count(); ++l) {
    const std::size_t li = static_cast<std::size_t>(l);
    affine_forward(params.weights[li], params.biases[li], acts[li], acts[li + 1]);
    if (l < arch.depth()) tanh_inplace(acts[li + 1]);
  }
}

// Accumulates parameter gradients for one MLP given the loss gradient
// g_out with respect to its outputs. delta_a/delta_b are swap buffers.
void mlp_batch_backward(const MlpArch& arch, const MlpParams& params,
                        const std::vector<Matrix>& acts, const Matrix& g_out,
                        MlpParams& grad, Matrix& delta_a, Matrix& delta_b) {
  const int n = g_out.rows();
  delta_a.resize(n, g_out.cols());
  std::copy(g_out.data(), g_out.data() + g_out.size(), delta_a.data());
  for (int l = arch.layer_count() - 1; l >= 0; --l) {
    const std::size_t li = static_cast<std::size_t>(l);
    const Matrix& a_in = acts[li];
    const int out = arch.layer_out(l);
    const int in = arch.layer_in(l);
    Matrix& gw = grad.weights[li];
    std::vector<double>& gb = grad.biases[li];
    for (int s = 0; s < n; ++s) {
      const double* ds = delta_a.row(s);
      const double* as = a_in.row(s);
      for (int o = 0; o < out; ++o) {
        axpy(ds[o], as, gw.row(o), in);
        gb[static_cast<std::size_t>(o)] += ds[o];
      }
    }
    if (l == 0) break;
    // delta for the previous layer, through that layer's tanh.
    delta_b.resize(n, in);
    delta_b.fill(0.0);
    const Matrix& w = params.weights[li];
    for (int s = 0; s < n; ++s) {
      const double* ds = delta_a.row(s);
      double* dp = delta_b.row(s);
      for (int o = 0; o < out; ++o) axpy(ds[o], w.row(o), dp, in);
      const double* as = a_in.row(s);
      for (int c = 0; c < in; ++c) dp[c] *= 1.0 - as[c] * as[c];
    }
    std::swap(delta_a, delta_b);
  }
}

void check_batch_shapes(int dim, const Matrix& X, std::span<const double> y) {
  if (X.rows() <= 0) throw ValidationError("batch: empty input");
  if (X.cols() != dim) {
    throw ShapeError("batch: input has " + std::to_string(X.cols()) +
                     " columns, model expects " + std::to_string(dim));
  }
  if (y.size() != static_cast<std::size_t>(X.rows())) {
    throw ShapeError("batch: target size does not match the number of rows");
  }
}

void zero_block(MlpParams& block) {
  for (Matrix& w : block.weights) w.fill(0.0);
  for (std::vector<double>& b : block.biases) b.assign(b.size(), 0.0);
}

MlpParams zero_params(const MlpArch& arch) {
  MlpParams p;
  for (int l = 0; l < arch.layer_count(); ++l) {
    p.weights.emplace_back(arch.layer_out(l), arch.layer_in(l));
    p.biases.emplace_back(static_cast<std::size_t>(arch.layer_out(l)), 0.0);
  }
  return p;
}

bool block_matches(const MlpArch& arch, const MlpParams& block) {
  if (block.weights.size() != static_cast<std::size_t>(arch.layer_count())) return false;
  for (int l = 0; l < arch.layer_count(); ++l) {
    const Matrix& w = block.weights[static_cast<std::size_t>(l)];
    if (w.rows() != arch.layer_out(l) || w.cols() != arch.layer_in(l)) return false;
  }
  return true;
}

// n x rank elementwise products of every subnetwork's factors except one,
// assembled from running prefix/suffix products.
void fill_prefix_suffix(const std::vector<std::vector<Matrix>>& acts, int dim,
                        int n, int rank, std::vector<Matrix>& prefix,
                        std::vector<Matrix>& suffix) {
  prefix.resize(static_cast<std::size_t>(dim));
  suffix.resize(static_cast<std::size_t>(dim));
  for (int i = 0; i < dim; ++i) {
    prefix[static_cast<std::size_t>(i)].resize(n, rank);
    suffix[static_cast<std::size_t>(i)].resize(n, rank);
  }
  prefix[0].fill(1.0);
  for (int i = 1; i < dim; ++i) {
    const Matrix& f_prev = acts[static_cast<std::size_t>(i - 1)].back();
    const Matrix& p_prev = prefix[static_cast<std::size_t>(i - 1)];
    Matrix& p = prefix[static_cast<std::size_t>(i)];
    for (std::size_t t = 0; t < p.size(); ++t) p.data()[t] = p_prev.data()[t] * f_prev.data()[t];
  }
  suffix[static_cast<std::size_t>(dim - 1)].fill(1.0);
  for (int i = dim - 2; i >= 0; --i) {
    const Matrix& f_next = acts[static_cast<std::size_t>(i + 1)].back();
    const Matrix& s_next = suffix[static_cast<std::size_t>(i + 1)];
    Matrix& s = suffix[static_cast<std::size_t>(i)];
    for (std::size_t t = 0; t < s.size(); ++t) s.data()[t] = s_next.data()[t] * f_next.data()[t];
  }
}

double mse_from_preds(std::span<const double> preds, std::span<const double> y,
                      std::vector<double>& residual2) {
  const std::size_t n = preds.size();
  residual2.resize(n);
  double sum = 0.0;
  const double scale = 2.0 / static_cast<double>(n);
  for (std::size_t s = 0; s < n; ++s) {
    const double r = preds[s] - y[s];
    residual2[s] = scale * r;
    sum += r * r;
  }
  return sum / static_cast<double>(n);
}

}  // namespace

std::vector<Jet2> subnetwork_jet(const MlpArch& arch, const MlpParams& params,
                                 double x) {
  validate(arch, params);
  if (arch.input_width != 1) {
    throw ShapeError("subnetwork_jet: architecture must take one input");
  }
  if (!std::isfinite(x)) throw ValidationError("subnetwork_jet: non-finite input");
  std::vector<double> a{x}, a1{1.0}, a2{0.0};
  std::vector<double> za, za1, za2;
  for (int l = 0; l < arch.layer_count(); ++l) {
    const Matrix& w = params.weights[static_cast<std::size_t>(l)];
    const std::vector<double>& b = params.biases[static_cast<std::size_t>(l)];
    const int out = w.rows();
    const int in = w.cols();
    za.resize(static_cast<std::size_t>(out));
    za1.resize(static_cast<std::size_t>(out));
    za2.resize(static_cast<std::size_t>(out));
    const bool hidden = l < arch.depth();
    for (int o = 0; o < out; ++o) {
      const double z = dot(w.row(o), a.data(), in) + b[static_cast<std::size_t>(o)];
      const double z1 = dot(w.row(o), a1.data(), in);
      const double z2 = dot(w.row(o), a2.data(), in);
      const std::size_t os = static_cast<std::size_t>(o);
      if (hidden) {
        const double t = std::tanh(z);
        const double sech2 = 1.0 - t * t;
        za[os] = t;
        za1[os] = sech2 * z1;
        za2[os] = sech2 * z2 - 2.0 * t * sech2 * z1 * z1;
      } else {
        za[os] = z;
        za1[os] = z1;
        za2[os] = z2;
      }
    }
    a.swap(za);
    a1.swap(za1);
    a2.swap(za2);
  }
  std::vector<Jet2> jets(a.size());
  for (std::size_t o = 0; o < a.size(); ++o) jets[o] = Jet2{a[o], a1[o], a2[o]};
  return jets;
}

ParamGradient zeros_like(const TnnModel& model) {
  ParamGradient g;
  g.kind = ModelKind::Tnn;
  for (const Subnetwork& s : model.subnets) g.blocks.push_back(zero_params(s.arch));
  return g;
}

ParamGradient zeros_like(const FfnModel& model) {
  ParamGradient g;
  g.kind = ModelKind::Ffn;
  g.blocks.push_back(zero_params(model.arch));
  return g;
}

ParamGradient zeros_like(const RbnModel& model) {
  ParamGradient g;
  g.kind = ModelKind::Rbn;
  g.rbn.centers = Matrix(model.units(), model.dim());
  g.rbn.sigmas.assign(static_cast<std::size_t>(model.units()), 0.0);
  g.rbn.weights.assign(static_cast<std::size_t>(model.units()), 0.0);
  g.rbn.bias = 0.0;
  return g;
}

namespace {

void append_block_spans(MlpParams& block, std::vector<std::span<double>>& out) {
  for (std::size_t l = 0; l < block.weights.size(); ++l) {
    Matrix& w = block.weights[l];
    out.push_back({w.data(), w.size()});
    out.push_back(block.biases[l]);
  }
}

}  // namespace

std::vector<std::span<double>> param_spans(TnnModel& model) {
  std::vector<std::span<double>> out;
  for (Subnetwork& s : model.subnets) append_block_spans(s.params, out);
  return out;
}

std::vector<std::span<double>> param_spans(FfnModel& model) {
  std::vector<std::span<double>> out;
  append_block_spans(model.params, out);
  return out;
}

std::vector<std::span<double>> param_spans(RbnModel& model) {
  RbnParams& p = model.params;
  return {{p.centers.data(), p.centers.size()},
          p.sigmas,
          p.weights,
          {&p.bias, 1}};
}

std::vector<std::span<double>> param_spans(ParamGradient& grad) {
  if (grad.kind == ModelKind::Rbn) {
    RbnParams& p = grad.rbn;
    return {{p.centers.data(), p.centers.size()},
            p.sigmas,
            p.weights,
            {&p.bias, 1}};
  }
  std::vector<std::span<double>> out;
  for (MlpParams& block : grad.blocks) append_block_spans(block, out);
  return out;
}

double batch_mse_and_gradient(const TnnModel& model, const Matrix& X,
                              std::span<const double> y, ParamGradient& grad,
                              BatchWorkspace& ws) {
  check_batch_shapes(model.dim, X, y);
  const int n = X.rows();
  const int d = model.dim;
  const int p = model.rank;

  bool rebuild = grad.kind != ModelKind::Tnn ||
                 grad.blocks.size() != static_cast<std::size_t>(d);
  for (int i = 0; !rebuild && i < d; ++i) {
    rebuild = !block_matches(model.subnets[static_cast<std::size_t>(i)].arch,
                             grad.blocks[static_cast<std::size_t>(i)]);
  }
  if (rebuild) grad = zeros_like(model);
  else {
    for (MlpParams& block : grad.blocks) zero_block(block);
  }

  ws.acts.resize(static_cast<std::size_t>(d));
  for (int i = 0; i < d; ++i) {
    const Subnetwork& sn = model.subnets[static_cast<std::size_t>(i)];
    std::vector<Matrix>& acts = ws.acts[static_cast<std::size_t>(i)];
    acts.resize(static_cast<std::size_t>(sn.arch.layer_count()) + 1);
    acts[0].resize(n, 1);
    for (int s = 0; s < n; ++s) acts[0](s, 0) = X(s, i);
    mlp_batch_forward(sn.arch, sn.params, acts);
  }

  fill_prefix_suffix(ws.acts, d, n, p, ws.prefix, ws.suffix);

  ws.preds.resize(static_cast<std::size_t>(n));
  const Matrix& f_last = ws.acts[static_cast<std::size_t>(d - 1)].back();
  const Matrix& p_last = ws.prefix[static_cast<std::size_t>(d - 1)];
  for (int s = 0; s < n; ++s) {
    ws.preds[static_cast<std::size_t>(s)] = dot(f_last.row(s), p_last.row(s), p);
  }
  const double mse = mse_from_preds(ws.preds, y, ws.residual2);

  Matrix& g_out = ws.delta_b;
  for (int i = 0; i < d; ++i) {
    const std::size_t is = static_cast<std::size_t>(i);
    g_out.resize(n, p);
    for (int s = 0; s < n; ++s) {
      const double r2 = ws.residual2[static_cast<std::size_t>(s)];
      const double* pre = ws.prefix[is].row(s);
      const double* suf = ws.suffix[is].row(s);
      double* g = g_out.row(s);
      for (int j = 0; j < p; ++j) g[j] = r2 * pre[j] * suf[j];
    }
    const Subnetwork& sn = model.subnets[is];
    // delta_b doubles as g_out; backward copies it into delta_a first.
    mlp_batch_backward(sn.arch, sn.params, ws.acts[is], g_out, grad.blocks[is],
                       ws.delta_a, ws.delta_b);
  }
  return mse;
}

double batch_mse_and_gradient(const FfnModel& model, const Matrix& X,
                              std::span<const double> y, ParamGradient& grad,
                              BatchWorkspace& ws) {
  check_batch_shapes(model.arch.input_width, X, y);
  const int n = X.rows();

  const bool rebuild = grad.kind != ModelKind::Ffn || grad.blocks.size() != 1 ||
                       !block_matches(model.arch, grad.blocks[0]);
  if (rebuild) grad = zeros_like(model);
  else zero_block(grad.blocks[0]);

  ws.acts.resize(1);
  std::vector<Matrix>& acts = ws.acts[0];
  acts.resize(static_cast<std::size_t>(model.arch.layer_count()) + 1);
  acts[0].resize(n, X.cols());
  std::copy(X.data(), X.data() + X.size(), acts[0].data());
  mlp_batch_forward(model.arch, model.params, acts);

  ws.preds.resize(static_cast<std::size_t>(n));
  for (int s = 0; s < n; ++s) ws.preds[static_cast<std::size_t>(s)] = acts.back()(s, 0);
  const double mse = mse_from_preds(ws.preds, y, ws.residual2);

  Matrix& g_out = ws.delta_b;
  g_out.resize(n, 1);
  for (int s = 0; s < n; ++s) g_out(s, 0) = ws.residual2[static_cast<std::size_t>(s)];
  mlp_batch_backward(model.arch, model.params, acts, g_out, grad.blocks[0],
                     ws.delta_a, ws.delta_b);
  return mse;
}

double batch_mse_and_gradient(const RbnModel& model, const Matrix& X,
                              std::span<const double> y, ParamGradient& grad,
                              BatchWorkspace& ws) {
  check_batch_shapes(model.dim(), X, y);
  const int n = X.rows();
  const int K = model.units();
  const int d = model.dim();
  const RbnParams& p = model.params;

  const bool rebuild = grad.kind != ModelKind::Rbn ||
                       grad.rbn.centers.rows() != K || grad.rbn.centers.cols() != d;
  if (rebuild) grad = zeros_like(model);
  else {
    grad.rbn.centers.fill(0.0);
    grad.rbn.sigmas.assign(grad.rbn.sigmas.size(), 0.0);
    grad.rbn.weights.assign(grad.rbn.weights.size(), 0.0);
    grad.rbn.bias = 0.0;
  }

  ws.responses.resize(n, K);
  ws.dist2.resize(n, K);
  ws.preds.resize(static_cast<std::size_t>(n));
  for (int s = 0; s < n; ++s) {
    const double* xs = X.row(s);
    double* phi = ws.responses.row(s);
    double* d2row = ws.dist2.row(s);
    for (int k = 0; k < K; ++k) {
      const double* c = p.centers.row(k);
      double d2 = 0.0;
      for (int i = 0; i < d; ++i) {
        const double diff = xs[i] - c[i];
        d2 += diff * diff;
      }
      const double sig = p.sigmas[static_cast<std::size_t>(k)];
      d2row[k] = d2;
      phi[k] = std::exp(-d2 / (2.0 * sig * sig));
    }
    ws.preds[static_cast<std::size_t>(s)] = p.bias + dot(p.weights.data(), phi, K);
  }
  const double mse = mse_from_preds(ws.preds, y, ws.residual2);

  RbnParams& g = grad.rbn;
  for (int s = 0; s < n; ++s) {
    const double r2 = ws.residual2[static_cast<std::size_t>(s)];
    const double* xs = X.row(s);
    const double* phi = ws.responses.row(s);
    const double* d2row = ws.dist2.row(s);
    g.bias += r2;
    for (int k = 0; k < K; ++k) {
      const std::size_t ks = static_cast<std::size_t>(k);
      const double sig = p.sigmas[ks];
      const double t = r2 * p.weights[ks] * phi[k];
      g.weights[ks] += r2 * phi[k];
      g.sigmas[ks] += t * d2row[k] / (sig * sig * sig);
      const double scale = t / (sig * sig);
      const double* c = p.centers.row(k);
      double* gc = g.centers.row(k);
      for (int i = 0; i < d; ++i) gc[i] += scale * (xs[i] - c[i]);
    }
  }
  return mse;
}

double batch_mse(const TnnModel& model, const Matrix& X,
                 std::span<const double> y, BatchWorkspace& ws) {
  check_batch_shapes(model.dim, X, y);
  const int n = X.rows();
  const int d = model.dim;
  const int p = model.rank;
  ws.acts.resize(1);
  ws.prefix.resize(1);
  Matrix& prod = ws.prefix[0];
  prod.resize(n, p);
  prod.fill(1.0);
  std::vector<Matrix>& acts = ws.acts[0];
  for (int i = 0; i < d; ++i) {
    const Subnetwork& sn = model.subnets[static_cast<std::size_t>(i)];
    acts.resize(static_cast<std::size_t>(sn.arch.layer_count()) + 1);
    acts[0].resize(n, 1);
    for (int s = 0; s < n; ++s) acts[0](s, 0) = X(s, i);
    mlp_batch_forward(sn.arch, sn.params, acts);
    if (i == d - 1) break;
    const Matrix& f = acts.back();
    for (std::size_t t = 0; t < prod.size(); ++t) prod.data()[t] *= f.data()[t];
  }
  const Matrix& f_last = acts.back();
  ws.preds.resize(static_cast<std::size_t>(n));
  for (int s = 0; s < n; ++s) {
    ws.preds[static_cast<std::size_t>(s)] = dot(f_last.row(s), prod.row(s), p);
  }
  return mse_from_preds(ws.preds, y, ws.residual2);
}

double batch_mse(const FfnModel& model, const Matrix& X,
                 std::span<const double> y, BatchWorkspace& ws) {
  check_batch_shapes(model.arch.input_width, X, y);
  const int n = X.rows();
  ws.acts.resize(1);
  std::vector<Matrix>& acts = ws.acts[0];
  acts.resize(static_cast<std::size_t>(model.arch.layer_count()) + 1);
  acts[0].resize(n, X.cols());
  std::copy(X.data(), X.data() + X.size(), acts[0].data());
  mlp_batch_forward(model.arch, model.params, acts);
  ws.preds.resize(static_cast<std::size_t>(n));
  for (int s = 0; s < n; ++s) ws.preds[static_cast<std::size_t>(s)] = acts.back()(s, 0);
  return mse_from_preds(ws.preds, y, ws.residual2);
}

double batch_mse(const RbnModel& model, const Matrix& X,
                 std::span<const double> y, BatchWorkspace& ws) {
  check_batch_shapes(model.dim(), X, y);
  const int n = X.rows();
  const int K = model.units();
  const int d = model.dim();
  const RbnParams& p = model.params;
  ws.preds.resize(static_cast<std::size_t>(n));
  std::vector<double> phi(static_cast<std::size_t>(K));
  for (int s = 0; s < n; ++s) {
    const double* xs = X.row(s);
    for (int k = 0; k < K; ++k) {
      const double* c = p.centers.row(k);
      double d2 = 0.0;
      for (int i = 0; i < d; ++i) {
        const double diff = xs[i] - c[i];
        d2 += diff * diff;
      }
      const double sig = p.sigmas[static_cast<std::size_t>(k)];
      phi[static_cast<std::size_t>(k)] = std::exp(-d2 / (2.0 * sig * sig));
    }
    ws.preds[static_cast<std::size_t>(s)] = p.bias + dot(p.weights.data(), phi.data(), K);
  }
  return mse_from_preds(ws.preds, y, ws.residual2);
}

std::vector<double> batch_predict(const TnnModel& model, const Matrix& X) {
  validate(model);
  if (X.cols() != model.dim) throw ShapeError("batch_predict: dimension mismatch");
  const int n = X.rows();
  const int p = model.rank;
  // Same accumulation order as the training pass (product of the first
  // d-1 factor matrices, then a dot with the last), so evaluating a model
  // reproduces its training history values bitwise.
  std::vector<Matrix> acts;
  Matrix prod(n, p);
  prod.fill(1.0);
  Matrix last;
  for (int i = 0; i < model.dim; ++i) {
    const Subnetwork& sn = model.subnets[static_cast<std::size_t>(i)];
    acts.assign(static_cast<std::size_t>(sn.arch.layer_count()) + 1, Matrix());
    acts[0].resize(n, 1);
    for (int s = 0; s < n; ++s) acts[0](s, 0) = X(s, i);
    mlp_batch_forward(sn.arch, sn.params, acts);
    if (i == model.dim - 1) {
      last = acts.back();
      break;
    }
    const Matrix& f = acts.back();
    for (std::size_t t = 0; t < prod.size(); ++t) prod.data()[t] *= f.data()[t];
  }
  std::vector<double> preds(static_cast<std::size_t>(n));
  for (int s = 0; s < n; ++s) {
    preds[static_cast<std::size_t>(s)] = dot(last.row(s), prod.row(s), p);
  }
  return preds;
}

std::vector<double> batch_predict(const FfnModel& model, const Matrix& X) {
  validate(model);
  if (X.cols() != model.arch.input_width) {
    throw ShapeError("batch_predict: dimension mismatch");
  }
  std::vector<Matrix> acts(static_cast<std::size_t>(model.arch.layer_count()) + 1);
  acts[0] = X;
  mlp_batch_forward(model.arch, model.params, acts);
  std::vector<double> preds(static_cast<std::size_t>(X.rows()));
  for (int s = 0; s < X.rows(); ++s) preds[static_cast<std::size_t>(s)] = acts.back()(s, 0);
  return preds;
}

std::vector<double> batch_predict(const RbnModel& model, const Matrix& X) {
  validate(model);
  if (X.cols() != model.dim()) throw ShapeError("batch_predict: dimension mismatch");
  std::vector<double> preds(static_cast<std::size_t>(X.rows()));
  for (int s = 0; s < X.rows(); ++s) {
    preds[static_cast<std::size_t>(s)] = rbn_forward(model, X.row_span(s));
  }
  return preds;
}

ParamGradient loss_param_gradient(const TnnModel& model, const Matrix& X,
                                  std::span<const double> y) {
  validate(model);
  ParamGradient grad;
  BatchWorkspace ws;
  batch_mse_and_gradient(model, X, y, grad, ws);
  return grad;
}

ParamGradient loss_param_gradient(const FfnModel& model, const Matrix& X,
                                  std::span<const double> y) {
  validate(model);
  ParamGradient grad;
  BatchWorkspace ws;
  batch_mse_and_gradient(model, X, y, grad, ws);
  return grad;
}

ParamGradient loss_param_gradient(const RbnModel& model, const Matrix& X,
                                  std::span<const double> y) {
  validate(model);
  ParamGradient grad;
  BatchWorkspace ws;
  batch_mse_and_gradient(model, X, y, grad, ws);
  return grad;
}

}  // namespace tennet
