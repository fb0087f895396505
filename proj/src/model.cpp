#include "tennet/model.hpp"

#include <cmath>
#include <string>

#include "tennet/errors.hpp"

namespace tennet {

namespace {

bool all_finite(std::span<const double> v) {
  for (double x : v) {
    if (!std::isfinite(x)) return false;
  }
  return true;
}

std::string size_str(std::size_t n) { return std::to_string(n); }

}  // namespace

const char* to_string(ModelKind kind) {
  switch (kind) {
    case ModelKind::Tnn: return "tnn";
    case ModelKind::Ffn: return "ffn";
    case ModelKind::Rbn: return "rbn";
  }
  return "?";
}

ModelKind model_kind_from_string(const std::string& name) {
  if (name == "tnn") return ModelKind::Tnn;
  if (name == "ffn") return ModelKind::Ffn;
  if (name == "rbn") return ModelKind::Rbn;
  throw ValidationError("unknown model kind '" + name + "' (expected tnn, ffn or rbn)");
}

std::size_t MlpArch::param_count() const {
  std::size_t n = 0;
  for (int l = 0; l < layer_count(); ++l) {
    n += static_cast<std::size_t>(layer_out(l)) * layer_in(l) + layer_out(l);
  }
  return n;
}

void validate(const MlpArch& arch) {
  if (arch.input_width <= 0 || arch.output_width <= 0) {
    throw ValidationError("mlp: input and output widths must be positive");
  }
  if (arch.hidden_widths.empty()) {
    throw ValidationError("mlp: need at least one hidden layer");
  }
  for (int w : arch.hidden_widths) {
    if (w <= 0) throw ValidationError("mlp: hidden widths must be positive");
  }
}

void validate(const MlpArch& arch, const MlpParams& params) {
  validate(arch);
  const auto layers = static_cast<std::size_t>(arch.layer_count());
  if (params.weights.size() != layers || params.biases.size() != layers) {
    throw ShapeError("mlp: expected " + size_str(layers) + " weight/bias layers, got " +
                     size_str(params.weights.size()) + "/" + size_str(params.biases.size()));
  }
  for (int l = 0; l < arch.layer_count(); ++l) {
    const Matrix& w = params.weights[l];
    if (w.rows() != arch.layer_out(l) || w.cols() != arch.layer_in(l)) {
      throw ShapeError("mlp: layer " + std::to_string(l) + " weights are " +
                       std::to_string(w.rows()) + "x" + std::to_string(w.cols()) +
                       ", expected " + std::to_string(arch.layer_out(l)) + "x" +
                       std::to_string(arch.layer_in(l)));
    }
    if (params.biases[l].size() != static_cast<std::size_t>(arch.layer_out(l))) {
      throw ShapeError("mlp: layer " + std::to_string(l) + " bias size mismatch");
    }
    if (!all_finite({w.data(), w.size()}) || !all_finite(params.biases[l])) {
      throw ValidationError("mlp: non-finite parameter in layer " + std::to_string(l));
    }
  }
}

void validate(const NormalizationParams& norm) {
  if (norm.x_min.size() != norm.x_max.size()) {
    throw ShapeError("normalization: x_min/x_max size mismatch");
  }
  for (int i = 0; i < norm.dim(); ++i) {
    if (!std::isfinite(norm.x_min[i]) || !std::isfinite(norm.x_max[i]) ||
        !(norm.x_min[i] < norm.x_max[i])) {
      throw ValidationError("normalization: need finite x_min < x_max per dimension");
    }
  }
  if (!std::isfinite(norm.y_mean) || !std::isfinite(norm.y_min) ||
      !std::isfinite(norm.y_max) || !(norm.y_min < norm.y_max)) {
    throw ValidationError("normalization: need finite y_min < y_max and y_mean");
  }
}

void validate(const TnnModel& model) {
  if (model.dim <= 0 || model.rank <= 0) {
    throw ValidationError("tnn: dim and rank must be positive");
  }
  if (model.subnets.size() != static_cast<std::size_t>(model.dim)) {
    throw ShapeError("tnn: expected " + std::to_string(model.dim) + " subnetworks, got " +
                     size_str(model.subnets.size()));
  }
  for (const Subnetwork& s : model.subnets) {
    if (s.arch.input_width != 1) {
      throw ShapeError("tnn: subnetworks take exactly one input");
    }
    if (s.arch.output_width != model.rank) {
      throw ShapeError("tnn: subnetwork output width must equal rank " +
                       std::to_string(model.rank));
    }
    validate(s.arch, s.params);
  }
  if (model.norm) {
    validate(*model.norm);
    if (model.norm->dim() != model.dim) {
      throw ShapeError("tnn: normalization dimension mismatch");
    }
  }
}

void validate(const FfnModel& model) {
  if (model.arch.output_width != 1) {
    throw ShapeError("ffn: output width must be 1");
  }
  validate(model.arch, model.params);
  if (model.norm) {
    validate(*model.norm);
    if (model.norm->dim() != model.arch.input_width) {
      throw ShapeError("ffn: normalization dimension mismatch");
    }
  }
}

void validate(const RbnModel& model) {
  const RbnParams& p = model.params;
  if (p.centers.rows() <= 0 || p.centers.cols() <= 0) {
    throw ValidationError("rbn: need at least one unit and one input dimension");
  }
  const auto units = static_cast<std::size_t>(p.centers.rows());
  if (p.sigmas.size() != units || p.weights.size() != units) {
    throw ShapeError("rbn: sigmas/weights size must match the number of centers");
  }
  if (!all_finite({p.centers.data(), p.centers.size()}) || !all_finite(p.sigmas) ||
      !all_finite(p.weights) || !std::isfinite(p.bias)) {
    throw ValidationError("rbn: non-finite parameter");
  }
  for (double s : p.sigmas) {
    if (!(s > 0.0)) throw ValidationError("rbn: sigmas must be positive");
  }
  if (model.norm) {
    validate(*model.norm);
    if (model.norm->dim() != model.dim()) {
      throw ShapeError("rbn: normalization dimension mismatch");
    }
  }
}

MlpParams init_mlp_params(const MlpArch& arch, Rng& rng) {
  validate(arch);
  MlpParams params;
  params.weights.reserve(arch.layer_count());
  params.biases.reserve(arch.layer_count());
  for (int l = 0; l < arch.layer_count(); ++l) {
    const int out = arch.layer_out(l);
    const int in = arch.layer_in(l);
    Matrix w(out, in);
    const double bound = 1.0 / std::sqrt(static_cast<double>(in));
    for (int o = 0; o < out; ++o) {
      for (int i = 0; i < in; ++i) w(o, i) = rng.uniform(-bound, bound);
    }
    params.weights.push_back(std::move(w));
    params.biases.emplace_back(out, 0.0);
  }
  return params;
}

TnnModel make_tnn(int dim, int rank, const std::vector<int>& hidden_widths,
                  std::uint64_t seed) {
  TnnModel model;
  model.dim = dim;
  model.rank = rank;
  model.subnets.reserve(static_cast<std::size_t>(dim > 0 ? dim : 0));
  for (int i = 0; i < dim; ++i) {
    Subnetwork s;
    s.arch = MlpArch{1, hidden_widths, rank};
    Rng rng(derive_seed(seed, static_cast<std::uint64_t>(i)));
    s.params = init_mlp_params(s.arch, rng);
    model.subnets.push_back(std::move(s));
  }
  validate(model);
  return model;
}

FfnModel make_ffn(int dim, const std::vector<int>& hidden_widths,
                  std::uint64_t seed) {
  FfnModel model;
  model.arch = MlpArch{dim, hidden_widths, 1};
  Rng rng(derive_seed(seed, 0));
  model.params = init_mlp_params(model.arch, rng);
  validate(model);
  return model;
}

RbnModel make_rbn(int dim, int units, std::uint64_t seed) {
  if (dim <= 0 || units <= 0) {
    throw ValidationError("rbn: dim and units must be positive");
  }
  RbnModel model;
  RbnParams& p = model.params;
  p.centers = Matrix(units, dim);
  Rng rng(derive_seed(seed, 0));
  for (int k = 0; k < units; ++k) {
    for (int i = 0; i < dim; ++i) p.centers(k, i) = rng.uniform();
  }
  p.sigmas.assign(static_cast<std::size_t>(units), 1.0);
  const double bound = 1.0 / std::sqrt(static_cast<double>(units));
  p.weights.resize(static_cast<std::size_t>(units));
  for (double& w : p.weights) w = rng.uniform(-bound, bound);
  p.bias = 0.0;
  validate(model);
  return model;
}

std::vector<double> mlp_forward(const MlpArch& arch, const MlpParams& params,
                                std::span<const double> input) {
  validate(arch, params);
  if (input.size() != static_cast<std::size_t>(arch.input_width)) {
    throw ShapeError("mlp_forward: expected " + std::to_string(arch.input_width) +
                     " inputs, got " + size_str(input.size()));
  }
  if (!all_finite(input)) {
    throw ValidationError("mlp_forward: non-finite input");
  }
  std::vector<double> cur(input.begin(), input.end());
  std::vector<double> next;
  for (int l = 0; l < arch.layer_count(); ++l) {
    const Matrix& w = params.weights[l];
    const std::vector<double>& b = params.biases[l];
    next.resize(static_cast<std::size_t>(w.rows()));
    const bool hidden = l < arch.depth();
    for (int o = 0; o < w.rows(); ++o) {
      const double z = dot(w.row(o), cur.data(), w.cols()) + b[o];
      next[o] = hidden ? std::tanh(z) : z;
    }
    cur.swap(next);
  }
  return cur;
}

std::vector<double> subnetwork_values(const TnnModel& model, int i, double x_i) {
  if (i < 0 || i >= model.dim) {
    throw ShapeError("subnetwork_values: dimension index out of range");
  }
  const Subnetwork& s = model.subnets[static_cast<std::size_t>(i)];
  return mlp_forward(s.arch, s.params, {&x_i, 1});
}

double tnn_forward(const TnnModel& model, std::span<const double> x) {
  validate(model);
  if (x.size() != static_cast<std::size_t>(model.dim)) {
    throw ShapeError("tnn_forward: expected " + std::to_string(model.dim) +
                     " inputs, got " + size_str(x.size()));
  }
  if (!all_finite(x)) throw ValidationError("tnn_forward: non-finite input");
  std::vector<double> prod(static_cast<std::size_t>(model.rank), 1.0);
  for (int i = 0; i < model.dim; ++i) {
    const Subnetwork& s = model.subnets[static_cast<std::size_t>(i)];
    const std::vector<double> phi = mlp_forward(s.arch, s.params, {&x[static_cast<std::size_t>(i)], 1});
    for (int j = 0; j < model.rank; ++j) prod[static_cast<std::size_t>(j)] *= phi[static_cast<std::size_t>(j)];
  }
  double sum = 0.0;
  for (double v : prod) sum += v;
  return sum;
}

double ffn_forward(const FfnModel& model, std::span<const double> x) {
  validate(model);
  return mlp_forward(model.arch, model.params, x)[0];
}

double rbn_forward(const RbnModel& model, std::span<const double> x) {
  validate(model);
  if (x.size() != static_cast<std::size_t>(model.dim())) {
    throw ShapeError("rbn_forward: expected " + std::to_string(model.dim()) +
                     " inputs, got " + size_str(x.size()));
  }
  if (!all_finite(x)) throw ValidationError("rbn_forward: non-finite input");
  const RbnParams& p = model.params;
  double sum = p.bias;
  for (int k = 0; k < model.units(); ++k) {
    double d2 = 0.0;
    const double* c = p.centers.row(k);
    for (int i = 0; i < model.dim(); ++i) {
      const double d = x[static_cast<std::size_t>(i)] - c[i];
      d2 += d * d;
    }
    const std::size_t ks = static_cast<std::size_t>(k);
    sum += p.weights[ks] * std::exp(-d2 / (2.0 * p.sigmas[ks] * p.sigmas[ks]));
  }
  return sum;
}

std::size_t param_count(const TnnModel& model) {
  std::size_t n = 0;
  for (const Subnetwork& s : model.subnets) n += s.arch.param_count();
  return n;
}

std::size_t param_count(const FfnModel& model) { return model.arch.param_count(); }

std::size_t param_count(const RbnModel& model) {
  return model.params.centers.size() + model.params.sigmas.size() +
         model.params.weights.size() + 1;
}

}  // namespace tennet
