#include "tennet/quadrature.hpp"

#include <cmath>
#include <numbers>
#include <string>

#include "tennet/errors.hpp"
#include "tennet/matrix.hpp"

namespace tennet {

namespace {

// P_n(z) by the three-term recurrence; *pp receives P_n'(z). Only valid
// for |z| < 1, which holds for every interior root.
double legendre_pair(int n, double z, double* pp) {
  double p0 = 1.0;
  double p1 = z;
  for (int j = 2; j <= n; ++j) {
    const double p2 = ((2.0 * j - 1.0) * z * p1 - (j - 1.0) * p0) / j;
    p0 = p1;
    p1 = p2;
  }
  *pp = n * (z * p1 - p0) / (z * z - 1.0);
  return p1;
}

void check_factor_args(int dim, int rank, const QuadratureRule& rule) {
  if (dim <= 0 || rank <= 0) {
    throw ValidationError("integrate: dim and rank must be positive");
  }
  if (rule.dim() != dim) {
    throw ShapeError("integrate: rule covers " + std::to_string(rule.dim()) +
                     " dimensions, expected " + std::to_string(dim));
  }
}

}  // namespace

void validate(const Interval& interval) {
  if (!std::isfinite(interval.lo) || !std::isfinite(interval.hi) ||
      !(interval.lo < interval.hi)) {
    throw ValidationError("interval: need finite lo < hi");
  }
}

WeightFactor WeightFactor::uniform(double a, double b) {
  WeightFactor f;
  f.kind = Kind::Uniform;
  f.a = a;
  f.b = b;
  return f;
}

WeightFactor WeightFactor::gaussian(double mu, double sigma) {
  WeightFactor f;
  f.kind = Kind::GaussianTruncated;
  f.mu = mu;
  f.sigma = sigma;
  return f;
}

void validate(const WeightFactor& factor) {
  switch (factor.kind) {
    case WeightFactor::Kind::Flat:
      return;
    case WeightFactor::Kind::Uniform:
      if (!std::isfinite(factor.a) || !std::isfinite(factor.b) ||
          !(factor.a < factor.b)) {
        throw ValidationError("weight: uniform window needs finite a < b");
      }
      return;
    case WeightFactor::Kind::GaussianTruncated:
      if (!std::isfinite(factor.mu) || !std::isfinite(factor.sigma) ||
          !(factor.sigma > 0.0)) {
        throw ValidationError("weight: gaussian needs finite mu and sigma > 0");
      }
      return;
  }
}

Rule1d gauss_legendre_rule(int n, const Interval& interval) {
  if (n <= 0) {
    throw ValidationError("gauss_legendre_rule: node count must be positive");
  }
  validate(interval);
  Rule1d rule;
  rule.interval = interval;
  rule.nodes.assign(static_cast<std::size_t>(n), 0.0);
  rule.weights.assign(static_cast<std::size_t>(n), 0.0);
  const double mid = 0.5 * (interval.lo + interval.hi);
  const double half = 0.5 * (interval.hi - interval.lo);
  const int pairs = (n + 1) / 2;
  for (int k = 1; k <= pairs; ++k) {
    const bool middle = 2 * k == n + 1;
    double z = middle ? 0.0
                      : std::cos(std::numbers::pi * (k - 0.25) / (n + 0.5));
    double pp = 0.0;
    if (!middle) {
      bool converged = false;
      for (int it = 0; it < 100; ++it) {
        const double p = legendre_pair(n, z, &pp);
        const double dz = p / pp;
        z -= dz;
        if (std::abs(dz) <= 1e-14) {
          converged = true;
          break;
        }
      }
      if (!converged) {
        throw Error("gauss_legendre_rule: Newton iteration did not converge");
      }
    }
    legendre_pair(n, z, &pp);
    const double w_ref = 2.0 / ((1.0 - z * z) * pp * pp);
    // z >= 0; pair symmetric about the midpoint, identical weights.
    rule.nodes[static_cast<std::size_t>(k - 1)] = mid - half * z;
    rule.nodes[static_cast<std::size_t>(n - k)] = mid + half * z;
    rule.weights[static_cast<std::size_t>(k - 1)] = half * w_ref;
    rule.weights[static_cast<std::size_t>(n - k)] = half * w_ref;
  }
  return rule;
}

QuadratureRule build_rule(std::span<const Interval> domain,
                          std::span<const int> counts) {
  if (domain.empty()) throw ValidationError("build_rule: empty domain");
  if (counts.size() != domain.size()) {
    throw ShapeError("build_rule: need one node count per dimension");
  }
  QuadratureRule rule;
  rule.dims.reserve(domain.size());
  for (std::size_t i = 0; i < domain.size(); ++i) {
    rule.dims.push_back(gauss_legendre_rule(counts[i], domain[i]));
  }
  return rule;
}

double integrate_factors(const FactorFn& factors, int dim, int rank,
                         const QuadratureRule& rule) {
  check_factor_args(dim, rank, rule);
  const std::size_t p = static_cast<std::size_t>(rank);
  std::vector<double> acc(p, 1.0);
  std::vector<double> s(p);
  std::vector<double> phi(p);
  for (int i = 0; i < dim; ++i) {
    const Rule1d& r = rule.dims[static_cast<std::size_t>(i)];
    s.assign(p, 0.0);
    for (int q = 0; q < r.count(); ++q) {
      const std::size_t qs = static_cast<std::size_t>(q);
      factors(i, r.nodes[qs], phi);
      axpy(r.weights[qs], phi.data(), s.data(), rank);
    }
    for (std::size_t j = 0; j < p; ++j) acc[j] *= s[j];
  }
  double total = 0.0;
  for (double v : acc) total += v;
  return total;
}

double integrate_factors_squared(const FactorFn& factors, int dim, int rank,
                                 const QuadratureRule& rule) {
  check_factor_args(dim, rank, rule);
  const std::size_t p = static_cast<std::size_t>(rank);
  Matrix acc(rank, rank);
  acc.fill(1.0);
  Matrix gram(rank, rank);
  std::vector<double> phi(p);
  for (int i = 0; i < dim; ++i) {
    const Rule1d& r = rule.dims[static_cast<std::size_t>(i)];
    gram.fill(0.0);
    for (int q = 0; q < r.count(); ++q) {
      const std::size_t qs = static_cast<std::size_t>(q);
      factors(i, r.nodes[qs], phi);
      const double w = r.weights[qs];
      for (int j = 0; j < rank; ++j) {
        const double wj = w * phi[static_cast<std::size_t>(j)];
        axpy(wj, phi.data(), gram.row(j), rank);
      }
    }
    for (std::size_t t = 0; t < acc.size(); ++t) acc.data()[t] *= gram.data()[t];
  }
  double total = 0.0;
  for (std::size_t t = 0; t < acc.size(); ++t) total += acc.data()[t];
  return total;
}

WeightedMoments weighted_factor_moments(const FactorFn& factors, int dim,
                                        int rank, const QuadratureRule& rule,
                                        const WeightFunctionSpec& weights) {
  check_factor_args(dim, rank, rule);
  if (weights.dim() != dim) {
    throw ShapeError("weighted moments: need one weight factor per dimension");
  }
  const std::size_t p = static_cast<std::size_t>(rank);
  std::vector<double> mean_acc(p, 1.0);
  std::vector<double> s(p);
  std::vector<double> phi(p);
  Matrix gram_acc(rank, rank);
  gram_acc.fill(1.0);
  Matrix gram(rank, rank);
  double denom = 1.0;

  for (int i = 0; i < dim; ++i) {
    const std::size_t is = static_cast<std::size_t>(i);
    const WeightFactor& wf = weights.factors[is];
    validate(wf);

    // Effective rule and weight values for this dimension.
    const Rule1d* r = &rule.dims[is];
    Rule1d clipped;
    if (wf.kind == WeightFactor::Kind::Uniform) {
      const Interval& box = r->interval;
      const Interval window{std::max(box.lo, wf.a), std::min(box.hi, wf.b)};
      if (!(window.lo < window.hi)) {
        throw DegenerateWeightError(
            "weight: uniform window has zero measure inside the domain");
      }
      clipped = gauss_legendre_rule(r->count(), window);
      r = &clipped;
    }
    std::vector<double> rho(static_cast<std::size_t>(r->count()), 1.0);
    if (wf.kind == WeightFactor::Kind::GaussianTruncated) {
      for (int q = 0; q < r->count(); ++q) {
        const double u = (r->nodes[static_cast<std::size_t>(q)] - wf.mu) / wf.sigma;
        rho[static_cast<std::size_t>(q)] = std::exp(-0.5 * u * u);
      }
    }

    double d_i = 0.0;
    s.assign(p, 0.0);
    gram.fill(0.0);
    for (int q = 0; q < r->count(); ++q) {
      const std::size_t qs = static_cast<std::size_t>(q);
      const double wr = r->weights[qs] * rho[qs];
      d_i += wr;
      factors(i, r->nodes[qs], phi);
      axpy(wr, phi.data(), s.data(), rank);
      for (int j = 0; j < rank; ++j) {
        axpy(wr * phi[static_cast<std::size_t>(j)], phi.data(), gram.row(j), rank);
      }
    }
    if (!std::isfinite(d_i) || d_i <= 1e-300) {
      throw DegenerateWeightError(
          "weight: support has zero measure inside the domain");
    }
    denom *= d_i;
    for (std::size_t j = 0; j < p; ++j) mean_acc[j] *= s[j];
    for (std::size_t t = 0; t < gram_acc.size(); ++t) {
      gram_acc.data()[t] *= gram.data()[t];
    }
  }

  if (!std::isfinite(denom) || denom <= 1e-300) {
    throw DegenerateWeightError("weight: degenerate normalization");
  }
  WeightedMoments m;
  double num1 = 0.0;
  for (double v : mean_acc) num1 += v;
  double num2 = 0.0;
  for (std::size_t t = 0; t < gram_acc.size(); ++t) num2 += gram_acc.data()[t];
  m.mean = num1 / denom;
  m.square_mean = num2 / denom;
  return m;
}

namespace {

// Factor callback evaluating the model's subnetworks, rescaling raw
// coordinates into the model's normalized input units when needed.
FactorFn model_factors(const TnnModel& model) {
  return [&model](int i, double x, std::span<double> out) {
    double xi = x;
    if (model.norm) xi = normalize_input(*model.norm, i, x);
    const Subnetwork& s = model.subnets[static_cast<std::size_t>(i)];
    const std::vector<double> phi = mlp_forward(s.arch, s.params, {&xi, 1});
    std::copy(phi.begin(), phi.end(), out.begin());
  };
}

void check_model_rule(const TnnModel& model, const QuadratureRule& rule) {
  validate(model);
  if (rule.dim() != model.dim) {
    throw ShapeError("integrate: rule dimension does not match the model");
  }
  for (const Rule1d& r : rule.dims) validate(r.interval);
}

double domain_volume(const QuadratureRule& rule) {
  double vol = 1.0;
  for (const Rule1d& r : rule.dims) vol *= r.interval.length();
  return vol;
}

}  // namespace

double integrate_tnn(const TnnModel& model, const QuadratureRule& rule) {
  check_model_rule(model, rule);
  const double i1 = integrate_factors(model_factors(model), model.dim,
                                      model.rank, rule);
  if (!model.norm) return i1;
  const double a = model.norm->y_scale();
  const double c = model.norm->y_mean;
  return a * i1 + c * domain_volume(rule);
}

double integrate_tnn_squared(const TnnModel& model, const QuadratureRule& rule) {
  check_model_rule(model, rule);
  const FactorFn factors = model_factors(model);
  const double i2 = integrate_factors_squared(factors, model.dim, model.rank, rule);
  if (!model.norm) return i2;
  const double i1 = integrate_factors(factors, model.dim, model.rank, rule);
  const double a = model.norm->y_scale();
  const double c = model.norm->y_mean;
  return a * a * i2 + 2.0 * a * c * i1 + c * c * domain_volume(rule);
}

WeightedMoments predict_moments(const TnnModel& model, const QuadratureRule& rule,
                                const WeightFunctionSpec& weights) {
  check_model_rule(model, rule);
  WeightedMoments m = weighted_factor_moments(model_factors(model), model.dim,
                                              model.rank, rule, weights);
  if (!model.norm) return m;
  const double a = model.norm->y_scale();
  const double c = model.norm->y_mean;
  WeightedMoments raw;
  raw.mean = a * m.mean + c;
  raw.square_mean = a * a * m.square_mean + 2.0 * a * c * m.mean + c * c;
  return raw;
}

}  // namespace tennet
