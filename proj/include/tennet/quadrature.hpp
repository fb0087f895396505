#pragma once

#include <functional>
#include <span>
#include <vector>

#include "tennet/model.hpp"

namespace tennet {

struct Interval {
  double lo = 0.0;
  double hi = 1.0;

  double length() const { return hi - lo; }
  bool operator==(const Interval&) const = default;
};

// Throws ValidationError unless lo < hi and both are finite.
void validate(const Interval& interval);

// One-dimensional quadrature rule: nodes ascending inside the interval,
// weights positive, sum of weights equal to the interval length.
struct Rule1d {
  Interval interval;
  std::vector<double> nodes;
  std::vector<double> weights;

  int count() const { return static_cast<int>(nodes.size()); }
};

// Per-dimension rules over a product domain. The tensor-product grid is
// implied, never materialized.
struct QuadratureRule {
  std::vector<Rule1d> dims;

  int dim() const { return static_cast<int>(dims.size()); }
};

// n-point Gauss-Legendre rule, exact for polynomials of degree 2n-1.
// Roots come from Newton iteration on the Legendre recurrence (tolerance
// 1e-14, at most 100 steps) and are filled in symmetric pairs, so the
// node set is exactly symmetric about the interval midpoint.
Rule1d gauss_legendre_rule(int n, const Interval& interval);

// One Gauss-Legendre rule per dimension; counts[i] nodes over domain[i].
QuadratureRule build_rule(std::span<const Interval> domain,
                          std::span<const int> counts);

// Writes the rank factor values phi[i][0..rank-1](x) for dimension i.
using FactorFn = std::function<void(int i, double x, std::span<double> out)>;

// Integral of sum_j prod_i phi[i][j] over the rule's domain, computed as
// sum_j prod_i of per-dimension 1-D integrals.
double integrate_factors(const FactorFn& factors, int dim, int rank,
                         const QuadratureRule& rule);

// Integral of the square, via per-dimension Gram matrices
// G_i[j][k] = integral of phi[i][j] * phi[i][k].
double integrate_factors_squared(const FactorFn& factors, int dim, int rank,
                                 const QuadratureRule& rule);

// Separable weight function rho(x) = prod_i rho_i(x_i).
struct WeightFactor {
  enum class Kind { Flat, Uniform, GaussianTruncated };

  Kind kind = Kind::Flat;
  double a = 0.0;      // Uniform: window [a, b]
  double b = 1.0;
  double mu = 0.0;     // GaussianTruncated: center and width
  double sigma = 1.0;

  static WeightFactor flat() { return {}; }
  static WeightFactor uniform(double a, double b);
  static WeightFactor gaussian(double mu, double sigma);
};

struct WeightFunctionSpec {
  std::vector<WeightFactor> factors;  // one per dimension

  int dim() const { return static_cast<int>(factors.size()); }
};

void validate(const WeightFactor& factor);

// Weighted averages of a factorized function and of its square:
//   mean = (integral of Psi * rho) / (integral of rho), likewise square.
// Uniform factors restrict their dimension to the window intersected
// with the domain (same node count, exact for the indicator); Gaussian
// factors evaluate at the existing nodes. A weight whose support misses
// the domain raises DegenerateWeightError.
struct WeightedMoments {
  double mean = 0.0;
  double square_mean = 0.0;
};

WeightedMoments weighted_factor_moments(const FactorFn& factors, int dim,
                                        int rank, const QuadratureRule& rule,
                                        const WeightFunctionSpec& weights);

// Model-level wrappers. The rule (and any weight parameters) are given in
// the model's input units: raw units when the model carries normalization
// (subnetworks then see rescaled coordinates), plain coordinates
// otherwise. Returned values are in output units, i.e. denormalized.
double integrate_tnn(const TnnModel& model, const QuadratureRule& rule);
double integrate_tnn_squared(const TnnModel& model, const QuadratureRule& rule);
WeightedMoments predict_moments(const TnnModel& model, const QuadratureRule& rule,
                                const WeightFunctionSpec& weights);

}  // namespace tennet
