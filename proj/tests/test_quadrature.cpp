#include <cmath>
#include <vector>

#include <doctest.h>

#include "oracles.hpp"
#include "tennet/errors.hpp"
#include "tennet/quadrature.hpp"

using namespace tennet;

namespace {

// Analytic integral of x^k over [lo, hi].
double monomial_integral(int k, const Interval& iv) {
  return (std::pow(iv.hi, k + 1) - std::pow(iv.lo, k + 1)) /
         static_cast<double>(k + 1);
}

double apply_rule(const Rule1d& rule, const std::function<double(double)>& f) {
  double s = 0.0;
  for (std::size_t i = 0; i < rule.nodes.size(); ++i)
    s += rule.weights[i] * f(rule.nodes[i]);
  return s;
}

QuadratureRule unit_square_rule(int nx, int ny) {
  std::vector<Interval> domain = {{0.0, 1.0}, {0.0, 1.0}};
  std::vector<int> counts = {nx, ny};
  return build_rule(domain, counts);
}

}  // namespace

TEST_CASE("gauss_legendre_rule: hand-checked small rules") {
  SUBCASE("one point on [-1, 1] is the midpoint rule") {
    Rule1d r = gauss_legendre_rule(1, {-1.0, 1.0});
    REQUIRE(r.count() == 1);
    CHECK(r.nodes[0] == 0.0);
    CHECK(r.weights[0] == 2.0);
  }
  SUBCASE("three points on [-1, 1]") {
    Rule1d r = gauss_legendre_rule(3, {-1.0, 1.0});
    REQUIRE(r.count() == 3);
    CHECK(r.nodes[0] == doctest::Approx(-0.77459666924148337704).epsilon(1e-15));
    CHECK(r.nodes[1] == 0.0);
    CHECK(r.nodes[2] == doctest::Approx(0.77459666924148337704).epsilon(1e-15));
    CHECK(r.weights[0] == doctest::Approx(5.0 / 9.0).epsilon(1e-15));
    CHECK(r.weights[1] == doctest::Approx(8.0 / 9.0).epsilon(1e-15));
    CHECK(r.weights[2] == doctest::Approx(5.0 / 9.0).epsilon(1e-15));
  }
  SUBCASE("two points on [0, 1]") {
    Rule1d r = gauss_legendre_rule(2, {0.0, 1.0});
    REQUIRE(r.count() == 2);
    CHECK(r.nodes[0] == doctest::Approx(0.21132486540518711775).epsilon(1e-15));
    CHECK(r.nodes[1] == doctest::Approx(0.78867513459481288225).epsilon(1e-15));
    CHECK(r.weights[0] == doctest::Approx(0.5).epsilon(1e-15));
    CHECK(r.weights[1] == doctest::Approx(0.5).epsilon(1e-15));
  }
}

TEST_CASE("gauss_legendre_rule: polynomial exactness up to degree 2n-1") {
  const std::vector<Interval> boxes = {{-1.0, 1.0}, {0.0, 1.0}, {-2.5, 0.75}};
  for (const Interval& iv : boxes) {
    for (int n = 1; n <= 10; ++n) {
      Rule1d r = gauss_legendre_rule(n, iv);
      for (int k = 0; k <= 2 * n - 1; ++k) {
        const double got =
            apply_rule(r, [&](double x) { return std::pow(x, k); });
        const double exact = monomial_integral(k, iv);
        // Absolute tolerance for O(1) integrals, relative on wide intervals
        // whose monomial integrals grow to ~1e4 (a few ulp of headroom).
        CHECK(std::abs(got - exact) < 4e-12 * std::max(1.0, std::abs(exact)));
      }
    }
  }
  // Degree 2n is the first degree the rule genuinely misses.
  for (int n = 1; n <= 6; ++n) {
    Rule1d r = gauss_legendre_rule(n, {-1.0, 1.0});
    const int k = 2 * n;
    const double got = apply_rule(r, [&](double x) { return std::pow(x, k); });
    CHECK(std::abs(got - monomial_integral(k, {-1.0, 1.0})) > 1e-12);
  }
}

TEST_CASE("gauss_legendre_rule: structural invariants for many sizes") {
  const std::vector<Interval> boxes = {{-1.0, 1.0}, {0.0, 1.0}, {-3.5, 1.25}};
  for (const Interval& iv : boxes) {
    for (int n = 1; n <= 50; ++n) {
      Rule1d r = gauss_legendre_rule(n, iv);
      REQUIRE(r.count() == n);
      double wsum = 0.0;
      const double mid = 0.5 * (iv.lo + iv.hi);
      for (int i = 0; i < n; ++i) {
        const std::size_t ii = static_cast<std::size_t>(i);
        CHECK(r.weights[ii] > 0.0);
        CHECK(r.nodes[ii] > iv.lo);
        CHECK(r.nodes[ii] < iv.hi);
        if (i > 0) CHECK(r.nodes[ii] > r.nodes[ii - 1]);
        // Symmetric about the midpoint by construction.
        CHECK(r.nodes[ii] + r.nodes[static_cast<std::size_t>(n - 1 - i)]
              == doctest::Approx(2.0 * mid).epsilon(1e-13));
        wsum += r.weights[ii];
      }
      CHECK(wsum == doctest::Approx(iv.length()).epsilon(1e-13));
    }
  }
}

TEST_CASE("rule construction errors") {
  CHECK_THROWS_AS(gauss_legendre_rule(0, {0.0, 1.0}), ValidationError);
  CHECK_THROWS_AS(gauss_legendre_rule(-3, {0.0, 1.0}), ValidationError);
  CHECK_THROWS_AS(gauss_legendre_rule(4, {1.0, 1.0}), ValidationError);
  CHECK_THROWS_AS(gauss_legendre_rule(4, {2.0, -1.0}), ValidationError);
  std::vector<Interval> domain = {{0.0, 1.0}, {0.0, 1.0}};
  std::vector<int> counts = {3};
  CHECK_THROWS_AS(build_rule(domain, counts), ShapeError);
}

TEST_CASE("build_rule: per-dimension counts are honored") {
  std::vector<Interval> domain = {{0.0, 1.0}, {-1.0, 1.0}, {0.5, 2.0}};
  std::vector<int> counts = {2, 3, 4};
  QuadratureRule rule = build_rule(domain, counts);
  REQUIRE(rule.dim() == 3);
  for (int i = 0; i < 3; ++i) {
    CHECK(rule.dims[static_cast<std::size_t>(i)].count()
          == counts[static_cast<std::size_t>(i)]);
    CHECK(rule.dims[static_cast<std::size_t>(i)].interval
          == domain[static_cast<std::size_t>(i)]);
  }
}

TEST_CASE("integrate_factors: separable polynomial on the unit square") {
  // Psi = x1 * x2 as a rank-1 factor table.
  FactorFn identity = [](int, double x, std::span<double> out) { out[0] = x; };
  QuadratureRule rule = unit_square_rule(2, 2);
  CHECK(integrate_factors(identity, 2, 1, rule)
        == doctest::Approx(0.25).epsilon(1e-14));
  CHECK(integrate_factors_squared(identity, 2, 1, rule)
        == doctest::Approx(1.0 / 9.0).epsilon(1e-14));
  // Constant 6 integrates to 6 * volume, its square to 36 * volume.
  FactorFn konst = [](int i, double, std::span<double> out) {
    out[0] = i == 0 ? 6.0 : 1.0;
  };
  CHECK(integrate_factors(konst, 2, 1, rule) == doctest::Approx(6.0).epsilon(1e-14));
  CHECK(integrate_factors_squared(konst, 2, 1, rule)
        == doctest::Approx(36.0).epsilon(1e-14));
}

TEST_CASE("integrate_tnn matches brute-force tensor-grid integration") {
  for (std::uint64_t seed : {5ull, 6ull, 7ull}) {
    TnnModel model = make_tnn(2, 3, {4}, seed);
    oracles::randomize_params(model, seed + 100);
    std::vector<Interval> domain = {{0.0, 1.0}, {-0.5, 0.5}};
    std::vector<int> counts = {4, 5};
    QuadratureRule rule = build_rule(domain, counts);
    auto f = [&](const std::vector<double>& x) {
      return oracles::tnn_reference(model, x);
    };
    auto f2 = [&](const std::vector<double>& x) {
      const double v = oracles::tnn_reference(model, x);
      return v * v;
    };
    CHECK(std::abs(integrate_tnn(model, rule) -
                   oracles::full_grid_integral(f, rule)) < 1e-10);
    CHECK(std::abs(integrate_tnn_squared(model, rule) -
                   oracles::full_grid_integral(f2, rule)) < 1e-10);
  }
}

TEST_CASE("integrate_tnn_squared is never negative") {
  for (std::uint64_t seed : {11ull, 12ull, 13ull, 14ull}) {
    TnnModel model = make_tnn(3, 4, {4}, seed);
    oracles::randomize_params(model, seed + 500);
    std::vector<Interval> domain = {{0.0, 1.0}, {0.0, 1.0}, {0.0, 1.0}};
    std::vector<int> counts = {10, 10, 10};
    QuadratureRule rule = build_rule(domain, counts);
    CHECK(integrate_tnn_squared(model, rule) >= -1e-12);
  }
}

TEST_CASE("weighted moments: flat weight reproduces the plain integral") {
  TnnModel model = make_tnn(2, 2, {4}, 33);
  oracles::randomize_params(model, 34);
  std::vector<Interval> domain = {{0.0, 1.0}, {0.0, 2.0}};
  std::vector<int> counts = {6, 6};
  QuadratureRule rule = build_rule(domain, counts);
  WeightFunctionSpec flat{{WeightFactor::flat(), WeightFactor::flat()}};
  WeightedMoments m = predict_moments(model, rule, flat);
  const double vol = 2.0;
  CHECK(std::abs(m.mean * vol - integrate_tnn(model, rule)) < 1e-10);
  CHECK(std::abs(m.square_mean * vol - integrate_tnn_squared(model, rule)) < 1e-10);
}

TEST_CASE("weighted moments: uniform window averages the identity factor") {
  // Psi = x in one dimension; averaging over the window [0.2, 0.4] gives
  // mean 0.3 and second moment 7/75.
  FactorFn identity = [](int, double x, std::span<double> out) { out[0] = x; };
  std::vector<Interval> domain = {{0.0, 1.0}};
  std::vector<int> counts = {4};
  QuadratureRule rule = build_rule(domain, counts);
  WeightFunctionSpec w{{WeightFactor::uniform(0.2, 0.4)}};
  WeightedMoments m = weighted_factor_moments(identity, 1, 1, rule, w);
  CHECK(m.mean == doctest::Approx(0.3).epsilon(1e-13));
  CHECK(m.square_mean == doctest::Approx(7.0 / 75.0).epsilon(1e-13));
  // Window partially outside the domain: average over the intersection.
  WeightFunctionSpec wclip{{WeightFactor::uniform(0.8, 1.7)}};
  WeightedMoments mc = weighted_factor_moments(identity, 1, 1, rule, wclip);
  CHECK(mc.mean == doctest::Approx(0.9).epsilon(1e-13));
}

TEST_CASE("weighted moments: truncated Gaussian against the erf formula") {
  // Psi = x on [0, 1] under rho = exp(-(x-mu)^2 / (2 sigma^2)). The exact
  // weighted mean is mu + sigma^2 (rho(0) - rho(1)) / integral(rho).
  const double mu = 0.5, sigma = 0.2;
  auto rho = [&](double x) {
    const double u = (x - mu) / sigma;
    return std::exp(-0.5 * u * u);
  };
  const double mass =
      sigma * std::sqrt(std::acos(-1.0) / 2.0) *
      (std::erf((1.0 - mu) / (sigma * std::sqrt(2.0))) -
       std::erf((0.0 - mu) / (sigma * std::sqrt(2.0))));
  const double exact_mean = mu + sigma * sigma * (rho(0.0) - rho(1.0)) / mass;

  FactorFn identity = [](int, double x, std::span<double> out) { out[0] = x; };
  std::vector<Interval> domain = {{0.0, 1.0}};
  std::vector<int> counts = {40};
  QuadratureRule rule = build_rule(domain, counts);
  WeightFunctionSpec w{{WeightFactor::gaussian(mu, sigma)}};
  WeightedMoments m = weighted_factor_moments(identity, 1, 1, rule, w);
  CHECK(m.mean == doctest::Approx(exact_mean).epsilon(1e-12));
}

TEST_CASE("weighted moments: variance is non-negative") {
  for (std::uint64_t seed : {21ull, 22ull, 23ull}) {
    TnnModel model = make_tnn(2, 3, {4}, seed);
    oracles::randomize_params(model, seed + 300);
    std::vector<Interval> domain = {{0.0, 1.0}, {0.0, 1.0}};
    std::vector<int> counts = {12, 12};
    QuadratureRule rule = build_rule(domain, counts);
    const std::vector<WeightFunctionSpec> specs = {
        {{WeightFactor::flat(), WeightFactor::flat()}},
        {{WeightFactor::uniform(0.1, 0.6), WeightFactor::flat()}},
        {{WeightFactor::gaussian(0.5, 0.3), WeightFactor::gaussian(0.2, 0.5)}},
    };
    for (const WeightFunctionSpec& spec : specs) {
      WeightedMoments m = predict_moments(model, rule, spec);
      CHECK(m.square_mean - m.mean * m.mean >= -1e-10);
    }
  }
}

TEST_CASE("weighted moments: constant model is returned unchanged") {
  TnnModel model = oracles::make_constant_tnn({{1.5}, {2.0}});  // Psi = 3
  std::vector<Interval> domain = {{0.0, 1.0}, {0.0, 1.0}};
  std::vector<int> counts = {5, 5};
  QuadratureRule rule = build_rule(domain, counts);
  const std::vector<WeightFunctionSpec> specs = {
      {{WeightFactor::flat(), WeightFactor::flat()}},
      {{WeightFactor::uniform(0.25, 0.5), WeightFactor::gaussian(0.7, 0.1)}},
  };
  for (const WeightFunctionSpec& spec : specs) {
    WeightedMoments m = predict_moments(model, rule, spec);
    CHECK(m.mean == doctest::Approx(3.0).epsilon(1e-12));
    CHECK(m.square_mean == doctest::Approx(9.0).epsilon(1e-12));
  }
}

TEST_CASE("degenerate weights are reported") {
  FactorFn identity = [](int, double x, std::span<double> out) { out[0] = x; };
  std::vector<Interval> domain = {{0.0, 1.0}};
  std::vector<int> counts = {8};
  QuadratureRule rule = build_rule(domain, counts);
  SUBCASE("uniform window outside the domain") {
    WeightFunctionSpec w{{WeightFactor::uniform(2.0, 3.0)}};
    CHECK_THROWS_AS(weighted_factor_moments(identity, 1, 1, rule, w),
                    DegenerateWeightError);
  }
  SUBCASE("gaussian centered far away underflows") {
    WeightFunctionSpec w{{WeightFactor::gaussian(50.0, 0.01)}};
    CHECK_THROWS_AS(weighted_factor_moments(identity, 1, 1, rule, w),
                    DegenerateWeightError);
  }
  SUBCASE("invalid weight parameters") {
    CHECK_THROWS_AS(validate(WeightFactor::uniform(0.5, 0.5)), ValidationError);
    CHECK_THROWS_AS(validate(WeightFactor::gaussian(0.5, 0.0)), ValidationError);
    CHECK_THROWS_AS(validate(WeightFactor::gaussian(0.5, -1.0)), ValidationError);
  }
}

TEST_CASE("normalized models integrate in raw units") {
  TnnModel model = make_tnn(2, 2, {4}, 41);
  oracles::randomize_params(model, 42);
  NormalizationParams norm;
  norm.x_min = {2.0, -1.0};
  norm.x_max = {4.0, 3.0};
  norm.y_mean = 3.0;
  norm.y_min = 1.0;
  norm.y_max = 5.0;
  model.norm = norm;

  std::vector<Interval> raw_domain = {{2.0, 4.0}, {-1.0, 3.0}};
  std::vector<int> counts = {8, 8};
  QuadratureRule raw_rule = build_rule(raw_domain, counts);

  TnnModel bare = model;
  bare.norm.reset();
  std::vector<Interval> unit_domain = {{0.0, 1.0}, {0.0, 1.0}};
  QuadratureRule unit_rule = build_rule(unit_domain, counts);

  const double a = norm.y_scale();
  const double c = norm.y_mean;
  const double vol = 2.0 * 4.0;
  const double jac = vol;  // product of interval lengths
  const double i1 = integrate_tnn(bare, unit_rule);
  const double i2 = integrate_tnn_squared(bare, unit_rule);
  CHECK(integrate_tnn(model, raw_rule)
        == doctest::Approx(a * i1 * jac + c * vol).epsilon(1e-12));
  CHECK(integrate_tnn_squared(model, raw_rule)
        == doctest::Approx(a * a * i2 * jac + 2.0 * a * c * i1 * jac + c * c * vol)
               .epsilon(1e-12));
}

TEST_CASE("normalized models predict in raw output units") {
  // Constant normalized value k maps to a * k + c in raw units.
  TnnModel model = oracles::make_constant_tnn({{0.25}, {1.0}});  // k = 0.25
  NormalizationParams norm;
  norm.x_min = {0.0, 0.0};
  norm.x_max = {10.0, 10.0};
  norm.y_mean = 7.0;
  norm.y_min = 3.0;
  norm.y_max = 11.0;
  model.norm = norm;
  const double a = norm.y_scale();  // 8
  const double want = a * 0.25 + 7.0;

  std::vector<Interval> raw_domain = {{0.0, 10.0}, {0.0, 10.0}};
  std::vector<int> counts = {6, 6};
  QuadratureRule rule = build_rule(raw_domain, counts);
  WeightFunctionSpec w{{WeightFactor::gaussian(4.0, 2.0),
                        WeightFactor::uniform(1.0, 9.0)}};
  WeightedMoments m = predict_moments(model, rule, w);
  CHECK(m.mean == doctest::Approx(want).epsilon(1e-12));
  CHECK(m.square_mean == doctest::Approx(want * want).epsilon(1e-12));
}

TEST_CASE("rule/model dimension mismatches throw ShapeError") {
  TnnModel model = make_tnn(3, 2, {3}, 1);
  std::vector<Interval> domain = {{0.0, 1.0}, {0.0, 1.0}};
  std::vector<int> counts = {3, 3};
  QuadratureRule rule = build_rule(domain, counts);
  CHECK_THROWS_AS(integrate_tnn(model, rule), ShapeError);
  WeightFunctionSpec w{{WeightFactor::flat(), WeightFactor::flat()}};
  std::vector<Interval> domain3 = {{0.0, 1.0}, {0.0, 1.0}, {0.0, 1.0}};
  std::vector<int> counts3 = {3, 3, 3};
  QuadratureRule rule3 = build_rule(domain3, counts3);
  CHECK_THROWS_AS(predict_moments(model, rule3, w), ShapeError);
}
