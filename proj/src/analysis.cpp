#include "tennet/analysis.hpp"

#include <cmath>
#include <cstdio>
#include <ostream>
#include <string>

#include "tennet/errors.hpp"

namespace tennet {

namespace {

void check_jet_table(const std::vector<std::vector<Jet2>>& jets) {
  if (jets.empty() || jets[0].empty()) {
    throw ShapeError("factor jets: need at least one dimension and one rank");
  }
  for (const std::vector<Jet2>& row : jets) {
    if (row.size() != jets[0].size()) {
      throw ShapeError("factor jets: ragged rank dimension");
    }
  }
}

// prefix[i][j] = prod_{m<i} value, suffix[i][j] = prod_{m>i} value; the
// gradient and Laplacian sums share them.
struct FactorProducts {
  std::vector<std::vector<double>> prefix;
  std::vector<std::vector<double>> suffix;
};

FactorProducts value_products(const std::vector<std::vector<Jet2>>& jets) {
  const std::size_t d = jets.size();
  const std::size_t p = jets[0].size();
  FactorProducts fp;
  fp.prefix.assign(d, std::vector<double>(p, 1.0));
  fp.suffix.assign(d, std::vector<double>(p, 1.0));
  for (std::size_t i = 1; i < d; ++i) {
    for (std::size_t j = 0; j < p; ++j) {
      fp.prefix[i][j] = fp.prefix[i - 1][j] * jets[i - 1][j].value;
    }
  }
  for (std::size_t i = d - 1; i-- > 0;) {
    for (std::size_t j = 0; j < p; ++j) {
      fp.suffix[i][j] = fp.suffix[i + 1][j] * jets[i + 1][j].value;
    }
  }
  return fp;
}

void gradient_and_laplacian(const std::vector<std::vector<Jet2>>& jets,
                            std::vector<double>* grad, double* laplacian) {
  const FactorProducts fp = value_products(jets);
  const std::size_t d = jets.size();
  const std::size_t p = jets[0].size();
  if (grad) grad->assign(d, 0.0);
  if (laplacian) *laplacian = 0.0;
  for (std::size_t i = 0; i < d; ++i) {
    double g = 0.0;
    double l = 0.0;
    for (std::size_t j = 0; j < p; ++j) {
      const double others = fp.prefix[i][j] * fp.suffix[i][j];
      g += jets[i][j].d1 * others;
      l += jets[i][j].d2 * others;
    }
    if (grad) (*grad)[i] = g;
    if (laplacian) *laplacian += l;
  }
}

std::vector<std::vector<Jet2>> model_jets(const TnnModel& model,
                                          std::span<const double> x) {
  std::vector<std::vector<Jet2>> jets(static_cast<std::size_t>(model.dim));
  for (int i = 0; i < model.dim; ++i) {
    const Subnetwork& s = model.subnets[static_cast<std::size_t>(i)];
    jets[static_cast<std::size_t>(i)] =
        subnetwork_jet(s.arch, s.params, x[static_cast<std::size_t>(i)]);
  }
  return jets;
}

void check_point(const TnnModel& model, std::span<const double> x) {
  validate(model);
  if (x.size() != static_cast<std::size_t>(model.dim)) {
    throw ShapeError("analysis: point has " + std::to_string(x.size()) +
                     " coordinates, model expects " + std::to_string(model.dim));
  }
}

double euclidean_norm(std::span<const double> v) {
  double sum = 0.0;
  for (double g : v) sum += g * g;
  return std::sqrt(sum);
}

SensitivityReport report_rows(const TnnModel& model, const Matrix& x_norm,
                              const NormalizationParams* norm) {
  SensitivityReport report;
  report.rows.resize(static_cast<std::size_t>(x_norm.rows()));
  std::vector<double> point(static_cast<std::size_t>(model.dim));
  for (int s = 0; s < x_norm.rows(); ++s) {
    for (int i = 0; i < model.dim; ++i) point[static_cast<std::size_t>(i)] = x_norm(s, i);
    SensitivityRow& row = report.rows[static_cast<std::size_t>(s)];
    row.index = s;
    const std::vector<std::vector<Jet2>> jets = model_jets(model, point);
    gradient_and_laplacian(jets, &row.gradient, &row.laplacian);
    row.gradient_norm = euclidean_norm(row.gradient);
    row.x_raw.resize(static_cast<std::size_t>(model.dim));
    for (int i = 0; i < model.dim; ++i) {
      const double xi = point[static_cast<std::size_t>(i)];
      row.x_raw[static_cast<std::size_t>(i)] =
          norm ? denormalize_input(*norm, i, xi) : xi;
    }
  }
  return report;
}

}  // namespace

std::vector<double> gradient_from_factor_jets(
    const std::vector<std::vector<Jet2>>& jets) {
  check_jet_table(jets);
  std::vector<double> grad;
  gradient_and_laplacian(jets, &grad, nullptr);
  return grad;
}

double laplacian_from_factor_jets(const std::vector<std::vector<Jet2>>& jets) {
  check_jet_table(jets);
  double laplacian = 0.0;
  gradient_and_laplacian(jets, nullptr, &laplacian);
  return laplacian;
}

std::vector<double> tnn_gradient(const TnnModel& model, std::span<const double> x) {
  check_point(model, x);
  return gradient_from_factor_jets(model_jets(model, x));
}

double tnn_laplacian(const TnnModel& model, std::span<const double> x) {
  check_point(model, x);
  return laplacian_from_factor_jets(model_jets(model, x));
}

SensitivityReport sensitivity_report(const TnnModel& model, const Dataset& data) {
  validate(model);
  validate(data);
  if (data.dim() != model.dim) {
    throw ShapeError("sensitivity: dataset dimension does not match the model");
  }
  return report_rows(model, data.x, &data.norm);
}

SensitivityReport sensitivity_report(const TnnModel& model, const RawDataset& raw) {
  validate(model);
  validate(raw);
  if (raw.dim() != model.dim) {
    throw ShapeError("sensitivity: dataset dimension does not match the model");
  }
  if (!model.norm) {
    throw ValidationError(
        "sensitivity: raw data supplied but the model carries no normalization");
  }
  const Dataset data = normalize_apply(raw, *model.norm);
  return report_rows(model, data.x, &*model.norm);
}

void write_sensitivity_csv(const SensitivityReport& report, std::ostream& out) {
  const std::size_t d = report.rows.empty() ? 0 : report.rows[0].x_raw.size();
  out << "index";
  for (std::size_t i = 1; i <= d; ++i) out << ",x_" << i;
  for (std::size_t i = 1; i <= d; ++i) out << ",grad_" << i;
  out << ",grad_norm,laplacian\n";
  char buf[32];
  const auto put = [&](double v) {
    std::snprintf(buf, sizeof buf, "%.16e", v);
    out << ',' << buf;
  };
  for (const SensitivityRow& row : report.rows) {
    out << row.index;
    for (double v : row.x_raw) put(v);
    for (double v : row.gradient) put(v);
    put(row.gradient_norm);
    put(row.laplacian);
    out << '\n';
  }
}

}  // namespace tennet
