#include "tennet/data.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <istream>
#include <numbers>
#include <ostream>
#include <sstream>

#include "tennet/errors.hpp"
#include "tennet/rng.hpp"

namespace tennet {

namespace {

constexpr int kSyntheticDim = 8;

// Closed forms at 30 significant digits:
//   prod_exp integral  = (sqrt(pi)/2 * erf(1))^8
//   prod_exp square    = (sqrt(pi/8) * erf(sqrt(2)))^8
constexpr double kProdExpIntegral = 9.6771338055685168e-02;
constexpr double kProdExpSquareIntegral = 1.6384984846675565e-02;

void check_matrix_targets(const Matrix& x, const std::vector<double>& y,
                          const char* what) {
  if (x.rows() <= 0 || x.cols() <= 0) {
    throw ValidationError(std::string(what) + ": need at least one sample and one input");
  }
  if (y.size() != static_cast<std::size_t>(x.rows())) {
    throw ShapeError(std::string(what) + ": target count does not match sample count");
  }
  for (std::size_t t = 0; t < x.size(); ++t) {
    if (!std::isfinite(x.data()[t])) {
      throw ValidationError(std::string(what) + ": non-finite input value");
    }
  }
  for (double v : y) {
    if (!std::isfinite(v)) {
      throw ValidationError(std::string(what) + ": non-finite target value");
    }
  }
}

}  // namespace

void validate(const RawDataset& raw) {
  check_matrix_targets(raw.x, raw.y, "dataset");
  if (raw.columns.size() != static_cast<std::size_t>(raw.dim()) + 1) {
    throw ShapeError("dataset: expected one column name per input plus the target");
  }
}

void validate(const Dataset& data) {
  check_matrix_targets(data.x, data.y, "dataset");
  validate(data.norm);
  if (data.norm.dim() != data.dim()) {
    throw ShapeError("dataset: normalization dimension mismatch");
  }
}

NormalizationParams normalize_fit(const RawDataset& raw) {
  validate(raw);
  NormalizationParams params;
  const int d = raw.dim();
  const int n = raw.size();
  params.x_min.resize(static_cast<std::size_t>(d));
  params.x_max.resize(static_cast<std::size_t>(d));
  for (int i = 0; i < d; ++i) {
    double mn = raw.x(0, i);
    double mx = mn;
    for (int s = 1; s < n; ++s) {
      mn = std::min(mn, raw.x(s, i));
      mx = std::max(mx, raw.x(s, i));
    }
    if (!(mn < mx)) {
      throw ValidationError("normalize_fit: column '" +
                            raw.columns[static_cast<std::size_t>(i)] +
                            "' has a degenerate range");
    }
    params.x_min[static_cast<std::size_t>(i)] = mn;
    params.x_max[static_cast<std::size_t>(i)] = mx;
  }
  double sum = 0.0;
  double ymin = raw.y[0];
  double ymax = raw.y[0];
  for (double v : raw.y) {
    sum += v;
    ymin = std::min(ymin, v);
    ymax = std::max(ymax, v);
  }
  if (!(ymin < ymax)) {
    throw ValidationError("normalize_fit: target column '" + raw.columns.back() +
                          "' has a degenerate range");
  }
  params.y_mean = sum / static_cast<double>(n);
  params.y_min = ymin;
  params.y_max = ymax;
  return params;
}

Dataset normalize_apply(const RawDataset& raw, const NormalizationParams& params,
                        int* clamped) {
  validate(raw);
  validate(params);
  if (params.dim() != raw.dim()) {
    throw ShapeError("normalize_apply: parameter dimension does not match the data");
  }
  Dataset data;
  data.norm = params;
  data.x.resize(raw.size(), raw.dim());
  data.y.resize(static_cast<std::size_t>(raw.size()));
  int clipped = 0;
  for (int s = 0; s < raw.size(); ++s) {
    for (int i = 0; i < raw.dim(); ++i) {
      double xi = normalize_input(params, i, raw.x(s, i));
      if (xi < 0.0 || xi > 1.0) {
        xi = std::min(1.0, std::max(0.0, xi));
        ++clipped;
      }
      data.x(s, i) = xi;
    }
    data.y[static_cast<std::size_t>(s)] = normalize_output(params, raw.y[static_cast<std::size_t>(s)]);
  }
  if (clamped) *clamped = clipped;
  return data;
}

const char* to_string(SyntheticFn fn) {
  switch (fn) {
    case SyntheticFn::SumSines: return "sum_sines";
    case SyntheticFn::ProdExp: return "prod_exp";
  }
  return "?";
}

SyntheticFn synthetic_fn_from_string(const std::string& name) {
  if (name == "sum_sines") return SyntheticFn::SumSines;
  if (name == "prod_exp") return SyntheticFn::ProdExp;
  throw ParseError("unknown synthetic function '" + name +
                   "' (expected sum_sines or prod_exp)");
}

double synthetic_value(SyntheticFn fn, std::span<const double> x) {
  switch (fn) {
    case SyntheticFn::SumSines: {
      double sum = 0.0;
      for (double xi : x) sum += std::sin(2.0 * std::numbers::pi * xi);
      return sum;
    }
    case SyntheticFn::ProdExp: {
      double sumsq = 0.0;
      for (double xi : x) sumsq += xi * xi;
      return std::exp(-sumsq);
    }
  }
  throw ValidationError("synthetic_value: unknown function");
}

RawDataset gen_synthetic(SyntheticFn fn, int n, std::uint64_t seed) {
  if (n < 1) throw ValidationError("gen_synthetic: need n >= 1");
  RawDataset raw;
  raw.x.resize(n, kSyntheticDim);
  raw.y.resize(static_cast<std::size_t>(n));
  for (int i = 1; i <= kSyntheticDim; ++i) raw.columns.push_back("x_" + std::to_string(i));
  raw.columns.push_back("y");
  Rng rng(seed);
  for (int s = 0; s < n; ++s) {
    for (int i = 0; i < kSyntheticDim; ++i) raw.x(s, i) = rng.uniform();
    raw.y[static_cast<std::size_t>(s)] = synthetic_value(fn, raw.x.row_span(s));
  }
  return raw;
}

ReferenceIntegrals synthetic_reference_integrals(SyntheticFn fn) {
  switch (fn) {
    case SyntheticFn::SumSines:
      // Each term integrates to zero over one period; cross terms vanish
      // and the 8 squared terms contribute 1/2 each.
      return {0.0, 4.0};
    case SyntheticFn::ProdExp:
      return {kProdExpIntegral, kProdExpSquareIntegral};
  }
  throw ValidationError("synthetic_reference_integrals: unknown function");
}

namespace {

std::vector<std::string> split_line(const std::string& line) {
  std::vector<std::string> cells;
  std::size_t start = 0;
  while (true) {
    const std::size_t comma = line.find(',', start);
    if (comma == std::string::npos) {
      cells.push_back(line.substr(start));
      break;
    }
    cells.push_back(line.substr(start, comma - start));
    start = comma + 1;
  }
  if (!cells.empty() && !cells.back().empty() && cells.back().back() == '\r') {
    cells.back().pop_back();
  }
  return cells;
}

double parse_cell(const std::string& cell, const std::string& name, int row,
                  std::size_t col) {
  const char* first = cell.data();
  const char* last = first + cell.size();
  while (first != last && (*first == ' ' || *first == '\t')) ++first;
  while (last != first && (last[-1] == ' ' || last[-1] == '\t')) --last;
  double value = 0.0;
  const auto [ptr, ec] = std::from_chars(first, last, value);
  if (ec != std::errc{} || ptr != last || first == last) {
    throw ParseError(name + ": row " + std::to_string(row) + ", column " +
                     std::to_string(col + 1) + ": not a number: '" + cell + "'");
  }
  return value;
}

}  // namespace

RawDataset read_csv(std::istream& in, const std::string& name) {
  std::string line;
  if (!std::getline(in, line)) throw ParseError(name + ": empty file");
  RawDataset raw;
  raw.columns = split_line(line);
  if (raw.columns.size() < 2) {
    throw ParseError(name + ": need at least one input column and a target");
  }
  const std::size_t width = raw.columns.size();
  std::vector<double> values;
  int rows = 0;
  for (int row = 2; std::getline(in, line); ++row) {
    if (line.empty() || line == "\r") continue;
    const std::vector<std::string> cells = split_line(line);
    if (cells.size() != width) {
      throw ParseError(name + ": row " + std::to_string(row) + " has " +
                       std::to_string(cells.size()) + " cells, expected " +
                       std::to_string(width));
    }
    for (std::size_t c = 0; c < width; ++c) {
      values.push_back(parse_cell(cells[c], name, row, c));
    }
    ++rows;
  }
  if (rows == 0) throw ParseError(name + ": no data rows");
  const int d = static_cast<int>(width) - 1;
  raw.x.resize(rows, d);
  raw.y.resize(static_cast<std::size_t>(rows));
  for (int s = 0; s < rows; ++s) {
    const std::size_t base = static_cast<std::size_t>(s) * width;
    for (int i = 0; i < d; ++i) raw.x(s, i) = values[base + static_cast<std::size_t>(i)];
    raw.y[static_cast<std::size_t>(s)] = values[base + static_cast<std::size_t>(d)];
  }
  validate(raw);
  return raw;
}

RawDataset load_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open '" + path + "' for reading");
  return read_csv(in, path);
}

void write_csv(const RawDataset& raw, std::ostream& out) {
  validate(raw);
  for (std::size_t c = 0; c < raw.columns.size(); ++c) {
    if (c) out << ',';
    out << raw.columns[c];
  }
  out << '\n';
  char buf[32];
  for (int s = 0; s < raw.size(); ++s) {
    for (int i = 0; i < raw.dim(); ++i) {
      std::snprintf(buf, sizeof buf, "%.16e", raw.x(s, i));
      out << buf << ',';
    }
    std::snprintf(buf, sizeof buf, "%.16e", raw.y[static_cast<std::size_t>(s)]);
    out << buf << '\n';
  }
}

void save_csv(const RawDataset& raw, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw Error("cannot open '" + path + "' for writing");
  write_csv(raw, out);
  if (!out.flush()) throw Error("failed writing '" + path + "'");
}

std::pair<std::vector<int>, std::vector<int>> split_indices(
    int n, int train_parts, int val_parts, std::uint64_t seed) {
  if (train_parts < 1 || val_parts < 1) {
    throw ValidationError("split: ratio parts must be positive");
  }
  if (n < train_parts + val_parts) {
    throw ValidationError("split: need at least " +
                          std::to_string(train_parts + val_parts) + " samples, got " +
                          std::to_string(n));
  }
  std::vector<int> order(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) order[static_cast<std::size_t>(i)] = i;
  Rng rng(seed);
  rng.shuffle(std::span<int>(order));
  const int train_count = static_cast<int>(
      static_cast<std::int64_t>(n) * train_parts / (train_parts + val_parts));
  std::vector<int> train(order.begin(), order.begin() + train_count);
  std::vector<int> val(order.begin() + train_count, order.end());
  return {std::move(train), std::move(val)};
}

RawDataset subset(const RawDataset& raw, std::span<const int> rows) {
  RawDataset out;
  out.columns = raw.columns;
  out.x.resize(static_cast<int>(rows.size()), raw.dim());
  out.y.resize(rows.size());
  for (std::size_t s = 0; s < rows.size(); ++s) {
    const int src = rows[s];
    for (int i = 0; i < raw.dim(); ++i) out.x(static_cast<int>(s), i) = raw.x(src, i);
    out.y[s] = raw.y[static_cast<std::size_t>(src)];
  }
  return out;
}

Dataset subset(const Dataset& data, std::span<const int> rows) {
  Dataset out;
  out.norm = data.norm;
  out.x.resize(static_cast<int>(rows.size()), data.dim());
  out.y.resize(rows.size());
  for (std::size_t s = 0; s < rows.size(); ++s) {
    const int src = rows[s];
    for (int i = 0; i < data.dim(); ++i) out.x(static_cast<int>(s), i) = data.x(src, i);
    out.y[s] = data.y[static_cast<std::size_t>(src)];
  }
  return out;
}

std::pair<RawDataset, RawDataset> split_train_val(const RawDataset& raw,
                                                  int train_parts, int val_parts,
                                                  std::uint64_t seed) {
  validate(raw);
  const auto [train_rows, val_rows] =
      split_indices(raw.size(), train_parts, val_parts, seed);
  return {subset(raw, train_rows), subset(raw, val_rows)};
}

std::pair<Dataset, Dataset> split_train_val(const Dataset& data, int train_parts,
                                            int val_parts, std::uint64_t seed) {
  validate(data);
  const auto [train_rows, val_rows] =
      split_indices(data.size(), train_parts, val_parts, seed);
  return {subset(data, train_rows), subset(data, val_rows)};
}

}  // namespace tennet
