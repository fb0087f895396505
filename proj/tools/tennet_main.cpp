// Command-line front end: dataset generation, training, evaluation,
// integration, weighted prediction, sensitivity analysis, and architecture
// benchmarks for separable regression networks.
#include <algorithm>
#include <atomic>
#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <mutex>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <variant>
#include <vector>

#include <CLI11.hpp>

#include "tennet/analysis.hpp"
#include "tennet/data.hpp"
#include "tennet/diff.hpp"
#include "tennet/errors.hpp"
#include "tennet/quadrature.hpp"
#include "tennet/serialize.hpp"
#include "tennet/training.hpp"

namespace {

using namespace tennet;

// ---------------------------------------------------------------------------
// Logging controlled by TENNET_LOG: 0 silent, 1 progress (default), 2 debug.

int log_level() {
  static const int level = [] {
    const char* v = std::getenv("TENNET_LOG");
    if (v == nullptr || *v == '\0') return 1;
    return std::atoi(v);
  }();
  return level;
}

void log_info(const std::string& msg) {
  if (log_level() >= 1) std::cerr << "[tennet] " << msg << "\n";
}

void log_debug(const std::string& msg) {
  if (log_level() >= 2) std::cerr << "[tennet] " << msg << "\n";
}

// ---------------------------------------------------------------------------
// Formatting: 17 significant digits for machine consumption, 5 for humans.

std::string fmt17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.16e", v);
  return buf;
}

std::string fmt5(double v) {
  char buf[24];
  std::snprintf(buf, sizeof buf, "%.4E", v);
  return buf;
}

double wall_seconds(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - start)
      .count();
}

// ---------------------------------------------------------------------------
// Small parsers for list-valued flags.

std::vector<std::string> split_on(const std::string& text, char sep) {
  std::vector<std::string> parts;
  std::string cur;
  for (char ch : text) {
    if (ch == sep) {
      parts.push_back(cur);
      cur.clear();
    } else {
      cur.push_back(ch);
    }
  }
  parts.push_back(cur);
  return parts;
}

double parse_double(const std::string& text, const std::string& what) {
  try {
    std::size_t used = 0;
    const double v = std::stod(text, &used);
    if (used != text.size()) throw std::invalid_argument(text);
    return v;
  } catch (const std::exception&) {
    throw ValidationError(what + ": cannot parse number '" + text + "'");
  }
}

int parse_int(const std::string& text, const std::string& what) {
  try {
    std::size_t used = 0;
    const int v = std::stoi(text, &used);
    if (used != text.size()) throw std::invalid_argument(text);
    return v;
  } catch (const std::exception&) {
    throw ValidationError(what + ": cannot parse integer '" + text + "'");
  }
}

// "16" broadcasts to every dimension; "16,12,16,..." gives one count per
// dimension and must match d.
std::vector<int> parse_counts(const std::string& text, int dim) {
  std::vector<std::string> parts = split_on(text, ',');
  std::vector<int> counts;
  for (const std::string& p : parts)
    counts.push_back(parse_int(p, "--nodes"));
  if (counts.size() == 1) counts.assign(static_cast<std::size_t>(dim), counts[0]);
  if (counts.size() != static_cast<std::size_t>(dim))
    throw ValidationError("--nodes: expected 1 or " + std::to_string(dim) +
                          " counts, got " + std::to_string(counts.size()));
  for (int c : counts)
    if (c <= 0) throw ValidationError("--nodes: counts must be positive");
  return counts;
}

// "0,1" broadcasts; "0,1;0,2;..." gives per-dimension intervals.
std::vector<Interval> parse_domain(const std::string& text, int dim) {
  std::vector<Interval> out;
  for (const std::string& part : split_on(text, ';')) {
    std::vector<std::string> lohi = split_on(part, ',');
    if (lohi.size() != 2)
      throw ValidationError("--domain: expected 'lo,hi' but got '" + part + "'");
    out.push_back(Interval{parse_double(lohi[0], "--domain"),
                           parse_double(lohi[1], "--domain")});
  }
  if (out.size() == 1) out.assign(static_cast<std::size_t>(dim), out[0]);
  if (out.size() != static_cast<std::size_t>(dim))
    throw ValidationError("--domain: expected 1 or " + std::to_string(dim) +
                          " intervals, got " + std::to_string(out.size()));
  return out;
}

// Weight factors: "flat", "uniform:a,b", "gauss:mu,sigma"; single entry
// broadcasts, or one entry per dimension separated by ';'.
WeightFactor parse_weight_factor(const std::string& text) {
  const std::size_t colon = text.find(':');
  const std::string kind = text.substr(0, colon);
  const std::string args =
      colon == std::string::npos ? "" : text.substr(colon + 1);
  if (kind == "flat") {
    if (!args.empty()) throw ValidationError("--rho: flat takes no arguments");
    return WeightFactor::flat();
  }
  if (kind == "uniform") {
    std::vector<std::string> ab = split_on(args, ',');
    if (ab.size() != 2)
      throw ValidationError("--rho: uniform needs 'uniform:a,b'");
    return WeightFactor::uniform(parse_double(ab[0], "--rho"),
                                 parse_double(ab[1], "--rho"));
  }
  if (kind == "gauss") {
    std::vector<std::string> ms = split_on(args, ',');
    if (ms.size() != 2)
      throw ValidationError("--rho: gauss needs 'gauss:mu,sigma'");
    return WeightFactor::gaussian(parse_double(ms[0], "--rho"),
                                  parse_double(ms[1], "--rho"));
  }
  throw ValidationError("--rho: unknown weight kind '" + kind +
                        "' (expected flat, uniform, gauss)");
}

WeightFunctionSpec parse_rho(const std::string& text, int dim) {
  WeightFunctionSpec spec;
  for (const std::string& part : split_on(text, ';'))
    spec.factors.push_back(parse_weight_factor(part));
  if (spec.factors.size() == 1)
    spec.factors.assign(static_cast<std::size_t>(dim), spec.factors[0]);
  if (spec.dim() != dim)
    throw ValidationError("--rho: expected 1 or " + std::to_string(dim) +
                          " factors, got " + std::to_string(spec.dim()));
  for (const WeightFactor& f : spec.factors) validate(f);
  return spec;
}

double median_of(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  if (n % 2 == 1) return v[n / 2];
  return 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

// ---------------------------------------------------------------------------
// Shared option bags.

struct ArchOptions {
  std::string kind = "tnn";
  int depth = 0;  // 0 = kind default
  int width = 0;  // 0 = kind default
  int rank = 0;   // 0 = width (separable models)
  int units = 80; // radial models
};

void resolve_arch_defaults(ArchOptions& arch) {
  if (arch.kind == "tnn") {
    if (arch.depth == 0) arch.depth = 3;
    if (arch.width == 0) arch.width = 5;
    if (arch.rank == 0) arch.rank = arch.width;
  } else if (arch.kind == "ffn") {
    if (arch.depth == 0) arch.depth = 4;
    if (arch.width == 0) arch.width = 40;
  }
  if (arch.kind != "rbn" && (arch.depth < 1 || arch.width < 1))
    throw ValidationError("--depth and --width must be at least 1");
  if (arch.kind == "rbn" && arch.units < 1)
    throw ValidationError("--units must be at least 1");
}

AnyModel build_model(const ArchOptions& arch, int dim, std::uint64_t seed) {
  const std::vector<int> hidden(static_cast<std::size_t>(arch.depth),
                                arch.width);
  if (arch.kind == "tnn") return make_tnn(dim, arch.rank, hidden, seed);
  if (arch.kind == "ffn") return make_ffn(dim, hidden, seed);
  return make_rbn(dim, arch.units, seed);
}

// Default integration box: the synthetic functions live on the unit cube;
// otherwise a normalized model integrates over the box it was fitted on.
std::vector<Interval> default_domain(const TnnModel& model, bool have_fn) {
  std::vector<Interval> domain;
  if (!have_fn && model.norm.has_value()) {
    for (int i = 0; i < model.dim; ++i)
      domain.push_back(Interval{model.norm->x_min[static_cast<std::size_t>(i)],
                                model.norm->x_max[static_cast<std::size_t>(i)]});
  } else {
    domain.assign(static_cast<std::size_t>(model.dim), Interval{0.0, 1.0});
  }
  return domain;
}

// ---------------------------------------------------------------------------
// gen

struct GenOptions {
  std::string fn = "sum_sines";
  int n = 1000;
  std::uint64_t seed = 1;
  std::string out = "data.csv";
};

int cmd_gen(const GenOptions& opt) {
  if (opt.n <= 0) throw ValidationError("--n must be positive");
  const SyntheticFn fn = synthetic_fn_from_string(opt.fn);
  RawDataset raw = gen_synthetic(fn, opt.n, opt.seed);
  save_csv(raw, opt.out);
  log_info("generated " + std::to_string(opt.n) + " samples of " + opt.fn);
  std::cout << "wrote " << opt.n << " samples to " << opt.out << "\n";
  return 0;
}

// ---------------------------------------------------------------------------
// train

struct TrainOptions {
  std::string data;
  std::string out = "model.json";
  std::string history = "history.csv";
  ArchOptions arch;
  TrainingConfig config;
  int holdout = 0;
  std::string holdout_out;
  std::string save_splits;
};

struct TrainResult {
  RunHistory history;
  AnyModel model;
};

TrainResult run_training(const ArchOptions& arch, const Dataset& train_part,
                         const Dataset& val_part, const TrainingConfig& config,
                         std::uint64_t model_seed) {
  AnyModel model = build_model(arch, train_part.dim(), model_seed);
  RunHistory history = std::visit(
      [&](auto& m) { return train(m, train_part, val_part, config); }, model);
  return TrainResult{std::move(history), std::move(model)};
}

int cmd_train(const TrainOptions& opt) {
  validate(opt.config);
  const auto start = std::chrono::steady_clock::now();
  RawDataset raw = load_csv(opt.data);
  log_info("loaded " + std::to_string(raw.size()) + " rows x " +
           std::to_string(raw.dim()) + " inputs from " + opt.data);

  // Optional holdout: rows reserved before normalization and training.
  if (opt.holdout > 0) {
    if (opt.holdout >= raw.size())
      throw ValidationError("--holdout must leave at least one training row");
    auto [keep_idx, hold_idx] = split_indices(
        raw.size(), raw.size() - opt.holdout, opt.holdout, opt.config.seed);
    RawDataset holdout = subset(raw, hold_idx);
    raw = subset(raw, keep_idx);
    if (!opt.holdout_out.empty()) {
      save_csv(holdout, opt.holdout_out);
      log_info("wrote " + std::to_string(holdout.size()) + " holdout rows to " +
               opt.holdout_out);
    }
  }

  // Split the raw rows first and fit the normalization on the training
  // portion only; validation rows are transformed with those parameters.
  auto [train_idx, val_idx] = split_indices(
      raw.size(), opt.config.split_train, opt.config.split_val,
      opt.config.seed);
  RawDataset raw_train = subset(raw, train_idx);
  RawDataset raw_val = subset(raw, val_idx);
  const NormalizationParams norm = normalize_fit(raw_train);
  Dataset train_part = normalize_apply(raw_train, norm);
  int clamped = 0;
  Dataset val_part = normalize_apply(raw_val, norm, &clamped);
  log_info("split " + std::to_string(train_part.size()) + " train / " +
           std::to_string(val_part.size()) + " validation rows");
  if (clamped > 0)
    log_info(std::to_string(clamped) +
             " validation values fell outside the fitted box and were clamped");

  if (!opt.save_splits.empty()) {
    save_csv(raw_train, opt.save_splits + "_train.csv");
    save_csv(raw_val, opt.save_splits + "_val.csv");
    log_info("wrote split files " + opt.save_splits + "_{train,val}.csv");
  }

  ArchOptions arch = opt.arch;
  resolve_arch_defaults(arch);
  log_debug("architecture kind=" + arch.kind + " depth=" +
            std::to_string(arch.depth) + " width=" + std::to_string(arch.width) +
            " rank=" + std::to_string(arch.rank));
  TrainResult result = run_training(arch, train_part, val_part, opt.config,
                                    opt.config.seed);
  const RunHistory& hist = result.history;

  save_model(result.model, opt.out);
  std::ofstream hfile(opt.history);
  if (!hfile) throw Error("cannot open " + opt.history + " for writing");
  write_history_csv(hist, hfile);

  const std::size_t best = static_cast<std::size_t>(hist.best_epoch - 1);
  std::cout << "trained " << arch.kind << ": "
            << std::visit([](const auto& m) { return param_count(m); },
                          result.model)
            << " parameters\n";
  std::cout << "epochs " << hist.epochs() << " (early_stopped="
            << (hist.early_stopped ? "yes" : "no") << ")\n";
  std::cout << "best epoch " << hist.best_epoch << ": train "
            << fmt5(hist.train_mse[best]) << ", validation "
            << fmt5(hist.val_mse[best]) << "\n";
  std::cout << "result kind=" << arch.kind << " epochs=" << hist.epochs()
            << " best_epoch=" << hist.best_epoch
            << " train_mse=" << fmt17(hist.train_mse[best])
            << " val_mse=" << fmt17(hist.val_mse[best]) << "\n";
  std::cout << "model " << opt.out << "\nhistory " << opt.history << "\n";
  log_info("training wall time " + fmt5(wall_seconds(start)) + " s");
  return 0;
}

// ---------------------------------------------------------------------------
// eval

struct EvalOptions {
  std::string model;
  std::string data;
};

int cmd_eval(const EvalOptions& opt) {
  AnyModel model = load_model(opt.model);
  RawDataset raw = load_csv(opt.data);
  const std::optional<NormalizationParams>* norm = std::visit(
      [](const auto& m) { return &m.norm; }, model);
  if (!norm->has_value())
    throw ValidationError(
        "eval: model carries no normalization; train it first");
  int clamped = 0;
  Dataset data = normalize_apply(raw, **norm, &clamped);
  if (clamped > 0)
    log_info("eval: " + std::to_string(clamped) +
             " inputs fell outside the fitted range and were clamped");
  BatchWorkspace ws;
  const double mse = std::visit(
      [&](const auto& m) { return batch_mse(m, data.x, data.y, ws); }, model);
  const double a = (*norm)->y_scale();
  const double mse_raw = mse * a * a;
  std::cout << "eval rows=" << data.size() << " mse=" << fmt17(mse)
            << " mse_raw=" << fmt17(mse_raw) << "\n";
  std::cout << "normalized mse " << fmt5(mse) << ", original-units mse "
            << fmt5(mse_raw) << "\n";
  return 0;
}

// ---------------------------------------------------------------------------
// integrate

struct IntegrateOptions {
  std::string model;
  std::string nodes = "16";
  std::string domain;
  std::string fn;
};

int cmd_integrate(const IntegrateOptions& opt) {
  TnnModel model = load_tnn(opt.model);
  std::vector<Interval> domain =
      opt.domain.empty() ? default_domain(model, !opt.fn.empty())
                         : parse_domain(opt.domain, model.dim);
  std::vector<int> counts = parse_counts(opt.nodes, model.dim);
  QuadratureRule rule = build_rule(domain, counts);
  const double integral = integrate_tnn(model, rule);
  const double integral_squared = integrate_tnn_squared(model, rule);
  std::cout << "integral=" << fmt17(integral) << "\n";
  std::cout << "integral_squared=" << fmt17(integral_squared) << "\n";
  if (!opt.fn.empty()) {
    const SyntheticFn fn = synthetic_fn_from_string(opt.fn);
    const ReferenceIntegrals ref = synthetic_reference_integrals(fn);
    std::cout << "reference_integral=" << fmt17(ref.integral) << "\n";
    std::cout << "reference_integral_squared=" << fmt17(ref.integral_squared)
              << "\n";
    std::cout << "abs_err=" << fmt17(std::abs(integral - ref.integral)) << "\n";
    std::cout << "abs_err_squared="
              << fmt17(std::abs(integral_squared - ref.integral_squared))
              << "\n";
  }
  std::cout << "summary integral " << fmt5(integral) << ", squared "
            << fmt5(integral_squared) << "\n";
  return 0;
}

// ---------------------------------------------------------------------------
// predict

struct PredictOptions {
  std::string model;
  std::string nodes = "16";
  std::string domain;
  std::string rho = "flat";
};

int cmd_predict(const PredictOptions& opt) {
  TnnModel model = load_tnn(opt.model);
  std::vector<Interval> domain = opt.domain.empty()
                                     ? default_domain(model, false)
                                     : parse_domain(opt.domain, model.dim);
  std::vector<int> counts = parse_counts(opt.nodes, model.dim);
  QuadratureRule rule = build_rule(domain, counts);
  WeightFunctionSpec weights = parse_rho(opt.rho, model.dim);
  WeightedMoments m = predict_moments(model, rule, weights);
  const double variance = std::max(0.0, m.square_mean - m.mean * m.mean);
  std::cout << "mean=" << fmt17(m.mean) << "\n";
  std::cout << "square_mean=" << fmt17(m.square_mean) << "\n";
  std::cout << "std=" << fmt17(std::sqrt(variance)) << "\n";
  std::cout << "summary mean " << fmt5(m.mean) << ", std "
            << fmt5(std::sqrt(variance)) << "\n";
  return 0;
}

// ---------------------------------------------------------------------------
// analyze

struct AnalyzeOptions {
  std::string model;
  std::string data;
  std::string out = "sensitivity.csv";
};

int cmd_analyze(const AnalyzeOptions& opt) {
  TnnModel model = load_tnn(opt.model);
  RawDataset raw = load_csv(opt.data);
  SensitivityReport report = sensitivity_report(model, raw);
  std::ofstream file(opt.out);
  if (!file) throw Error("cannot open " + opt.out + " for writing");
  write_sensitivity_csv(report, file);
  std::cout << "wrote sensitivity report: " << opt.out << " ("
            << report.rows.size() << " rows)\n";
  return 0;
}

// ---------------------------------------------------------------------------
// benchmark

struct BenchmarkOptions {
  std::string data;
  std::string fn;
  int n = 1000;
  std::uint64_t data_seed = 1;
  std::string depths = "3";
  std::string widths = "5,10,20";
  int reps = 5;
  int jobs = 1;
  std::string out_dir = "benchmark";
  ArchOptions arch;
  TrainingConfig config;
};

struct BenchmarkRun {
  int depth = 0;
  int width = 0;
  int rep = 0;
  bool ok = false;
  int epochs = 0;
  double train_mse = 0.0;
  double val_mse = 0.0;
  std::string note;
};

std::string arch_tag(int depth, int width) {
  char buf[16];
  std::snprintf(buf, sizeof buf, "%02dm%02d", depth, width);
  return buf;
}

int cmd_benchmark(const BenchmarkOptions& opt) {
  validate(opt.config);
  if (opt.reps < 1) throw ValidationError("--reps must be at least 1");
  if (opt.jobs < 1) throw ValidationError("--jobs must be at least 1");
  if (opt.data.empty() == opt.fn.empty())
    throw ValidationError("benchmark: pass exactly one of --data or --fn");

  RawDataset raw = opt.data.empty()
                       ? gen_synthetic(synthetic_fn_from_string(opt.fn), opt.n,
                                       opt.data_seed)
                       : load_csv(opt.data);
  const std::string name = opt.data.empty()
                               ? opt.fn
                               : std::filesystem::path(opt.data).stem().string();
  // Same leakage-free pipeline as `train`: split raw rows, fit the
  // normalization on the training portion, transform both parts with it.
  auto [train_idx, val_idx] = split_indices(
      raw.size(), opt.config.split_train, opt.config.split_val,
      opt.config.seed);
  const RawDataset raw_train = subset(raw, train_idx);
  const RawDataset raw_val = subset(raw, val_idx);
  const NormalizationParams norm = normalize_fit(raw_train);
  const Dataset train_part = normalize_apply(raw_train, norm);
  const Dataset val_part = normalize_apply(raw_val, norm);

  std::vector<int> depth_list, width_list;
  for (const std::string& p : split_on(opt.depths, ','))
    depth_list.push_back(parse_int(p, "--depths"));
  for (const std::string& p : split_on(opt.widths, ','))
    width_list.push_back(parse_int(p, "--widths"));
  for (int d : depth_list)
    if (d < 1) throw ValidationError("--depths entries must be at least 1");
  for (int w : width_list)
    if (w < 1) throw ValidationError("--widths entries must be at least 1");

  std::filesystem::create_directories(opt.out_dir);

  struct Job {
    int depth;
    int width;
    int rep;
  };
  std::vector<Job> jobs;
  for (int d : depth_list)
    for (int w : width_list)
      for (int r = 0; r < opt.reps; ++r) jobs.push_back(Job{d, w, r});

  std::vector<BenchmarkRun> runs(jobs.size());
  std::atomic<std::size_t> next{0};
  std::mutex log_mutex;

  auto worker = [&] {
    while (true) {
      const std::size_t k = next.fetch_add(1);
      if (k >= jobs.size()) return;
      const Job& job = jobs[k];
      ArchOptions arch = opt.arch;
      arch.depth = job.depth;
      arch.width = job.width;
      arch.rank = 0;
      resolve_arch_defaults(arch);
      BenchmarkRun run;
      run.depth = job.depth;
      run.width = job.width;
      run.rep = job.rep;
      const std::uint64_t model_seed =
          opt.config.seed + static_cast<std::uint64_t>(job.rep);
      try {
        TrainResult result = run_training(arch, train_part, val_part,
                                          opt.config, model_seed);
        const RunHistory& hist = result.history;
        const std::size_t best = static_cast<std::size_t>(hist.best_epoch - 1);
        run.ok = true;
        run.epochs = hist.epochs();
        run.train_mse = hist.train_mse[best];
        run.val_mse = hist.val_mse[best];
        const std::string hist_path =
            opt.out_dir + "/" + name + "_" + arch_tag(job.depth, job.width) +
            "_s" + std::to_string(job.rep + 1) + "_history.csv";
        std::ofstream hfile(hist_path);
        if (!hfile) throw Error("cannot open " + hist_path + " for writing");
        write_history_csv(hist, hfile);
      } catch (const DivergenceError& e) {
        run.ok = false;
        run.note = std::string("diverged: ") + e.what();
      } catch (const std::exception& e) {
        run.ok = false;
        run.note = std::string("failed: ") + e.what();
      }
      {
        std::lock_guard<std::mutex> lock(log_mutex);
        log_info("benchmark " + name + " " + arch_tag(job.depth, job.width) +
                 " rep " + std::to_string(job.rep + 1) + "/" +
                 std::to_string(opt.reps) +
                 (run.ok ? " val_mse=" + fmt5(run.val_mse) : " " + run.note));
      }
      runs[k] = std::move(run);
    }
  };

  const int thread_count =
      std::min<int>(opt.jobs, static_cast<int>(jobs.size()));
  std::vector<std::thread> pool;
  for (int t = 1; t < thread_count; ++t) pool.emplace_back(worker);
  worker();
  for (std::thread& t : pool) t.join();

  // Summary: one row per architecture, deterministic order.
  const std::string summary_path = opt.out_dir + "/summary.csv";
  std::ofstream summary(summary_path);
  if (!summary) throw Error("cannot open " + summary_path + " for writing");
  summary << "name,depth,width,runs,ok_runs,status,min_train_mse,"
             "median_train_mse,min_val_mse,median_val_mse\n";
  for (int d : depth_list) {
    for (int w : width_list) {
      std::vector<double> train_mses, val_mses;
      int ok_runs = 0;
      for (const BenchmarkRun& run : runs) {
        if (run.depth != d || run.width != w) continue;
        if (!run.ok) continue;
        ++ok_runs;
        train_mses.push_back(run.train_mse);
        val_mses.push_back(run.val_mse);
      }
      summary << name << "," << d << "," << w << "," << opt.reps << ","
              << ok_runs << ",";
      if (ok_runs == 0) {
        summary << "diverged,nan,nan,nan,nan\n";
        continue;
      }
      summary << (ok_runs == opt.reps ? "ok" : "partial") << ","
              << fmt17(*std::min_element(train_mses.begin(), train_mses.end()))
              << "," << fmt17(median_of(train_mses)) << ","
              << fmt17(*std::min_element(val_mses.begin(), val_mses.end()))
              << "," << fmt17(median_of(val_mses)) << "\n";
    }
  }
  std::cout << "benchmark summary: " << summary_path << " ("
            << depth_list.size() * width_list.size() << " architectures x "
            << opt.reps << " runs)\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Separable tensor regression networks: train, integrate, "
               "predict, analyze"};
  app.require_subcommand(1);
  app.set_config("--config")->description(
      "Read key=value defaults from a file (flags override it)");

  GenOptions gen;
  CLI::App* cgen = app.add_subcommand("gen", "Generate a synthetic dataset");
  cgen->add_option("--fn", gen.fn, "Target function")
      ->check(CLI::IsMember({"sum_sines", "prod_exp"}));
  cgen->add_option("--n", gen.n, "Sample count");
  cgen->add_option("--seed", gen.seed, "Sampling seed");
  cgen->add_option("--out", gen.out, "Output CSV path");

  TrainOptions tr;
  CLI::App* ctrain = app.add_subcommand("train", "Fit a model to a CSV");
  ctrain->add_option("--data", tr.data, "Training CSV")->required();
  ctrain->add_option("--out", tr.out, "Model output path");
  ctrain->add_option("--history", tr.history, "History CSV path");
  ctrain->add_option("--kind", tr.arch.kind, "Model family")
      ->check(CLI::IsMember({"tnn", "ffn", "rbn"}));
  ctrain->add_option("--depth", tr.arch.depth, "Hidden layers per network");
  ctrain->add_option("--width", tr.arch.width, "Units per hidden layer");
  ctrain->add_option("--rank", tr.arch.rank,
                     "Separation rank (default: width)");
  ctrain->add_option("--units", tr.arch.units, "Radial units");
  ctrain->add_option("--seed", tr.config.seed, "Init/split seed");
  ctrain->add_option("--lr", tr.config.initial_lr, "Initial learning rate");
  ctrain->add_option("--lr-factor", tr.config.lr_factor,
                     "Plateau decay factor");
  ctrain->add_option("--lr-patience", tr.config.lr_patience,
                     "Epochs without improvement before decay");
  ctrain->add_option("--early-stop-patience", tr.config.early_stop_patience,
                     "Epochs without improvement before stopping");
  ctrain->add_option("--max-epochs", tr.config.max_epochs, "Epoch budget");
  ctrain->add_option("--split-train", tr.config.split_train,
                     "Train parts of the split ratio");
  ctrain->add_option("--split-val", tr.config.split_val,
                     "Validation parts of the split ratio");
  ctrain->add_option("--holdout", tr.holdout,
                     "Rows reserved as a test set before training");
  ctrain->add_option("--holdout-out", tr.holdout_out,
                     "Where to write the holdout rows");
  ctrain->add_option("--save-splits", tr.save_splits,
                     "Prefix for PREFIX_train.csv / PREFIX_val.csv");

  EvalOptions ev;
  CLI::App* ceval = app.add_subcommand("eval", "Mean squared error on a CSV");
  ceval->add_option("--model", ev.model, "Model path")->required();
  ceval->add_option("--data", ev.data, "CSV to evaluate")->required();

  IntegrateOptions ig;
  CLI::App* cint = app.add_subcommand(
      "integrate", "Integral and squared integral over a box");
  cint->add_option("--model", ig.model, "Model path")->required();
  cint->add_option("--nodes", ig.nodes, "Quadrature nodes per dimension");
  cint->add_option("--domain", ig.domain,
                   "Box 'lo,hi[;lo,hi...]' (default: fitted box)");
  cint->add_option("--fn", ig.fn, "Compare against this synthetic target")
      ->check(CLI::IsMember({"sum_sines", "prod_exp"}));

  PredictOptions pr;
  CLI::App* cpred = app.add_subcommand(
      "predict", "Weighted prediction under a separable weight function");
  cpred->add_option("--model", pr.model, "Model path")->required();
  cpred->add_option("--nodes", pr.nodes, "Quadrature nodes per dimension");
  cpred->add_option("--domain", pr.domain,
                    "Box 'lo,hi[;lo,hi...]' (default: fitted box)");
  cpred->add_option("--rho", pr.rho,
                    "flat | uniform:a,b | gauss:mu,sigma (';'-separated "
                    "per dimension, single value broadcasts)");

  AnalyzeOptions an;
  CLI::App* cana = app.add_subcommand(
      "analyze", "Input gradients and Laplacian at every sample");
  cana->add_option("--model", an.model, "Model path")->required();
  cana->add_option("--data", an.data, "CSV with evaluation points")->required();
  cana->add_option("--out", an.out, "Sensitivity CSV path");

  BenchmarkOptions bm;
  CLI::App* cbench = app.add_subcommand(
      "benchmark", "Train an architecture grid and summarize");
  cbench->add_option("--data", bm.data, "Training CSV");
  cbench->add_option("--fn", bm.fn, "Synthetic target instead of --data")
      ->check(CLI::IsMember({"sum_sines", "prod_exp"}));
  cbench->add_option("--n", bm.n, "Sample count when using --fn");
  cbench->add_option("--data-seed", bm.data_seed, "Sampling seed for --fn");
  cbench->add_option("--depths", bm.depths, "Comma list of hidden depths");
  cbench->add_option("--widths", bm.widths, "Comma list of hidden widths");
  cbench->add_option("--reps", bm.reps, "Runs per architecture");
  cbench->add_option("--jobs", bm.jobs, "Worker threads");
  cbench->add_option("--out-dir", bm.out_dir, "Output directory");
  cbench->add_option("--kind", bm.arch.kind, "Model family")
      ->check(CLI::IsMember({"tnn", "ffn", "rbn"}));
  cbench->add_option("--units", bm.arch.units, "Radial units");
  cbench->add_option("--seed", bm.config.seed, "Base seed");
  cbench->add_option("--lr", bm.config.initial_lr, "Initial learning rate");
  cbench->add_option("--lr-patience", bm.config.lr_patience,
                     "Epochs without improvement before decay");
  cbench->add_option("--early-stop-patience", bm.config.early_stop_patience,
                     "Epochs without improvement before stopping");
  cbench->add_option("--max-epochs", bm.config.max_epochs, "Epoch budget");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  try {
    if (cgen->parsed()) return cmd_gen(gen);
    if (ctrain->parsed()) return cmd_train(tr);
    if (ceval->parsed()) return cmd_eval(ev);
    if (cint->parsed()) return cmd_integrate(ig);
    if (cpred->parsed()) return cmd_predict(pr);
    if (cana->parsed()) return cmd_analyze(an);
    if (cbench->parsed()) return cmd_benchmark(bm);
    std::cerr << "error: no subcommand\n";
    return 2;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
