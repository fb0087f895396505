#include "tennet/serialize.hpp"

#include <fstream>
#include <istream>
#include <ostream>

#include <json.hpp>

#include "tennet/errors.hpp"

namespace tennet {

namespace {

using nlohmann::json;

constexpr int kFormatVersion = 1;

json arch_to_json(const MlpArch& arch) {
  return json{{"input_width", arch.input_width},
              {"hidden_widths", arch.hidden_widths},
              {"output_width", arch.output_width}};
}

MlpArch arch_from_json(const json& j) {
  MlpArch arch;
  arch.input_width = j.at("input_width").get<int>();
  arch.hidden_widths = j.at("hidden_widths").get<std::vector<int>>();
  arch.output_width = j.at("output_width").get<int>();
  return arch;
}

// Weight matrices are stored row-major per layer; shapes come from arch.
json params_to_json(const MlpParams& params) {
  json weights = json::array();
  for (const Matrix& w : params.weights) {
    weights.push_back(std::vector<double>(w.data(), w.data() + w.size()));
  }
  return json{{"weights", std::move(weights)}, {"biases", params.biases}};
}

MlpParams params_from_json(const json& j, const MlpArch& arch) {
  MlpParams params;
  const json& weights = j.at("weights");
  const json& biases = j.at("biases");
  if (!weights.is_array() || weights.size() != static_cast<std::size_t>(arch.layer_count())) {
    throw ParseError("model file: wrong number of weight layers");
  }
  for (int l = 0; l < arch.layer_count(); ++l) {
    const std::vector<double> flat =
        weights.at(static_cast<std::size_t>(l)).get<std::vector<double>>();
    const int rows = arch.layer_out(l);
    const int cols = arch.layer_in(l);
    if (flat.size() != static_cast<std::size_t>(rows) * static_cast<std::size_t>(cols)) {
      throw ParseError("model file: layer " + std::to_string(l) +
                       " weight count does not match the architecture");
    }
    Matrix w(rows, cols);
    std::copy(flat.begin(), flat.end(), w.data());
    params.weights.push_back(std::move(w));
  }
  params.biases = biases.get<std::vector<std::vector<double>>>();
  return params;
}

json norm_to_json(const std::optional<NormalizationParams>& norm) {
  if (!norm) return nullptr;
  return json{{"x_min", norm->x_min},
              {"x_max", norm->x_max},
              {"y_mean", norm->y_mean},
              {"y_min", norm->y_min},
              {"y_max", norm->y_max}};
}

std::optional<NormalizationParams> norm_from_json(const json& j) {
  if (j.is_null()) return std::nullopt;
  NormalizationParams norm;
  norm.x_min = j.at("x_min").get<std::vector<double>>();
  norm.x_max = j.at("x_max").get<std::vector<double>>();
  norm.y_mean = j.at("y_mean").get<double>();
  norm.y_min = j.at("y_min").get<double>();
  norm.y_max = j.at("y_max").get<double>();
  return norm;
}

}  // namespace

ModelKind kind_of(const AnyModel& model) {
  if (std::holds_alternative<TnnModel>(model)) return ModelKind::Tnn;
  if (std::holds_alternative<FfnModel>(model)) return ModelKind::Ffn;
  return ModelKind::Rbn;
}

void save_model(const AnyModel& model, std::ostream& out) {
  json j;
  j["format_version"] = kFormatVersion;
  j["kind"] = to_string(kind_of(model));
  if (const TnnModel* tnn = std::get_if<TnnModel>(&model)) {
    validate(*tnn);
    j["dim"] = tnn->dim;
    j["rank"] = tnn->rank;
    json subnets = json::array();
    for (const Subnetwork& s : tnn->subnets) {
      json sub = arch_to_json(s.arch);
      sub.update(params_to_json(s.params));
      subnets.push_back(std::move(sub));
    }
    j["subnetworks"] = std::move(subnets);
    j["normalization"] = norm_to_json(tnn->norm);
  } else if (const FfnModel* ffn = std::get_if<FfnModel>(&model)) {
    validate(*ffn);
    j["arch"] = arch_to_json(ffn->arch);
    j.update(params_to_json(ffn->params));
    j["normalization"] = norm_to_json(ffn->norm);
  } else {
    const RbnModel& rbn = std::get<RbnModel>(model);
    validate(rbn);
    const RbnParams& p = rbn.params;
    j["units"] = rbn.units();
    j["dim"] = rbn.dim();
    j["centers"] = std::vector<double>(p.centers.data(), p.centers.data() + p.centers.size());
    j["sigmas"] = p.sigmas;
    j["weights"] = p.weights;
    j["bias"] = p.bias;
    j["normalization"] = norm_to_json(rbn.norm);
  }
  out << j.dump(2) << '\n';
}

AnyModel load_model(std::istream& in, const std::string& name) {
  json j;
  try {
    j = json::parse(in);
  } catch (const json::exception& e) {
    throw ParseError(name + ": " + e.what());
  }
  try {
    const int version = j.at("format_version").get<int>();
    if (version != kFormatVersion) {
      throw ParseError(name + ": unsupported format_version " + std::to_string(version));
    }
    ModelKind kind;
    try {
      kind = model_kind_from_string(j.at("kind").get<std::string>());
    } catch (const ValidationError& e) {
      throw ParseError(name + ": " + e.what());
    }
    if (kind == ModelKind::Tnn) {
      TnnModel model;
      model.dim = j.at("dim").get<int>();
      model.rank = j.at("rank").get<int>();
      for (const json& sub : j.at("subnetworks")) {
        Subnetwork s;
        s.arch = arch_from_json(sub);
        s.params = params_from_json(sub, s.arch);
        model.subnets.push_back(std::move(s));
      }
      model.norm = norm_from_json(j.at("normalization"));
      validate(model);
      return model;
    }
    if (kind == ModelKind::Ffn) {
      FfnModel model;
      model.arch = arch_from_json(j.at("arch"));
      model.params = params_from_json(j, model.arch);
      model.norm = norm_from_json(j.at("normalization"));
      validate(model);
      return model;
    }
    RbnModel model;
    const int units = j.at("units").get<int>();
    const int dim = j.at("dim").get<int>();
    const std::vector<double> centers = j.at("centers").get<std::vector<double>>();
    if (units <= 0 || dim <= 0 ||
        centers.size() != static_cast<std::size_t>(units) * static_cast<std::size_t>(dim)) {
      throw ParseError(name + ": center count does not match units x dim");
    }
    model.params.centers = Matrix(units, dim);
    std::copy(centers.begin(), centers.end(), model.params.centers.data());
    model.params.sigmas = j.at("sigmas").get<std::vector<double>>();
    model.params.weights = j.at("weights").get<std::vector<double>>();
    model.params.bias = j.at("bias").get<double>();
    model.norm = norm_from_json(j.at("normalization"));
    validate(model);
    return model;
  } catch (const json::exception& e) {
    throw ParseError(name + ": " + e.what());
  }
}

void save_model(const AnyModel& model, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw Error("cannot open '" + path + "' for writing");
  save_model(model, out);
  if (!out.flush()) throw Error("failed writing '" + path + "'");
}

void save_model(const TnnModel& model, const std::string& path) {
  save_model(AnyModel(model), path);
}

void save_model(const FfnModel& model, const std::string& path) {
  save_model(AnyModel(model), path);
}

void save_model(const RbnModel& model, const std::string& path) {
  save_model(AnyModel(model), path);
}

AnyModel load_model(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open '" + path + "' for reading");
  return load_model(in, path);
}

TnnModel load_tnn(const std::string& path) {
  AnyModel any = load_model(path);
  if (TnnModel* tnn = std::get_if<TnnModel>(&any)) return std::move(*tnn);
  throw ValidationError(path + ": operation requires a tnn model, found " +
                        std::string(to_string(kind_of(any))));
}

}  // namespace tennet
