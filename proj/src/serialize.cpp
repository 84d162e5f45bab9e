#include "iirl/serialize.hpp"

#include <fstream>
#include <sstream>

#include "iirl/errors.hpp"

namespace iirl {

using nlohmann::json;

namespace {

constexpr const char* kWhere = "core.serialize";

const json& require(const json& j, const char* key, const std::string& field) {
  if (!j.is_object() || !j.contains(key))
    throw SchemaError(kWhere, "missing field '" + field + "." + key + "'");
  return j.at(key);
}

double number(const json& j, const std::string& field) {
  if (!j.is_number()) throw SchemaError(kWhere, "field '" + field + "' must be a number");
  return j.get<double>();
}

double number_or(const json& j, const char* key, double fallback, const std::string& field) {
  if (!j.contains(key)) return fallback;
  return number(j.at(key), field + "." + key);
}

}  // namespace

json vec_to_json(const Vec& v) {
  json a = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(v[i]);
  return a;
}

Vec vec_from_json(const json& j, const std::string& field) {
  if (!j.is_array()) throw SchemaError(kWhere, "field '" + field + "' must be an array");
  Vec v(static_cast<Eigen::Index>(j.size()));
  for (std::size_t i = 0; i < j.size(); ++i)
    v[static_cast<Eigen::Index>(i)] = number(j[i], field + "[" + std::to_string(i) + "]");
  return v;
}

json mat_to_json(const Mat& m) {
  json data = json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r)
    for (Eigen::Index c = 0; c < m.cols(); ++c) data.push_back(m(r, c));
  return json{{"rows", m.rows()}, {"cols", m.cols()}, {"data", data}};
}

Mat mat_from_json(const json& j, const std::string& field) {
  const auto rows = require(j, "rows", field).get<long long>();
  const auto cols = require(j, "cols", field).get<long long>();
  const Vec data = vec_from_json(require(j, "data", field), field + ".data");
  if (rows < 0 || cols < 0 || data.size() != rows * cols)
    throw SchemaError(kWhere, "field '" + field + "': data length does not match rows*cols");
  Mat m(rows, cols);
  for (Eigen::Index r = 0; r < rows; ++r)
    for (Eigen::Index c = 0; c < cols; ++c) m(r, c) = data[r * cols + c];
  return m;
}

json function_to_json(const FunctionSpec& f) {
  json j;
  j["kind"] = to_string(f.kind());
  std::visit(
      [&j](const auto& p) {
        using T = std::decay_t<decltype(p)>;
        if constexpr (std::is_same_v<T, LinearFn>) {
          j["coeffs"] = vec_to_json(p.coeffs);
          j["offset"] = p.offset;
        } else if constexpr (std::is_same_v<T, QuadraticFn>) {
          j["A"] = mat_to_json(p.A);
          j["b"] = vec_to_json(p.b);
          j["c"] = p.c;
        } else if constexpr (std::is_same_v<T, QuadraticFractionalFn>) {
          j["Q"] = mat_to_json(p.Q);
          j["P"] = mat_to_json(p.P);
          j["zeta"] = p.zeta;
        } else if constexpr (std::is_same_v<T, CobbDouglasFn>) {
          j["exponents"] = vec_to_json(p.exponents);
          j["scale"] = p.scale;
        } else if constexpr (std::is_same_v<T, LogLinearFn>) {
          j["weights"] = vec_to_json(p.weights);
        } else if constexpr (std::is_same_v<T, AffineFn>) {
          j["base"] = function_to_json(p.base);
          j["scale"] = p.scale;
          j["linear"] = vec_to_json(p.linear);
          j["offset"] = p.offset;
        } else if constexpr (std::is_same_v<T, EnvelopeFn>) {
          j["mode"] = to_string(p.mode);
          json pieces = json::array();
          for (const auto& piece : p.pieces) {
            json jp;
            jp["level"] = piece.level;
            jp["multiplier"] = piece.multiplier;
            jp["reference"] = piece.reference;
            jp["anchor"] = vec_to_json(piece.anchor);
            jp["base"] = function_to_json(piece.base);
            pieces.push_back(std::move(jp));
          }
          j["pieces"] = pieces;
        } else {
          j["id"] = p.id;
        }
      },
      f.node().params);
  return j;
}

FunctionSpec function_from_json(const json& j, const std::string& field) {
  const json& kind_j = require(j, "kind", field);
  if (!kind_j.is_string()) throw SchemaError(kWhere, "field '" + field + ".kind' must be a string");
  const std::string kind = kind_j.get<std::string>();
  if (kind == "linear") {
    return FunctionSpec::linear(vec_from_json(require(j, "coeffs", field), field + ".coeffs"),
                                number_or(j, "offset", 0.0, field));
  }
  if (kind == "quadratic") {
    return FunctionSpec::quadratic(mat_from_json(require(j, "A", field), field + ".A"),
                                   vec_from_json(require(j, "b", field), field + ".b"),
                                   number_or(j, "c", 0.0, field));
  }
  if (kind == "quadratic-fractional") {
    return FunctionSpec::quadratic_fractional(
        mat_from_json(require(j, "Q", field), field + ".Q"),
        mat_from_json(require(j, "P", field), field + ".P"),
        number(require(j, "zeta", field), field + ".zeta"));
  }
  if (kind == "cobb-douglas") {
    return FunctionSpec::cobb_douglas(
        vec_from_json(require(j, "exponents", field), field + ".exponents"),
        number_or(j, "scale", 1.0, field));
  }
  if (kind == "log-linear") {
    return FunctionSpec::log_linear(vec_from_json(require(j, "weights", field), field + ".weights"));
  }
  if (kind == "affine") {
    FunctionSpec base = function_from_json(require(j, "base", field), field + ".base");
    Vec linear = j.contains("linear") ? vec_from_json(j.at("linear"), field + ".linear")
                                      : Vec::Zero(base.dimension());
    return FunctionSpec::affine(std::move(base), number_or(j, "scale", 1.0, field),
                                std::move(linear), number_or(j, "offset", 0.0, field));
  }
  if (kind == "piecewise-envelope") {
    const std::string mode = require(j, "mode", field).get<std::string>();
    if (mode != "min" && mode != "max")
      throw SchemaError(kWhere, "field '" + field + ".mode' must be min or max");
    const json& pieces_j = require(j, "pieces", field);
    if (!pieces_j.is_array()) throw SchemaError(kWhere, "field '" + field + ".pieces' must be an array");
    std::vector<EnvelopePiece> pieces;
    for (std::size_t i = 0; i < pieces_j.size(); ++i) {
      const std::string pf = field + ".pieces[" + std::to_string(i) + "]";
      const json& pj = pieces_j[i];
      EnvelopePiece piece;
      piece.level = number(require(pj, "level", pf), pf + ".level");
      piece.multiplier = number(require(pj, "multiplier", pf), pf + ".multiplier");
      piece.reference = number_or(pj, "reference", 0.0, pf);
      if (pj.contains("anchor")) piece.anchor = vec_from_json(pj.at("anchor"), pf + ".anchor");
      piece.base = function_from_json(require(pj, "base", pf), pf + ".base");
      pieces.push_back(std::move(piece));
    }
    return FunctionSpec::envelope(mode == "min" ? EnvelopeMode::min : EnvelopeMode::max,
                                  std::move(pieces));
  }
  if (kind == "tabulated-callback-id") {
    return FunctionSpec::callback(require(j, "id", field).get<std::string>());
  }
  throw SchemaError(kWhere, "field '" + field + ".kind': unknown function kind '" + kind + "'");
}

json dataset_to_json(const Dataset& d) {
  json entries = json::array();
  for (const auto& obs : d.entries)
    entries.push_back(json{{"function", function_to_json(obs.function)},
                           {"response", vec_to_json(obs.response)}});
  return json{{"schema", kDatasetSchema},
              {"version", kSchemaVersion},
              {"mode", to_string(d.mode)},
              {"m", d.dimension()},
              {"K", d.horizon()},
              {"entries", entries}};
}

Dataset dataset_from_json(const json& j) {
  if (!j.is_object()) throw SchemaError(kWhere, "dataset document must be a JSON object");
  if (j.value("schema", std::string{}) != kDatasetSchema)
    throw SchemaError(kWhere, std::string("field 'schema' must be '") + kDatasetSchema + "'");
  if (j.value("version", 0) != kSchemaVersion)
    throw SchemaError(kWhere, "unsupported schema version");
  Dataset d;
  d.mode = dataset_mode_from_string(require(j, "mode", "dataset").get<std::string>());
  const long long K = require(j, "K", "dataset").get<long long>();
  const long long m = require(j, "m", "dataset").get<long long>();
  if (K < 1) throw SchemaError(kWhere, "field 'K' must be at least 1");
  if (m < 1) throw SchemaError(kWhere, "field 'm' must be at least 1");
  const json& entries = require(j, "entries", "dataset");
  if (!entries.is_array() || static_cast<long long>(entries.size()) != K)
    throw SchemaError(kWhere, "field 'entries' must hold exactly K entries");
  for (std::size_t t = 0; t < entries.size(); ++t) {
    const std::string f = "entries[" + std::to_string(t) + "]";
    Observation obs;
    obs.function = function_from_json(require(entries[t], "function", f), f + ".function");
    obs.response = vec_from_json(require(entries[t], "response", f), f + ".response");
    if (obs.response.size() != m)
      throw SchemaError(kWhere, "field '" + f + ".response': dimension differs from m");
    if (obs.function.dimension() != m)
      throw SchemaError(kWhere, "field '" + f + ".function': dimension differs from m");
    if ((obs.response.array() < 0.0).any())
      throw SchemaError(kWhere, "field '" + f + ".response': negative coordinate");
    d.entries.push_back(std::move(obs));
  }
  return d;
}

json read_json_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError(kWhere, "cannot open '" + path.string() + "' for reading");
  std::stringstream buffer;
  buffer << in.rdbuf();
  const std::string text = buffer.str();
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    std::size_t line = 1;
    for (std::size_t i = 0; i < std::min(e.byte, text.size()); ++i)
      if (text[i] == '\n') ++line;
    throw ParseError(kWhere, path.string() + ":" + std::to_string(line) + ": " + e.what());
  }
}

void write_json_file(const json& j, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw IoError(kWhere, "cannot open '" + path.string() + "' for writing");
  out << j.dump(2) << '\n';
  if (!out) throw IoError(kWhere, "write to '" + path.string() + "' failed");
}

void save_dataset(const Dataset& d, const std::filesystem::path& path) {
  write_json_file(dataset_to_json(d), path);
}

Dataset load_dataset(const std::filesystem::path& path) {
  const json j = read_json_file(path);
  try {
    return dataset_from_json(j);
  } catch (const json::exception& e) {
    throw SchemaError(kWhere, path.string() + ": " + e.what());
  }
}

void save_function(const FunctionSpec& f, const std::filesystem::path& path) {
  write_json_file(json{{"schema", kFunctionSchema},
                       {"version", kSchemaVersion},
                       {"function", function_to_json(f)}},
                  path);
}

FunctionSpec load_function(const std::filesystem::path& path) {
  const json j = read_json_file(path);
  try {
    if (j.contains("function")) return function_from_json(j.at("function"));
    return function_from_json(j);
  } catch (const json::exception& e) {
    throw SchemaError(kWhere, path.string() + ": " + e.what());
  }
}

}  // namespace iirl
