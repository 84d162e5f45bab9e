#pragma once

#include <filesystem>
#include <string>

#include <json.hpp>

#include "iirl/dataset.hpp"
#include "iirl/function.hpp"

namespace iirl {

/// Schema identifiers written into every file.
inline constexpr const char* kDatasetSchema = "iirl-dataset";
inline constexpr const char* kFunctionSchema = "iirl-function";
inline constexpr int kSchemaVersion = 1;

nlohmann::json vec_to_json(const Vec& v);
Vec vec_from_json(const nlohmann::json& j, const std::string& field);
nlohmann::json mat_to_json(const Mat& m);
Mat mat_from_json(const nlohmann::json& j, const std::string& field);

nlohmann::json function_to_json(const FunctionSpec& f);
FunctionSpec function_from_json(const nlohmann::json& j,
                                const std::string& field = "function");

nlohmann::json dataset_to_json(const Dataset& d);
Dataset dataset_from_json(const nlohmann::json& j);

void save_dataset(const Dataset& d, const std::filesystem::path& path);
Dataset load_dataset(const std::filesystem::path& path);

/// A standalone FunctionSpec file (used for --u-true / --g-true).
void save_function(const FunctionSpec& f, const std::filesystem::path& path);
FunctionSpec load_function(const std::filesystem::path& path);

/// Reads and parses a JSON document; ParseError carries the line number.
nlohmann::json read_json_file(const std::filesystem::path& path);
void write_json_file(const nlohmann::json& j, const std::filesystem::path& path);

}  // namespace iirl
