#pragma once

#include <Eigen/Core>
#include <filesystem>
#include <initializer_list>
#include <json.hpp>

#include "ssf/error.hpp"

namespace ssf::detail {

/// Parses a JSON document, qualifying every failure with the file path.
nlohmann::json load_json_file(const std::filesystem::path& path);

/// Serializes `doc` (2-space indent) atomically via temp file + rename.
void write_json_file(const nlohmann::json& doc, const std::filesystem::path& path);

/// Requires `doc` to be an object containing every `required` key and no key
/// outside `required` + `optional`; errors carry `path`.
void require_keys(const nlohmann::json& doc, const std::filesystem::path& path,
                  std::initializer_list<const char*> required,
                  std::initializer_list<const char*> optional = {});

/// Reads a 9-element row-major JSON array into a 3x3 matrix; `key` labels errors.
Eigen::Matrix3d matrix3_from_json(const nlohmann::json& arr, const std::filesystem::path& path,
                                  const char* key);

} // namespace ssf::detail
