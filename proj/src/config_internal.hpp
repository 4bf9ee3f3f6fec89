#pragma once

// JSON helpers shared between the checkpoint header and the CLI config file.
// Internal to the library.

#include <initializer_list>
#include <string>

#include "json.hpp"
#include "stae/model.hpp"

namespace stae::detail {

/// Rejects any key of `obj` not in `allowed`, naming the offending key path.
void require_keys(const nlohmann::json& obj, const std::string& where,
                  std::initializer_list<const char*> allowed);

nlohmann::json model_config_to_json_obj(const ModelConfig& config);

/// Parses a (possibly partial) config object on top of `defaults`.
ModelConfig model_config_from_json_obj(const nlohmann::json& obj, const ModelConfig& defaults,
                                       const std::string& where);

}  // namespace stae::detail
