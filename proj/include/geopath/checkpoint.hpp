#pragma once

#include <map>
#include <string>
#include <vector>

#include <json.hpp>

#include "geopath/tape.hpp"

namespace geopath {

// Checkpoints are a flat JSON document: module name -> parameter name ->
// {"shape": [rows, cols], "data": [row-major values]}. A reserved "meta"
// entry carries run provenance and is ignored by the loader.
using ModuleParams = std::map<std::string, std::vector<Parameter*>>;

void save_checkpoint(const std::string& path, const ModuleParams& modules,
                     const nlohmann::ordered_json& meta);

// Loads values into the given parameters. Missing modules/parameters and
// shape mismatches are rejected with distinct messages.
void load_checkpoint(const std::string& path, const ModuleParams& modules);

// True if every requested module name exists in the checkpoint file.
bool checkpoint_has_modules(const std::string& path, const std::vector<std::string>& names);

nlohmann::ordered_json checkpoint_meta(const std::string& path);

}  // namespace geopath
