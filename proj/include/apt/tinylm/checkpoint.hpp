#pragma once

#include <filesystem>

#include <nlohmann/json.hpp>

#include "apt/tinylm/model.hpp"

namespace apt::tinylm {

// {"format":"apt-tinylm","version":1,"config":{...},"vocab":[...],
//  "parameters":{name:{"shape":[...],"data":[...]}}}
// Doubles are written in shortest round-trip form, so a reload reproduces
// forward outputs bit for bit.
nlohmann::json to_json(const TinyModel& model);
TinyModel model_from_json(const nlohmann::json& j);

void save_checkpoint(const TinyModel& model, const std::filesystem::path& path);
// Throws Io when the file cannot be read and Schema when it is malformed.
TinyModel load_checkpoint(const std::filesystem::path& path);

}  // namespace apt::tinylm
