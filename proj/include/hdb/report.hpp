#pragma once

#include <string>

#include <json.hpp>

#include "hdb/blocking.hpp"
#include "hdb/engine.hpp"
#include "hdb/model.hpp"
#include "hdb/pairs.hpp"

namespace hdb {

nlohmann::json to_json(const EngineParams& params);
nlohmann::json to_json(const BlockingConfig& config);
nlohmann::json to_json(const IterationStats& it);
nlohmann::json to_json(const EngineStats& stats);
nlohmann::json to_json(const PairStats& stats);

/// Writes a JSON document with a top-level "version": 1 marker.
void write_json_file(const std::string& path, const nlohmann::json& doc);

nlohmann::json read_json_file(const std::string& path);

}  // namespace hdb
