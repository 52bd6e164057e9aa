#pragma once

#include <string>

#include "recall/world.hpp"

namespace recall {

// Versioned JSON documents (schema_version, integer ids, row-major scores).
std::string universe_to_json(const FactUniverse& universe);
FactUniverse universe_from_json(const std::string& json_text);

std::string splits_to_json(const DatasetSplits& splits);
DatasetSplits splits_from_json(const std::string& json_text);

void write_text_file(const std::string& path, const std::string& content);
std::string read_text_file(const std::string& path);

}  // namespace recall
