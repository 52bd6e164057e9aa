#pragma once

#include <string>
#include <vector>

#include "recall/toml.hpp"
#include "recall/world.hpp"

namespace recall {

struct Preset {
    std::string name;
    WorldConfig world;
    int train = 0;
    int validation = 0;
    int test = 0;
};

// Shipped world presets: nq_like, trivia_like, pop_like, simple_like.
std::vector<std::string> preset_names();
Preset get_preset(const std::string& name);

std::string preset_to_toml(const Preset& preset);
Preset preset_from_toml(const std::string& text);

// The [world]/[mixture]/[noise] sections shared by preset files and inline
// experiment configs.
std::string world_config_to_toml(const WorldConfig& config);
WorldConfig world_config_from_toml_doc(const toml::Document& doc);
Preset load_preset_file(const std::string& path);

// name.toml under dir if present, else the built-in table.
Preset resolve_preset(const std::string& name, const std::string& presets_dir);

}  // namespace recall
