#pragma once

#include <filesystem>
#include <string>
#include <string_view>

#include "snmap/map_model.hpp"

namespace snmap {

/// Model files are JSON documents (// and /* */ comments allowed):
///
///   {
///     "states": 2,
///     "Q": [-3, 3, 1, -1],                  // row-major
///     "drift": [-1, 2],
///     "sigma2": [1, 0],
///     "jumps": [[], [{"rate": 1, "kind": "exponential", "jump_rate": 3}]],
///     "switch_jumps": [{"from": 1, "to": 2, "kind": "erlang", "shape": 2, "jump_rate": 2}]
///   }
///
/// States are 1-based. `kind` is one of none, exponential, erlang, mixture; a
/// mixture lists its parts under "components": [{"weight", "shape", "jump_rate"}].
/// Throws ModelParseError (or ModelShapeMismatch) on malformed input.
MapModel parse_model(std::string_view text);
MapModel load_model(const std::filesystem::path& path);
std::string dump_model(const MapModel& model);

}  // namespace snmap
