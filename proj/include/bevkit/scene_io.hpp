#pragma once

#include <filesystem>
#include <string>

#include "bevkit/json_io.hpp"
#include "bevkit/scene.hpp"

namespace bevkit {

inline constexpr int kSceneSchemaVersion = 1;

Json scene_to_json(const Scene& scene);
/// Parses and validates. Throws ParseError for schema problems and
/// ValidationError for violated invariants.
Scene scene_from_json(const Json& j);

/// Canonical text: sorted keys, 6-decimal coordinates, trailing newline.
std::string serialize_scene(const Scene& scene);
Scene parse_scene(const std::string& text, const std::string& origin = "<memory>");

Scene load_scene(const std::filesystem::path& path);
void save_scene(const Scene& scene, const std::filesystem::path& path);

Json points_to_json(const std::vector<Vec2>& pts);

}  // namespace bevkit
