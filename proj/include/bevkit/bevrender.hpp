#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "bevkit/json_io.hpp"
#include "bevkit/scene.hpp"

namespace bevkit {

struct Rgb {
  std::uint8_t r = 0, g = 0, b = 0;
  friend bool operator==(const Rgb&, const Rgb&) = default;
};

struct Palette {
  Rgb background{30, 30, 30};
  std::array<Rgb, 4> area{Rgb{92, 72, 120}, Rgb{66, 108, 118}, Rgb{112, 100, 68}, Rgb{64, 64, 64}};  // by AreaType
  std::array<Rgb, 5> lane{Rgb{104, 104, 104}, Rgb{96, 120, 150}, Rgb{150, 120, 96}, Rgb{140, 96, 140},
                          Rgb{118, 118, 96}};  // by LaneType
  Rgb lane_boundary{235, 235, 235};
  Rgb vehicle{40, 120, 230};
  Rgb ego{255, 0, 0};
  Rgb arrow{255, 220, 0};
};

struct RenderConfig {
  double extent = 50.0;      // half-width of the square window, meters
  double resolution = 0.25;  // meters per pixel
  double arrow_min_speed = 0.5;
  Palette palette;

  /// Image side in pixels. Throws ConfigError unless 2*extent/resolution is a positive integer.
  int side() const;
};

/// World to pixel: col = a*x + b*y + c, row = d*x + e*y + f. Integer pixel
/// coordinates are pixel centers; rows grow downward.
struct PixelTransform {
  double a = 0, b = 0, c = 0, d = 0, e = 0, f = 0;

  /// Ego-centered, ego heading pointing up the image.
  static PixelTransform ego_frame(Vec2 ego, double yaw, double resolution, int side);
  Vec2 world_to_pixel(Vec2 p) const { return {a * p.x + b * p.y + c, d * p.x + e * p.y + f}; }
  Vec2 pixel_to_world(Vec2 px) const;
  std::array<double, 6> coefficients() const { return {a, b, c, d, e, f}; }
};

struct BevRaster {
  int width = 0, height = 0;
  std::vector<std::uint8_t> pixels;  // row-major RGB
  PixelTransform transform;
  std::string scene_id, ego_id;
  int timestep = 0;
  double extent = 0, resolution = 0;

  Rgb at(int col, int row) const;
};

/// Draws area fills, lane surfaces, lane boundary strokes, other vehicles, the
/// red ego and its heading arrow (only above arrow_min_speed).
BevRaster render_bev(const Scene& scene, std::string_view ego_id, int timestep, const RenderConfig& cfg = {});

std::vector<std::uint8_t> encode_png(const BevRaster& raster);
void write_png(const BevRaster& raster, const std::filesystem::path& path);

struct DecodedImage {
  int width = 0, height = 0;
  std::vector<std::uint8_t> rgb;
};
DecodedImage read_png(const std::filesystem::path& path);

Json sidecar_json(const BevRaster& raster);

/// Which tracks and lanes a perturbation touched.
struct PerturbLog {
  std::vector<std::string> removed_vehicles;
  std::vector<std::string> shifted_vehicles;
  std::vector<LaneId> hidden_boundaries;
  std::vector<LaneId> relabeled_lanes;
};

/// Each vehicle is hit with probability `rate`; a hit removes the track or,
/// with equal odds, shifts every state by one uniform disk vector of radius
/// max_shift. The ego is shifted instead of removed.
Scene perturb_vehicles(const Scene& scene, double rate, double max_shift, std::uint64_t seed,
                       PerturbLog* log = nullptr);

/// Each lane is hit with probability `rate`; a hit hides its boundary stroke
/// or relabels it to a different lane type. Geometry is untouched.
Scene perturb_lanes(const Scene& scene, double rate, std::uint64_t seed, PerturbLog* log = nullptr);

/// Sub-seeds used by perturb_combined for its vehicle and lane passes.
std::uint64_t combined_vehicle_seed(std::uint64_t seed);
std::uint64_t combined_lane_seed(std::uint64_t seed);

Scene perturb_combined(const Scene& scene, double rate, std::uint64_t seed, double max_shift = 0.20,
                       PerturbLog* log = nullptr);

}  // namespace bevkit
