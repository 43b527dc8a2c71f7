#include "bevkit/bevrender.hpp"

#include <png.h>

#include <algorithm>
#include <cmath>
#include <cstring>

#include "bevkit/errors.hpp"
#include "bevkit/rng.hpp"

namespace bevkit {

int RenderConfig::side() const {
  if (!(extent > 0) || !(resolution > 0) || !std::isfinite(extent) || !std::isfinite(resolution))
    throw ConfigError("render config: extent and resolution must be positive");
  const double s = 2.0 * extent / resolution;
  const double r = std::round(s);
  if (r < 1 || std::abs(s - r) > 1e-9 * std::max(1.0, s))
    throw ConfigError("render config: 2*extent/resolution = " + std::to_string(s) + " is not an integer");
  return static_cast<int>(r);
}

namespace {
// Exact zeros and units for axis-aligned headings so 90 degree rotations stay exact.
double snap(double v) {
  for (double t : {-1.0, 0.0, 1.0})
    if (std::abs(v - t) < 1e-12) return t;
  return v;
}
}  // namespace

PixelTransform PixelTransform::ego_frame(Vec2 ego, double yaw, double resolution, int side) {
  const double s = snap(std::sin(yaw)), c = snap(std::cos(yaw));
  PixelTransform t;
  t.a = s / resolution;
  t.b = -c / resolution;
  t.d = -c / resolution;
  t.e = -s / resolution;
  const double half = side / 2;
  t.c = half - (t.a * ego.x + t.b * ego.y);
  t.f = half - (t.d * ego.x + t.e * ego.y);
  return t;
}

Vec2 PixelTransform::pixel_to_world(Vec2 px) const {
  const double det = a * e - b * d;
  const double u = px.x - c, v = px.y - f;
  return {(e * u - b * v) / det, (-d * u + a * v) / det};
}

Rgb BevRaster::at(int col, int row) const {
  const auto k = (static_cast<std::size_t>(row) * static_cast<std::size_t>(width) + static_cast<std::size_t>(col)) * 3;
  return {pixels[k], pixels[k + 1], pixels[k + 2]};
}

namespace {

class Canvas {
 public:
  Canvas(int w, int h, Rgb bg) : w_(w), h_(h), px_(static_cast<std::size_t>(w) * h * 3) {
    for (std::size_t k = 0; k < px_.size(); k += 3) {
      px_[k] = bg.r;
      px_[k + 1] = bg.g;
      px_[k + 2] = bg.b;
    }
  }

  void set(int col, int row, Rgb c) {
    const auto k = (static_cast<std::size_t>(row) * w_ + col) * 3;
    px_[k] = c.r;
    px_[k + 1] = c.g;
    px_[k + 2] = c.b;
  }

  /// Even-odd scanline fill sampled at pixel centers.
  void fill(const std::vector<Vec2>& poly, Rgb color) {
    if (poly.size() < 3) return;
    const Aabb box = bounding_box(poly);
    if (box.max_x < -0.5 || box.min_x > w_ - 0.5 || box.max_y < -0.5 || box.min_y > h_ - 0.5) return;
    const int r0 = std::max(0, static_cast<int>(std::ceil(box.min_y)));
    const int r1 = std::min(h_ - 1, static_cast<int>(std::floor(box.max_y)));
    std::vector<double> xs;
    for (int row = r0; row <= r1; ++row) {
      const double y = row;
      xs.clear();
      for (std::size_t i = 0, j = poly.size() - 1; i < poly.size(); j = i++) {
        const Vec2 p = poly[j], q = poly[i];
        if ((p.y <= y) == (q.y <= y)) continue;
        xs.push_back(p.x + (y - p.y) * (q.x - p.x) / (q.y - p.y));
      }
      std::sort(xs.begin(), xs.end());
      for (std::size_t k = 0; k + 1 < xs.size(); k += 2) {
        const int c0 = std::max(0, static_cast<int>(std::ceil(xs[k])));
        const int c1 = std::min(w_ - 1, static_cast<int>(std::ceil(xs[k + 1])) - 1);
        for (int col = c0; col <= c1; ++col) set(col, row, color);
      }
    }
  }

  /// Pixels whose centers lie within half_width of the segment.
  void stroke(Vec2 a, Vec2 b, double half_width, Rgb color) {
    const int c0 = std::max(0, static_cast<int>(std::ceil(std::min(a.x, b.x) - half_width)));
    const int c1 = std::min(w_ - 1, static_cast<int>(std::floor(std::max(a.x, b.x) + half_width)));
    const int r0 = std::max(0, static_cast<int>(std::ceil(std::min(a.y, b.y) - half_width)));
    const int r1 = std::min(h_ - 1, static_cast<int>(std::floor(std::max(a.y, b.y) + half_width)));
    for (int row = r0; row <= r1; ++row)
      for (int col = c0; col <= c1; ++col)
        if (point_segment_distance({static_cast<double>(col), static_cast<double>(row)}, a, b) <= half_width)
          set(col, row, color);
  }

  std::vector<std::uint8_t> release() && { return std::move(px_); }

 private:
  int w_, h_;
  std::vector<std::uint8_t> px_;
};

std::vector<Vec2> to_pixels(const PixelTransform& t, std::span<const Vec2> pts) {
  std::vector<Vec2> out;
  out.reserve(pts.size());
  for (const auto& p : pts) out.push_back(t.world_to_pixel(p));
  return out;
}

std::vector<Vec2> footprint(const VehicleState& s, double length, double width) {
  const Vec2 f = unit_from_angle(s.yaw) * (length / 2), l = left_normal(unit_from_angle(s.yaw)) * (width / 2);
  return {s.position - f - l, s.position + f - l, s.position + f + l, s.position - f + l};
}

bool visible(const Aabb& px_box, int side) {
  return !(px_box.max_x < -1 || px_box.min_x > side || px_box.max_y < -1 || px_box.min_y > side);
}

}  // namespace

BevRaster render_bev(const Scene& scene, std::string_view ego_id, int timestep, const RenderConfig& cfg) {
  const int side = cfg.side();
  const auto& ego_track = scene.track(ego_id);
  if (!ego_track.has(timestep))
    throw UnknownVehicle("vehicle " + std::string(ego_id) + " absent at t=" + std::to_string(timestep));
  const VehicleState& ego = ego_track.at(timestep);
  const auto& pal = cfg.palette;

  BevRaster out;
  out.width = out.height = side;
  out.transform = PixelTransform::ego_frame(ego.position, ego.yaw, cfg.resolution, side);
  out.scene_id = scene.scene_id;
  out.ego_id = std::string(ego_id);
  out.timestep = timestep;
  out.extent = cfg.extent;
  out.resolution = cfg.resolution;
  const auto& tf = out.transform;

  Canvas canvas(side, side, pal.background);

  // lower-priority areas first so the highest-priority type ends on top
  std::vector<const Area*> areas;
  for (const auto& a : scene.map.areas) areas.push_back(&a);
  std::stable_sort(areas.begin(), areas.end(), [](const Area* x, const Area* y) {
    return area_priority(x->area_type) > area_priority(y->area_type);
  });
  for (const Area* a : areas)
    canvas.fill(to_pixels(tf, a->polygon), pal.area[static_cast<std::size_t>(a->area_type)]);

  std::vector<std::vector<Vec2>> lane_px;
  lane_px.reserve(scene.map.lanes.size());
  for (const auto& lane : scene.map.lanes) {
    lane_px.push_back(to_pixels(tf, lane.boundary));
    if (visible(bounding_box(lane_px.back()), side))
      canvas.fill(lane_px.back(), pal.lane[static_cast<std::size_t>(lane.lane_type)]);
  }
  constexpr double kStrokeHalf = 0.5;  // pixels
  for (std::size_t i = 0; i < scene.map.lanes.size(); ++i) {
    if (!scene.map.lanes[i].boundary_visible) continue;
    const auto& poly = lane_px[i];
    if (!visible(bounding_box(poly), side)) continue;
    for (std::size_t k = 0; k < poly.size(); ++k)
      canvas.stroke(poly[k], poly[(k + 1) % poly.size()], kStrokeHalf, pal.lane_boundary);
  }

  for (const auto& tr : scene.tracks) {
    if (tr.vehicle_id == ego_id || !tr.has(timestep)) continue;
    canvas.fill(to_pixels(tf, footprint(tr.at(timestep), tr.length, tr.width)), pal.vehicle);
  }
  canvas.fill(to_pixels(tf, footprint(ego, ego_track.length, ego_track.width)), pal.ego);

  if (ego.speed > cfg.arrow_min_speed) {
    // starts at the front bumper so the ego body stays red
    const Vec2 fwd = unit_from_angle(ego.yaw), left = left_normal(fwd);
    const Vec2 tail = ego.position + fwd * (ego_track.length / 2);
    const double len = std::clamp(ego.speed * 0.5, 2.0, 6.0);
    const Vec2 tip = tail + fwd * len;
    const double head = std::min(1.5, len / 2);
    canvas.stroke(tf.world_to_pixel(tail), tf.world_to_pixel(tip - fwd * head), 0.3 / cfg.resolution, pal.arrow);
    canvas.fill(to_pixels(tf, std::vector<Vec2>{tip, tip - fwd * head + left * (head * 0.6),
                                                tip - fwd * head - left * (head * 0.6)}),
                pal.arrow);
  }

  out.pixels = std::move(canvas).release();
  return out;
}

std::vector<std::uint8_t> encode_png(const BevRaster& raster) {
  png_image img;
  std::memset(&img, 0, sizeof img);
  img.version = PNG_IMAGE_VERSION;
  img.width = static_cast<png_uint_32>(raster.width);
  img.height = static_cast<png_uint_32>(raster.height);
  img.format = PNG_FORMAT_RGB;
  png_alloc_size_t size = 0;
  if (!png_image_write_to_memory(&img, nullptr, &size, 0, raster.pixels.data(), 0, nullptr))
    throw IoError(std::string("png encode: ") + img.message);
  std::vector<std::uint8_t> buf(size);
  if (!png_image_write_to_memory(&img, buf.data(), &size, 0, raster.pixels.data(), 0, nullptr))
    throw IoError(std::string("png encode: ") + img.message);
  buf.resize(size);
  return buf;
}

void write_png(const BevRaster& raster, const std::filesystem::path& path) {
  const auto buf = encode_png(raster);
  write_text_file(path, std::string(buf.begin(), buf.end()));
}

DecodedImage read_png(const std::filesystem::path& path) {
  png_image img;
  std::memset(&img, 0, sizeof img);
  img.version = PNG_IMAGE_VERSION;
  if (!png_image_begin_read_from_file(&img, path.c_str()))
    throw IoError("cannot read png " + path.string() + ": " + img.message);
  img.format = PNG_FORMAT_RGB;
  DecodedImage out;
  out.width = static_cast<int>(img.width);
  out.height = static_cast<int>(img.height);
  out.rgb.resize(PNG_IMAGE_SIZE(img));
  if (!png_image_finish_read(&img, nullptr, out.rgb.data(), 0, nullptr)) {
    png_image_free(&img);
    throw IoError("cannot decode png " + path.string() + ": " + img.message);
  }
  return out;
}

Json sidecar_json(const BevRaster& raster) {
  const auto co = raster.transform.coefficients();
  return {{"scene_id", raster.scene_id},   {"ego_id", raster.ego_id},
          {"timestep", raster.timestep},   {"extent", raster.extent},
          {"resolution", raster.resolution}, {"transform", std::vector<double>(co.begin(), co.end())}};
}

namespace {
constexpr std::uint64_t kVehicleStream = 0x7665686963ULL;
constexpr std::uint64_t kLaneStream = 0x6c616e65ULL;

// Toward zero on the 1e-6 grid, so quantizing never grows the vector.
double truncate6(double v) { return std::trunc(v * 1e6) / 1e6; }
}  // namespace

Scene perturb_vehicles(const Scene& scene, double rate, double max_shift, std::uint64_t seed, PerturbLog* log) {
  if (!(rate >= 0.0 && rate <= 1.0)) throw ConfigError("perturbation rate must be in [0, 1]");
  if (!(max_shift >= 0.0)) throw ConfigError("max_shift must be >= 0");
  Scene out = scene;
  out.tracks.clear();
  for (const auto& tr : scene.tracks) {
    Rng rng(derive_seed(seed, hash_string(tr.vehicle_id)));
    if (!rng.bernoulli(rate)) {
      out.tracks.push_back(tr);
      continue;
    }
    const bool remove = rng.bernoulli(0.5);
    if (remove && tr.vehicle_id != scene.ego_id) {
      if (log) log->removed_vehicles.push_back(tr.vehicle_id);
      continue;
    }
    const double r = max_shift * std::sqrt(rng.uniform());
    const double phi = rng.uniform(-kPi, kPi);
    const Vec2 shift{truncate6(r * std::cos(phi)), truncate6(r * std::sin(phi))};
    VehicleTrack moved = tr;
    for (auto& s : moved.states) s.position = {quantize6(s.position.x + shift.x), quantize6(s.position.y + shift.y)};
    out.tracks.push_back(std::move(moved));
    if (log) log->shifted_vehicles.push_back(tr.vehicle_id);
  }
  return out;
}

Scene perturb_lanes(const Scene& scene, double rate, std::uint64_t seed, PerturbLog* log) {
  if (!(rate >= 0.0 && rate <= 1.0)) throw ConfigError("perturbation rate must be in [0, 1]");
  Scene out = scene;
  for (auto& lane : out.map.lanes) {
    Rng rng(derive_seed(seed ^ kLaneStream, hash_string(lane.id)));
    if (!rng.bernoulli(rate)) continue;
    if (rng.bernoulli(0.5)) {
      lane.boundary_visible = false;
      if (log) log->hidden_boundaries.push_back(lane.id);
    } else {
      std::vector<LaneType> others;
      for (LaneType t : kAllLaneTypes)
        if (t != lane.lane_type) others.push_back(t);
      lane.lane_type = others[rng.index(others.size())];
      if (log) log->relabeled_lanes.push_back(lane.id);
    }
  }
  return out;
}

std::uint64_t combined_vehicle_seed(std::uint64_t seed) { return derive_seed(seed, kVehicleStream); }
std::uint64_t combined_lane_seed(std::uint64_t seed) { return derive_seed(seed, kLaneStream); }

Scene perturb_combined(const Scene& scene, double rate, std::uint64_t seed, double max_shift, PerturbLog* log) {
  const Scene v = perturb_vehicles(scene, rate, max_shift, combined_vehicle_seed(seed), log);
  return perturb_lanes(v, rate, combined_lane_seed(seed), log);
}

}  // namespace bevkit
