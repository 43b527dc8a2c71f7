#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "bevkit/annotator.hpp"
#include "bevkit/bevrender.hpp"
#include "bevkit/json_io.hpp"
#include "bevkit/rng.hpp"

namespace bevkit {

enum class QType { AreaType = 0, LaneType, Location, Navigation, Existence, Orientation };
inline constexpr std::array<QType, 6> kAllQTypes{QType::AreaType,   QType::LaneType,  QType::Location,
                                                 QType::Navigation, QType::Existence, QType::Orientation};
std::string_view to_string(QType q);
QType parse_qtype(std::string_view s);

/// Closed answer vocabulary of each question type.
const std::vector<std::string>& answer_vocabulary(QType q);

enum class Orientation { SameDirection = 0, Oncoming, PerpendicularLeft, PerpendicularRight };
std::string_view to_string(Orientation o);
/// 90 degree bins centered on 0, 180, +90 and -90 degrees of heading difference.
Orientation classify_orientation(double heading_diff_rad);

struct QuestionTemplate {
  QType qtype = QType::AreaType;
  std::string template_id;
  std::string text;
};

/// Throws ParseError on malformed files and ConfigError when placeholders do not
/// fit the question type.
std::vector<QuestionTemplate> parse_templates(const Json& j);
std::vector<QuestionTemplate> load_templates(const std::filesystem::path& path);
void check_template(const QuestionTemplate& t);

/// Image-normalized box in integer hundredths, 0..100.
struct NormBBox {
  int x0 = 0, y0 = 0, x1 = 0, y1 = 0;

  /// Outward-rounded, clipped box of pixel-space points; nullopt when nothing is visible.
  static std::optional<NormBBox> from_pixels(std::span<const Vec2> px, int side);
  NormBBox merged(const NormBBox& o) const;
  long area() const { return static_cast<long>(x1 - x0) * (y1 - y0); }
  /// "[0.12, 0.30, 0.45, 0.80]"
  std::string text() const;
  Json to_json() const;
  static NormBBox from_json(const Json& j);
  friend bool operator==(const NormBBox&, const NormBBox&) = default;
};

/// Intersection over union; exactly 0 when the boxes share no area (touching included).
double bbox_iou(const NormBBox& a, const NormBBox& b);

/// A rendered image as seen by the question generator.
struct ImageRef {
  std::string image;
  std::string scene_id;
  std::string ego_id;
  int timestep = 0;
  int side = 400;
  PixelTransform transform;

  static ImageRef from_raster(const BevRaster& r, std::string image);
  Json to_json() const;
  static ImageRef from_json(const Json& j);
};

/// Image bbox of one lane's boundary polygon.
std::optional<NormBBox> lane_bbox(const Lane& lane, const ImageRef& img);

struct QAChoices {
  NormBBox a, b;
  friend bool operator==(const QAChoices&, const QAChoices&) = default;
};

struct QAItem {
  std::string qa_id;
  std::string image;
  QType qtype = QType::AreaType;
  std::string template_id;
  std::string question;
  std::string answer;
  std::optional<QAChoices> choices;
  std::string answer_class;
  std::string scene_id, ego_id;
  int timestep = 0;
  /// Sampled slot values (direction, rank, trajectory_type) so answers can be re-derived.
  std::map<std::string, std::string> slots;
  friend bool operator==(const QAItem&, const QAItem&) = default;
};

Json qa_to_json(const QAItem& q);
QAItem qa_from_json(const Json& j);

struct GenConfig {
  double rate = 5.44;  // mean questions per image
  std::uint64_t seed = 0;
};

/// Questions for every image of one scene. Records must cover each image's
/// (ego, timestep); the output is a pure function of the inputs and the seed.
std::vector<QAItem> gen_questions(const Scene& scene, std::span<const AnnotationRecord> records,
                                  std::span<const ImageRef> images, std::span<const QuestionTemplate> templates,
                                  const GenConfig& cfg);

/// Builds one question of the given type, or throws NoFeasibleQuestion.
QAItem make_question(QType qtype, const Scene& scene, const AnnotationRecord& rec, const ImageRef& img,
                     std::span<const QuestionTemplate> templates, Rng& rng);

/// Per question type, every answer class is randomly cut to at most
/// ceil(factor * smallest class count). Survivors keep their order.
std::vector<QAItem> balance_dataset(std::span<const QAItem> items, double factor, std::uint64_t seed);

struct Split {
  std::vector<QAItem> train, test;
};
/// Whole images go to one side; images are visited in seeded order and put in
/// test while that brings the test share closer to the target.
Split split_dataset(std::span<const QAItem> items, double test_fraction, std::uint64_t seed);

struct StatsReport {
  std::size_t questions = 0;
  std::size_t images = 0;
  double mean_per_image = 0.0;
  std::map<std::string, std::size_t> per_qtype;
  std::map<std::string, std::map<std::string, std::size_t>> per_answer;
  Json to_json() const;
};
StatsReport dataset_stats(std::span<const QAItem> items);

}  // namespace bevkit
