#pragma once

#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "bevkit/json_io.hpp"
#include "bevkit/scene.hpp"
#include "bevkit/vqagen.hpp"

namespace bevkit {

struct Prediction {
  std::string qa_id;
  std::string answer;
};

Prediction prediction_from_json(const Json& j);

struct Tally {
  std::size_t correct = 0, total = 0;
  double accuracy() const { return total ? static_cast<double>(correct) / static_cast<double>(total) : 0.0; }
};

struct QaReport {
  std::map<std::string, Tally> per_qtype;  // keyed by qtype name
  Tally overall;
  Json to_json() const;
};

/// Trimmed, case-insensitive exact match. Every item needs exactly one
/// prediction: throws MissingPrediction naming the uncovered ids, UnknownId
/// for ids outside the dataset and ValidationError for duplicates.
QaReport qa_accuracy(std::span<const QAItem> dataset, std::span<const Prediction> preds);

struct DisplacementMetrics {
  double mADE = 0, minADE = 0, mFDE = 0, minFDE = 0;
};

/// ADE averages over every timestep including the first. Throws EmptyInput
/// without samples and LengthMismatch when a sample's length differs from gt.
DisplacementMetrics displacement_metrics(std::span<const VehicleState> gt,
                                         std::span<const std::vector<VehicleState>> samples);

struct Obb {
  Vec2 center;
  double yaw = 0, length = 0, width = 0;
};

/// Separating-axis test; touching edges overlap. Throws DegenerateInput for
/// non-positive dimensions.
bool obb_overlap(const Obb& a, const Obb& b);
bool obb_overlap(Vec2 center_a, double yaw_a, double len_a, double wid_a, Vec2 center_b, double yaw_b,
                 double len_b, double wid_b);

/// Footprint sizes come from the scene's tracks; each rollout holds the
/// vehicle's states from a shared start step.
struct Scenario {
  const Scene* scene = nullptr;
  std::map<std::string, std::vector<VehicleState>> rollouts;
};

bool scenario_collides(const Scenario& s);
/// Share of colliding scenarios. Throws EmptyInput.
double scenario_collision_rate(std::span<const Scenario> scenarios);

struct MetricReport {
  DisplacementMetrics displacement;  // averaged over trajectories
  std::size_t trajectories = 0;
  std::size_t samples_per_trajectory = 0;
  std::optional<double> scr;
  std::size_t scenarios = 0;
  Json to_json() const;
};

}  // namespace bevkit
