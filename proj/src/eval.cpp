#include "bevkit/eval.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <cmath>
#include <limits>
#include <set>
#include <unordered_map>

#include "bevkit/errors.hpp"

namespace bevkit {

namespace {

std::string normalize_answer(std::string_view s) {
  auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string_view::npos) return {};
  auto e = s.find_last_not_of(" \t\r\n");
  std::string out(s.substr(b, e - b + 1));
  std::transform(out.begin(), out.end(), out.begin(), [](unsigned char c) { return std::tolower(c); });
  return out;
}

}  // namespace

Prediction prediction_from_json(const Json& j) {
  try {
    return {j.at("qa_id").get<std::string>(), j.at("answer").get<std::string>()};
  } catch (const Json::exception& e) {
    throw ParseError(std::string("prediction: ") + e.what());
  }
}

Json QaReport::to_json() const {
  Json per = Json::object();
  for (const auto& [k, t] : per_qtype) per[k] = {{"accuracy", t.accuracy()}, {"correct", t.correct}, {"total", t.total}};
  return {{"accuracy", overall.accuracy()}, {"correct", overall.correct}, {"total", overall.total}, {"per_qtype", per}};
}

QaReport qa_accuracy(std::span<const QAItem> dataset, std::span<const Prediction> preds) {
  std::unordered_map<std::string, const QAItem*> by_id;
  for (const auto& q : dataset) by_id.emplace(q.qa_id, &q);
  std::unordered_map<std::string, const Prediction*> answered;
  for (const auto& p : preds) {
    if (!by_id.contains(p.qa_id)) throw UnknownId("prediction for unknown qa_id " + p.qa_id);
    if (!answered.emplace(p.qa_id, &p).second) throw ValidationError("qa_id", "duplicate prediction for " + p.qa_id);
  }
  std::vector<std::string> missing;
  for (const auto& q : dataset)
    if (!answered.contains(q.qa_id)) missing.push_back(q.qa_id);
  if (!missing.empty()) {
    std::string list;
    for (std::size_t i = 0; i < missing.size() && i < 20; ++i) list += (i ? ", " : "") + missing[i];
    if (missing.size() > 20) list += ", ...";
    throw MissingPrediction(std::to_string(missing.size()) + " item(s) without prediction: " + list);
  }

  QaReport r;
  for (const auto& q : dataset) {
    const bool ok = normalize_answer(answered.at(q.qa_id)->answer) == normalize_answer(q.answer);
    auto& t = r.per_qtype[std::string(to_string(q.qtype))];
    ++t.total;
    ++r.overall.total;
    if (ok) {
      ++t.correct;
      ++r.overall.correct;
    }
  }
  return r;
}

DisplacementMetrics displacement_metrics(std::span<const VehicleState> gt,
                                         std::span<const std::vector<VehicleState>> samples) {
  if (samples.empty()) throw EmptyInput("displacement_metrics: no samples");
  if (gt.empty()) throw EmptyInput("displacement_metrics: empty ground truth");
  DisplacementMetrics m;
  m.minADE = m.minFDE = std::numeric_limits<double>::infinity();
  for (const auto& s : samples) {
    if (s.size() != gt.size())
      throw LengthMismatch("sample has " + std::to_string(s.size()) + " states, ground truth " +
                           std::to_string(gt.size()));
    double sum = 0;
    for (std::size_t t = 0; t < gt.size(); ++t) sum += distance(s[t].position, gt[t].position);
    const double ade = sum / static_cast<double>(gt.size());
    const double fde = distance(s.back().position, gt.back().position);
    m.mADE += ade;
    m.mFDE += fde;
    m.minADE = std::min(m.minADE, ade);
    m.minFDE = std::min(m.minFDE, fde);
  }
  m.mADE /= static_cast<double>(samples.size());
  m.mFDE /= static_cast<double>(samples.size());
  return m;
}

namespace {

std::array<Vec2, 4> corners(const Obb& o) {
  const Vec2 f = unit_from_angle(o.yaw) * (o.length / 2), l = left_normal(unit_from_angle(o.yaw)) * (o.width / 2);
  return {o.center + f + l, o.center - f + l, o.center - f - l, o.center + f - l};
}

bool separated_along(Vec2 axis, const std::array<Vec2, 4>& a, const std::array<Vec2, 4>& b) {
  double amin = 1e300, amax = -1e300, bmin = 1e300, bmax = -1e300;
  for (const auto& p : a) {
    amin = std::min(amin, dot(p, axis));
    amax = std::max(amax, dot(p, axis));
  }
  for (const auto& p : b) {
    bmin = std::min(bmin, dot(p, axis));
    bmax = std::max(bmax, dot(p, axis));
  }
  // touching (equal extents up to rounding) is not a separation
  constexpr double kTouch = 1e-9;
  return amax < bmin - kTouch || bmax < amin - kTouch;
}

}  // namespace

bool obb_overlap(const Obb& a, const Obb& b) {
  for (const Obb* o : {&a, &b})
    if (!(o->length > 0) || !(o->width > 0)) throw DegenerateInput("rectangle dimensions must be positive");
  const auto ca = corners(a), cb = corners(b);
  for (double yaw : {a.yaw, b.yaw}) {
    const Vec2 u = unit_from_angle(yaw);
    if (separated_along(u, ca, cb) || separated_along(left_normal(u), ca, cb)) return false;
  }
  return true;
}

bool obb_overlap(Vec2 center_a, double yaw_a, double len_a, double wid_a, Vec2 center_b, double yaw_b,
                 double len_b, double wid_b) {
  return obb_overlap(Obb{center_a, yaw_a, len_a, wid_a}, Obb{center_b, yaw_b, len_b, wid_b});
}

bool scenario_collides(const Scenario& s) {
  if (!s.scene) throw EmptyInput("scenario without scene");
  struct Entry {
    const VehicleTrack* track;
    const std::vector<VehicleState>* states;
  };
  std::vector<Entry> entries;
  std::size_t steps = 0;
  for (const auto& [id, states] : s.rollouts) {
    entries.push_back({&s.scene->track(id), &states});
    steps = std::max(steps, states.size());
  }
  for (std::size_t t = 0; t < steps; ++t) {
    for (std::size_t i = 0; i < entries.size(); ++i) {
      if (t >= entries[i].states->size()) continue;
      const auto& si = (*entries[i].states)[t];
      const Obb oi{si.position, si.yaw, entries[i].track->length, entries[i].track->width};
      for (std::size_t j = i + 1; j < entries.size(); ++j) {
        if (t >= entries[j].states->size()) continue;
        const auto& sj = (*entries[j].states)[t];
        if (obb_overlap(oi, {sj.position, sj.yaw, entries[j].track->length, entries[j].track->width})) return true;
      }
    }
  }
  return false;
}

double scenario_collision_rate(std::span<const Scenario> scenarios) {
  if (scenarios.empty()) throw EmptyInput("scenario_collision_rate: no scenarios");
  std::size_t hits = 0;
  for (const auto& s : scenarios)
    if (scenario_collides(s)) ++hits;
  return static_cast<double>(hits) / static_cast<double>(scenarios.size());
}

Json MetricReport::to_json() const {
  Json j{{"mADE", displacement.mADE},
         {"minADE", displacement.minADE},
         {"mFDE", displacement.mFDE},
         {"minFDE", displacement.minFDE},
         {"trajectories", trajectories},
         {"samples_per_trajectory", samples_per_trajectory},
         {"scenarios", scenarios}};
  j["SCR"] = scr ? Json(*scr) : Json(nullptr);
  return j;
}

}  // namespace bevkit
