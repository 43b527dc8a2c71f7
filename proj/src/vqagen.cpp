#include "bevkit/vqagen.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <set>
#include <unordered_map>

#include "bevkit/errors.hpp"

namespace bevkit {

namespace {
constexpr std::array<std::string_view, 6> kQTypeNames{"area_type", "lane_type", "location",
                                                      "navigation", "existence", "orientation"};
constexpr std::array<std::string_view, 4> kOrientNames{"same_direction", "oncoming", "perpendicular_left",
                                                       "perpendicular_right"};
constexpr std::array<std::string_view, 5> kPlaceholders{"{direction}", "{rank}", "{trajectory_type}", "{bbox_a}",
                                                        "{bbox_b}"};
}  // namespace

std::string_view to_string(QType q) { return kQTypeNames[static_cast<std::size_t>(q)]; }

QType parse_qtype(std::string_view s) {
  for (std::size_t i = 0; i < kQTypeNames.size(); ++i)
    if (kQTypeNames[i] == s) return static_cast<QType>(i);
  throw ParseError("unknown question type '" + std::string(s) + "'");
}

std::string_view to_string(Orientation o) { return kOrientNames[static_cast<std::size_t>(o)]; }

Orientation classify_orientation(double diff) {
  const double deg = rad2deg(normalize_angle(diff));
  if (std::abs(deg) < 45.0) return Orientation::SameDirection;
  if (std::abs(deg) > 135.0) return Orientation::Oncoming;
  return deg > 0 ? Orientation::PerpendicularLeft : Orientation::PerpendicularRight;
}

const std::vector<std::string>& answer_vocabulary(QType q) {
  static const std::array<std::vector<std::string>, 6> vocab = [] {
    std::array<std::vector<std::string>, 6> v;
    for (AreaType t : kAllAreaTypes) v[0].emplace_back(to_string(t));
    for (LaneType t : kAllLaneTypes) v[1].emplace_back(to_string(t));
    v[2] = {"A", "B"};
    v[3] = {"A", "B"};
    v[4] = {"yes", "no"};
    for (auto n : kOrientNames) v[5].emplace_back(n);
    v[5].emplace_back("none");
    return v;
  }();
  return vocab[static_cast<std::size_t>(q)];
}

// ---------------------------------------------------------------- templates

void check_template(const QuestionTemplate& t) {
  auto has = [&](std::string_view ph) { return t.text.find(ph) != std::string::npos; };
  // strip known placeholders; any brace left over is an unknown one
  std::string rest = t.text;
  for (auto ph : kPlaceholders)
    for (auto pos = rest.find(ph); pos != std::string::npos; pos = rest.find(ph)) rest.erase(pos, ph.size());
  if (rest.find('{') != std::string::npos || rest.find('}') != std::string::npos)
    throw ConfigError("template " + t.template_id + ": unknown placeholder");

  std::set<std::string_view> need;
  switch (t.qtype) {
    case QType::AreaType:
    case QType::LaneType:
      break;
    case QType::Location:
      need = {"{bbox_a}", "{bbox_b}"};
      break;
    case QType::Navigation:
      need = {"{bbox_a}", "{bbox_b}", "{trajectory_type}"};
      break;
    case QType::Existence:
      need = {"{direction}"};
      break;
    case QType::Orientation:
      need = {"{direction}", "{rank}"};
      break;
  }
  for (auto ph : kPlaceholders) {
    if (need.count(ph) && !has(ph))
      throw ConfigError("template " + t.template_id + " (" + std::string(to_string(t.qtype)) + ") lacks " +
                        std::string(ph));
    if (!need.count(ph) && has(ph))
      throw ConfigError("template " + t.template_id + " (" + std::string(to_string(t.qtype)) + ") may not use " +
                        std::string(ph));
  }
}

std::vector<QuestionTemplate> parse_templates(const Json& j) {
  std::vector<QuestionTemplate> out;
  try {
    for (const auto& e : j.at("templates")) {
      QuestionTemplate t;
      t.template_id = e.at("id").get<std::string>();
      t.qtype = parse_qtype(e.at("qtype").get<std::string>());
      t.text = e.at("text").get<std::string>();
      out.push_back(std::move(t));
    }
  } catch (const Json::exception& e) {
    throw ParseError(std::string("templates: ") + e.what());
  }
  std::set<std::string> ids;
  for (const auto& t : out) {
    if (!ids.insert(t.template_id).second) throw ConfigError("duplicate template id " + t.template_id);
    check_template(t);
  }
  for (QType q : kAllQTypes)
    if (std::none_of(out.begin(), out.end(), [q](const QuestionTemplate& t) { return t.qtype == q; }))
      throw ConfigError("no template for question type " + std::string(to_string(q)));
  return out;
}

std::vector<QuestionTemplate> load_templates(const std::filesystem::path& path) {
  return parse_templates(parse_json(read_text_file(path), path.string()));
}

// ---------------------------------------------------------------- boxes

std::optional<NormBBox> NormBBox::from_pixels(std::span<const Vec2> px, int side) {
  if (px.empty()) return std::nullopt;
  const Aabb b = bounding_box(px);
  // pixel centers sit at integers, so the image spans [-0.5, side - 0.5]
  auto norm = [side](double v) { return (v + 0.5) / side; };
  const double u0 = norm(b.min_x), u1 = norm(b.max_x), v0 = norm(b.min_y), v1 = norm(b.max_y);
  if (u1 <= 0 || v1 <= 0 || u0 >= 1 || v0 >= 1) return std::nullopt;
  auto lo = [](double v) { return std::clamp(static_cast<int>(std::floor(v * 100.0 + 1e-9)), 0, 100); };
  auto hi = [](double v) { return std::clamp(static_cast<int>(std::ceil(v * 100.0 - 1e-9)), 0, 100); };
  NormBBox r{lo(u0), lo(v0), hi(u1), hi(v1)};
  if (r.x0 >= r.x1 || r.y0 >= r.y1) return std::nullopt;
  return r;
}

NormBBox NormBBox::merged(const NormBBox& o) const {
  return {std::min(x0, o.x0), std::min(y0, o.y0), std::max(x1, o.x1), std::max(y1, o.y1)};
}

std::string NormBBox::text() const {
  char buf[64];
  std::snprintf(buf, sizeof buf, "[%d.%02d, %d.%02d, %d.%02d, %d.%02d]", x0 / 100, x0 % 100, y0 / 100, y0 % 100,
                x1 / 100, x1 % 100, y1 / 100, y1 % 100);
  return buf;
}

Json NormBBox::to_json() const { return Json::array({x0 / 100.0, y0 / 100.0, x1 / 100.0, y1 / 100.0}); }

NormBBox NormBBox::from_json(const Json& j) {
  if (!j.is_array() || j.size() != 4) throw ParseError("bbox: expected [x0, y0, x1, y1]");
  auto h = [](const Json& v) { return static_cast<int>(std::lround(v.get<double>() * 100.0)); };
  NormBBox b{h(j[0]), h(j[1]), h(j[2]), h(j[3])};
  if (b.x0 >= b.x1 || b.y0 >= b.y1) throw ParseError("bbox: empty box " + b.text());
  return b;
}

double bbox_iou(const NormBBox& a, const NormBBox& b) {
  const long iw = std::max(0, std::min(a.x1, b.x1) - std::max(a.x0, b.x0));
  const long ih = std::max(0, std::min(a.y1, b.y1) - std::max(a.y0, b.y0));
  const long inter = iw * ih;
  if (inter == 0) return 0.0;
  return static_cast<double>(inter) / static_cast<double>(a.area() + b.area() - inter);
}

ImageRef ImageRef::from_raster(const BevRaster& r, std::string image) {
  return {std::move(image), r.scene_id, r.ego_id, r.timestep, r.width, r.transform};
}

Json ImageRef::to_json() const {
  const auto co = transform.coefficients();
  return {{"image", image},       {"scene_id", scene_id}, {"ego_id", ego_id},
          {"timestep", timestep}, {"side", side},         {"transform", std::vector<double>(co.begin(), co.end())}};
}

ImageRef ImageRef::from_json(const Json& j) {
  try {
    ImageRef r;
    r.image = j.at("image").get<std::string>();
    r.scene_id = j.at("scene_id").get<std::string>();
    r.ego_id = j.at("ego_id").get<std::string>();
    r.timestep = j.at("timestep").get<int>();
    if (j.contains("side")) {
      r.side = j.at("side").get<int>();
    } else {
      r.side = static_cast<int>(std::lround(2.0 * j.at("extent").get<double>() / j.at("resolution").get<double>()));
    }
    const auto co = j.at("transform").get<std::vector<double>>();
    if (co.size() != 6) throw ParseError("image ref: transform needs 6 coefficients");
    r.transform = {co[0], co[1], co[2], co[3], co[4], co[5]};
    return r;
  } catch (const Json::exception& e) {
    throw ParseError(std::string("image ref: ") + e.what());
  }
}

std::optional<NormBBox> lane_bbox(const Lane& lane, const ImageRef& img) {
  std::vector<Vec2> px;
  px.reserve(lane.boundary.size());
  for (const auto& p : lane.boundary) px.push_back(img.transform.world_to_pixel(p));
  return NormBBox::from_pixels(px, img.side);
}

// ---------------------------------------------------------------- QA JSON

Json qa_to_json(const QAItem& q) {
  Json j{{"qa_id", q.qa_id},
         {"image", q.image},
         {"qtype", std::string(to_string(q.qtype))},
         {"template_id", q.template_id},
         {"question", q.question},
         {"answer", q.answer},
         {"answer_class", q.answer_class},
         {"scene_id", q.scene_id},
         {"ego_id", q.ego_id},
         {"timestep", q.timestep},
         {"slots", q.slots}};
  if (q.choices) j["choices"] = {{"A", q.choices->a.to_json()}, {"B", q.choices->b.to_json()}};
  return j;
}

QAItem qa_from_json(const Json& j) {
  try {
    QAItem q;
    q.qa_id = j.at("qa_id").get<std::string>();
    q.image = j.at("image").get<std::string>();
    q.qtype = parse_qtype(j.at("qtype").get<std::string>());
    q.template_id = j.at("template_id").get<std::string>();
    q.question = j.at("question").get<std::string>();
    q.answer = j.at("answer").get<std::string>();
    q.answer_class = j.value("answer_class", q.answer);
    q.scene_id = j.at("scene_id").get<std::string>();
    q.ego_id = j.at("ego_id").get<std::string>();
    q.timestep = j.at("timestep").get<int>();
    if (j.contains("slots")) q.slots = j.at("slots").get<std::map<std::string, std::string>>();
    if (j.contains("choices"))
      q.choices = QAChoices{NormBBox::from_json(j.at("choices").at("A")), NormBBox::from_json(j.at("choices").at("B"))};
    return q;
  } catch (const Json::exception& e) {
    throw ParseError(std::string("qa item: ") + e.what());
  }
}

// ---------------------------------------------------------------- generation

namespace {

/// Per-image data shared by every question about it.
struct ImageContext {
  const Scene& scene;
  const AnnotationRecord& rec;
  const ImageRef& img;
  std::span<const QuestionTemplate> templates;
  std::vector<std::optional<NormBBox>> lane_boxes;  // parallel to scene.map.lanes

  ImageContext(const Scene& s, const AnnotationRecord& r, const ImageRef& i, std::span<const QuestionTemplate> t)
      : scene(s), rec(r), img(i), templates(t) {
    lane_boxes.reserve(s.map.lanes.size());
    for (const auto& l : s.map.lanes) lane_boxes.push_back(lane_bbox(l, i));
  }

  std::optional<NormBBox> box_of(const LaneId& id) const {
    for (std::size_t k = 0; k < scene.map.lanes.size(); ++k)
      if (scene.map.lanes[k].id == id) return lane_boxes[k];
    return std::nullopt;
  }

  std::optional<NormBBox> location_box() const {
    if (!rec.current_lane) return std::nullopt;
    return box_of(*rec.current_lane);
  }

  std::optional<NormBBox> navigation_box() const {
    if (!rec.current_lane) return std::nullopt;
    std::optional<NormBBox> u;
    for (const auto& id : rec.trajectory_lanes) {
      if (auto b = box_of(id)) u = u ? u->merged(*b) : *b;
    }
    return u;
  }

  std::vector<NormBBox> distractors(const NormBBox& correct) const {
    std::vector<NormBBox> out;
    for (const auto& b : lane_boxes)
      if (b && bbox_iou(*b, correct) == 0.0) out.push_back(*b);
    return out;
  }

  bool feasible(QType q) const {
    std::optional<NormBBox> box;
    if (q == QType::Location) box = location_box();
    else if (q == QType::Navigation) box = navigation_box();
    else return true;
    return box && !distractors(*box).empty();
  }
};

void replace_all(std::string& s, std::string_view from, const std::string& to) {
  for (auto pos = s.find(from); pos != std::string::npos; pos = s.find(from, pos + to.size()))
    s.replace(pos, from.size(), to);
}

QAItem build(QType qtype, const ImageContext& ctx, Rng& rng) {
  std::vector<const QuestionTemplate*> pool;
  for (const auto& t : ctx.templates)
    if (t.qtype == qtype) pool.push_back(&t);
  if (pool.empty()) throw ConfigError("no template for question type " + std::string(to_string(qtype)));

  QAItem q;
  q.image = ctx.img.image;
  q.qtype = qtype;
  q.scene_id = ctx.scene.scene_id;
  q.ego_id = ctx.img.ego_id;
  q.timestep = ctx.img.timestep;
  const auto& rec = ctx.rec;

  auto choice_pair = [&](const NormBBox& correct) {
    const auto ds = ctx.distractors(correct);
    if (ds.empty())
      throw NoFeasibleQuestion("no lane box disjoint from the answer box in " + ctx.img.image);
    const NormBBox wrong = ds[rng.index(ds.size())];
    const bool correct_is_a = rng.bernoulli(0.5);
    q.choices = correct_is_a ? QAChoices{correct, wrong} : QAChoices{wrong, correct};
    q.answer = correct_is_a ? "A" : "B";
  };

  switch (qtype) {
    case QType::AreaType:
      q.answer = to_string(rec.area_type);
      break;
    case QType::LaneType:
      q.answer = to_string(rec.lane_type);
      break;
    case QType::Location: {
      const auto box = ctx.location_box();
      if (!box) throw NoFeasibleQuestion("ego has no visible lane in " + ctx.img.image);
      choice_pair(*box);
      break;
    }
    case QType::Navigation: {
      const auto box = ctx.navigation_box();
      if (!box) throw NoFeasibleQuestion("no visible trajectory lanes in " + ctx.img.image);
      q.slots["trajectory_type"] = to_string(rec.trajectory);
      choice_pair(*box);
      break;
    }
    case QType::Existence: {
      const Direction d = kAllDirections[rng.index(4)];
      q.slots["direction"] = to_string(d);
      q.answer = rec.relative_cars[static_cast<std::size_t>(d)].empty() ? "no" : "yes";
      break;
    }
    case QType::Orientation: {
      const Direction d = kAllDirections[rng.index(4)];
      const bool closest = rng.bernoulli(0.5);
      q.slots["direction"] = to_string(d);
      q.slots["rank"] = closest ? "closest" : "farthest";
      const auto& ids = rec.relative_cars[static_cast<std::size_t>(d)];
      if (ids.empty()) {
        q.answer = "none";
      } else {
        const auto& other = ctx.scene.track(closest ? ids.front() : ids.back()).at(rec.timestep);
        const auto& ego = ctx.scene.track(rec.vehicle_id).at(rec.timestep);
        q.answer = to_string(classify_orientation(shortest_arc(ego.yaw, other.yaw)));
      }
      break;
    }
  }
  q.answer_class = q.answer;

  const QuestionTemplate& t = *pool[rng.index(pool.size())];
  q.template_id = t.template_id;
  q.question = t.text;
  if (auto it = q.slots.find("direction"); it != q.slots.end())
    replace_all(q.question, "{direction}", std::string(direction_phrase(parse_direction(it->second))));
  if (auto it = q.slots.find("rank"); it != q.slots.end()) replace_all(q.question, "{rank}", it->second);
  if (auto it = q.slots.find("trajectory_type"); it != q.slots.end())
    replace_all(q.question, "{trajectory_type}",
                std::string(trajectory_phrase(parse_trajectory_category(it->second))));
  if (q.choices) {
    replace_all(q.question, "{bbox_a}", q.choices->a.text());
    replace_all(q.question, "{bbox_b}", q.choices->b.text());
  }
  return q;
}

}  // namespace

QAItem make_question(QType qtype, const Scene& scene, const AnnotationRecord& rec, const ImageRef& img,
                     std::span<const QuestionTemplate> templates, Rng& rng) {
  const ImageContext ctx(scene, rec, img, templates);
  return build(qtype, ctx, rng);
}

std::vector<QAItem> gen_questions(const Scene& scene, std::span<const AnnotationRecord> records,
                                  std::span<const ImageRef> images, std::span<const QuestionTemplate> templates,
                                  const GenConfig& cfg) {
  if (!(cfg.rate > 0) || !std::isfinite(cfg.rate)) throw ConfigError("question rate must be positive");
  std::map<std::pair<std::string, int>, const AnnotationRecord*> index;
  for (const auto& r : records) index[{r.vehicle_id, r.timestep}] = &r;

  const int base = static_cast<int>(std::floor(cfg.rate));
  const double frac = cfg.rate - base;
  std::vector<QAItem> out;
  for (const auto& img : images) {
    const auto it = index.find({img.ego_id, img.timestep});
    if (it == index.end())
      throw UnknownId("no annotation record for " + img.ego_id + " at t=" + std::to_string(img.timestep) + " (" +
                      img.image + ")");
    const ImageContext ctx(scene, *it->second, img, templates);
    Rng rng(derive_seed(cfg.seed, hash_string(img.image)));

    const int k = base + (rng.bernoulli(frac) ? 1 : 0);
    std::vector<QType> feasible;
    for (QType q : kAllQTypes)
      if (ctx.feasible(q)) feasible.push_back(q);
    // every feasible type once before any repeats
    std::vector<QType> order = feasible;
    rng.shuffle(order);
    for (int i = 0; i < k; ++i) {
      const QType q = static_cast<std::size_t>(i) < order.size() ? order[static_cast<std::size_t>(i)]
                                                                  : feasible[rng.index(feasible.size())];
      QAItem item = build(q, ctx, rng);
      item.qa_id = img.image + "#" + std::to_string(i);
      out.push_back(std::move(item));
    }
  }
  return out;
}

// ---------------------------------------------------------------- balance, split, stats

std::vector<QAItem> balance_dataset(std::span<const QAItem> items, double factor, std::uint64_t seed) {
  if (!(factor >= 1.0) || !std::isfinite(factor)) throw ConfigError("balance factor must be >= 1");
  std::map<std::string, std::map<std::string, std::vector<std::size_t>>> groups;
  for (std::size_t i = 0; i < items.size(); ++i)
    groups[std::string(to_string(items[i].qtype))][items[i].answer_class].push_back(i);

  std::vector<char> keep(items.size(), 1);
  for (auto& [qtype, classes] : groups) {
    std::size_t m = SIZE_MAX;
    for (const auto& [cls, idx] : classes) m = std::min(m, idx.size());
    const auto cap = static_cast<std::size_t>(std::ceil(factor * static_cast<double>(m) - 1e-9));
    for (auto& [cls, idx] : classes) {
      if (idx.size() <= cap) continue;
      Rng rng(derive_seed(seed, hash_string(qtype + "/" + cls)));
      rng.shuffle(idx);
      for (std::size_t k = cap; k < idx.size(); ++k) keep[idx[k]] = 0;
    }
  }
  std::vector<QAItem> out;
  for (std::size_t i = 0; i < items.size(); ++i)
    if (keep[i]) out.push_back(items[i]);
  return out;
}

Split split_dataset(std::span<const QAItem> items, double test_fraction, std::uint64_t seed) {
  if (!(test_fraction >= 0.0 && test_fraction < 1.0)) throw ConfigError("test fraction must be in [0, 1)");
  std::vector<std::string> images;
  std::unordered_map<std::string, std::size_t> counts;
  for (const auto& q : items)
    if (counts[q.image]++ == 0) images.push_back(q.image);
  Rng rng(seed);
  rng.shuffle(images);

  const double target = test_fraction * static_cast<double>(items.size());
  double in_test = 0;
  std::set<std::string> test_images;
  for (const auto& img : images) {
    const double with = in_test + static_cast<double>(counts[img]);
    if (std::abs(with - target) < std::abs(in_test - target)) {
      test_images.insert(img);
      in_test = with;
    }
  }
  Split s;
  for (const auto& q : items) (test_images.count(q.image) ? s.test : s.train).push_back(q);
  return s;
}

Json StatsReport::to_json() const {
  return {{"questions", questions},
          {"images", images},
          {"mean_questions_per_image", mean_per_image},
          {"per_qtype", per_qtype},
          {"per_answer_class", per_answer}};
}

StatsReport dataset_stats(std::span<const QAItem> items) {
  StatsReport r;
  std::set<std::string> images;
  for (const auto& q : items) {
    ++r.questions;
    images.insert(q.image);
    const std::string qt(to_string(q.qtype));
    ++r.per_qtype[qt];
    ++r.per_answer[qt][q.answer_class];
  }
  r.images = images.size();
  r.mean_per_image = r.images ? static_cast<double>(r.questions) / static_cast<double>(r.images) : 0.0;
  return r;
}

}  // namespace bevkit
