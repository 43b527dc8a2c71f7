#include "bevkit/cli.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <atomic>
#include <cstdlib>
#include <exception>
#include <filesystem>
#include <iostream>
#include <map>
#include <mutex>
#include <set>
#include <thread>

#include "bevkit/annotator.hpp"
#include "bevkit/bevrender.hpp"
#include "bevkit/errors.hpp"
#include "bevkit/eval.hpp"
#include "bevkit/json_io.hpp"
#include "bevkit/motion.hpp"
#include "bevkit/rng.hpp"
#include "bevkit/scene_io.hpp"
#include "bevkit/synth.hpp"
#include "bevkit/vqagen.hpp"

namespace fs = std::filesystem;

namespace bevkit::cli {

namespace {

void log(const std::string& msg) { std::cerr << "bevkit: " << msg << '\n'; }

/// Runs fn(0..n-1) on up to `jobs` threads; rethrows the first failure.
template <class F>
void parallel_for(std::size_t n, int jobs, F&& fn) {
  if (jobs <= 1 || n <= 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr err;
  std::mutex m;
  {
    std::vector<std::jthread> pool;
    const auto workers = std::min<std::size_t>(static_cast<std::size_t>(jobs), n);
    for (std::size_t w = 0; w < workers; ++w)
      pool.emplace_back([&] {
        for (std::size_t i; (i = next++) < n;) {
          try {
            fn(i);
          } catch (...) {
            std::lock_guard lock(m);
            if (!err) err = std::current_exception();
            next = n;
          }
        }
      });
  }
  if (err) std::rethrow_exception(err);
}

void require_exists(const fs::path& p) {
  if (!fs::exists(p)) throw IoError("no such file or directory: " + p.string());
}

void ensure_dir(const fs::path& p) {
  std::error_code ec;
  fs::create_directories(p, ec);
  if (ec) throw IoError("cannot create " + p.string() + ": " + ec.message());
}

/// A scene file, or every *.json directly under a directory except ground-truth files.
std::vector<fs::path> scene_files(const fs::path& p) {
  require_exists(p);
  if (!fs::is_directory(p)) return {p};
  std::vector<fs::path> out;
  for (const auto& e : fs::directory_iterator(p)) {
    const auto name = e.path().filename().string();
    if (e.is_regular_file() && e.path().extension() == ".json" && !name.ends_with(".truth.json"))
      out.push_back(e.path());
  }
  std::sort(out.begin(), out.end());
  if (out.empty()) throw IoError("no scene files in " + p.string());
  return out;
}

/// Loaded and ordered by scene id.
std::vector<Scene> load_scenes(const fs::path& p, int jobs) {
  const auto files = scene_files(p);
  std::vector<Scene> scenes(files.size());
  parallel_for(files.size(), jobs, [&](std::size_t i) { scenes[i] = load_scene(files[i]); });
  std::sort(scenes.begin(), scenes.end(), [](const Scene& a, const Scene& b) { return a.scene_id < b.scene_id; });
  for (std::size_t i = 1; i < scenes.size(); ++i)
    if (scenes[i].scene_id == scenes[i - 1].scene_id)
      throw ValidationError("scene_id", "duplicate scene id " + scenes[i].scene_id);
  return scenes;
}

const Scene& scene_by_id(const std::vector<Scene>& scenes, const std::string& id) {
  auto it = std::lower_bound(scenes.begin(), scenes.end(), id,
                             [](const Scene& s, const std::string& v) { return s.scene_id < v; });
  if (it == scenes.end() || it->scene_id != id) throw UnknownId("unknown scene " + id);
  return *it;
}

/// Writes JSON text to `out`, or stdout when empty.
void emit_json(const Json& j, const std::string& out) {
  const auto text = canonical_dump(j) + "\n";
  if (out.empty()) std::cout << text << std::flush;
  else write_text_file(out, text);
}

std::vector<QAItem> read_qa(const fs::path& p) {
  require_exists(p);
  std::vector<QAItem> items;
  for (const auto& row : read_jsonl(p)) items.push_back(qa_from_json(row));
  return items;
}

void write_qa(const fs::path& p, std::span<const QAItem> items) {
  std::vector<Json> rows;
  rows.reserve(items.size());
  for (const auto& q : items) rows.push_back(qa_to_json(q));
  write_jsonl(p, rows);
}

Json state_row(const VehicleState& s) { return Json::array({s.position.x, s.position.y, s.speed, s.yaw}); }

VehicleState state_from_row(const Json& r) {
  if (!r.is_array() || r.size() != 4) throw ParseError("trajectory state must be [x, y, v, yaw]");
  return {{r[0].get<double>(), r[1].get<double>()}, r[2].get<double>(), r[3].get<double>()};
}

/// Render selection: `per_scene` distinct (vehicle, timestep) pairs with at
/// least `min_future` recorded steps ahead, or all of them when 0.
std::vector<std::pair<std::string, int>> pick_views(const Scene& scene, int per_scene, int min_future,
                                                    std::uint64_t seed) {
  std::vector<std::pair<std::string, int>> all;
  std::vector<const VehicleTrack*> eligible;
  for (const auto& tr : scene.tracks) {
    if (tr.last_timestep() - min_future < tr.first_timestep) continue;
    eligible.push_back(&tr);
    for (int t = tr.first_timestep; t <= tr.last_timestep() - min_future; ++t) all.emplace_back(tr.vehicle_id, t);
  }
  if (per_scene <= 0 || static_cast<std::size_t>(per_scene) >= all.size()) return all;
  Rng rng(derive_seed(seed, hash_string(scene.scene_id)));
  rng.shuffle(eligible);
  std::set<std::pair<std::string, int>> chosen;
  std::vector<std::pair<std::string, int>> out;
  for (std::size_t i = 0; out.size() < static_cast<std::size_t>(per_scene); ++i) {
    const VehicleTrack& tr = *eligible[i % eligible.size()];
    const int span = tr.last_timestep() - min_future - tr.first_timestep + 1;
    const std::pair<std::string, int> v{tr.vehicle_id, tr.first_timestep + static_cast<int>(rng.below(span))};
    if (chosen.insert(v).second) out.push_back(v);
  }
  return out;
}

std::string image_name(const std::string& scene_id, const std::string& ego, int t) {
  return scene_id + "_" + ego + "_" + std::to_string(t);
}

fs::path default_templates() {
  if (const char* d = std::getenv("BEVKIT_DATA_DIR")) return fs::path(d) / "templates.json";
#ifdef BEVKIT_DEFAULT_DATA_DIR
  return fs::path(BEVKIT_DEFAULT_DATA_DIR) / "templates.json";
#else
  return "data/templates.json";
#endif
}

// ---- subcommands ----

struct SynthArgs {
  std::string layout = "all";
  int n = 8;
  int count = 1;
  int horizon = 60;
  std::uint64_t seed = 0;
  std::string out, truth, out_dir;
};

void cmd_synth(const SynthArgs& a) {
  if (a.out.empty() == a.out_dir.empty()) throw ConfigError("synth needs exactly one of -o or --out-dir");
  auto spec_for = [&](int i) {
    SynthSpec spec;
    spec.layout = a.layout == "all" ? kAllLayouts[static_cast<std::size_t>(i) % kAllLayouts.size()]
                                    : parse_layout(a.layout);
    spec.n_vehicles = a.out.empty() ? std::min(a.n, layout_capacity(spec.layout)) : a.n;
    spec.horizon = a.horizon;
    return spec;
  };
  if (!a.out.empty()) {
    if (a.layout == "all") throw ConfigError("single-scene synth needs --layout");
    const auto sr = synth_scene(spec_for(0), a.seed);
    save_scene(sr.scene, a.out);
    if (!a.truth.empty()) write_text_file(a.truth, canonical_dump(ground_truth_to_json(sr.truth)) + "\n");
    log("wrote scene " + sr.scene.scene_id);
    return;
  }
  ensure_dir(a.out_dir);
  const fs::path truth_dir = a.truth.empty() ? fs::path(a.out_dir) : fs::path(a.truth);
  ensure_dir(truth_dir);
  for (int i = 0; i < a.count; ++i) {
    auto spec = spec_for(i);
    char id[64];
    std::snprintf(id, sizeof id, "%s_%05d", std::string(to_string(spec.layout)).c_str(), i);
    spec.scene_id = id;
    const auto sr = synth_scene(spec, derive_seed(a.seed, static_cast<std::uint64_t>(i)));
    save_scene(sr.scene, fs::path(a.out_dir) / (spec.scene_id + ".json"));
    write_text_file(truth_dir / (spec.scene_id + ".truth.json"), canonical_dump(ground_truth_to_json(sr.truth)) + "\n");
  }
  log("wrote " + std::to_string(a.count) + " scenes to " + a.out_dir);
}

struct AnnotateArgs {
  std::string scenes, out, thresholds;
  int jobs = 1;
};

void cmd_annotate(const AnnotateArgs& a) {
  AnnotatorConfig cfg;
  if (!a.thresholds.empty()) {
    require_exists(a.thresholds);
    cfg = annotator_config_from_json(parse_json(read_text_file(a.thresholds), a.thresholds));
  }
  const auto scenes = load_scenes(a.scenes, a.jobs);
  std::vector<std::vector<AnnotationRecord>> recs(scenes.size());
  std::vector<std::size_t> skipped(scenes.size());
  parallel_for(scenes.size(), a.jobs, [&](std::size_t i) { recs[i] = annotate_scene(scenes[i], cfg, &skipped[i]); });
  std::vector<Json> rows;
  std::size_t total_skipped = 0;
  for (std::size_t i = 0; i < scenes.size(); ++i) {
    for (const auto& r : recs[i]) rows.push_back(record_to_json(r));
    total_skipped += skipped[i];
  }
  write_jsonl(a.out, rows);
  log("annotated " + std::to_string(scenes.size()) + " scenes: " + std::to_string(rows.size()) + " records, " +
      std::to_string(total_skipped) + " states skipped for short horizon");
}

struct RenderArgs {
  std::string scenes, out_dir;
  double extent = 50.0, resolution = 0.25;
  int per_scene = 5;
  int min_future = 10;
  std::uint64_t seed = 0;
  int jobs = 1;
};

void cmd_render(const RenderArgs& a) {
  RenderConfig cfg;
  cfg.extent = a.extent;
  cfg.resolution = a.resolution;
  (void)cfg.side();
  const auto scenes = load_scenes(a.scenes, a.jobs);
  ensure_dir(a.out_dir);
  std::vector<std::vector<Json>> index(scenes.size());
  parallel_for(scenes.size(), a.jobs, [&](std::size_t i) {
    for (const auto& [ego, t] : pick_views(scenes[i], a.per_scene, a.min_future, a.seed)) {
      const auto raster = render_bev(scenes[i], ego, t, cfg);
      const auto base = image_name(scenes[i].scene_id, ego, t);
      write_png(raster, fs::path(a.out_dir) / (base + ".png"));
      write_text_file(fs::path(a.out_dir) / (base + ".json"), canonical_dump(sidecar_json(raster)) + "\n");
      index[i].push_back(ImageRef::from_raster(raster, base + ".png").to_json());
    }
  });
  std::vector<Json> rows;
  for (auto& v : index) rows.insert(rows.end(), v.begin(), v.end());
  write_jsonl(fs::path(a.out_dir) / "index.jsonl", rows);
  log("rendered " + std::to_string(rows.size()) + " images from " + std::to_string(scenes.size()) + " scenes");
}

struct PerturbArgs {
  std::string scenes, out_dir, log_path;
  std::string mode = "combined";
  double rate = 0.1, max_shift = 0.2;
  std::uint64_t seed = 0;
  int jobs = 1;
};

void cmd_perturb(const PerturbArgs& a) {
  if (a.rate < 0 || a.rate > 1) throw ConfigError("--rate must be in [0, 1]");
  const auto scenes = load_scenes(a.scenes, a.jobs);
  ensure_dir(a.out_dir);
  std::vector<Json> logs(scenes.size());
  parallel_for(scenes.size(), a.jobs, [&](std::size_t i) {
    const auto& s = scenes[i];
    const auto seed = derive_seed(a.seed, hash_string(s.scene_id));
    PerturbLog pl;
    Scene out;
    if (a.mode == "vehicle") out = perturb_vehicles(s, a.rate, a.max_shift, seed, &pl);
    else if (a.mode == "lane") out = perturb_lanes(s, a.rate, seed, &pl);
    else out = perturb_combined(s, a.rate, seed, a.max_shift, &pl);
    save_scene(out, fs::path(a.out_dir) / (s.scene_id + ".json"));
    logs[i] = {{"scene_id", s.scene_id},
               {"removed_vehicles", pl.removed_vehicles},
               {"shifted_vehicles", pl.shifted_vehicles},
               {"hidden_boundaries", pl.hidden_boundaries},
               {"relabeled_lanes", pl.relabeled_lanes}};
  });
  if (!a.log_path.empty()) write_jsonl(a.log_path, logs);
  log("perturbed " + std::to_string(scenes.size()) + " scenes (" + a.mode + ")");
}

struct GenqaArgs {
  std::string scenes, annotations, images, out, templates;
  double rate = 5.44;
  std::uint64_t seed = 0;
  int jobs = 1;
};

void cmd_genqa(const GenqaArgs& a) {
  const fs::path tpath = a.templates.empty() ? default_templates() : fs::path(a.templates);
  require_exists(tpath);
  require_exists(a.annotations);
  require_exists(a.images);
  const auto templates = load_templates(tpath);
  const auto scenes = load_scenes(a.scenes, a.jobs);

  std::map<std::string, std::vector<AnnotationRecord>> recs;
  for (const auto& row : read_jsonl(a.annotations)) {
    auto r = record_from_json(row);
    recs[r.scene_id].push_back(std::move(r));
  }
  std::map<std::string, std::vector<ImageRef>> imgs;
  for (const auto& row : read_jsonl(a.images)) {
    auto r = ImageRef::from_json(row);
    (void)scene_by_id(scenes, r.scene_id);
    imgs[r.scene_id].push_back(std::move(r));
  }
  std::vector<std::vector<QAItem>> out(scenes.size());
  parallel_for(scenes.size(), a.jobs, [&](std::size_t i) {
    const auto& s = scenes[i];
    const auto im = imgs.find(s.scene_id);
    if (im == imgs.end()) return;
    const auto rc = recs.find(s.scene_id);
    const std::vector<AnnotationRecord> none;
    out[i] = gen_questions(s, rc == recs.end() ? none : rc->second, im->second, templates, {a.rate, a.seed});
  });
  std::vector<QAItem> all;
  for (auto& v : out) all.insert(all.end(), std::make_move_iterator(v.begin()), std::make_move_iterator(v.end()));
  write_qa(a.out, all);
  log("generated " + std::to_string(all.size()) + " questions");
}

struct BalanceArgs {
  std::string in, out;
  double factor = 3.0;
  std::uint64_t seed = 0;
};

void cmd_balance(const BalanceArgs& a) {
  const auto items = read_qa(a.in);
  const auto kept = balance_dataset(items, a.factor, a.seed);
  write_qa(a.out, kept);
  log("kept " + std::to_string(kept.size()) + " of " + std::to_string(items.size()) + " questions");
}

struct SplitArgs {
  std::string in, train, test;
  double fraction = 0.157;
  std::uint64_t seed = 0;
};

void cmd_split(const SplitArgs& a) {
  const auto items = read_qa(a.in);
  const auto sp = split_dataset(items, a.fraction, a.seed);
  write_qa(a.train, sp.train);
  write_qa(a.test, sp.test);
  log("train " + std::to_string(sp.train.size()) + ", test " + std::to_string(sp.test.size()));
}

struct StatsArgs {
  std::string in, out;
};

void cmd_stats(const StatsArgs& a) { emit_json(dataset_stats(read_qa(a.in)).to_json(), a.out); }

struct RolloutArgs {
  std::string scenes, out;
  std::string nav = "gt";
  int k = 5, t0 = 0, horizon = 50;
  bool replay = false;
  std::uint64_t seed = 0;
  int jobs = 1;
};

void cmd_rollout(const RolloutArgs& a) {
  if (a.k < 1) throw ConfigError("--k must be >= 1");
  if (a.horizon < 1) throw ConfigError("--horizon must be >= 1");
  const auto scenes = load_scenes(a.scenes, a.jobs);
  const NavMode mode = a.nav == "gt" ? NavMode::GroundTruth : NavMode::None;
  std::vector<std::vector<Json>> rows(scenes.size());
  parallel_for(scenes.size(), a.jobs, [&](std::size_t i) {
    const auto& s = scenes[i];
    for (const auto& tr : s.tracks) {
      if (!tr.has(a.t0) || !tr.has(a.t0 + a.horizon)) continue;
      std::vector<std::vector<VehicleState>> samples;
      if (a.replay) {
        samples.assign(static_cast<std::size_t>(a.k),
                       std::vector<VehicleState>(&tr.at(a.t0), &tr.at(a.t0 + a.horizon) + 1));
      } else {
        samples = plan_samples(s, tr.vehicle_id, a.t0, a.horizon, a.k, mode, derive_seed(a.seed, hash_string(s.scene_id)));
      }
      Json js = Json::array();
      for (const auto& smp : samples) {
        Json states = Json::array();
        for (const auto& st : smp) states.push_back(state_row(st));
        js.push_back(std::move(states));
      }
      rows[i].push_back({{"scene_id", s.scene_id},
                         {"vehicle_id", tr.vehicle_id},
                         {"t0", a.t0},
                         {"horizon", a.horizon},
                         {"nav", a.replay ? "replay" : a.nav},
                         {"samples", std::move(js)}});
    }
  });
  std::vector<Json> all;
  for (auto& v : rows) all.insert(all.end(), v.begin(), v.end());
  write_jsonl(a.out, all);
  log("planned " + std::to_string(all.size()) + " vehicles");
}

struct EvalQaArgs {
  std::string dataset, predictions, out;
};

void cmd_eval_qa(const EvalQaArgs& a) {
  const auto items = read_qa(a.dataset);
  require_exists(a.predictions);
  std::vector<Prediction> preds;
  for (const auto& row : read_jsonl(a.predictions)) preds.push_back(prediction_from_json(row));
  emit_json(qa_accuracy(items, preds).to_json(), a.out);
}

struct EvalTrajArgs {
  std::string scenes, rollouts, out;
  int jobs = 1;
};

void cmd_eval_traj(const EvalTrajArgs& a) {
  require_exists(a.rollouts);
  const auto scenes = load_scenes(a.scenes, a.jobs);
  MetricReport rep;
  std::map<std::string, Scenario> scenarios;
  for (const auto& row : read_jsonl(a.rollouts)) {
    std::string sid, vid;
    int t0 = 0, horizon = 0;
    std::vector<std::vector<VehicleState>> samples;
    try {
      sid = row.at("scene_id").get<std::string>();
      vid = row.at("vehicle_id").get<std::string>();
      t0 = row.at("t0").get<int>();
      horizon = row.at("horizon").get<int>();
      for (const auto& smp : row.at("samples")) {
        samples.emplace_back();
        for (const auto& st : smp) samples.back().push_back(state_from_row(st));
      }
    } catch (const Json::exception& e) {
      throw ParseError(std::string("rollout row: ") + e.what());
    }
    const Scene& s = scene_by_id(scenes, sid);
    const auto& tr = s.track(vid);
    if (!tr.has(t0) || !tr.has(t0 + horizon))
      throw LengthMismatch("vehicle " + vid + " has no recorded states over the rollout window");
    const std::vector<VehicleState> gt(&tr.at(t0), &tr.at(t0 + horizon) + 1);
    const auto m = displacement_metrics(gt, samples);
    rep.displacement.mADE += m.mADE;
    rep.displacement.minADE += m.minADE;
    rep.displacement.mFDE += m.mFDE;
    rep.displacement.minFDE += m.minFDE;
    ++rep.trajectories;
    rep.samples_per_trajectory = samples.size();
    auto& sc = scenarios[sid];
    sc.scene = &s;
    sc.rollouts[vid] = samples.front();
  }
  if (rep.trajectories == 0) throw EmptyInput("no rollouts to evaluate");
  const auto n = static_cast<double>(rep.trajectories);
  rep.displacement.mADE /= n;
  rep.displacement.minADE /= n;
  rep.displacement.mFDE /= n;
  rep.displacement.minFDE /= n;
  std::vector<Scenario> list;
  for (auto& [id, sc] : scenarios) list.push_back(std::move(sc));
  rep.scr = scenario_collision_rate(list);
  rep.scenarios = list.size();
  emit_json(rep.to_json(), a.out);
}

struct ExportArgs {
  std::string scenes, out_dir;
  int t0 = 10, horizon = 50, history = 10, nav_lanes = 4, nav_points = 20;
  int jobs = 1;
};

void cmd_export_cond(const ExportArgs& a) {
  const auto scenes = load_scenes(a.scenes, a.jobs);
  MotionConfig cfg;
  cfg.history = a.history;
  cfg.nav_lanes = a.nav_lanes;
  cfg.nav_points = a.nav_points;
  ensure_dir(a.out_dir);
  parallel_for(scenes.size(), a.jobs, [&](std::size_t i) {
    const auto& s = scenes[i];
    std::map<std::string, std::string> desc;
    for (const auto& tr : s.tracks) {
      if (!tr.has(a.t0) || !tr.has(a.t0 + 1)) continue;
      const int end = std::min(tr.last_timestep(), a.t0 + a.horizon);
      const std::vector<VehicleState> fut(&tr.at(a.t0), &tr.at(end) + 1);
      desc[tr.vehicle_id] = describe_trajectory(fut, s.dt);
    }
    export_condition(assemble_condition(s, a.t0, desc, cfg, a.horizon), fs::path(a.out_dir) / s.scene_id);
  });
  log("exported conditions for " + std::to_string(scenes.size()) + " scenes");
}

CLI::Option* add_jobs(CLI::App* sub, int& jobs) {
  return sub->add_option("--jobs,-j", jobs, "worker threads (output order is unaffected)")
      ->check(CLI::PositiveNumber);
}

}  // namespace

int run(int argc, const char* const* argv) {
  CLI::App app{"BEV traffic-scene VQA and trajectory toolkit", "bevkit"};
  app.require_subcommand(1);
  app.set_config("--config", "", "defaults file (TOML); also read from $BEVKIT_CONFIG")->envname("BEVKIT_CONFIG");

  const std::vector<std::string> layouts{"all", "straight", "four_way", "t_junction", "roundabout", "parking_lot"};

  SynthArgs sy;
  auto* synth = app.add_subcommand("synth", "generate synthetic scenes with ground truth");
  synth->add_option("--layout", sy.layout, "layout name, or 'all' to cycle in batch mode")->check(CLI::IsMember(layouts));
  synth->add_option("--n", sy.n, "vehicles per scene (batch mode caps at layout capacity)")->check(CLI::PositiveNumber);
  synth->add_option("--count", sy.count, "scenes in batch mode")->check(CLI::PositiveNumber);
  synth->add_option("--horizon", sy.horizon, "steps per track");
  synth->add_option("--seed", sy.seed)->required();
  synth->add_option("-o,--out", sy.out, "single scene file");
  synth->add_option("--out-dir", sy.out_dir, "batch output directory");
  synth->add_option("--truth", sy.truth, "ground-truth file (single) or directory (batch)");

  AnnotateArgs an;
  auto* annotate = app.add_subcommand("annotate", "label every (vehicle, timestep) as JSONL");
  annotate->add_option("--scenes", an.scenes, "scene file or directory")->required();
  annotate->add_option("-o,--out", an.out)->required();
  annotate->add_option("--thresholds", an.thresholds, "annotator thresholds JSON");
  add_jobs(annotate, an.jobs);

  RenderArgs rd;
  auto* render = app.add_subcommand("render", "rasterize BEV images with sidecars and index.jsonl");
  render->add_option("--scenes", rd.scenes)->required();
  render->add_option("--out-dir", rd.out_dir)->required();
  render->add_option("--extent", rd.extent, "half-width in meters")->check(CLI::PositiveNumber);
  render->add_option("--resolution", rd.resolution, "meters per pixel")->check(CLI::PositiveNumber);
  render->add_option("--per-scene", rd.per_scene, "views per scene, 0 for all")->check(CLI::NonNegativeNumber);
  render->add_option("--min-future", rd.min_future, "steps a view must have ahead")->check(CLI::NonNegativeNumber);
  render->add_option("--seed", rd.seed)->required();
  add_jobs(render, rd.jobs);

  PerturbArgs pt;
  auto* perturb = app.add_subcommand("perturb", "apply vehicle, lane or combined noise");
  perturb->add_option("--scenes", pt.scenes)->required();
  perturb->add_option("--out-dir", pt.out_dir)->required();
  perturb->add_option("--mode", pt.mode)->check(CLI::IsMember({"vehicle", "lane", "combined"}));
  perturb->add_option("--rate", pt.rate);
  perturb->add_option("--max-shift", pt.max_shift, "meters")->check(CLI::NonNegativeNumber);
  perturb->add_option("--log", pt.log_path, "per-scene JSONL log of what changed");
  perturb->add_option("--seed", pt.seed)->required();
  add_jobs(perturb, pt.jobs);

  GenqaArgs gq;
  auto* genqa = app.add_subcommand("genqa", "synthesize questions for rendered images");
  genqa->add_option("--scenes", gq.scenes)->required();
  genqa->add_option("--annotations", gq.annotations)->required();
  genqa->add_option("--images", gq.images, "index.jsonl from render")->required();
  genqa->add_option("-o,--out", gq.out)->required();
  genqa->add_option("--templates", gq.templates, "templates JSON (default: $BEVKIT_DATA_DIR/templates.json)");
  genqa->add_option("--rate", gq.rate, "mean questions per image")->check(CLI::PositiveNumber);
  genqa->add_option("--seed", gq.seed)->required();
  add_jobs(genqa, gq.jobs);

  BalanceArgs bl;
  auto* balance = app.add_subcommand("balance", "undersample majority answer classes");
  balance->add_option("-i,--in", bl.in)->required();
  balance->add_option("-o,--out", bl.out)->required();
  balance->add_option("--factor", bl.factor);
  balance->add_option("--seed", bl.seed)->required();

  SplitArgs sp;
  auto* split = app.add_subcommand("split", "image-disjoint train/test split");
  split->add_option("-i,--in", sp.in)->required();
  split->add_option("--train", sp.train)->required();
  split->add_option("--test", sp.test)->required();
  split->add_option("--fraction", sp.fraction, "target test share");
  split->add_option("--seed", sp.seed)->required();

  StatsArgs st;
  auto* stats = app.add_subcommand("stats", "dataset counts as JSON");
  stats->add_option("-i,--in", st.in)->required();
  stats->add_option("-o,--out", st.out, "default: stdout");

  RolloutArgs ro;
  auto* roll = app.add_subcommand("rollout", "plan and integrate K futures per vehicle");
  roll->add_option("--scenes", ro.scenes)->required();
  roll->add_option("-o,--out", ro.out)->required();
  roll->add_option("--k", ro.k, "samples per vehicle");
  roll->add_option("--nav", ro.nav)->check(CLI::IsMember({"gt", "none"}));
  roll->add_option("--t0", ro.t0)->check(CLI::NonNegativeNumber);
  roll->add_option("--horizon", ro.horizon);
  roll->add_flag("--replay", ro.replay, "emit the recorded future as every sample");
  roll->add_option("--seed", ro.seed)->required();
  add_jobs(roll, ro.jobs);

  EvalQaArgs eq;
  auto* evalqa = app.add_subcommand("eval-qa", "per-type top-1 accuracy");
  evalqa->add_option("--dataset", eq.dataset)->required();
  evalqa->add_option("--predictions", eq.predictions, "JSONL of {qa_id, answer}")->required();
  evalqa->add_option("-o,--out", eq.out, "default: stdout");

  EvalTrajArgs et;
  auto* evaltraj = app.add_subcommand("eval-traj", "displacement metrics and scenario collision rate");
  evaltraj->add_option("--scenes", et.scenes)->required();
  evaltraj->add_option("--rollouts", et.rollouts)->required();
  evaltraj->add_option("-o,--out", et.out, "default: stdout");
  add_jobs(evaltraj, et.jobs);

  ExportArgs ex;
  auto* exportc = app.add_subcommand("export-cond", "write condition tensors per scene");
  exportc->add_option("--scenes", ex.scenes)->required();
  exportc->add_option("--out-dir", ex.out_dir)->required();
  exportc->add_option("--t0", ex.t0)->check(CLI::NonNegativeNumber);
  exportc->add_option("--horizon", ex.horizon)->check(CLI::PositiveNumber);
  exportc->add_option("--history", ex.history)->check(CLI::PositiveNumber);
  exportc->add_option("--nav-lanes", ex.nav_lanes)->check(CLI::PositiveNumber);
  exportc->add_option("--nav-points", ex.nav_points)->check(CLI::Range(2, 10000));
  add_jobs(exportc, ex.jobs);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::FileError& e) {
    log(e.what());
    return kExitIo;
  } catch (const CLI::ParseError& e) {
    log(e.what());
    const auto subs = app.get_subcommands();
    std::cerr << (subs.empty() ? app.help() : subs.front()->help());
    return kExitUsage;
  }

  try {
    if (*synth) cmd_synth(sy);
    else if (*annotate) cmd_annotate(an);
    else if (*render) cmd_render(rd);
    else if (*perturb) cmd_perturb(pt);
    else if (*genqa) cmd_genqa(gq);
    else if (*balance) cmd_balance(bl);
    else if (*split) cmd_split(sp);
    else if (*stats) cmd_stats(st);
    else if (*roll) cmd_rollout(ro);
    else if (*evalqa) cmd_eval_qa(eq);
    else if (*evaltraj) cmd_eval_traj(et);
    else if (*exportc) cmd_export_cond(ex);
  } catch (const IoError& e) {
    log(std::string("I/O error: ") + e.what());
    return kExitIo;
  } catch (const Error& e) {
    log(std::string("error: ") + e.what());
    return kExitValidation;
  } catch (const std::filesystem::filesystem_error& e) {
    log(std::string("I/O error: ") + e.what());
    return kExitIo;
  }
  return kExitOk;
}

int run(const std::vector<std::string>& args) {
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  return run(static_cast<int>(argv.size()), argv.data());
}

}  // namespace bevkit::cli
