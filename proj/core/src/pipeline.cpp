#include "scenforge/pipeline.hpp"

#include <filesystem>
#include <stdexcept>

#include "json.hpp"

namespace scenforge::pipeline {

namespace fs = std::filesystem;

namespace {

void write_ppm_atomic(const bev::BevRaster& raster, const std::string& path) {
  const std::string tmp = path + ".tmp";
  bev::write_ppm(raster, tmp);
  std::error_code ec;
  fs::rename(tmp, path, ec);
  if (ec) throw std::runtime_error("cannot move " + tmp + " into place: " + ec.message());
}

post::CameraRig load_rig(const std::string& path) {
  if (path.empty()) return post::default_rig();
  const post::CameraRig rig = post::rig_from_json(read_file(path));
  post::validate_rig(rig);
  return rig;
}

mv::SizeTable load_size_table(const std::string& path) {
  if (path.empty()) return mv::SizeTable::defaults();
  return mv::size_table_from_json(read_file(path));
}

}  // namespace

RunResult run_scenario(const dsl::ScenarioSpec& spec_in, const PipelineConfig& config) {
  RunResult result;
  result.spec = spec_in;
  if (config.seed_override) result.spec.seed = *config.seed_override;

  try {
    result.trajs = traj::generate_scene(result.spec, config.kernel);
  } catch (const std::exception& ex) {
    throw PipelineError("trajectory-kernel", ex.what());
  }

  try {
    Rng map_rng(derive_seed(result.spec.seed, "hdmap"));
    result.map = hdmap::synthesize(result.trajs, config.synth, map_rng);
    const std::vector<hdmap::Violation> violations = hdmap::validate(result.map, result.trajs);
    if (!violations.empty()) {
      std::string msg = "synthesized map failed its consistency checks:";
      for (const auto& v : violations) msg += " [" + v.rule + "] " + v.detail + ";";
      throw std::runtime_error(msg);
    }
  } catch (const std::exception& ex) {
    throw PipelineError("hdmap-synth", ex.what());
  }

  bev::BevRaster traj_raster, map_raster;
  try {
    traj_raster = bev::rasterize_trajectories(result.trajs, config.raster, &result.warnings);
    map_raster = bev::rasterize_hdmap(result.map, config.raster);
  } catch (const std::exception& ex) {
    throw PipelineError("bev-raster", ex.what());
  }

  try {
    const post::CameraRig rig = load_rig(config.rig_path);
    mv::BundleOptions opt;
    opt.clip_frames = config.clip_frames;
    opt.clip_start = config.clip_start;
    opt.size_table = load_size_table(config.size_table_path);
    opt.raster = config.raster;
    result.bundle =
        mv::build_bundle(result.spec, {result.trajs, config.kernel.t_inter}, result.map, rig,
                         config.task, opt);
  } catch (const std::exception& ex) {
    throw PipelineError("conditioner", ex.what());
  }

  try {
    fs::create_directories(config.out_dir);
    auto emit = [&](const std::string& name, const std::string& bytes) {
      write_file_atomic(config.out_dir + "/" + name, bytes);
      result.artifacts.push_back(name);
    };
    emit("scenario.scn", dsl::print_canonical(result.spec));
    emit("trajectories.json", traj::trajectories_to_json(result.trajs, config.kernel.t_inter));
    emit("hdmap.json", hdmap::map_to_json(result.map));
    write_ppm_atomic(traj_raster, config.out_dir + "/t_b.ppm");
    result.artifacts.push_back("t_b.ppm");
    emit("t_b.json", bev::raster_meta_json(traj_raster));
    write_ppm_atomic(map_raster, config.out_dir + "/h_b.ppm");
    result.artifacts.push_back("h_b.ppm");
    emit("h_b.json", bev::raster_meta_json(map_raster));
    emit("render.svg", bev::scene_svg(result.trajs, result.map, config.raster));
    mv::write_bundle(result.bundle, config.out_dir + "/bundle");
    result.artifacts.push_back("bundle");
  } catch (const std::exception& ex) {
    throw PipelineError("artifacts", ex.what());
  }

  return result;
}

std::vector<std::string> validate_tree(const std::string& dir) {
  std::vector<std::string> problems;
  auto problem = [&](const std::string& msg) { problems.push_back(msg); };

  // scenario.scn: canonical fixpoint
  dsl::ScenarioSpec spec;
  bool have_spec = false;
  try {
    const std::string text = read_file(dir + "/scenario.scn");
    const dsl::ParseResult parsed = dsl::parse(text);
    if (!parsed.ok()) {
      std::string msg = "scenario.scn does not parse:";
      for (const auto& d : parsed.diagnostics) msg += " " + dsl::to_string(d) + ";";
      problem(msg);
    } else {
      spec = *parsed.spec;
      have_spec = true;
      if (dsl::print_canonical(spec) != text)
        problem("scenario.scn is not in canonical form (round trip changed the bytes)");
    }
  } catch (const std::exception& ex) {
    problem(std::string("scenario.scn: ") + ex.what());
  }

  // trajectories.json: byte round trip + ego presence
  traj::TrajectorySet set;
  bool have_trajs = false;
  try {
    const std::string text = read_file(dir + "/trajectories.json");
    set = traj::trajectories_from_json(text);
    have_trajs = true;
    if (traj::trajectories_to_json(set.trajs, set.t_inter) != text)
      problem("trajectories.json round trip changed the bytes");
    bool has_ego = false;
    for (const auto& t : set.trajs) has_ego = has_ego || t.agent_id == "ego";
    if (!has_ego) problem("trajectories.json has no 'ego' trajectory");
  } catch (const std::exception& ex) {
    problem(std::string("trajectories.json: ") + ex.what());
  }

  // hdmap.json: byte round trip
  hdmap::HdMap map;
  bool have_map = false;
  try {
    const std::string text = read_file(dir + "/hdmap.json");
    map = hdmap::map_from_json(text);
    have_map = true;
    if (hdmap::map_to_json(map) != text) problem("hdmap.json round trip changed the bytes");
  } catch (const std::exception& ex) {
    problem(std::string("hdmap.json: ") + ex.what());
  }

  // rasters + geo sidecars
  for (const char* stem : {"t_b", "h_b"}) {
    const std::string base = std::string(stem);
    try {
      const bev::BevRaster raster = bev::read_ppm(dir + "/" + base + ".ppm");
      const nlohmann::json meta = nlohmann::json::parse(read_file(dir + "/" + base + ".json"));
      if (!meta.contains("schema") || meta["schema"] != "scenforge.bev_meta/1")
        problem(base + ".json has an unknown schema");
      else if (meta.at("width").get<int>() != raster.width ||
               meta.at("height").get<int>() != raster.height)
        problem(base + ".json dimensions disagree with " + base + ".ppm");
      else if (!(meta.at("meters_per_pixel").get<double>() > 0.0))
        problem(base + ".json has a non-positive meters_per_pixel");
    } catch (const std::exception& ex) {
      problem(base + ": " + ex.what());
    }
  }

  // render.svg
  try {
    const std::string svg = read_file(dir + "/render.svg");
    if (svg.find("<svg") == std::string::npos)
      problem("render.svg does not look like an SVG document");
  } catch (const std::exception& ex) {
    problem(std::string("render.svg: ") + ex.what());
  }

  // bundle/
  try {
    const mv::ConditionBundle bundle = mv::read_bundle(dir + "/bundle");
    const int frames = bundle.mask.frames, views = bundle.mask.views;
    if (bundle.mask != mv::make_mask(bundle.task, frames, views))
      problem("bundle mask does not match its declared task pattern");
    if (static_cast<int>(bundle.timestamps.size()) != frames)
      problem("bundle timestamp count disagrees with the frame count");
    if (views > 0 && bundle.hdmap.width % views != 0)
      problem("bundle unified width is not divisible by the view count");
    if (bundle.hdmap.frames != frames || bundle.boxes.frames != frames)
      problem("bundle image frame counts disagree with the mask");
    if (have_spec) {
      if (bundle.seed != spec.seed) problem("bundle seed disagrees with scenario.scn");
      if (bundle.scenario_name != spec.name) problem("bundle scenario name disagrees with scenario.scn");
      const std::vector<std::string> env(spec.environment.begin(), spec.environment.end());
      if (bundle.environment != env) problem("bundle environment tags disagree with scenario.scn");
    }
  } catch (const std::exception& ex) {
    problem(std::string("bundle: ") + ex.what());
  }

  // cross-file: the stored map must still be consistent with the stored
  // trajectories
  if (have_map && have_trajs) {
    for (const auto& v : hdmap::validate(map, set.trajs))
      problem("map/trajectory consistency: [" + v.rule + "] " + v.detail);
  }

  return problems;
}

}  // namespace scenforge::pipeline
