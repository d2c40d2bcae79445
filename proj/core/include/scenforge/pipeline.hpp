#pragma once
// End-to-end scenario pipeline: scenario spec in, artifact tree out.  Stage
// order is trajectory kernel → map synthesis (with consistency gate) → BEV
// rasters → multi-view condition bundle → artifact tree on disk.  Failures
// surface as PipelineError carrying the stage name.

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "scenforge/bev_raster.hpp"
#include "scenforge/conditioner.hpp"
#include "scenforge/dsl.hpp"
#include "scenforge/hdmap.hpp"
#include "scenforge/hdmap_post.hpp"
#include "scenforge/trajectory.hpp"

namespace scenforge::pipeline {

class PipelineError : public std::runtime_error {
 public:
  PipelineError(std::string stage, const std::string& message)
      : std::runtime_error(stage + ": " + message), stage_(std::move(stage)) {}
  const std::string& stage() const { return stage_; }

 private:
  std::string stage_;
};

struct PipelineConfig {
  traj::KernelParams kernel;
  bev::RasterParams raster;
  hdmap::SynthOptions synth;
  std::string rig_path;         // empty → built-in six-camera rig
  std::string size_table_path;  // empty → built-in category sizes
  mv::Task task = mv::Task::kFullGeneration;
  std::string out_dir = "out";
  bool offline = false;  // consumed by the CLI's prompt path
  std::optional<std::uint64_t> seed_override;
  int clip_start = 0;
  int clip_frames = 8;
};

struct RunResult {
  dsl::ScenarioSpec spec;  // after seed override
  std::vector<traj::Trajectory> trajs;
  hdmap::HdMap map;
  mv::ConditionBundle bundle;
  std::vector<std::string> warnings;   // non-fatal notes (e.g. off-raster agents)
  std::vector<std::string> artifacts;  // paths written, relative to out_dir
};

// Runs every stage and writes the artifact tree:
//   scenario.scn        canonical scenario text
//   trajectories.json   agent trajectories
//   hdmap.json          vector map
//   t_b.ppm / t_b.json  trajectory BEV raster + geo sidecar
//   h_b.ppm / h_b.json  map BEV raster + geo sidecar
//   render.svg          debug vector rendering
//   bundle/             multi-view condition bundle
// All files are written atomically (temp + rename).
RunResult run_scenario(const dsl::ScenarioSpec& spec, const PipelineConfig& config);

// Re-reads an artifact tree and re-validates everything in it: canonical
// round trips byte for byte, schema checks, raster/sidecar agreement, bundle
// integrity, and map↔trajectory consistency.  Returns problem descriptions;
// empty means the tree is sound.
std::vector<std::string> validate_tree(const std::string& dir);

}  // namespace scenforge::pipeline
