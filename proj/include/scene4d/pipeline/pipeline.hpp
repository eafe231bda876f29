#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "scene4d/core/scene.hpp"
#include "scene4d/pipeline/config.hpp"
#include "scene4d/rasterizer/rasterizer.hpp"

namespace scene4d {

// A stage failed; `stage` names it.
class StageError : public Error {
 public:
  StageError(std::string stage, const std::string& what) : Error(stage + ": " + what), stage_(std::move(stage)) {}
  const std::string& stage() const { return stage_; }

 private:
  std::string stage_;
};

struct RunResult {
  std::filesystem::path run_dir;
  SceneBrief brief;
  Scene scene;
  std::vector<LossRecord> history;
  std::vector<std::filesystem::path> frames;
};

// Fresh directory under `parent` named run-<UTC timestamp>, with a numeric
// suffix when the name is taken.
std::filesystem::path make_run_dir(const std::filesystem::path& parent);

// Decompose, build objects, design trajectories, train, checkpoint, render.
// Throws ConfigError before any work and StageError once stages run; partial
// artifacts stay on disk. `client` overrides the configured chat client.
RunResult run_pipeline(const PipelineConfig& config, ChatClient* client = nullptr);

// Stages up to trajectory refinement; writes brief.json and trajectories.json.
RunResult run_trajectory_stage(const PipelineConfig& config, ChatClient* client = nullptr);

void save_checkpoint(const Scene& scene, const std::filesystem::path& dir, int knn_k);
// Throws LoadError for a missing or corrupt checkpoint.
Scene load_checkpoint(const std::filesystem::path& dir);

struct TurntableSettings {
  int width = 576;
  int height = 320;
  double radius = 6.0;
  double elevation_deg = 15.0;
  double fov = 0.8;
  RasterSettings raster;
};

struct TurntableImage {
  double azimuth = 0.0;
  double t = 0.0;
  RenderOutput image;
};

// One image per (view, timestep), views outer. Throws DomainError for a
// timestep outside [0, 1].
std::vector<TurntableImage> render_turntable(const Scene& scene, const std::vector<double>& views,
                                             const std::vector<double>& timesteps, const TurntableSettings& settings);

// Writes frames/view_<az>/frame_<i>.png and returns the paths.
std::vector<std::filesystem::path> write_turntable(const Scene& scene, const std::vector<double>& views,
                                                   const std::vector<double>& timesteps,
                                                   const TurntableSettings& settings,
                                                   const std::filesystem::path& out_dir);

inline constexpr double kReferenceFps = 70.0;  // published figure at 320 x 576

struct BenchReport {
  int width = 0;
  int height = 0;
  int n_frames = 0;
  std::size_t gaussians = 0;
  double seconds = 0.0;
  std::optional<double> fps;  // empty when nothing was measured
  double reference_fps = kReferenceFps;
  std::string reference_resolution = "320x576";
};

// Joint renders over the time grid after one warm-up frame.
BenchReport benchmark_render(const Scene& scene, int width, int height, int n_frames,
                             const TurntableSettings& settings = {});
nlohmann::json to_json(const BenchReport& report);

}  // namespace scene4d
