#include <cstdint>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "scene4d/core/error.hpp"
#include "scene4d/core/rng.hpp"
#include "scene4d/core/shapes.hpp"
#include "scene4d/pipeline/pipeline.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitConfig = 2;
constexpr int kExitStage = 3;

struct CommonFlags {
  std::string config;
  bool offline = false;
  std::optional<std::uint64_t> seed;
  std::string out;
};

void add_common(CLI::App* cmd, CommonFlags& f, bool config_required) {
  auto* opt = cmd->add_option("--config", f.config, "pipeline configuration (JSON)");
  if (config_required) opt->required();
  cmd->add_flag("--offline", f.offline, "never contact the chat endpoint");
  cmd->add_option("--seed", f.seed, "random seed (overrides the config)");
  cmd->add_option("--out", f.out, "output directory");
}

scene4d::PipelineConfig resolve_config(const CommonFlags& f) {
  scene4d::PipelineConfig c = f.config.empty() ? scene4d::PipelineConfig{} : scene4d::load_config(f.config);
  if (f.offline) c.offline = true;
  if (f.seed) c.seed = *f.seed;
  if (!f.out.empty()) c.output_dir = f.out;
  return c;
}

scene4d::Scene synthetic_scene(std::size_t gaussians, std::uint64_t seed) {
  scene4d::RngStream rng(seed);
  scene4d::RngStream pts = rng.split("points");
  auto points = scene4d::procedural_points("sphere", gaussians, 1.0, scene4d::Vec3(0.7, 0.6, 0.4), pts);
  scene4d::Scene scene;
  scene.objects.push_back(scene4d::make_object(points, scene4d::kDefaultNeighborCount, rng, "sphere"));
  scene.trajectories.push_back(scene4d::Trajectory::identity());
  return scene;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Compositional 4D Gaussian scene engine"};
  app.require_subcommand(1);

  CommonFlags gen_flags, traj_flags, render_flags, bench_flags;
  auto* generate = app.add_subcommand("generate", "run the full pipeline");
  add_common(generate, gen_flags, true);
  auto* trajectory = app.add_subcommand("trajectory", "scene decomposition and trajectory design only");
  add_common(trajectory, traj_flags, true);

  auto* render = app.add_subcommand("render", "render turntable views of a checkpoint");
  add_common(render, render_flags, false);
  std::string render_checkpoint;
  std::vector<double> render_views, render_times;
  render->add_option("--checkpoint", render_checkpoint, "checkpoint directory")->required();
  render->add_option("--views", render_views, "azimuths in degrees");
  render->add_option("--times", render_times, "scene times in [0, 1]");

  auto* bench = app.add_subcommand("bench", "measure render throughput");
  add_common(bench, bench_flags, false);
  std::string bench_checkpoint;
  int bench_frames = 20;
  std::size_t bench_gaussians = 20000;
  int bench_width = 576, bench_height = 320;
  bench->add_option("--checkpoint", bench_checkpoint, "checkpoint directory (default: synthetic sphere)");
  bench->add_option("--frames", bench_frames, "timed frames");
  bench->add_option("--gaussians", bench_gaussians, "size of the synthetic scene");
  bench->add_option("--width", bench_width, "image width");
  bench->add_option("--height", bench_height, "image height");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitConfig;
  }

  try {
    if (*generate) {
      const auto result = scene4d::run_pipeline(resolve_config(gen_flags));
      std::cout << result.run_dir.string() << '\n';
    } else if (*trajectory) {
      const auto result = scene4d::run_trajectory_stage(resolve_config(traj_flags));
      std::cout << result.run_dir.string() << '\n';
    } else if (*render) {
      const scene4d::PipelineConfig c = resolve_config(render_flags);
      const scene4d::Scene scene = scene4d::load_checkpoint(render_checkpoint);
      scene4d::TurntableSettings s;
      s.width = c.width;
      s.height = c.height;
      s.radius = c.camera_radius;
      s.elevation_deg = c.view_elevation;
      s.fov = c.camera_fov;
      s.raster.background = c.background;
      s.raster.threads = c.threads;
      const auto views = render->count("--views") ? render_views : c.views;
      const auto times = render->count("--times") ? render_times : scene.time_grid;
      const std::filesystem::path out = render_flags.out.empty() ? "frames" : render_flags.out;
      const auto paths = scene4d::write_turntable(scene, views, times, s, out);
      std::cout << paths.size() << " images written to " << out.string() << '\n';
    } else if (*bench) {
      const scene4d::PipelineConfig c = resolve_config(bench_flags);
      const scene4d::Scene scene = bench_checkpoint.empty()
                                       ? synthetic_scene(bench_gaussians, c.seed.value_or(0))
                                       : scene4d::load_checkpoint(bench_checkpoint);
      scene4d::TurntableSettings s;
      s.radius = c.camera_radius;
      s.raster.threads = c.threads;
      const auto report = scene4d::benchmark_render(scene, bench_width, bench_height, bench_frames, s);
      std::cout << scene4d::to_json(report).dump(2) << '\n';
    }
  } catch (const scene4d::ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const scene4d::StageError& e) {
    std::cerr << "stage '" << e.stage() << "' failed: " << e.what() << '\n';
    return kExitStage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitStage;
  }
  return kExitOk;
}
