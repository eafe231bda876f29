#include "scene4d/pipeline/pipeline.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <ctime>
#include <fstream>
#include <iostream>

#include "scene4d/core/error.hpp"
#include "scene4d/core/ply.hpp"
#include "scene4d/core/rng.hpp"
#include "scene4d/core/shapes.hpp"
#include "scene4d/rasterizer/image_io.hpp"
#include "scene4d/rasterizer/render.hpp"

namespace scene4d {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr const char* kCheckpointFormat = "scene4d-checkpoint/1";

// Forwards to a client owned elsewhere.
class BorrowedClient : public ChatClient {
 public:
  explicit BorrowedClient(ChatClient& inner) : inner_(inner) {}
  std::string complete(const ChatRequest& r) override { return inner_.complete(r); }

 private:
  ChatClient& inner_;
};

class NetworkSwitch {
 public:
  explicit NetworkSwitch(bool enabled) : previous_(network_enabled()) { set_network_enabled(enabled); }
  ~NetworkSwitch() { set_network_enabled(previous_); }
  NetworkSwitch(const NetworkSwitch&) = delete;
  NetworkSwitch& operator=(const NetworkSwitch&) = delete;

 private:
  bool previous_;
};

template <typename F>
auto run_stage(const std::string& name, F&& f) -> decltype(f()) {
  std::cerr << "[scene4d] stage " << name << '\n';
  try {
    return f();
  } catch (const StageError&) {
    throw;
  } catch (const std::exception& e) {
    std::cerr << "[scene4d] stage " << name << " failed: " << e.what() << '\n';
    throw StageError(name, e.what());
  }
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw Error("cannot open " + path.string() + " for writing");
  f << text;
}

void write_json(const fs::path& path, const json& j) { write_text(path, j.dump(2) + "\n"); }

std::string utc_stamp() {
  const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y%m%dT%H%M%SZ", &tm);
  return buf;
}

void write_manifest(const fs::path& run_dir, const PipelineConfig& config, const std::string& status,
                    const std::string& failed_stage) {
  json m;
  m["format"] = "scene4d-run/1";
  m["created_utc"] = utc_stamp();
  m["status"] = status;
  if (!failed_stage.empty()) m["failed_stage"] = failed_stage;
  m["seed"] = config.seed ? json(*config.seed) : json(nullptr);
  m["config"] = to_json(config);
  std::vector<std::string> files;
  for (const auto& entry : fs::recursive_directory_iterator(run_dir)) {
    if (entry.is_regular_file() && entry.path().filename() != "manifest.json") {
      files.push_back(fs::relative(entry.path(), run_dir).generic_string());
    }
  }
  std::sort(files.begin(), files.end());
  m["files"] = files;
  write_json(run_dir / "manifest.json", m);
}

std::unique_ptr<ChatClient> make_client(const PipelineConfig& config, ChatClient* override_client,
                                        const fs::path& run_dir) {
  std::unique_ptr<ChatClient> inner;
  if (override_client != nullptr) {
    inner = std::make_unique<BorrowedClient>(*override_client);
  } else if (config.offline) {
    return nullptr;
  } else if (!config.director_transcript.empty()) {
    inner = std::make_unique<ReplayClient>(config.director_transcript);
  } else {
    const char* url = std::getenv("DIRECTOR_API_URL");
    if (url == nullptr || *url == '\0') {
      std::cerr << "[scene4d] DIRECTOR_API_URL not set; using the offline director\n";
      return nullptr;
    }
    inner = std::make_unique<HttpChatClient>(HttpClientSettings::from_environment());
  }
  return std::make_unique<TranscriptClient>(std::move(inner), (run_dir / "transcript.jsonl").string());
}

const EntityAsset* find_asset(const PipelineConfig& config, const std::string& name, std::size_t index) {
  for (const auto& a : config.entities) {
    if (a.name == name) return &a;
  }
  if (index < config.entities.size() && config.entities[index].name.empty()) return &config.entities[index];
  return nullptr;
}

GaussianObject build_object(const PipelineConfig& config, const EntitySpec& entity, std::size_t index,
                            const RngStream& root) {
  static const EntityAsset kDefault;
  const EntityAsset* asset = find_asset(config, entity.name, index);
  if (asset == nullptr) asset = &kDefault;
  RngStream rng = root.split("object").split(static_cast<std::uint64_t>(index));
  GaussianObject obj;
  if (!asset->ply_path.empty()) {
    obj = load_object_from_pointcloud(asset->ply_path, static_cast<std::size_t>(asset->point_count), config.knn_k,
                                      rng, entity.entity_prompt);
  } else {
    RngStream shape_rng = rng.split("points");
    const auto points = procedural_points(asset->shape, static_cast<std::size_t>(asset->point_count), asset->size,
                                          asset->color, shape_rng);
    obj = make_object(points, config.knn_k, rng, entity.entity_prompt);
  }
  obj.object_scale = entity.relative_scale;
  return obj;
}

double world_extent(const GaussianObject& obj) {
  Vec3 lo = Vec3::Constant(std::numeric_limits<double>::infinity());
  Vec3 hi = -lo;
  for (const auto& g : obj.gaussians) {
    lo = lo.cwiseMin(g.center);
    hi = hi.cwiseMax(g.center);
  }
  return obj.gaussians.empty() ? 1.0 : (hi - lo).maxCoeff() * obj.object_scale;
}

json report_json(const CollisionReport& r) {
  json j;
  j["collided"] = r.collided;
  j["first_collision_t"] = r.first_collision_t ? json(*r.first_collision_t) : json(nullptr);
  j["original_t_max"] = r.original_t_max;
  j["truncated_t_max"] = r.truncated_t_max;
  j["requery_recommended"] = r.requery_recommended;
  return j;
}

std::string view_dir_name(double az) {
  char buf[64];
  if (az == std::floor(az) && std::abs(az) < 1e9) {
    std::snprintf(buf, sizeof buf, "view_%03lld", static_cast<long long>(az));
  } else {
    std::snprintf(buf, sizeof buf, "view_%g", az);
  }
  return buf;
}

TurntableSettings turntable_settings(const PipelineConfig& c) {
  TurntableSettings t;
  t.width = c.width;
  t.height = c.height;
  t.radius = c.camera_radius;
  t.elevation_deg = c.view_elevation;
  t.fov = c.camera_fov;
  t.raster.background = c.background;
  t.raster.threads = c.threads;
  return t;
}

// Shared front half of generate and trajectory.
RunResult design_scene(const PipelineConfig& config, ChatClient* override_client, const fs::path& run_dir) {
  RunResult r;
  r.run_dir = run_dir;
  auto client = make_client(config, override_client, run_dir);
  const RngStream root(*config.seed, hash_name("pipeline"));

  r.brief = run_stage("decompose", [&] { return decompose(config.scene_prompt, client.get(), config.director); });
  write_json(run_dir / "brief.json", to_json(r.brief));

  run_stage("objects", [&] {
    r.scene.scene_prompt = config.scene_prompt;
    r.scene.time_grid = make_time_grid(config.sds.frames);
    for (std::size_t i = 0; i < r.brief.entities.size(); ++i) {
      r.scene.objects.push_back(build_object(config, r.brief.entities[i], i, root));
      r.scene.trajectories.push_back(Trajectory::identity());
    }
    return 0;
  });

  run_stage("trajectory", [&] {
    json out;
    out["entities"] = json::array();
    std::size_t anchor = 0;
    for (std::size_t i = 0; i < r.brief.entities.size(); ++i) {
      if (r.brief.entities[i].name == r.brief.anchor_entity) anchor = i;
    }
    const GaussianObject& anchor_obj = r.scene.objects[anchor];
    const auto anchor_centers = anchor_obj.centers();
    const std::vector<std::vector<Vec3>> others{apply_pose(rest_pose(anchor_obj), anchor_centers)};
    for (std::size_t i = 0; i < r.brief.entities.size(); ++i) {
      json e;
      e["name"] = r.brief.entities[i].name;
      if (i == anchor) {
        e["role"] = "anchor";
      } else {
        const TrajectoryProposal proposal =
            propose_trajectory(r.brief, client.get(), config.director, world_extent(anchor_obj));
        const RefineResult refined = refine(proposal, r.brief, r.scene.objects[i], others, client.get(), config.director);
        r.scene.trajectories[i] = refined.trajectory;
        e["role"] = "moving";
        e["proposal"] = to_json(refined.proposal);
        e["seconds_per_unit"] = refined.proposal.duration_seconds;
        e["report"] = report_json(refined.report);
        e["candidates"] = refined.candidates;
      }
      e["trajectory"] = to_json(r.scene.trajectories[i]);
      out["entities"].push_back(e);
    }
    write_json(run_dir / "trajectories.json", out);
    return 0;
  });
  return r;
}

}  // namespace

fs::path make_run_dir(const fs::path& parent) {
  fs::create_directories(parent);
  const std::string base = "run-" + utc_stamp();
  fs::path dir = parent / base;
  for (int i = 1; !fs::create_directory(dir); ++i) dir = parent / (base + "-" + std::to_string(i));
  return dir;
}

RunResult run_trajectory_stage(const PipelineConfig& config, ChatClient* client) {
  validate(config);
  NetworkSwitch net(!config.offline);
  const fs::path run_dir = make_run_dir(config.output_dir);
  std::cerr << "[scene4d] run directory " << run_dir.string() << '\n';
  try {
    RunResult r = design_scene(config, client, run_dir);
    write_manifest(run_dir, config, "ok", "");
    return r;
  } catch (const StageError& e) {
    write_manifest(run_dir, config, "failed", e.stage());
    throw;
  }
}

RunResult run_pipeline(const PipelineConfig& config, ChatClient* client) {
  validate(config);
  NetworkSwitch net(!config.offline);
  const fs::path run_dir = make_run_dir(config.output_dir);
  std::cerr << "[scene4d] run directory " << run_dir.string() << '\n';
  try {
    RunResult r = design_scene(config, client, run_dir);

    run_stage("train", [&] {
      auto image = make_denoiser(config.image_denoiser, Modality::image);
      auto multiview = make_denoiser(config.multiview_denoiser, Modality::multiview);
      auto video = make_denoiser(config.video_denoiser, Modality::video);
      const DenoiserSet set{image.get(), multiview.get(), video.get()};
      const TrainSettings settings = train_settings(config);
      try {
        r.history = train(r.scene, settings, set, *config.seed, [](const LossRecord& rec) {
          if ((rec.iteration + 1) % 10 == 0) {
            std::cerr << "[scene4d] " << rec.stage << " iteration " << rec.iteration + 1 << " reg "
                      << rec.regularization << '\n';
          }
        }).history;
      } catch (const DivergenceError& e) {
        save_checkpoint(r.scene, run_dir / "checkpoint-diverged", config.knn_k);
        write_loss_csv((run_dir / "losses.csv").string(), e.history());
        throw;
      }
      write_loss_csv((run_dir / "losses.csv").string(), r.history);
      return 0;
    });

    run_stage("checkpoint", [&] {
      save_checkpoint(r.scene, run_dir / "checkpoint", config.knn_k);
      return 0;
    });

    run_stage("render", [&] {
      r.frames = write_turntable(r.scene, config.views, r.scene.time_grid, turntable_settings(config), run_dir / "frames");
      return 0;
    });
    write_manifest(run_dir, config, "ok", "");
    return r;
  } catch (const StageError& e) {
    write_manifest(run_dir, config, "failed", e.stage());
    throw;
  }
}

void save_checkpoint(const Scene& scene, const fs::path& dir, int knn_k) {
  fs::create_directories(dir);
  json j;
  j["format"] = kCheckpointFormat;
  j["scene_prompt"] = scene.scene_prompt;
  j["time_grid"] = scene.time_grid;
  j["knn_k"] = knn_k;
  j["objects"] = json::array();
  for (std::size_t i = 0; i < scene.objects.size(); ++i) {
    const GaussianObject& obj = scene.objects[i];
    const std::string stem = "object_" + std::to_string(i);
    write_gaussians((dir / (stem + ".ply")).string(), obj.gaussians);
    obj.deformation.save((dir / (stem + ".s4dnet")).string());
    j["objects"].push_back({{"gaussians", stem + ".ply"},
                            {"deformation", stem + ".s4dnet"},
                            {"canonical_heading", {obj.canonical_heading.x(), obj.canonical_heading.y(),
                                                   obj.canonical_heading.z()}},
                            {"object_scale", obj.object_scale},
                            {"entity_prompt", obj.entity_prompt},
                            {"trajectory", to_json(scene.trajectories.at(i))}});
  }
  write_json(dir / "scene.json", j);
}

Scene load_checkpoint(const fs::path& dir) {
  std::ifstream in(dir / "scene.json");
  if (!in) throw LoadError("no checkpoint at " + dir.string());
  try {
    const json j = json::parse(in);
    if (j.at("format").get<std::string>() != kCheckpointFormat) throw LoadError("unknown checkpoint format");
    Scene scene;
    scene.scene_prompt = j.at("scene_prompt").get<std::string>();
    scene.time_grid = j.at("time_grid").get<std::vector<double>>();
    const int k = j.at("knn_k").get<int>();
    for (const json& o : j.at("objects")) {
      GaussianObject obj;
      obj.gaussians = read_gaussians((dir / o.at("gaussians").get<std::string>()).string());
      obj.deformation = DeformationNet::load((dir / o.at("deformation").get<std::string>()).string());
      const auto h = o.at("canonical_heading").get<std::vector<double>>();
      if (h.size() != 3) throw LoadError("canonical_heading must hold 3 numbers");
      obj.canonical_heading = Vec3(h[0], h[1], h[2]);
      obj.object_scale = o.at("object_scale").get<double>();
      obj.entity_prompt = o.at("entity_prompt").get<std::string>();
      rebuild_knn(obj, k);
      validate(obj);
      scene.objects.push_back(std::move(obj));
      scene.trajectories.push_back(trajectory_from_json(o.at("trajectory")));
    }
    validate(scene);
    return scene;
  } catch (const LoadError&) {
    throw;
  } catch (const std::exception& e) {
    throw LoadError("corrupt checkpoint " + dir.string() + ": " + e.what());
  }
}

std::vector<TurntableImage> render_turntable(const Scene& scene, const std::vector<double>& views,
                                             const std::vector<double>& timesteps, const TurntableSettings& s) {
  for (double t : timesteps) {
    if (!(t >= 0.0 && t <= 1.0)) throw DomainError("timestep outside [0, 1]");
  }
  std::vector<TurntableImage> out;
  for (double az : views) {
    const Camera cam = Camera::orbit(az, s.elevation_deg, s.radius, Vec3::Zero(), s.fov, s.width, s.height);
    for (double t : timesteps) out.push_back({az, t, render_scene(scene, cam, t, RenderMode::joint(), s.raster)});
  }
  return out;
}

std::vector<fs::path> write_turntable(const Scene& scene, const std::vector<double>& views,
                                      const std::vector<double>& timesteps, const TurntableSettings& settings,
                                      const fs::path& out_dir) {
  std::vector<fs::path> paths;
  const auto images = render_turntable(scene, views, timesteps, settings);
  for (std::size_t i = 0; i < images.size(); ++i) {
    const fs::path dir = out_dir / view_dir_name(images[i].azimuth);
    fs::create_directories(dir);
    char name[32];
    std::snprintf(name, sizeof name, "frame_%02zu.png", timesteps.empty() ? 0 : i % timesteps.size());
    paths.push_back(dir / name);
    write_png(paths.back().string(), images[i].image);
  }
  return paths;
}

BenchReport benchmark_render(const Scene& scene, int width, int height, int n_frames, const TurntableSettings& s) {
  if (width <= 0 || height <= 0) throw ContractError("benchmark resolution must be positive");
  BenchReport report;
  report.width = width;
  report.height = height;
  report.n_frames = std::max(0, n_frames);
  for (const auto& o : scene.objects) report.gaussians += o.gaussians.size();
  if (report.n_frames == 0) return report;

  const Camera cam = Camera::orbit(0.0, s.elevation_deg, s.radius, Vec3::Zero(), s.fov, width, height);
  const auto& grid = scene.time_grid;
  render_scene(scene, cam, grid.empty() ? 0.0 : grid.front(), RenderMode::joint(), s.raster);
  const auto start = std::chrono::steady_clock::now();
  for (int i = 0; i < report.n_frames; ++i) {
    const double t = grid.empty() ? 0.0 : grid[static_cast<std::size_t>(i) % grid.size()];
    render_scene(scene, cam, t, RenderMode::joint(), s.raster);
  }
  report.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  report.fps = report.n_frames / std::max(report.seconds, 1e-12);
  return report;
}

json to_json(const BenchReport& r) {
  json j;
  j["width"] = r.width;
  j["height"] = r.height;
  j["n_frames"] = r.n_frames;
  j["gaussians"] = r.gaussians;
  j["seconds"] = r.seconds;
  j["fps"] = r.fps ? json(*r.fps) : json(nullptr);
  j["reference_fps"] = r.reference_fps;
  j["reference_resolution"] = r.reference_resolution;
  return j;
}

}  // namespace scene4d
