#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "scene4d/director/director.hpp"
#include "scene4d/distillation/trainer.hpp"

namespace scene4d {

// Static source of one entity: a PLY point cloud when ply_path is set,
// otherwise a procedural shape.
struct EntityAsset {
  std::string name;  // matched against the brief's entity names
  std::string ply_path;
  std::string shape = "sphere";
  double size = 0.5;
  Vec3 color = Vec3(0.8, 0.5, 0.3);
  int point_count = 2000;
};

struct PipelineConfig {
  std::string scene_prompt;
  std::vector<EntityAsset> entities;

  SdsConfig sds;  // sds.frames is the frame count
  RegWeights reg;
  DirectorConfig director;
  DenoiserSpec image_denoiser;
  DenoiserSpec multiview_denoiser;
  DenoiserSpec video_denoiser;

  int width = 576;
  int height = 320;
  int knn_k = kDefaultNeighborCount;
  double camera_radius = 6.0;
  double camera_fov = 0.8;
  double view_elevation = 15.0;
  std::vector<double> views = {0.0, 90.0, 180.0, 270.0};
  Vec3 background = Vec3::Zero();
  int threads = 1;

  std::string output_dir = "runs";
  std::optional<std::uint64_t> seed;
  bool offline = false;
  std::string director_transcript;  // replay this transcript instead of calling the endpoint
};

// Throws ConfigError with the offending key.
PipelineConfig config_from_json(const nlohmann::json& j);
PipelineConfig load_config(const std::string& path);
nlohmann::json to_json(const PipelineConfig& c);

// Positive resolution, a seed, valid SDS and regularizer settings.
void validate(const PipelineConfig& c);

TrainSettings train_settings(const PipelineConfig& c);

}  // namespace scene4d
