#include "scene4d/pipeline/config.hpp"

#include <filesystem>
#include <fstream>

#include "scene4d/core/error.hpp"

namespace scene4d {

namespace {

using nlohmann::json;

// Reads j[key] into out when present; type mismatches become ConfigError.
template <typename T>
void read(const json& j, const char* key, T& out, const std::string& where) {
  if (!j.contains(key)) return;
  try {
    out = j.at(key).get<T>();
  } catch (const json::exception&) {
    throw ConfigError("config key '" + where + key + "' has the wrong type");
  }
}

void read_vec3(const json& j, const char* key, Vec3& out, const std::string& where) {
  if (!j.contains(key)) return;
  std::vector<double> v;
  read(j, key, v, where);
  if (v.size() != 3) throw ConfigError("config key '" + where + key + "' must hold 3 numbers");
  out = Vec3(v[0], v[1], v[2]);
}

void only_keys(const json& j, std::initializer_list<const char*> allowed, const std::string& where) {
  if (!j.is_object()) throw ConfigError("config section '" + where + "' must be an object");
  for (auto it = j.begin(); it != j.end(); ++it) {
    if (std::none_of(allowed.begin(), allowed.end(), [&](const char* k) { return it.key() == k; })) {
      throw ConfigError("unknown config key '" + where + it.key() + "'");
    }
  }
}

const json& section(const json& j, const char* key) {
  static const json empty = json::object();
  return j.contains(key) ? j.at(key) : empty;
}

json vec_json(const Vec3& v) { return json::array({v.x(), v.y(), v.z()}); }

DenoiserSpec read_denoiser(const json& j, const std::string& where) {
  DenoiserSpec d;
  only_keys(j, {"name", "path"}, where);
  read(j, "name", d.name, where);
  read(j, "path", d.path, where);
  return d;
}

}  // namespace

PipelineConfig config_from_json(const json& j) {
  PipelineConfig c;
  only_keys(j, {"scene_prompt", "seed", "offline", "output_dir", "resolution", "frames", "knn_k", "threads", "camera",
                "background", "entities", "sds", "regularization", "director", "denoisers"},
            "");
  read(j, "scene_prompt", c.scene_prompt, "");
  if (j.contains("seed") && !j.at("seed").is_null()) {
    if (!j.at("seed").is_number_unsigned()) throw ConfigError("config key 'seed' must be a non-negative integer");
    c.seed = j.at("seed").get<std::uint64_t>();
  }
  read(j, "offline", c.offline, "");
  read(j, "output_dir", c.output_dir, "");
  read(j, "frames", c.sds.frames, "");
  read(j, "knn_k", c.knn_k, "");
  read(j, "threads", c.threads, "");
  read_vec3(j, "background", c.background, "");

  const json& res = section(j, "resolution");
  only_keys(res, {"width", "height"}, "resolution.");
  read(res, "width", c.width, "resolution.");
  read(res, "height", c.height, "resolution.");

  const json& cam = section(j, "camera");
  only_keys(cam, {"radius", "fov", "view_elevation", "views"}, "camera.");
  read(cam, "radius", c.camera_radius, "camera.");
  read(cam, "fov", c.camera_fov, "camera.");
  read(cam, "view_elevation", c.view_elevation, "camera.");
  read(cam, "views", c.views, "camera.");

  if (j.contains("entities")) {
    if (!j.at("entities").is_array()) throw ConfigError("config key 'entities' must be an array");
    for (const json& e : j.at("entities")) {
      EntityAsset a;
      only_keys(e, {"name", "ply", "shape", "size", "color", "point_count"}, "entities[].");
      read(e, "name", a.name, "entities[].");
      read(e, "ply", a.ply_path, "entities[].");
      read(e, "shape", a.shape, "entities[].");
      read(e, "size", a.size, "entities[].");
      read_vec3(e, "color", a.color, "entities[].");
      read(e, "point_count", a.point_count, "entities[].");
      c.entities.push_back(a);
    }
  }

  const json& s = section(j, "sds");
  only_keys(s, {"t_min", "t_max", "weight", "omega_sd_static", "omega_mv", "omega_sd_dynamic", "omega_video",
                "p_single", "image_frames", "iterations", "learning_rate", "static_iterations",
                "static_learning_rate", "static_views", "static_train_centers"},
            "sds.");
  read(s, "t_min", c.sds.t_min, "sds.");
  read(s, "t_max", c.sds.t_max, "sds.");
  read(s, "weight", c.sds.weight_constant, "sds.");
  read(s, "omega_sd_static", c.sds.omega_sd_static, "sds.");
  read(s, "omega_mv", c.sds.omega_mv, "sds.");
  read(s, "omega_sd_dynamic", c.sds.omega_sd_dynamic, "sds.");
  read(s, "omega_video", c.sds.omega_video, "sds.");
  read(s, "p_single", c.sds.p_single, "sds.");
  read(s, "image_frames", c.sds.image_frames, "sds.");
  read(s, "iterations", c.sds.iterations, "sds.");
  read(s, "learning_rate", c.sds.learning_rate, "sds.");
  read(s, "static_iterations", c.sds.static_iterations, "sds.");
  read(s, "static_learning_rate", c.sds.static_learning_rate, "sds.");
  read(s, "static_views", c.sds.static_views, "sds.");
  read(s, "static_train_centers", c.sds.static_train_centers, "sds.");

  const json& r = section(j, "regularization");
  only_keys(r, {"omega1", "omega2", "contact"}, "regularization.");
  read(r, "omega1", c.reg.omega1, "regularization.");
  read(r, "omega2", c.reg.omega2, "regularization.");
  read(r, "contact", c.reg.contact, "regularization.");

  const json& d = section(j, "director");
  only_keys(d, {"retries", "max_requeries", "collision_samples", "min_fraction", "transcript"}, "director.");
  read(d, "retries", c.director.retries, "director.");
  read(d, "max_requeries", c.director.max_requeries, "director.");
  read(d, "collision_samples", c.director.collision.n_samples, "director.");
  read(d, "min_fraction", c.director.collision.min_fraction, "director.");
  read(d, "transcript", c.director_transcript, "director.");

  const json& dn = section(j, "denoisers");
  only_keys(dn, {"image", "multiview", "video"}, "denoisers.");
  if (dn.contains("image")) c.image_denoiser = read_denoiser(dn.at("image"), "denoisers.image.");
  if (dn.contains("multiview")) c.multiview_denoiser = read_denoiser(dn.at("multiview"), "denoisers.multiview.");
  if (dn.contains("video")) c.video_denoiser = read_denoiser(dn.at("video"), "denoisers.video.");
  return c;
}

PipelineConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config " + path);
  json j;
  try {
    j = json::parse(in);
  } catch (const json::exception& e) {
    throw ConfigError(std::string("config is not valid JSON: ") + e.what());
  }
  PipelineConfig c = config_from_json(j);
  // Relative asset paths are relative to the config file.
  const auto base = std::filesystem::absolute(path).parent_path();
  auto resolve = [&](std::string& p) {
    if (!p.empty() && std::filesystem::path(p).is_relative()) p = (base / p).lexically_normal().string();
  };
  for (auto& e : c.entities) resolve(e.ply_path);
  resolve(c.image_denoiser.path);
  resolve(c.multiview_denoiser.path);
  resolve(c.video_denoiser.path);
  resolve(c.director_transcript);
  return c;
}

json to_json(const PipelineConfig& c) {
  json j;
  j["scene_prompt"] = c.scene_prompt;
  j["seed"] = c.seed ? json(*c.seed) : json(nullptr);
  j["offline"] = c.offline;
  j["output_dir"] = c.output_dir;
  j["resolution"] = {{"width", c.width}, {"height", c.height}};
  j["frames"] = c.sds.frames;
  j["knn_k"] = c.knn_k;
  j["threads"] = c.threads;
  j["camera"] = {{"radius", c.camera_radius}, {"fov", c.camera_fov}, {"view_elevation", c.view_elevation},
                 {"views", c.views}};
  j["background"] = vec_json(c.background);
  j["entities"] = json::array();
  for (const auto& e : c.entities) {
    j["entities"].push_back({{"name", e.name},
                             {"ply", e.ply_path},
                             {"shape", e.shape},
                             {"size", e.size},
                             {"color", vec_json(e.color)},
                             {"point_count", e.point_count}});
  }
  j["sds"] = {{"t_min", c.sds.t_min},
              {"t_max", c.sds.t_max},
              {"weight", c.sds.weight_constant},
              {"omega_sd_static", c.sds.omega_sd_static},
              {"omega_mv", c.sds.omega_mv},
              {"omega_sd_dynamic", c.sds.omega_sd_dynamic},
              {"omega_video", c.sds.omega_video},
              {"p_single", c.sds.p_single},
              {"image_frames", c.sds.image_frames},
              {"iterations", c.sds.iterations},
              {"learning_rate", c.sds.learning_rate},
              {"static_iterations", c.sds.static_iterations},
              {"static_learning_rate", c.sds.static_learning_rate},
              {"static_views", c.sds.static_views},
              {"static_train_centers", c.sds.static_train_centers}};
  j["regularization"] = {{"omega1", c.reg.omega1}, {"omega2", c.reg.omega2}, {"contact", c.reg.contact}};
  j["director"] = {{"retries", c.director.retries},
                   {"max_requeries", c.director.max_requeries},
                   {"collision_samples", c.director.collision.n_samples},
                   {"min_fraction", c.director.collision.min_fraction},
                   {"transcript", c.director_transcript}};
  auto dn = [](const DenoiserSpec& d) { return json{{"name", d.name}, {"path", d.path}}; };
  j["denoisers"] = {{"image", dn(c.image_denoiser)}, {"multiview", dn(c.multiview_denoiser)},
                    {"video", dn(c.video_denoiser)}};
  return j;
}

void validate(const PipelineConfig& c) {
  if (c.width <= 0 || c.height <= 0) throw ConfigError("resolution must be positive");
  if (!c.seed) throw ConfigError("a seed is required");
  if (c.scene_prompt.empty()) throw ConfigError("scene_prompt is empty");
  if (c.knn_k < 1) throw ConfigError("knn_k must be positive");
  if (c.threads < 1) throw ConfigError("threads must be positive");
  if (!(c.camera_radius > 0.0)) throw ConfigError("camera radius must be positive");
  if (!(c.camera_fov > 0.0 && c.camera_fov < 3.14159)) throw ConfigError("camera fov must lie in (0, pi)");
  if (c.director.retries < 1 || c.director.max_requeries < 0) throw ConfigError("director budgets out of range");
  if (c.director.collision.n_samples < 2) throw ConfigError("collision_samples must be at least 2");
  for (const auto& e : c.entities) {
    if (e.point_count < 2) throw ConfigError("entity point_count must be at least 2");
    if (e.ply_path.empty() && !(e.size > 0.0)) throw ConfigError("entity size must be positive");
    if (e.ply_path.empty() && e.shape != "sphere" && e.shape != "box" && e.shape != "torus") {
      throw ConfigError("unknown procedural shape '" + e.shape + "'");
    }
  }
  validate(c.sds);
  try {
    validate(c.reg);
  } catch (const ContractError& e) {
    throw ConfigError(e.what());
  }
}

TrainSettings train_settings(const PipelineConfig& c) {
  TrainSettings s;
  s.sds = c.sds;
  s.reg = c.reg;
  s.width = c.width;
  s.height = c.height;
  s.camera.radius = c.camera_radius;
  s.camera.vertical_fov = c.camera_fov;
  s.raster.background = c.background;
  s.raster.threads = c.threads;
  s.knn_k = c.knn_k;
  return s;
}

}  // namespace scene4d
