#include "scene4d/distillation/trainer.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numeric>

#include "scene4d/core/rng.hpp"

namespace scene4d {

namespace {

bool all_finite(std::span<const double> v) {
  return std::all_of(v.begin(), v.end(), [](double x) { return std::isfinite(x); });
}

double norm_of(std::span<const double> v) {
  double s = 0.0;
  for (double x : v) s += x * x;
  return std::sqrt(s);
}

Denoiser& require(Denoiser* d, const char* what) {
  if (d == nullptr) throw ContractError(std::string("missing ") + what + " denoiser");
  return *d;
}

// k distinct indices out of [0, n), in draw order.
std::vector<int> choose_frames(RngStream& rng, int n, int k) {
  std::vector<int> pool(static_cast<std::size_t>(n));
  std::iota(pool.begin(), pool.end(), 0);
  for (int i = 0; i < k; ++i) {
    const int j = i + static_cast<int>(rng.below(static_cast<std::uint64_t>(n - i)));
    std::swap(pool[static_cast<std::size_t>(i)], pool[static_cast<std::size_t>(j)]);
  }
  pool.resize(static_cast<std::size_t>(k));
  return pool;
}

std::string mode_label(const RenderMode& m) {
  return m.is_single() ? "single:" + std::to_string(m.object_index) : "joint";
}

}  // namespace

LossRecord static_sds_step(GaussianObject& obj, std::span<const Camera> views, const DenoiserSet& denoisers,
                           const SdsConfig& config, const RasterSettings& raster, Adam& optimizer, RngStream& rng) {
  if (views.empty()) throw ContractError("static step needs at least one view");
  const std::size_t n = obj.gaussians.size();
  LossRecord rec;
  rec.stage = "static";
  rec.mode = "single";

  const Pose pose = rest_pose(obj);
  const PlacedObject placed = place_with_deltas(obj, 0, pose, std::vector<Vec3>(n, Vec3::Zero()));
  const GaussianObject* objects[] = {&obj};
  std::vector<SceneTrace> traces;
  std::vector<RenderOutput> images;
  for (const Camera& cam : views) {
    traces.push_back(rasterize_placed(objects, {&placed, 1}, cam, raster));
    images.push_back(traces.back().output);
  }
  const Frames clip = Frames::from_images(images);
  std::vector<Frames> grads(views.size(), Frames(1, clip.height, clip.width));

  if (config.omega_sd_static > 0.0) {
    Denoiser& d = require(denoisers.image, "image");
    RngStream r = rng.split("image");
    const SdsSample s = sds_gradient(Frames::from_image(images[0]), d, d.embed(obj.entity_prompt), r, config);
    rec.t_image = s.t;
    rec.sds_image = s.residual;
    for (std::size_t i = 0; i < s.grad.data.size(); ++i) grads[0].data[i] += config.omega_sd_static * s.grad.data[i];
  }
  if (config.omega_mv > 0.0) {
    Denoiser& d = require(denoisers.multiview, "multiview");
    RngStream r = rng.split("multiview");
    const SdsSample s = sds_gradient(clip, d, d.embed(obj.entity_prompt), r, config);
    rec.t_sequence = s.t;
    rec.sds_sequence = s.residual;
    for (std::size_t v = 0; v < views.size(); ++v) {
      auto src = s.grad.frame(static_cast<int>(v));
      for (std::size_t i = 0; i < src.size(); ++i) grads[v].data[i] += config.omega_mv * src[i];
    }
  }

  // Layout: colors (3n), opacities (n), centers (3n).
  std::vector<double> g(7 * n, 0.0);
  const Mat3 lin_t = pose.linear().transpose();
  for (std::size_t v = 0; v < views.size(); ++v) {
    const auto og = scene_backward({&placed, 1}, traces[v], views[v], raster, grads[v].data);
    for (std::size_t i = 0; i < n; ++i) {
      for (int c = 0; c < 3; ++c) g[3 * i + c] += og[0].color[i][c];
      g[3 * n + i] += og[0].opacity[i];
      if (config.static_train_centers) {
        const Vec3 gc = lin_t * og[0].world_center[i];
        for (int c = 0; c < 3; ++c) g[4 * n + 3 * i + c] += gc[c];
      }
    }
  }
  rec.grad_norm = norm_of(g);
  if (!all_finite(g) || !std::isfinite(rec.sds_image) || !std::isfinite(rec.sds_sequence)) {
    throw DivergenceError("static stage gradient is not finite", {});
  }

  std::vector<double> p(7 * n);
  for (std::size_t i = 0; i < n; ++i) {
    const Gaussian3D& gs = obj.gaussians[i];
    for (int c = 0; c < 3; ++c) {
      p[3 * i + c] = gs.color[c];
      p[4 * n + 3 * i + c] = gs.center[c];
    }
    p[3 * n + i] = gs.opacity;
  }
  optimizer.step(p, g);
  for (std::size_t i = 0; i < n; ++i) {
    Gaussian3D& gs = obj.gaussians[i];
    for (int c = 0; c < 3; ++c) {
      gs.color[c] = p[3 * i + c];
      gs.center[c] = p[4 * n + 3 * i + c];
    }
    gs.opacity = p[3 * n + i];
    sanitize(gs);
  }
  return rec;
}

LossRecord dynamic_sds_step(Scene& scene, const TrainSettings& settings, const DenoiserSet& denoisers,
                            std::vector<Adam>& optimizers, RngStream& rng) {
  const SdsConfig& cfg = settings.sds;
  const int frames = cfg.frames;
  const std::size_t n_obj = scene.objects.size();
  if (static_cast<int>(scene.time_grid.size()) != frames) throw ContractError("time grid must hold one entry per frame");
  if (optimizers.size() != n_obj) throw ContractError("one optimizer per object");

  LossRecord rec;
  rec.stage = "dynamic";
  RngStream mode_rng = rng.split("mode");
  const RenderMode mode = draw_render_mode(mode_rng, cfg.p_single, n_obj);
  rec.mode = mode_label(mode);
  RngStream cam_rng = rng.split("camera");
  const Camera cam = settings.fixed_cameras.empty()
                         ? sample_camera(cam_rng, settings.camera, settings.width, settings.height)
                         : settings.fixed_cameras.front();

  // Deformation of every object at every frame; the regularizers see all
  // objects whatever the render mode.
  std::vector<std::vector<DeformationNet::ForwardPass>> passes(n_obj);
  std::vector<std::vector<std::vector<Vec3>>> deltas(n_obj);
  std::vector<std::vector<Pose>> joint_poses(n_obj);
  for (std::size_t o = 0; o < n_obj; ++o) {
    const auto centers = scene.objects[o].centers();
    for (int f = 0; f < frames; ++f) {
      const double tau = scene.time_grid[static_cast<std::size_t>(f)];
      passes[o].push_back(scene.objects[o].deformation.forward(centers, tau));
      const auto& out = passes[o].back().output;
      std::vector<Vec3> d(centers.size());
      for (std::size_t i = 0; i < d.size(); ++i) d[i] = out.col(static_cast<Eigen::Index>(i));
      deltas[o].push_back(std::move(d));
      joint_poses[o].push_back(scene_pose(scene, o, tau));
    }
  }

  std::vector<std::size_t> active;
  if (mode.is_single()) {
    active.push_back(static_cast<std::size_t>(mode.object_index));
  } else {
    for (std::size_t o = 0; o < n_obj; ++o) active.push_back(o);
  }
  std::vector<const GaussianObject*> active_objects;
  for (std::size_t o : active) active_objects.push_back(&scene.objects[o]);

  std::vector<std::vector<PlacedObject>> placed(static_cast<std::size_t>(frames));
  std::vector<SceneTrace> traces;
  std::vector<RenderOutput> images;
  for (int f = 0; f < frames; ++f) {
    for (std::size_t o : active) {
      const Pose pose = mode.is_single() ? rest_pose(scene.objects[o]) : joint_poses[o][static_cast<std::size_t>(f)];
      placed[static_cast<std::size_t>(f)].push_back(
          place_with_deltas(scene.objects[o], static_cast<int>(o), pose, deltas[o][static_cast<std::size_t>(f)]));
    }
    traces.push_back(rasterize_placed(active_objects, placed[static_cast<std::size_t>(f)], cam, settings.raster));
    images.push_back(traces.back().output);
  }
  const Frames clip = Frames::from_images(images);
  Frames grad(clip.count, clip.height, clip.width);

  const std::string& prompt = mode.is_single() ? scene.objects[active.front()].entity_prompt : scene.scene_prompt;
  if (cfg.omega_video > 0.0) {
    Denoiser& d = require(denoisers.video, "video");
    RngStream r = rng.split("video");
    const SdsSample s = sds_gradient(clip, d, d.embed(prompt), r, cfg);
    rec.t_sequence = s.t;
    rec.sds_sequence = s.residual;
    for (std::size_t i = 0; i < grad.data.size(); ++i) grad.data[i] += cfg.omega_video * s.grad.data[i];
  }
  if (cfg.omega_sd_dynamic > 0.0 && cfg.image_frames > 0) {
    Denoiser& d = require(denoisers.image, "image");
    const std::vector<double> emb = d.embed(prompt);
    RngStream pick = rng.split("frames");
    const std::vector<int> chosen = choose_frames(pick, frames, cfg.image_frames);
    for (std::size_t k = 0; k < chosen.size(); ++k) {
      RngStream r = rng.split("image").split(static_cast<std::uint64_t>(k));
      const SdsSample s = sds_gradient(Frames::from_image(images[static_cast<std::size_t>(chosen[k])]), d, emb, r, cfg);
      rec.t_image += s.t / static_cast<double>(chosen.size());
      rec.sds_image += s.residual / static_cast<double>(chosen.size());
      auto dst = grad.frame(chosen[k]);
      for (std::size_t i = 0; i < dst.size(); ++i) dst[i] += cfg.omega_sd_dynamic * s.grad.data[i];
    }
  }

  // Upstream gradients on the object-space displacements.
  std::vector<std::vector<std::vector<Vec3>>> upstream(n_obj);
  for (std::size_t o = 0; o < n_obj; ++o) {
    upstream[o].assign(static_cast<std::size_t>(frames),
                       std::vector<Vec3>(scene.objects[o].gaussians.size(), Vec3::Zero()));
  }
  for (int f = 0; f < frames; ++f) {
    const auto& pf = placed[static_cast<std::size_t>(f)];
    const auto og = scene_backward(pf, traces[static_cast<std::size_t>(f)], cam, settings.raster, grad.frame(f));
    for (std::size_t slot = 0; slot < pf.size(); ++slot) {
      const Mat3 lin_t = pf[slot].pose.linear().transpose();
      auto& up = upstream[static_cast<std::size_t>(pf[slot].object_index)][static_cast<std::size_t>(f)];
      for (std::size_t i = 0; i < up.size(); ++i) up[i] += lin_t * og[slot].world_center[i];
    }
  }

  std::vector<RegObjectInput> reg_in(n_obj);
  for (std::size_t o = 0; o < n_obj; ++o) {
    const GaussianObject& obj = scene.objects[o];
    reg_in[o].deltas = deltas[o];
    reg_in[o].knn = &obj.knn_cache;
    for (int f = 0; f < frames; ++f) {
      const Pose& pose = joint_poses[o][static_cast<std::size_t>(f)];
      const auto& d = deltas[o][static_cast<std::size_t>(f)];
      std::vector<Vec3> w(d.size());
      for (std::size_t i = 0; i < d.size(); ++i) w[i] = pose.apply(obj.gaussians[i].center + d[i]);
      reg_in[o].placed.push_back(std::move(w));
    }
  }
  const RegTotal reg = total_regularization(reg_in, settings.reg);
  rec.contact = reg.contact;
  rec.acceleration = reg.acceleration;
  rec.rigidity = reg.rigidity;
  rec.regularization = reg.total;
  for (std::size_t o = 0; o < n_obj; ++o) {
    for (int f = 0; f < frames; ++f) {
      const std::size_t fi = static_cast<std::size_t>(f);
      const Mat3 lin_t = joint_poses[o][fi].linear().transpose();
      auto& up = upstream[o][fi];
      for (std::size_t i = 0; i < up.size(); ++i) {
        up[i] += reg.grad_deltas[o][fi][i] + lin_t * reg.grad_placed[o][fi][i];
      }
    }
  }

  std::vector<std::vector<double>> param_grads(n_obj);
  double sq = 0.0;
  for (std::size_t o = 0; o < n_obj; ++o) {
    const DeformationNet& net = scene.objects[o].deformation;
    param_grads[o].assign(net.parameter_count(), 0.0);
    for (int f = 0; f < frames; ++f) {
      const auto g = net.backward(passes[o][static_cast<std::size_t>(f)], upstream[o][static_cast<std::size_t>(f)]);
      for (std::size_t i = 0; i < g.size(); ++i) param_grads[o][i] += g[i];
    }
    if (!all_finite(param_grads[o])) throw DivergenceError("deformation gradient is not finite", {});
    const double nrm = norm_of(param_grads[o]);
    sq += nrm * nrm;
  }
  rec.grad_norm = std::sqrt(sq);
  if (!std::isfinite(rec.sds_image) || !std::isfinite(rec.sds_sequence) || !std::isfinite(rec.regularization)) {
    throw DivergenceError("loss is not finite", {});
  }
  for (std::size_t o = 0; o < n_obj; ++o) {
    DeformationNet& net = scene.objects[o].deformation;
    std::vector<double> p = net.parameters();
    optimizers[o].step(p, param_grads[o]);
    net.set_parameters(p);
  }
  return rec;
}

TrainResult train(Scene& scene, const TrainSettings& settings, const DenoiserSet& denoisers, std::uint64_t seed,
                  const std::function<void(const LossRecord&)>& on_step) {
  validate(settings.sds);
  validate(settings.reg);
  validate(scene);
  const SdsConfig& cfg = settings.sds;
  TrainResult result;
  const RngStream root(seed, 0x5344534c4f4f50ULL);
  auto record = [&](LossRecord rec) {
    result.history.push_back(rec);
    if (on_step) on_step(result.history.back());
  };

  try {
    std::vector<Adam> static_opt(scene.objects.size(), Adam(cfg.static_learning_rate));
    for (int it = 0; it < cfg.static_iterations; ++it) {
      for (std::size_t o = 0; o < scene.objects.size(); ++o) {
        RngStream r = root.split("static").split(static_cast<std::uint64_t>(it)).split(o);
        std::vector<Camera> views = settings.fixed_cameras;
        if (views.empty()) {
          RngStream cr = r.split("camera");
          const double az = cr.uniform(0.0, 360.0);
          const double el = cr.uniform(settings.camera.elevation_min_deg, settings.camera.elevation_max_deg);
          for (int v = 0; v < cfg.static_views; ++v) {
            views.push_back(Camera::orbit(az + 360.0 * v / cfg.static_views, el, settings.camera.radius,
                                          settings.camera.target, settings.camera.vertical_fov, settings.width,
                                          settings.height));
          }
        }
        LossRecord rec =
            static_sds_step(scene.objects[o], views, denoisers, cfg, settings.raster, static_opt[o], r);
        rec.iteration = it;
        rec.object = static_cast<int>(o);
        record(rec);
      }
    }
    if (cfg.static_iterations > 0) {
      for (auto& obj : scene.objects) rebuild_knn(obj, settings.knn_k);
    }

    if (cfg.iterations > 0) {
      scene.time_grid = make_time_grid(cfg.frames);
      std::vector<Adam> opt(scene.objects.size(), Adam(cfg.learning_rate));
      for (int it = 0; it < cfg.iterations; ++it) {
        RngStream r = root.split("dynamic").split(static_cast<std::uint64_t>(it));
        LossRecord rec = dynamic_sds_step(scene, settings, denoisers, opt, r);
        rec.iteration = it;
        record(rec);
      }
    }
  } catch (const DivergenceError& e) {
    throw DivergenceError(e.what(), result.history);
  }
  return result;
}

std::string loss_csv(std::span<const LossRecord> history) {
  std::string out =
      "stage,iteration,object,mode,t_image,sds_image,t_sequence,sds_sequence,contact,acceleration,rigidity,"
      "regularization,grad_norm\n";
  char buf[512];
  for (const LossRecord& r : history) {
    std::snprintf(buf, sizeof buf, "%s,%d,%d,%s,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g\n",
                  r.stage.c_str(), r.iteration, r.object, r.mode.c_str(), r.t_image, r.sds_image, r.t_sequence,
                  r.sds_sequence, r.contact, r.acceleration, r.rigidity, r.regularization, r.grad_norm);
    out += buf;
  }
  return out;
}

void write_loss_csv(const std::string& path, std::span<const LossRecord> history) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw Error("cannot open " + path + " for writing");
  f << loss_csv(history);
}

}  // namespace scene4d
