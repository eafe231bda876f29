#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "scene4d/core/error.hpp"
#include "scene4d/core/scene.hpp"
#include "scene4d/distillation/sds.hpp"
#include "scene4d/regularizers/regularizers.hpp"

namespace scene4d {

struct DenoiserSet {
  Denoiser* image = nullptr;
  Denoiser* multiview = nullptr;
  Denoiser* video = nullptr;
};

struct TrainSettings {
  SdsConfig sds;
  RegWeights reg;
  int width = 576;
  int height = 320;
  CameraSampling camera;
  RasterSettings raster;
  // When non-empty, replaces sampled cameras: the static stage uses all of
  // them as its views, the dynamic stage uses the first.
  std::vector<Camera> fixed_cameras;
  int knn_k = kDefaultNeighborCount;
};

// One optimizer step. In the static stage the sequence columns hold the
// multiview term; in the dynamic stage they hold the video term.
struct LossRecord {
  std::string stage;
  int iteration = 0;
  int object = -1;  // static stage only
  std::string mode = "joint";
  double t_image = 0.0;
  double sds_image = 0.0;
  double t_sequence = 0.0;
  double sds_sequence = 0.0;
  double contact = 0.0;
  double acceleration = 0.0;
  double rigidity = 0.0;
  double regularization = 0.0;
  double grad_norm = 0.0;
};

class DivergenceError : public NumericError {
 public:
  DivergenceError(const std::string& what, std::vector<LossRecord> history)
      : NumericError(what), history_(std::move(history)) {}
  const std::vector<LossRecord>& history() const { return history_; }

 private:
  std::vector<LossRecord> history_;
};

// Object-centric renders from `views`; image SDS on the first view and
// multiview SDS on all of them, combined with the static weights. Updates
// colors, opacities and (optionally) centers.
LossRecord static_sds_step(GaussianObject& obj, std::span<const Camera> views, const DenoiserSet& denoisers,
                           const SdsConfig& config, const RasterSettings& raster, Adam& optimizer, RngStream& rng);

// One dynamic iteration: draw the render mode, render the F-frame clip,
// take video SDS on the clip and image SDS on a subset of its frames, add
// the regularizers and step every deformation net. Static attributes are
// not touched. scene.time_grid must hold sds.frames entries.
LossRecord dynamic_sds_step(Scene& scene, const TrainSettings& settings, const DenoiserSet& denoisers,
                            std::vector<Adam>& optimizers, RngStream& rng);

struct TrainResult {
  std::vector<LossRecord> history;
};

// Static stage, kNN rebuild, then the dynamic stage. Deterministic in the
// seed. Throws DivergenceError (carrying the history so far) when a loss or
// gradient turns non-finite; the scene keeps its last finite state.
TrainResult train(Scene& scene, const TrainSettings& settings, const DenoiserSet& denoisers, std::uint64_t seed,
                  const std::function<void(const LossRecord&)>& on_step = {});

std::string loss_csv(std::span<const LossRecord> history);
void write_loss_csv(const std::string& path, std::span<const LossRecord> history);

}  // namespace scene4d
