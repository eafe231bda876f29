#pragma once

#include <fstream>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "scene4d/distillation/frames.hpp"

namespace scene4d {

enum class Modality { image, multiview, video };

std::string to_string(Modality m);
Modality modality_from_string(const std::string& name);

struct DenoiseRequest {
  const Frames* noisy = nullptr;  // x_t
  std::span<const double> embedding;
  double noise_level = 0.5;  // t in (0, 1)
  double alpha_bar = 0.5;
  // The noise that produced x_t. Analytic test denoisers read it; a real
  // backend would ignore it.
  const Frames* injected_noise = nullptr;
};

// Noise predictor eps_hat(x_t; y, t). Output has the shape of x_t.
class Denoiser {
 public:
  explicit Denoiser(Modality modality) : modality_(modality) {}
  virtual ~Denoiser() = default;

  Modality modality() const { return modality_; }
  virtual std::string name() const = 0;
  virtual Frames predict(const DenoiseRequest& request) = 0;

  // Opaque fixed-size prompt embedding; the default hashes the prompt.
  virtual std::vector<double> embed(const std::string& prompt) const;

 private:
  Modality modality_;
};

inline constexpr int kEmbeddingSize = 16;

// Returns the injected noise exactly, so every SDS gradient is zero.
class OracleDenoiser : public Denoiser {
 public:
  using Denoiser::Denoiser;
  std::string name() const override { return "oracle"; }
  Frames predict(const DenoiseRequest& request) override;
};

// eps_hat = eps + (x - x*) for a fixed target image x*, where x is
// recovered from x_t and the injected noise. The SDS gradient is then
// w(t) (x - x*). The target is broadcast over every frame.
class TargetImageDenoiser : public Denoiser {
 public:
  TargetImageDenoiser(Modality modality, RenderOutput target);
  std::string name() const override { return "target_image"; }
  Frames predict(const DenoiseRequest& request) override;
  const RenderOutput& target() const { return target_; }

 private:
  RenderOutput target_;
};

// Replays predictions from a JSON-lines file, one line per call.
class RecordedDenoiser : public Denoiser {
 public:
  RecordedDenoiser(Modality modality, const std::string& path);
  std::string name() const override { return "recorded"; }
  Frames predict(const DenoiseRequest& request) override;
  std::size_t remaining() const { return lines_.size() - cursor_; }

 private:
  std::vector<std::string> lines_;
  std::size_t cursor_ = 0;
};

// Forwards to `inner` and appends each prediction to a JSON-lines file
// that RecordedDenoiser can replay.
class RecordingDenoiser : public Denoiser {
 public:
  RecordingDenoiser(std::unique_ptr<Denoiser> inner, const std::string& path);
  std::string name() const override { return inner_->name(); }
  Frames predict(const DenoiseRequest& request) override;
  std::vector<double> embed(const std::string& prompt) const override { return inner_->embed(prompt); }

 private:
  std::unique_ptr<Denoiser> inner_;
  std::ofstream out_;
};

struct DenoiserSpec {
  std::string name = "oracle";  // "oracle", "target_image" or "recorded"
  std::string path;             // target PNG or recording
};

// Throws ConfigError for an unknown name or a missing path.
std::unique_ptr<Denoiser> make_denoiser(const DenoiserSpec& spec, Modality modality);

}  // namespace scene4d
