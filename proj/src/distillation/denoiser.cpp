#include "scene4d/distillation/denoiser.hpp"

#include <cmath>

#include "json.hpp"
#include "scene4d/core/error.hpp"
#include "scene4d/core/rng.hpp"
#include "scene4d/rasterizer/image_io.hpp"

namespace scene4d {

Frames Frames::from_images(std::span<const RenderOutput> images) {
  if (images.empty()) return {};
  Frames out(static_cast<int>(images.size()), images[0].height, images[0].width);
  for (std::size_t f = 0; f < images.size(); ++f) {
    if (images[f].width != out.width || images[f].height != out.height) {
      throw ContractError("frames must share one resolution");
    }
    std::copy(images[f].image.begin(), images[f].image.end(), out.frame(static_cast<int>(f)).begin());
  }
  return out;
}

std::string to_string(Modality m) {
  switch (m) {
    case Modality::image: return "image";
    case Modality::multiview: return "multiview";
    case Modality::video: return "video";
  }
  return "image";
}

Modality modality_from_string(const std::string& name) {
  if (name == "image") return Modality::image;
  if (name == "multiview") return Modality::multiview;
  if (name == "video") return Modality::video;
  throw ConfigError("unknown modality '" + name + "'");
}

std::vector<double> Denoiser::embed(const std::string& prompt) const {
  RngStream rng(hash_name(prompt), 0x656d626564ULL);
  std::vector<double> e(kEmbeddingSize);
  for (double& v : e) v = rng.uniform(-1.0, 1.0);
  return e;
}

namespace {

const Frames& require_noise(const DenoiseRequest& r) {
  if (r.noisy == nullptr) throw ContractError("denoise request without x_t");
  if (r.injected_noise == nullptr || !r.injected_noise->same_shape(*r.noisy)) {
    throw ContractError("analytic denoiser needs the injected noise");
  }
  return *r.injected_noise;
}

}  // namespace

Frames OracleDenoiser::predict(const DenoiseRequest& request) { return require_noise(request); }

TargetImageDenoiser::TargetImageDenoiser(Modality modality, RenderOutput target)
    : Denoiser(modality), target_(std::move(target)) {}

Frames TargetImageDenoiser::predict(const DenoiseRequest& request) {
  const Frames& eps = require_noise(request);
  const Frames& xt = *request.noisy;
  if (xt.width != target_.width || xt.height != target_.height) {
    throw ContractError("target image resolution differs from the render");
  }
  const double a = std::sqrt(request.alpha_bar);
  const double b = std::sqrt(1.0 - request.alpha_bar);
  Frames out = eps;
  const std::size_t n = xt.frame_size();
  for (int f = 0; f < xt.count; ++f) {
    for (std::size_t i = 0; i < n; ++i) {
      const std::size_t k = f * n + i;
      const double x = (xt.data[k] - b * eps.data[k]) / a;
      out.data[k] = eps.data[k] + (x - target_.image[i]);
    }
  }
  return out;
}

RecordedDenoiser::RecordedDenoiser(Modality modality, const std::string& path) : Denoiser(modality) {
  std::ifstream in(path);
  if (!in) throw LoadError("cannot open recording " + path);
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty()) lines_.push_back(line);
  }
}

Frames RecordedDenoiser::predict(const DenoiseRequest& request) {
  if (request.noisy == nullptr) throw ContractError("denoise request without x_t");
  if (cursor_ >= lines_.size()) throw LoadError("recording exhausted");
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(lines_[cursor_++]);
  } catch (const nlohmann::json::exception& e) {
    throw LoadError(std::string("malformed recording line: ") + e.what());
  }
  Frames out;
  try {
    out.count = j.at("frames").get<int>();
    out.height = j.at("height").get<int>();
    out.width = j.at("width").get<int>();
    out.data = j.at("eps_hat").get<std::vector<double>>();
  } catch (const nlohmann::json::exception& e) {
    throw LoadError(std::string("malformed recording line: ") + e.what());
  }
  if (!out.same_shape(*request.noisy) || out.data.size() != request.noisy->data.size()) {
    throw LoadError("recorded prediction does not match the request shape");
  }
  return out;
}

RecordingDenoiser::RecordingDenoiser(std::unique_ptr<Denoiser> inner, const std::string& path)
    : Denoiser(inner->modality()), inner_(std::move(inner)), out_(path, std::ios::app) {
  if (!out_) throw Error("cannot open " + path + " for writing");
}

Frames RecordingDenoiser::predict(const DenoiseRequest& request) {
  Frames eps_hat = inner_->predict(request);
  nlohmann::json j;
  j["modality"] = to_string(modality());
  j["noise_level"] = request.noise_level;
  j["frames"] = eps_hat.count;
  j["height"] = eps_hat.height;
  j["width"] = eps_hat.width;
  j["eps_hat"] = eps_hat.data;
  out_ << j.dump() << '\n';
  out_.flush();
  return eps_hat;
}

std::unique_ptr<Denoiser> make_denoiser(const DenoiserSpec& spec, Modality modality) {
  if (spec.name == "oracle") return std::make_unique<OracleDenoiser>(modality);
  if (spec.name == "target_image") {
    if (spec.path.empty()) throw ConfigError("target_image denoiser needs a target path");
    return std::make_unique<TargetImageDenoiser>(modality, read_png(spec.path));
  }
  if (spec.name == "recorded") {
    if (spec.path.empty()) throw ConfigError("recorded denoiser needs a recording path");
    return std::make_unique<RecordedDenoiser>(modality, spec.path);
  }
  throw ConfigError("unknown denoiser '" + spec.name + "'");
}

}  // namespace scene4d
