#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "scene4d/core/math.hpp"
#include "scene4d/deformation/encoding.hpp"

namespace scene4d {

class RngStream;

// Time-conditioned displacement field Delta(x, t) for one object.
//
// Positions are first mapped into [-1, 1]^3 by the object's static bounding
// box, encoded together with t, and pushed through a fully connected
// network with tanh hidden units and a linear 3-wide output. The output
// layer starts at exactly zero so a fresh network produces no motion.
class DeformationNet {
 public:
  struct Layer {
    Eigen::MatrixXd weight;  // out x in
    Eigen::VectorXd bias;    // out
  };

  // Activations kept from a forward pass; consumed by backward().
  struct ForwardPass {
    Eigen::MatrixXd encoded;                  // enc_dim x N
    std::vector<Eigen::MatrixXd> activations; // post-tanh output of every hidden layer
    Eigen::Matrix3Xd output;                  // 3 x N displacements
  };

  static constexpr int kDefaultHiddenWidth = 64;
  static constexpr int kDefaultHiddenLayers = 3;

  // A zero-parameter 32 -> 64 -> 64 -> 64 -> 3 network over the unit box.
  DeformationNet();

  // Fan-in uniform init for hidden layers, zero output layer.
  static DeformationNet create(const std::vector<int>& hidden_widths, const PositionalEncoding& encoding,
                               const Vec3& bbox_min, const Vec3& bbox_max, RngStream& rng);
  static DeformationNet create_default(const Vec3& bbox_min, const Vec3& bbox_max, RngStream& rng);

  const PositionalEncoding& encoding() const { return encoding_; }
  const std::vector<Layer>& layers() const { return layers_; }
  std::vector<Layer>& layers() { return layers_; }
  const Vec3& bbox_min() const { return bbox_min_; }
  const Vec3& bbox_max() const { return bbox_max_; }
  std::vector<int> hidden_widths() const;

  Vec3 normalize(const Vec3& x) const;

  ForwardPass forward(std::span<const Vec3> positions, double t) const;
  std::vector<Vec3> deform(std::span<const Vec3> positions, double t) const;

  // Gradient of sum_i <upstream_i, Delta_i> with respect to every parameter,
  // laid out as parameters(). Throws ContractError when upstream does not
  // match the forward pass.
  std::vector<double> backward(const ForwardPass& pass, std::span<const Vec3> upstream) const;

  // Parameters flattened as W0 (row-major), b0, W1, b1, ...
  std::size_t parameter_count() const;
  std::vector<double> parameters() const;
  void set_parameters(std::span<const double> values);

  // Checkpoint blob: "S4DNET01", u64 little-endian header length, JSON
  // header (layer shapes, encoding, bounding box), then float64 LE parameters.
  std::string to_blob() const;
  static DeformationNet from_blob(const std::string& blob);
  void save(const std::string& path) const;
  static DeformationNet load(const std::string& path);

 private:
  PositionalEncoding encoding_;
  std::vector<Layer> layers_;
  Vec3 bbox_min_ = -Vec3::Ones();
  Vec3 bbox_max_ = Vec3::Ones();
};

}  // namespace scene4d
