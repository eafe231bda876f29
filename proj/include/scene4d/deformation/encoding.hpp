#pragma once

#include <Eigen/Core>

namespace scene4d {

// Sinusoidal encoding of (x, y, z, t). For each input coordinate and each
// band f in {2^0 pi, ..., 2^(n-1) pi} it emits sin(f p), cos(f p).
// With the default four bands the output has 4 * 4 * 2 = 32 entries.
struct PositionalEncoding {
  int num_frequencies = 4;
  bool include_input = false;

  int output_dim() const { return 4 * num_frequencies * 2 + (include_input ? 4 : 0); }

  Eigen::VectorXd encode(const Eigen::Vector4d& p) const;

  // Column-wise encoding of a 4 x N batch into an output_dim() x N matrix.
  Eigen::MatrixXd encode_batch(const Eigen::Matrix4Xd& p) const;
};

}  // namespace scene4d
