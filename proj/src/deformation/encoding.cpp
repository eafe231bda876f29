#include "scene4d/deformation/encoding.hpp"

#include <cmath>

#include "scene4d/core/math.hpp"

namespace scene4d {

Eigen::VectorXd PositionalEncoding::encode(const Eigen::Vector4d& p) const {
  return encode_batch(p);
}

Eigen::MatrixXd PositionalEncoding::encode_batch(const Eigen::Matrix4Xd& p) const {
  const Eigen::Index n = p.cols();
  Eigen::MatrixXd out(output_dim(), n);
  for (Eigen::Index c = 0; c < n; ++c) {
    int row = 0;
    if (include_input) {
      for (int i = 0; i < 4; ++i) out(row++, c) = p(i, c);
    }
    for (int i = 0; i < 4; ++i) {
      double freq = kPi;
      for (int f = 0; f < num_frequencies; ++f, freq *= 2.0) {
        const double arg = freq * p(i, c);
        out(row++, c) = std::sin(arg);
        out(row++, c) = std::cos(arg);
      }
    }
  }
  return out;
}

}  // namespace scene4d
