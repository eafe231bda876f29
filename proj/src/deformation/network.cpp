#include "scene4d/deformation/network.hpp"

#include <cmath>
#include <cstring>
#include <fstream>
#include <sstream>

#include "json.hpp"
#include "scene4d/core/error.hpp"
#include "scene4d/core/rng.hpp"

namespace scene4d {

namespace {

constexpr char kMagic[8] = {'S', '4', 'D', 'N', 'E', 'T', '0', '1'};

std::vector<DeformationNet::Layer> make_layers(int input_dim, const std::vector<int>& hidden) {
  std::vector<DeformationNet::Layer> layers;
  int in = input_dim;
  for (int w : hidden) {
    layers.push_back({Eigen::MatrixXd::Zero(w, in), Eigen::VectorXd::Zero(w)});
    in = w;
  }
  layers.push_back({Eigen::MatrixXd::Zero(3, in), Eigen::VectorXd::Zero(3)});
  return layers;
}

}  // namespace

DeformationNet::DeformationNet()
    : layers_(make_layers(encoding_.output_dim(),
                          std::vector<int>(kDefaultHiddenLayers, kDefaultHiddenWidth))) {}

DeformationNet DeformationNet::create(const std::vector<int>& hidden_widths, const PositionalEncoding& encoding,
                                      const Vec3& bbox_min, const Vec3& bbox_max, RngStream& rng) {
  for (int w : hidden_widths) {
    if (w <= 0) throw ContractError("hidden layer widths must be positive");
  }
  DeformationNet net;
  net.encoding_ = encoding;
  net.bbox_min_ = bbox_min;
  net.bbox_max_ = bbox_max;
  net.layers_ = make_layers(encoding.output_dim(), hidden_widths);
  for (std::size_t l = 0; l + 1 < net.layers_.size(); ++l) {
    Layer& layer = net.layers_[l];
    const double bound = 1.0 / std::sqrt(static_cast<double>(layer.weight.cols()));
    for (Eigen::Index r = 0; r < layer.weight.rows(); ++r) {
      for (Eigen::Index c = 0; c < layer.weight.cols(); ++c) layer.weight(r, c) = rng.uniform(-bound, bound);
    }
    for (Eigen::Index r = 0; r < layer.bias.size(); ++r) layer.bias(r) = rng.uniform(-bound, bound);
  }
  return net;
}

DeformationNet DeformationNet::create_default(const Vec3& bbox_min, const Vec3& bbox_max, RngStream& rng) {
  return create(std::vector<int>(kDefaultHiddenLayers, kDefaultHiddenWidth), PositionalEncoding{}, bbox_min,
                bbox_max, rng);
}

std::vector<int> DeformationNet::hidden_widths() const {
  std::vector<int> widths;
  for (std::size_t l = 0; l + 1 < layers_.size(); ++l) widths.push_back(static_cast<int>(layers_[l].weight.rows()));
  return widths;
}

Vec3 DeformationNet::normalize(const Vec3& x) const {
  const Vec3 extent = (bbox_max_ - bbox_min_).cwiseMax(1e-12);
  return 2.0 * (x - bbox_min_).cwiseQuotient(extent) - Vec3::Ones();
}

DeformationNet::ForwardPass DeformationNet::forward(std::span<const Vec3> positions, double t) const {
  const Eigen::Index n = static_cast<Eigen::Index>(positions.size());
  Eigen::Matrix4Xd input(4, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    input.col(i).head<3>() = normalize(positions[static_cast<std::size_t>(i)]);
    input(3, i) = t;
  }
  ForwardPass pass;
  pass.encoded = encoding_.encode_batch(input);
  const Eigen::MatrixXd* h = &pass.encoded;
  pass.activations.reserve(layers_.size() - 1);
  for (std::size_t l = 0; l + 1 < layers_.size(); ++l) {
    Eigen::MatrixXd z = layers_[l].weight * (*h);
    z.colwise() += layers_[l].bias;
    pass.activations.push_back(z.array().tanh().matrix());
    h = &pass.activations.back();
  }
  const Layer& out = layers_.back();
  pass.output = out.weight * (*h);
  pass.output.colwise() += out.bias;
  return pass;
}

std::vector<Vec3> DeformationNet::deform(std::span<const Vec3> positions, double t) const {
  const ForwardPass pass = forward(positions, t);
  std::vector<Vec3> out(positions.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = pass.output.col(static_cast<Eigen::Index>(i));
  return out;
}

std::vector<double> DeformationNet::backward(const ForwardPass& pass, std::span<const Vec3> upstream) const {
  const Eigen::Index n = pass.output.cols();
  if (static_cast<Eigen::Index>(upstream.size()) != n || pass.activations.size() + 1 != layers_.size()) {
    throw ContractError("upstream gradient shape does not match the forward pass");
  }
  Eigen::Matrix3Xd g(3, n);
  for (Eigen::Index i = 0; i < n; ++i) g.col(i) = upstream[static_cast<std::size_t>(i)];

  std::vector<Eigen::MatrixXd> grad_w(layers_.size());
  std::vector<Eigen::VectorXd> grad_b(layers_.size());

  Eigen::MatrixXd delta = g;
  for (std::size_t l = layers_.size(); l-- > 0;) {
    const Eigen::MatrixXd& input = l == 0 ? pass.encoded : pass.activations[l - 1];
    grad_w[l] = delta * input.transpose();
    grad_b[l] = delta.rowwise().sum();
    if (l == 0) break;
    Eigen::MatrixXd back = layers_[l].weight.transpose() * delta;
    const Eigen::MatrixXd& a = pass.activations[l - 1];
    delta = back.array() * (1.0 - a.array().square());
  }

  std::vector<double> flat;
  flat.reserve(parameter_count());
  for (std::size_t l = 0; l < layers_.size(); ++l) {
    for (Eigen::Index r = 0; r < grad_w[l].rows(); ++r) {
      for (Eigen::Index c = 0; c < grad_w[l].cols(); ++c) flat.push_back(grad_w[l](r, c));
    }
    for (Eigen::Index r = 0; r < grad_b[l].size(); ++r) flat.push_back(grad_b[l](r));
  }
  return flat;
}

std::size_t DeformationNet::parameter_count() const {
  std::size_t n = 0;
  for (const auto& l : layers_) n += static_cast<std::size_t>(l.weight.size() + l.bias.size());
  return n;
}

std::vector<double> DeformationNet::parameters() const {
  std::vector<double> flat;
  flat.reserve(parameter_count());
  for (const auto& l : layers_) {
    for (Eigen::Index r = 0; r < l.weight.rows(); ++r) {
      for (Eigen::Index c = 0; c < l.weight.cols(); ++c) flat.push_back(l.weight(r, c));
    }
    for (Eigen::Index r = 0; r < l.bias.size(); ++r) flat.push_back(l.bias(r));
  }
  return flat;
}

void DeformationNet::set_parameters(std::span<const double> values) {
  if (values.size() != parameter_count()) throw ContractError("parameter vector has the wrong length");
  std::size_t k = 0;
  for (auto& l : layers_) {
    for (Eigen::Index r = 0; r < l.weight.rows(); ++r) {
      for (Eigen::Index c = 0; c < l.weight.cols(); ++c) l.weight(r, c) = values[k++];
    }
    for (Eigen::Index r = 0; r < l.bias.size(); ++r) l.bias(r) = values[k++];
  }
}

std::string DeformationNet::to_blob() const {
  nlohmann::json header;
  header["format"] = "scene4d.deformation";
  header["version"] = 1;
  header["encoding"] = {{"num_frequencies", encoding_.num_frequencies}, {"include_input", encoding_.include_input}};
  header["activation"] = "tanh";
  nlohmann::json shapes = nlohmann::json::array();
  for (const auto& l : layers_) shapes.push_back({l.weight.rows(), l.weight.cols()});
  header["layers"] = shapes;
  header["bbox_min"] = {bbox_min_.x(), bbox_min_.y(), bbox_min_.z()};
  header["bbox_max"] = {bbox_max_.x(), bbox_max_.y(), bbox_max_.z()};
  header["parameter_count"] = parameter_count();
  const std::string text = header.dump();

  std::string blob(kMagic, sizeof(kMagic));
  const std::uint64_t len = text.size();
  char len_bytes[8];
  std::memcpy(len_bytes, &len, 8);
  blob.append(len_bytes, 8);
  blob += text;
  for (double v : parameters()) {
    char b[8];
    std::memcpy(b, &v, 8);
    blob.append(b, 8);
  }
  return blob;
}

DeformationNet DeformationNet::from_blob(const std::string& blob) {
  if (blob.size() < 16 || std::memcmp(blob.data(), kMagic, sizeof(kMagic)) != 0) {
    throw LoadError("deformation blob has a bad magic number");
  }
  std::uint64_t len = 0;
  std::memcpy(&len, blob.data() + 8, 8);
  if (len > blob.size() - 16) throw LoadError("deformation blob header is truncated");
  nlohmann::json header;
  try {
    header = nlohmann::json::parse(blob.substr(16, len));
    DeformationNet net;
    net.encoding_.num_frequencies = header.at("encoding").at("num_frequencies").get<int>();
    net.encoding_.include_input = header.at("encoding").at("include_input").get<bool>();
    const auto shapes = header.at("layers");
    if (shapes.size() < 1) throw LoadError("deformation blob has no layers");
    std::vector<int> hidden;
    int expected_in = net.encoding_.output_dim();
    for (std::size_t i = 0; i < shapes.size(); ++i) {
      const int rows = shapes[i].at(0).get<int>();
      const int cols = shapes[i].at(1).get<int>();
      if (cols != expected_in || rows <= 0) throw LoadError("deformation blob layer shapes are inconsistent");
      if (i + 1 < shapes.size()) hidden.push_back(rows);
      else if (rows != 3) throw LoadError("deformation output layer must be 3 wide");
      expected_in = rows;
    }
    net.layers_ = make_layers(net.encoding_.output_dim(), hidden);
    const auto lo = header.at("bbox_min").get<std::vector<double>>();
    const auto hi = header.at("bbox_max").get<std::vector<double>>();
    if (lo.size() != 3 || hi.size() != 3) throw LoadError("deformation blob bounding box is malformed");
    net.bbox_min_ = Vec3(lo[0], lo[1], lo[2]);
    net.bbox_max_ = Vec3(hi[0], hi[1], hi[2]);
    const std::size_t count = net.parameter_count();
    if (blob.size() != 16 + len + 8 * count) throw LoadError("deformation blob parameter block has the wrong size");
    std::vector<double> values(count);
    std::memcpy(values.data(), blob.data() + 16 + len, 8 * count);
    net.set_parameters(values);
    return net;
  } catch (const nlohmann::json::exception& e) {
    throw LoadError(std::string("deformation blob header: ") + e.what());
  }
}

void DeformationNet::save(const std::string& path) const {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write '" + path + "'");
  const std::string blob = to_blob();
  out.write(blob.data(), static_cast<std::streamsize>(blob.size()));
}

DeformationNet DeformationNet::load(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw LoadError("cannot open '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return from_blob(ss.str());
}

}  // namespace scene4d
