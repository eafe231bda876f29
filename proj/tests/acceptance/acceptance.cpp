// Acceptance suite: one PASS/FAIL line per criterion, exit status 1 when any
// criterion fails. Every check compares the library against an oracle
// written here from first principles.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <iostream>
#include <numeric>
#include <sstream>
#include <string>

#include "helpers.hpp"
#include "scene4d/core/knn.hpp"
#include "scene4d/core/object.hpp"
#include "scene4d/core/scene.hpp"
#include "scene4d/core/shapes.hpp"
#include "scene4d/deformation/network.hpp"
#include "scene4d/distillation/denoiser.hpp"
#include "scene4d/distillation/sds.hpp"
#include "scene4d/distillation/trainer.hpp"
#include "scene4d/orientation/orientation.hpp"
#include "scene4d/pipeline/config.hpp"
#include "scene4d/pipeline/pipeline.hpp"
#include "scene4d/rasterizer/rasterizer.hpp"
#include "scene4d/rasterizer/render.hpp"
#include "scene4d/regularizers/regularizers.hpp"
#include "scene4d/trajectory/collision.hpp"
#include "scene4d/trajectory/trajectory.hpp"

using namespace scene4d;
using scene4d::testing::central_difference;
using scene4d::testing::random_points;
using scene4d::testing::random_unit;
using scene4d::testing::rel_close;
namespace fs = std::filesystem;

namespace {

// Collects the first few failure messages of one criterion.
struct Verdict {
  bool ok = true;
  int failures = 0;
  std::ostringstream notes;

  void require(bool cond, const std::string& what) {
    if (cond) return;
    ok = false;
    if (failures++ < 3) notes << " [" << what << "]";
  }
};

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) { return std::chrono::duration<double>(Clock::now() - start).count(); }

// ---------------------------------------------------------------- oracles

std::vector<Vec3> translated(const std::vector<Vec3>& pts, const Vec3& by) {
  std::vector<Vec3> out = pts;
  for (auto& p : out) p += by;
  return out;
}

Vec3 mean_of(const std::vector<Vec3>& p) {
  Vec3 m = Vec3::Zero();
  for (const Vec3& v : p) m += v;
  return m / static_cast<double>(p.size());
}

std::size_t nearest(const std::vector<Vec3>& pts, const Vec3& q) {
  std::size_t best = 0;
  for (std::size_t i = 1; i < pts.size(); ++i) {
    if ((pts[i] - q).squaredNorm() < (pts[best] - q).squaredNorm()) best = i;
  }
  return best;
}

// Contact-angle test from its definition: a violation is a point of one
// object whose nearest point in the other sees the first object's centroid
// at an obtuse angle.
bool oracle_collides(const std::vector<Vec3>& a, const std::vector<Vec3>& b) {
  auto directed = [](const std::vector<Vec3>& x, const std::vector<Vec3>& y) {
    const Vec3 c = mean_of(x);
    for (const Vec3& m : x) {
      const Vec3& n = y[nearest(y, m)];
      if ((c - n).dot(m - n) < 0) return true;
    }
    return false;
  };
  return directed(a, b) || directed(b, a);
}

// Distance to the nearest kink of the contact loss (a hinge at zero angle or
// a nearest-neighbor tie); finite differences are meaningless closer than h.
double contact_kink_margin(const std::vector<Vec3>& a, const std::vector<Vec3>& b) {
  auto directed = [](const std::vector<Vec3>& x, const std::vector<Vec3>& y) {
    const Vec3 c = mean_of(x);
    double margin = std::numeric_limits<double>::infinity();
    for (const Vec3& m : x) {
      double d1 = std::numeric_limits<double>::infinity(), d2 = d1;
      std::size_t best = 0;
      for (std::size_t i = 0; i < y.size(); ++i) {
        const double d = (y[i] - m).norm();
        if (d < d1) {
          d2 = d1;
          d1 = d;
          best = i;
        } else if (d < d2) {
          d2 = d;
        }
      }
      margin = std::min({margin, d2 - d1, std::abs((c - y[best]).dot(m - y[best]))});
    }
    return margin;
  };
  return std::min(directed(a, b), directed(b, a));
}

// Per-pixel blend over the depth-sorted list, written out directly.
RenderOutput oracle_composite(const std::vector<Splat2D>& splats, int width, int height) {
  std::vector<int> order(splats.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) { return splats[a].depth < splats[b].depth; });
  RenderOutput out(width, height);
  for (int y = 0; y < height; ++y) {
    for (int x = 0; x < width; ++x) {
      double transmittance = 1.0;
      Vec3 c = Vec3::Zero();
      for (int id : order) {
        const Splat2D& s = splats[static_cast<std::size_t>(id)];
        const Vec2 d = Vec2(x + 0.5, y + 0.5) - s.pixel_center;
        const double sigma = s.opacity * std::exp(-0.5 * d.dot(s.cov2d.inverse() * d));
        if (sigma < 1.0 / 255.0) continue;
        c += sigma * transmittance * s.color;
        transmittance *= 1.0 - sigma;
        if (transmittance < 1e-4) break;
      }
      for (int k = 0; k < 3; ++k) out.image[static_cast<std::size_t>((y * width + x) * 3 + k)] = c[k];
      out.alpha[static_cast<std::size_t>(y * width + x)] = 1.0 - transmittance;
    }
  }
  return out;
}

// k nearest neighbors by full sort on (squared distance, index), self excluded.
std::vector<int> oracle_knn(const std::vector<Vec3>& pts, int k) {
  const int n = static_cast<int>(pts.size());
  const int kk = std::min(k, n - 1);
  std::vector<int> out;
  for (int i = 0; i < n; ++i) {
    std::vector<std::pair<double, int>> cand;
    for (int j = 0; j < n; ++j) {
      if (j != i) cand.emplace_back((pts[static_cast<std::size_t>(j)] - pts[static_cast<std::size_t>(i)]).squaredNorm(), j);
    }
    std::sort(cand.begin(), cand.end());
    for (int r = 0; r < kk; ++r) out.push_back(cand[static_cast<std::size_t>(r)].second);
  }
  return out;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

double max_abs_diff(const std::vector<double>& a, const std::vector<double>& b) {
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
  return m;
}

// ---------------------------------------------------------------- criteria

void rotation_alignment(Verdict& v) {
  const auto start = Clock::now();
  RngStream rng(101);
  int antipodal = 0, identical = 0;
  double worst_map = 0, worst_ortho = 0, worst_det = 0;
  for (int i = 0; i < 1000; ++i) {
    const Vec3 a = random_unit(rng);
    Vec3 b = random_unit(rng);
    if (i % 100 == 0) {
      b = -a;
      ++antipodal;
    } else if (i % 100 == 50) {
      b = a;
      ++identical;
    }
    const Mat3 r = rotation_between(a, b);
    worst_map = std::max(worst_map, (r * a - b).norm());
    worst_ortho = std::max(worst_ortho, (r.transpose() * r - Mat3::Identity()).norm());
    worst_det = std::max(worst_det, std::abs(r.determinant() - 1.0));
  }
  const double elapsed = seconds_since(start);
  v.require(antipodal == 10 && identical == 10, "pair mix");
  v.require(worst_map < 1e-9, "|RA-B| " + std::to_string(worst_map));
  v.require(worst_ortho < 1e-9, "|RtR-I| " + std::to_string(worst_ortho));
  v.require(worst_det < 1e-9, "det");
  v.require(elapsed < 1.0, "runtime");
  v.notes << " max|RA-B|=" << worst_map << " max|RtR-I|=" << worst_ortho;
}

void regularizer_zero_cases(Verdict& v) {
  const auto start = Clock::now();
  RngStream rng(102);

  // Rigidity under a uniform translation of every point.
  const auto pts = random_points(rng, 200);
  const KnnCache knn = build_knn(pts, 20);
  const Vec3 shift(rng.normal(), rng.normal(), rng.normal());
  v.require(rigidity_loss(std::vector<Vec3>(pts.size(), shift), knn).value == 0.0, "rigidity translation");

  // Acceleration under displacements affine in time. Dyadic coefficients
  // on a dyadic time grid keep every second difference exactly zero.
  std::vector<std::vector<Vec3>> seq(16);
  for (int t = 0; t < 16; ++t) {
    for (int i = 0; i < 50; ++i) {
      const Vec3 base(std::ldexp(static_cast<double>(i % 7), -2), std::ldexp(static_cast<double>(i % 5), -3), 1.0);
      const Vec3 rate(0.5, -0.25, std::ldexp(static_cast<double>(i % 3), -1));
      seq[static_cast<std::size_t>(t)].push_back(base + rate * std::ldexp(static_cast<double>(t), -4));
    }
  }
  v.require(acceleration_loss(seq).value == 0.0, "acceleration affine");
  // Arbitrary affine motion is zero up to rounding.
  for (int t = 0; t < 16; ++t) {
    for (int i = 0; i < 50; ++i) seq[t][i] = Vec3(0.1 * i, 0.3, -0.7) + Vec3(0.37, -1.1, 0.2 * i) * (t / 15.0);
  }
  const double affine = acceleration_loss(seq).value;
  v.require(affine < 1e-12, "acceleration random affine");

  // Solid spheres separated by more than the sum of their radii.
  for (int trial = 0; trial < 50; ++trial) {
    const double ra = rng.uniform(0.2, 1.0), rb = rng.uniform(0.2, 1.0);
    std::vector<Vec3> a, b;
    for (int i = 0; i < 60; ++i) a.push_back(ra * random_unit(rng) * std::cbrt(rng.uniform()));
    const Vec3 offset = random_unit(rng) * (ra + rb) * rng.uniform(1.01, 3.0);
    for (int i = 0; i < 60; ++i) b.push_back(offset + rb * random_unit(rng) * std::cbrt(rng.uniform()));
    v.require(contact_loss(a, b).value == 0.0, "separated spheres");
  }

  // Interpenetration: a = (0.5, 0, 0) with centroid at the origin and its
  // nearest neighbor at (0.2, 0, 0): (0 - 0.2) * (0.5 - 0.2) = -0.06.
  const double example = directed_contact_loss(std::vector<Vec3>{Vec3(0.5, 0, 0)}, Vec3::Zero(),
                                               std::vector<Vec3>{Vec3(0.2, 0, 0)})
                             .value;
  v.require(std::abs(example - 0.06) <= 1e-12, "interpenetration 0.06");
  v.require(seconds_since(start) < 1.0, "runtime");
  v.notes << " interpenetration=" << example << " random-affine accel=" << affine;
}

void gradient_oracle(Verdict& v) {
  const auto start = Clock::now();
  RngStream rng(103);
  std::size_t compared = 0;

  // Deformation network: random small architectures, every parameter.
  for (int trial = 0; trial < 100; ++trial) {
    std::vector<int> widths;
    const int depth = 1 + static_cast<int>(rng.below(2));
    for (int l = 0; l < depth; ++l) widths.push_back(2 + static_cast<int>(rng.below(11)));
    RngStream init = rng.split(static_cast<std::uint64_t>(trial));
    DeformationNet net = DeformationNet::create(widths, PositionalEncoding{}, Vec3(-1, -1, -1), Vec3(1, 1, 1), init);
    std::vector<double> params = net.parameters();
    for (auto& p : params) p = rng.uniform(-0.5, 0.5);  // the zero output layer would hide hidden gradients
    net.set_parameters(params);
    const auto pts = random_points(rng, 1 + rng.below(50), 1.2);
    const double t = rng.uniform();
    std::vector<Vec3> up(pts.size());
    for (auto& u : up) u = Vec3(rng.normal(), rng.normal(), rng.normal());
    const auto grad = net.backward(net.forward(pts, t), up);
    auto objective = [&] {
      net.set_parameters(params);
      const auto d = net.deform(pts, t);
      double s = 0.0;
      for (std::size_t i = 0; i < d.size(); ++i) s += d[i].dot(up[i]);
      return s;
    };
    for (std::size_t k = 0; k < params.size(); ++k) {
      const double fd = central_difference(objective, params[k]);
      ++compared;
      v.require(rel_close(grad[k], fd, 1e-4, 1e-8), "deformation trial " + std::to_string(trial));
    }
  }

  // Rigidity.
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t n = 2 + rng.below(49);
    const auto pts = random_points(rng, n);
    const KnnCache knn = build_knn(pts, 1 + static_cast<int>(rng.below(8)));
    std::vector<Vec3> d(n);
    for (auto& x : d) x = 0.3 * Vec3(rng.normal(), rng.normal(), rng.normal());
    const auto loss = rigidity_loss(d, knn);
    for (std::size_t i = 0; i < n; ++i) {
      for (int a = 0; a < 3; ++a) {
        const double fd = central_difference([&] { return rigidity_loss(d, knn).value; }, d[i][a]);
        ++compared;
        v.require(rel_close(loss.grad[i][a], fd), "rigidity trial " + std::to_string(trial));
      }
    }
  }

  // Acceleration.
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t n = 1 + rng.below(50);
    const int steps = 3 + static_cast<int>(rng.below(4));
    std::vector<std::vector<Vec3>> seq(static_cast<std::size_t>(steps));
    for (auto& s : seq) {
      s.resize(n);
      for (auto& x : s) x = 0.3 * Vec3(rng.normal(), rng.normal(), rng.normal());
    }
    const auto loss = acceleration_loss(seq);
    for (int t = 0; t < steps; ++t) {
      for (std::size_t i = 0; i < n; ++i) {
        for (int a = 0; a < 3; ++a) {
          const double fd = central_difference([&] { return acceleration_loss(seq).value; }, seq[t][i][a]);
          ++compared;
          v.require(rel_close(loss.grads[t][i][a], fd), "acceleration trial " + std::to_string(trial));
        }
      }
    }
  }

  // Contact: piecewise smooth, so trials are drawn until 100 of them sit
  // at least 1e-3 (ten steps h) away from every kink.
  int contact_trials = 0, draws = 0, active = 0;
  while (contact_trials < 100 && draws < 5000) {
    ++draws;
    auto a = random_points(rng, 2 + rng.below(24), 0.6);
    auto b = translated(random_points(rng, 2 + rng.below(24), 0.6), Vec3(0.6, 0, 0));
    if (contact_kink_margin(a, b) <= 1e-3) continue;
    ++contact_trials;
    const auto loss = contact_loss(a, b);
    active += loss.value > 0;
    double diff = 0.0, norm = 0.0;
    for (auto* pts : {&a, &b}) {
      const auto& grad = pts == &a ? loss.grad_a : loss.grad_b;
      for (std::size_t i = 0; i < pts->size(); ++i) {
        for (int k = 0; k < 3; ++k) {
          const double fd = central_difference([&] { return contact_loss(a, b).value; }, (*pts)[i][k]);
          diff += (grad[i][k] - fd) * (grad[i][k] - fd);
          norm += std::max(grad[i][k] * grad[i][k], fd * fd);
          ++compared;
        }
      }
    }
    v.require(std::sqrt(diff) <= 1e-4 * std::sqrt(norm) + 1e-9, "contact trial " + std::to_string(contact_trials));
  }
  v.require(contact_trials == 100, "contact trials drawn");
  v.require(active > 40, "contact trials with active penalty");
  const double elapsed = seconds_since(start);
  v.require(elapsed < 30.0, "runtime");
  v.notes << " " << compared << " partials, contact " << contact_trials << " smooth trials (" << active
          << " active) from " << draws << " draws";
}

void rasterizer_equivalence(Verdict& v) {
  const auto start = Clock::now();
  RngStream rng(104);
  Camera cam;
  cam.image_width = cam.image_height = 64;
  double worst_oracle = 0.0;
  for (int scene = 0; scene < 20; ++scene) {
    std::vector<Splat2D> splats;
    for (int i = 0; i < 300; ++i) {
      Gaussian3D g;
      g.center = Vec3(rng.uniform(-1.5, 1.5), rng.uniform(-1.5, 2.0), rng.uniform(-1.5, 1.5));
      g.scale = Vec3(rng.uniform(0.02, 0.3), rng.uniform(0.02, 0.3), rng.uniform(0.02, 0.3));
      g.rotation = Quat(Eigen::AngleAxisd(rng.uniform(0, 2 * kPi), random_unit(rng)));
      g.opacity = rng.uniform(0.05, 1.0);
      g.color = Vec3(rng.uniform(), rng.uniform(), rng.uniform());
      if (auto s = project(g, cam)) splats.push_back(*s);
    }
    const RenderOutput tiled = composite(splats, cam);
    const RenderOutput naive = composite_reference(splats, cam);
    v.require(tiled.image == naive.image && tiled.alpha == naive.alpha, "tiled != per-pixel");
    const RenderOutput oracle = oracle_composite(splats, 64, 64);
    worst_oracle = std::max({worst_oracle, max_abs_diff(tiled.image, oracle.image), max_abs_diff(tiled.alpha, oracle.alpha)});

    std::vector<Splat2D> shuffled = splats;
    for (std::size_t i = shuffled.size(); i > 1; --i) std::swap(shuffled[i - 1], shuffled[rng.below(i)]);
    const RenderOutput permuted = composite(shuffled, cam);
    v.require(permuted.image == tiled.image && permuted.alpha == tiled.alpha, "permutation");
  }
  v.require(worst_oracle <= 1e-12, "independent blend oracle");
  v.require(seconds_since(start) < 30.0, "runtime");
  v.notes << " max|tiled-oracle|=" << worst_oracle;
}

void two_splat_closed_form(Verdict& v) {
  // Red splat at 50% opacity in front of an opaque green one, both centred
  // on the single pixel: 0.5 * red + 0.5 * 1.0 * green.
  Splat2D front, back;
  front.pixel_center = back.pixel_center = Vec2(0.5, 0.5);
  front.cov2d = back.cov2d = Mat2::Identity() * 0.3;
  front.depth = 1.0;
  front.opacity = 0.5;
  front.color = Vec3(1, 0, 0);
  back.depth = 2.0;
  back.opacity = 1.0;
  back.color = Vec3(0, 1, 0);
  Camera cam;
  cam.image_width = cam.image_height = 1;
  const RenderOutput out = composite(std::vector<Splat2D>{back, front}, cam);
  const double err = (out.pixel(0, 0) - Vec3(0.5, 0.5, 0.0)).cwiseAbs().maxCoeff();
  v.require(err <= 1e-12, "color");
  v.notes << " pixel=(" << out.pixel(0, 0).transpose() << ")";
}

void trajectory_exactness(Verdict& v) {
  RngStream rng(106);
  double worst = 0.0;
  for (int trial = 0; trial < 1000; ++trial) {
    const Vec3 p0(rng.normal(), rng.normal(), rng.normal()), v0(rng.normal(), rng.normal(), rng.normal());
    const Vec3 a(rng.normal(), rng.normal(), rng.normal());
    const Trajectory traj = Trajectory::ballistic(p0, v0, a);
    const double t = rng.uniform();
    const Vec3 expected(p0.x() + v0.x() * t + 0.5 * a.x() * t * t, p0.y() + v0.y() * t + 0.5 * a.y() * t * t,
                        p0.z() + v0.z() * t + 0.5 * a.z() * t * t);
    worst = std::max(worst, (position_at(traj, t) - expected).cwiseAbs().maxCoeff());
  }
  v.require(worst <= 1e-12, "closed form");

  // Apex of a projectile sits at t* = v_z / g.
  for (int trial = 0; trial < 50; ++trial) {
    const double g = rng.uniform(1, 20), vz = rng.uniform(0.1, 0.9) * g;
    const Trajectory traj = Trajectory::ballistic(Vec3::Zero(), Vec3(rng.normal(), rng.normal(), vz), Vec3(0, 0, -g));
    const double apex = vz / g;
    const double top = position_at(traj, apex).z();
    v.require(std::abs(top - vz * vz / (2 * g)) <= 1e-12, "apex height");
    for (double dt : {-1e-3, 1e-3}) v.require(position_at(traj, apex + dt).z() < top, "apex is a maximum");
  }

  // Truncation against a second sphere: the surviving samples are all
  // collision-free by the oracle test, and truncating again is a no-op.
  RngStream obj_rng(7);
  const GaussianObject moving = make_object(sphere_points(200, 1.0, Vec3::Constant(0.5)), 8, obj_rng);
  const std::vector<Vec3> still = moving.centers();
  const std::vector<std::vector<Vec3>> others{still};
  int collided = 0;
  for (int trial = 0; trial < 10; ++trial) {
    const Trajectory traj = Trajectory::ballistic(Vec3(-4, rng.uniform(-0.5, 0.5), rng.uniform(-0.5, 0.5)),
                                                  Vec3(rng.uniform(3, 8), rng.uniform(-1, 1), rng.uniform(0, 3)),
                                                  Vec3(0, 0, -rng.uniform(0, 6)));
    CollisionCheckConfig cfg;
    cfg.n_samples = 32;
    const auto first = check_and_truncate(traj, moving, others, cfg);
    collided += first.report.collided;
    const auto times = uniform_times(first.trajectory.t_max, cfg.n_samples);
    for (double t : times) {
      v.require(!oracle_collides(place_object(moving, first.trajectory, t, times), still), "retained sample collides");
    }
    const auto second = check_and_truncate(first.trajectory, moving, others, cfg);
    v.require(!second.report.collided && second.trajectory.t_max == first.trajectory.t_max, "idempotence");
  }
  v.require(collided > 0, "no trial exercised truncation");
  v.notes << " max position error=" << worst << ", " << collided << "/10 throws truncated";
}

GaussianObject grid_object(RngStream& rng, bool random_colors) {
  std::vector<ColoredPoint> pts;
  for (int i = 0; i < 8; ++i) {
    for (int j = 0; j < 8; ++j) {
      const Vec3 color = random_colors ? Vec3(rng.uniform(), rng.uniform(), rng.uniform()) : Vec3::Constant(0.5);
      pts.push_back({Vec3((i - 3.5) * 0.42, 0.0, (j - 3.5) * 0.42), color});
    }
  }
  GaussianObject obj = make_object(pts, 8, rng);
  for (auto& g : obj.gaussians) {
    g.scale = Vec3::Constant(0.2);
    g.opacity = 0.9;
  }
  return obj;
}

RenderOutput render_alone(const GaussianObject& obj, const Camera& cam) {
  Scene scene;
  scene.objects.push_back(obj);
  scene.trajectories.push_back(Trajectory::identity());
  return render_scene(scene, cam, 0.0, RenderMode::single(0));
}

double l2(const RenderOutput& a, const RenderOutput& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.image.size(); ++i) s += (a.image[i] - b.image[i]) * (a.image[i] - b.image[i]);
  return std::sqrt(s);
}

void sds_convergence(Verdict& v) {
  const auto start = Clock::now();

  // Target-image denoiser on an 8 x 8 target.
  Camera cam;
  cam.image_width = cam.image_height = 8;
  RngStream rng(107), target_rng(108);
  Scene scene;
  scene.objects.push_back(grid_object(rng, false));
  scene.trajectories.push_back(Trajectory::identity());
  const RenderOutput target = render_alone(grid_object(target_rng, true), cam);
  const double before = l2(render_alone(scene.objects[0], cam), target);
  TargetImageDenoiser image(Modality::image, target), multiview(Modality::multiview, target);
  TrainSettings settings;
  settings.sds.static_iterations = 200;
  settings.sds.iterations = 0;
  settings.fixed_cameras = {cam};
  settings.width = settings.height = 8;
  settings.knn_k = 8;
  train(scene, settings, {&image, &multiview, nullptr}, 1);
  const double after = l2(render_alone(scene.objects[0], cam), target);
  v.require(after <= 0.1 * before, "reduction below 90%");

  // Perfect-prediction oracle: a zero-init deformation stays put.
  Scene dyn;
  RngStream ra(109), rb(110);
  dyn.objects.push_back(make_object(sphere_points(120, 0.4, Vec3(0.9, 0.3, 0.2)), 8, ra, "a ball"));
  dyn.objects.push_back(make_object(box_points(120, Vec3(0.4, 0.4, 0.4), Vec3(0.3, 0.5, 0.9), rb), 8, rb, "a box"));
  dyn.trajectories.push_back(Trajectory::ballistic(Vec3(-2, 0, 0), Vec3(1.0, 0, 0), Vec3::Zero()));
  dyn.trajectories.push_back(Trajectory::identity());
  dyn.scene_prompt = "a ball rolls towards a box";
  std::vector<std::vector<double>> initial;
  for (const auto& o : dyn.objects) initial.push_back(o.deformation.parameters());
  OracleDenoiser oracle_image(Modality::image), oracle_video(Modality::video);
  TrainSettings dyn_settings;
  dyn_settings.width = 24;
  dyn_settings.height = 16;
  dyn_settings.sds.iterations = 100;
  dyn_settings.sds.frames = 6;
  dyn_settings.sds.image_frames = 2;
  dyn_settings.knn_k = 8;
  dyn_settings.camera.radius = 5.0;
  const auto result = train(dyn, dyn_settings, {&oracle_image, nullptr, &oracle_video}, 2);
  double drift = 0.0;
  for (std::size_t o = 0; o < dyn.objects.size(); ++o) {
    const auto now = dyn.objects[o].deformation.parameters();
    drift = std::max(drift, max_abs_diff(now, initial[o]));
  }
  v.require(result.history.size() == 100, "dynamic steps");
  v.require(drift <= 1e-12, "oracle moved parameters");
  const double elapsed = seconds_since(start);
  v.require(elapsed < 120.0, "runtime");
  v.notes << " |render-target| " << before << " -> " << after << " (" << 100.0 * (1.0 - after / before)
          << "% reduction), oracle drift=" << drift;
}

void mode_schedule(Verdict& v) {
  RngStream rng(108);
  const SdsConfig config;
  int single = 0;
  for (int i = 0; i < 10000; ++i) single += draw_render_mode(rng, config.p_single, 2).is_single();
  const double freq = single / 10000.0;
  v.require(std::abs(freq - 0.2) <= 0.015, "frequency");
  v.require(config.p_single == 0.2, "default probability");
  v.notes << " single-render frequency=" << freq;
}

void default_constants(Verdict& v) {
  const PipelineConfig c;
  v.require(c.reg.omega1 == 1e-4, "omega1");
  v.require(c.reg.omega2 == 1e3, "omega2");
  v.require(c.knn_k == 60, "k");
  v.require(c.sds.frames == 16, "frames");
  v.require(c.sds.image_frames == 4, "image subsample");
  v.require(c.sds.learning_rate == 1e-4, "learning rate");
  v.require(c.sds.iterations == 3000, "iterations");
  v.require(c.height == 320 && c.width == 576, "resolution");
  // The same defaults survive an empty config document.
  const PipelineConfig empty = config_from_json(nlohmann::json::object());
  v.require(to_json(empty) == to_json(c), "empty document");
}

void end_to_end_determinism(Verdict& v) {
  const auto start = Clock::now();
  PipelineConfig c = load_config(std::string(SCENE4D_SOURCE_DIR) + "/configs/offline_small.json");
  const fs::path out = scene4d::testing::temp_dir("acceptance_e2e");
  c.output_dir = out.string();
  v.require(c.offline && c.entities.size() == 2 && c.entities[0].point_count == 2000 &&
                c.entities[1].point_count == 2000 && c.width == 64 && c.height == 64 && c.sds.iterations == 50 &&
                c.seed.has_value(),
            "config shape");
  const RunResult a = run_pipeline(c);
  const RunResult b = run_pipeline(c);
  v.require(!a.frames.empty() && a.frames.size() == b.frames.size(), "frame count");
  std::size_t identical = 0;
  for (std::size_t i = 0; i < std::min(a.frames.size(), b.frames.size()); ++i) {
    const std::string fa = slurp(a.frames[i]);
    const bool same = !fa.empty() && fa == slurp(b.frames[i]) &&
                      fs::relative(a.frames[i], a.run_dir) == fs::relative(b.frames[i], b.run_dir);
    identical += same;
  }
  v.require(identical == a.frames.size(), "frames differ");
  const std::string csv = slurp(a.run_dir / "losses.csv");
  v.require(!csv.empty() && csv == slurp(b.run_dir / "losses.csv"), "loss CSV differs");
  v.require(a.history.size() == 50, "iterations");
  const double elapsed = seconds_since(start);
  v.require(elapsed < 300.0, "runtime");
  v.notes << " " << identical << "/" << a.frames.size() << " frames identical, both runs in " << elapsed << " s";
  fs::remove_all(out);
}

void knn_oracle(Verdict& v) {
  RngStream rng(111);
  for (int trial = 0; trial < 20; ++trial) {
    const std::size_t n = 2 + rng.below(499);
    const auto pts = random_points(rng, n);
    const KnnCache knn = build_knn(pts, kDefaultNeighborCount);
    v.require(knn.indices == oracle_knn(pts, kDefaultNeighborCount), "cloud " + std::to_string(trial));
  }
}

}  // namespace

int main() {
  struct Criterion {
    const char* name;
    std::function<void(Verdict&)> run;
  };
  const std::vector<Criterion> criteria{
      {"rotation alignment of unit-vector pairs", rotation_alignment},
      {"regularizer zero cases and interpenetration example", regularizer_zero_cases},
      {"analytic gradients match central differences", gradient_oracle},
      {"tiled rasterizer equals per-pixel compositing", rasterizer_equivalence},
      {"two-splat compositing closed form", two_splat_closed_form},
      {"trajectory closed form, apex and truncation", trajectory_exactness},
      {"score distillation convergence and oracle fixed point", sds_convergence},
      {"render-mode schedule statistics", mode_schedule},
      {"default constants", default_constants},
      {"end-to-end offline determinism", end_to_end_determinism},
      {"cached kNN equals brute force", knn_oracle},
  };
  int failed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    Verdict v;
    const auto start = Clock::now();
    try {
      criteria[i].run(v);
    } catch (const std::exception& e) {
      v.ok = false;
      v.notes << " [exception: " << e.what() << "]";
    }
    const double elapsed = seconds_since(start);
    failed += !v.ok;
    std::printf("%s %2zu %s (%.2f s)%s\n", v.ok ? "PASS" : "FAIL", i + 1, criteria[i].name, elapsed,
                v.notes.str().c_str());
    std::fflush(stdout);
  }
  std::printf("%d/%zu criteria passed\n", static_cast<int>(criteria.size()) - failed, criteria.size());
  return failed == 0 ? 0 : 1;
}
