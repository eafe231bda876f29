#include <gtest/gtest.h>

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>
#include <cmath>
#include <fstream>

#include "helpers.hpp"
#include "scene4d/core/camera.hpp"
#include "scene4d/core/error.hpp"
#include "scene4d/core/gaussian.hpp"
#include "scene4d/core/knn.hpp"
#include "scene4d/core/object.hpp"
#include "scene4d/core/ply.hpp"
#include "scene4d/core/scene.hpp"
#include "scene4d/core/shapes.hpp"

using namespace scene4d;
using scene4d::testing::random_points;
using scene4d::testing::temp_dir;

namespace {

Gaussian3D unit_gaussian() {
  Gaussian3D g;
  g.scale = Vec3::Ones();
  return g;
}

Quat random_rotation(RngStream& rng) {
  Quat q(rng.normal(), rng.normal(), rng.normal(), rng.normal());
  q.normalize();
  return q;
}

std::vector<ColoredPoint> cube_corners() {
  std::vector<ColoredPoint> pts;
  for (int i = 0; i < 8; ++i) {
    pts.push_back({Vec3(i & 1, (i >> 1) & 1, (i >> 2) & 1), Vec3(0.1 * i, 0.5, 1.0)});
  }
  return pts;
}

}  // namespace

TEST(Covariance, IdentityRotationUnitScale) {
  EXPECT_TRUE(covariance_of(unit_gaussian()).isApprox(Mat3::Identity(), 1e-15));
}

TEST(Covariance, AxisAlignedScale) {
  Gaussian3D g = unit_gaussian();
  g.scale = Vec3(2, 1, 1);
  EXPECT_TRUE(covariance_of(g).isApprox(Vec3(4, 1, 1).asDiagonal().toDenseMatrix(), 1e-15));
}

TEST(Covariance, QuarterTurnAboutZ) {
  Gaussian3D g = unit_gaussian();
  g.scale = Vec3(2, 1, 1);
  g.rotation = Quat(std::cos(kPi / 4), 0, 0, std::sin(kPi / 4));
  // R = [[0,-1,0],[1,0,0],[0,0,1]]; R diag(4,1,1) R^T = diag(1,4,1).
  const Mat3 expected = Vec3(1, 4, 1).asDiagonal();
  EXPECT_LT((covariance_of(g) - expected).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(Covariance, SymmetricPositiveDefiniteWithScaleEigenvalues) {
  RngStream rng(11);
  for (int trial = 0; trial < 200; ++trial) {
    Gaussian3D g;
    g.scale = Vec3(rng.uniform(0.01, 3), rng.uniform(0.01, 3), rng.uniform(0.01, 3));
    g.rotation = random_rotation(rng);
    const Mat3 c = covariance_of(g);
    EXPECT_LT((c - c.transpose()).cwiseAbs().maxCoeff(), 1e-12);
    Eigen::LLT<Mat3> llt(c);
    EXPECT_EQ(llt.info(), Eigen::Success);
    Vec3 ev = Eigen::SelfAdjointEigenSolver<Mat3>(c).eigenvalues();
    Vec3 sq = g.scale.cwiseProduct(g.scale);
    std::sort(ev.data(), ev.data() + 3);
    std::sort(sq.data(), sq.data() + 3);
    EXPECT_LT((ev - sq).cwiseAbs().maxCoeff(), 1e-10 * sq.maxCoeff());
  }
}

TEST(QueryGaussian, AtCenterIsOne) {
  Gaussian3D g = unit_gaussian();
  g.center = Vec3(0.3, -2, 5);
  EXPECT_EQ(query_gaussian(g, g.center), 1.0);
}

TEST(QueryGaussian, UnitIsotropicExamples) {
  const Gaussian3D g = unit_gaussian();
  EXPECT_NEAR(query_gaussian(g, Vec3(1, 0, 0)), std::exp(-0.5), 1e-15);
  EXPECT_NEAR(query_gaussian(g, Vec3(3, 4, 0)), std::exp(-12.5), 1e-18);
}

TEST(QueryGaussian, RigidTransformInvariance) {
  RngStream rng(5);
  for (int trial = 0; trial < 100; ++trial) {
    Gaussian3D g;
    g.center = Vec3(rng.normal(), rng.normal(), rng.normal());
    g.scale = Vec3(rng.uniform(0.2, 2), rng.uniform(0.2, 2), rng.uniform(0.2, 2));
    g.rotation = random_rotation(rng);
    const Vec3 x = g.center + Vec3(rng.normal(), rng.normal(), rng.normal());

    const Quat q = random_rotation(rng);
    const Vec3 shift(rng.normal(), rng.normal(), rng.normal());
    Gaussian3D moved = g;
    moved.center = q * g.center + shift;
    moved.rotation = q * g.rotation;
    EXPECT_NEAR(query_gaussian(moved, q * x + shift), query_gaussian(g, x), 1e-12);
  }
}

TEST(GaussianValidate, RejectsBadScaleAndRotation) {
  Gaussian3D g = unit_gaussian();
  g.scale = Vec3(1, 0, 1);
  EXPECT_THROW(validate(g), ContractError);
  g = unit_gaussian();
  g.rotation = Quat(2, 0, 0, 0);
  EXPECT_THROW(validate(g), ContractError);
  g = unit_gaussian();
  g.opacity = 1.5;
  g.color = Vec3(-1, 0.5, 2);
  sanitize(g);
  EXPECT_EQ(g.opacity, 1.0);
  EXPECT_EQ(g.color, Vec3(0, 0.5, 1));
}

TEST(Knn, MatchesBruteForceOnRandomClouds) {
  RngStream rng(21);
  for (int trial = 0; trial < 20; ++trial) {
    const std::size_t n = 2 + rng.below(499);
    const auto pts = random_points(rng, n);
    const KnnCache fast = build_knn(pts, 60);
    const KnnCache slow = build_knn_brute_force(pts, 60);
    EXPECT_EQ(fast.k, slow.k);
    EXPECT_EQ(fast.indices, slow.indices);
  }
}

TEST(Knn, ParallelBuildIsIdentical) {
  RngStream rng(22);
  const auto pts = random_points(rng, 700);
  EXPECT_EQ(build_knn(pts, 20, 1).indices, build_knn(pts, 20, 4).indices);
}

TEST(Knn, DuplicatePointsTieBreakByIndex) {
  const std::vector<Vec3> pts{Vec3::Zero(), Vec3::Zero(), Vec3::Zero(), Vec3(5, 0, 0)};
  const KnnCache knn = build_knn(pts, 2);
  EXPECT_EQ(std::vector<int>(knn.neighbors(0).begin(), knn.neighbors(0).end()), (std::vector<int>{1, 2}));
  EXPECT_EQ(std::vector<int>(knn.neighbors(2).begin(), knn.neighbors(2).end()), (std::vector<int>{0, 1}));
  EXPECT_EQ(std::vector<int>(knn.neighbors(3).begin(), knn.neighbors(3).end()), (std::vector<int>{0, 1}));
}

TEST(Knn, KClampedAndNeverSelf) {
  RngStream rng(3);
  const auto pts = random_points(rng, 8);
  const KnnCache knn = build_knn(pts, 60);
  EXPECT_EQ(knn.k, 7);
  for (std::size_t i = 0; i < 8; ++i) {
    for (int j : knn.neighbors(i)) EXPECT_NE(static_cast<std::size_t>(j), i);
  }
}

TEST(Object, InitialScaleIsHalfMeanThreeNeighborDistance) {
  const std::vector<ColoredPoint> pts{{Vec3(0, 0, 0), Vec3::Zero()},
                                      {Vec3(1, 0, 0), Vec3::Zero()},
                                      {Vec3(0, 2, 0), Vec3::Zero()},
                                      {Vec3(0, 0, 3), Vec3::Zero()}};
  RngStream rng(1);
  const GaussianObject obj = make_object(pts, 60, rng);
  // Point 0 has neighbors at distances 1, 2, 3.
  EXPECT_NEAR(obj.gaussians[0].scale.x(), 0.5 * (1 + 2 + 3) / 3.0, 1e-15);
  EXPECT_EQ(obj.gaussians[0].scale.x(), obj.gaussians[0].scale.y());
  EXPECT_EQ(obj.knn_cache.k, 3);
  EXPECT_NO_THROW(validate(obj));
  EXPECT_EQ(obj.canonical_heading, Vec3::UnitX());
}

TEST(Ply, EightPointCubeLoads) {
  const auto dir = temp_dir("ply_cube");
  const auto path = (dir / "cube.ply").string();
  write_point_cloud(path, cube_corners(), PlyFormat::ascii);
  RngStream rng(2);
  const GaussianObject obj = load_object_from_pointcloud(path, 8, 60, rng);
  ASSERT_EQ(obj.gaussians.size(), 8u);
  EXPECT_EQ(obj.knn_cache.k, 7);
  for (std::size_t i = 0; i < 8; ++i) {
    EXPECT_EQ(obj.gaussians[i].center, cube_corners()[i].position);
    EXPECT_EQ(obj.knn_cache.neighbors(i).size(), 7u);
  }
}

TEST(Ply, BinaryAndAsciiRoundTrip) {
  const auto dir = temp_dir("ply_round");
  RngStream rng(4);
  std::vector<ColoredPoint> pts;
  for (int i = 0; i < 100; ++i) {
    const Eigen::Vector3f p(static_cast<float>(rng.uniform(-1, 1)), static_cast<float>(rng.uniform(-1, 1)),
                            static_cast<float>(rng.uniform(-1, 1)));
    pts.push_back({p.cast<double>(), Vec3(rng.below(256), rng.below(256), rng.below(256)) / 255.0});
  }
  for (auto fmt : {PlyFormat::ascii, PlyFormat::binary_little_endian}) {
    const auto path = (dir / (fmt == PlyFormat::ascii ? "a.ply" : "b.ply")).string();
    write_point_cloud(path, pts, fmt);
    const auto back = read_point_cloud(path);
    ASSERT_EQ(back.size(), pts.size());
    for (std::size_t i = 0; i < pts.size(); ++i) {
      EXPECT_EQ(back[i].position, pts[i].position);
      EXPECT_LT((back[i].color - pts[i].color).cwiseAbs().maxCoeff(), 1e-12);
    }
  }
}

TEST(Ply, GaussianAttributesRoundTripExactly) {
  const auto dir = temp_dir("ply_gauss");
  RngStream rng(6);
  std::vector<Gaussian3D> gs(50);
  for (auto& g : gs) {
    g.center = Vec3(rng.normal(), rng.normal(), rng.normal());
    g.scale = Vec3(rng.uniform(0.01, 1), rng.uniform(0.01, 1), rng.uniform(0.01, 1));
    g.rotation = random_rotation(rng);
    g.opacity = rng.uniform();
    g.color = Vec3(rng.uniform(), rng.uniform(), rng.uniform());
  }
  const auto path = (dir / "g.ply").string();
  write_gaussians(path, gs);
  const auto back = read_gaussians(path);
  ASSERT_EQ(back.size(), gs.size());
  for (std::size_t i = 0; i < gs.size(); ++i) {
    EXPECT_EQ(back[i].center, gs[i].center);
    EXPECT_EQ(back[i].scale, gs[i].scale);
    EXPECT_EQ(back[i].rotation.coeffs(), gs[i].rotation.coeffs());
    EXPECT_EQ(back[i].opacity, gs[i].opacity);
    EXPECT_EQ(back[i].color, gs[i].color);
  }
}

TEST(Ply, TooFewPointsIsCountError) {
  const auto dir = temp_dir("ply_count");
  const auto path = (dir / "cube.ply").string();
  write_point_cloud(path, cube_corners());
  RngStream rng(2);
  EXPECT_THROW(load_object_from_pointcloud(path, 9, 60, rng), CountError);
}

TEST(Ply, SubsamplesToRequestedCount) {
  const auto dir = temp_dir("ply_sub");
  const auto path = (dir / "cube.ply").string();
  write_point_cloud(path, cube_corners());
  RngStream rng(2);
  const auto obj = load_object_from_pointcloud(path, 4, 60, rng);
  ASSERT_EQ(obj.gaussians.size(), 4u);
  EXPECT_EQ(obj.gaussians[1].center, cube_corners()[2].position);
}

TEST(Ply, MalformedInputIsFormatError) {
  const auto dir = temp_dir("ply_bad");
  const auto path = (dir / "bad.ply").string();
  {
    std::ofstream f(path);
    f << "ply\nformat ascii 1.0\nelement vertex 3\nproperty float x\nproperty float y\nproperty float z\n"
         "end_header\n0 0 0\n1 1\n";
  }
  EXPECT_THROW(read_point_cloud(path), InputFormatError);
  {
    std::ofstream f(path);
    f << "not a ply file\n";
  }
  EXPECT_THROW(read_point_cloud(path), InputFormatError);
  EXPECT_THROW(read_point_cloud((dir / "missing.ply").string()), InputFormatError);
}

TEST(Ply, LargeCloudsKeepSixtyNeighbors) {
  const auto dir = temp_dir("ply_large");
  RngStream rng(8);
  for (std::size_t n : {20000u, 60000u}) {
    RngStream sr = rng.split(n);
    const auto pts = procedural_points("box", n, 1.0, Vec3(0.5, 0.5, 0.5), sr);
    const auto path = (dir / ("cloud_" + std::to_string(n) + ".ply")).string();
    write_point_cloud(path, pts);
    RngStream orng = rng.split("object");
    const auto obj = load_object_from_pointcloud(path, n, kDefaultNeighborCount, orng);
    EXPECT_EQ(obj.gaussians.size(), n);
    EXPECT_EQ(obj.knn_cache.k, 60);
  }
}

TEST(SceneModel, TimeGridAndValidation) {
  const auto grid = make_time_grid(16);
  ASSERT_EQ(grid.size(), 16u);
  EXPECT_EQ(grid.front(), 0.0);
  EXPECT_EQ(grid.back(), 1.0);
  EXPECT_NEAR(grid[1], 1.0 / 15.0, 1e-15);

  Scene scene;
  RngStream rng(1);
  scene.objects.push_back(make_object(cube_corners(), 60, rng));
  EXPECT_THROW(validate(scene), ContractError);
  scene.trajectories.push_back(Trajectory::identity());
  EXPECT_NO_THROW(validate(scene));
  scene.time_grid = {0.0, 0.5, 0.5, 1.0};
  EXPECT_THROW(validate(scene), ContractError);
}

TEST(CameraModel, AxesAndValidation) {
  Camera cam;
  cam.position = Vec3(0, -4, 0);
  cam.look_at = Vec3::Zero();
  const Vec3 pc = cam.to_camera(Vec3::Zero());
  EXPECT_NEAR(pc.x(), 0, 1e-15);
  EXPECT_NEAR(pc.y(), 0, 1e-15);
  EXPECT_NEAR(pc.z(), 4, 1e-15);
  // World +z (up) maps to camera -y (image rows grow downward).
  EXPECT_LT(cam.to_camera(Vec3(0, 0, 1)).y(), 0.0);
  EXPECT_NO_THROW(validate(cam));
  cam.up = Vec3(0, 1, 0);
  EXPECT_THROW(validate(cam), ContractError);
  cam = Camera{};
  cam.near = 0.0;
  EXPECT_THROW(validate(cam), ContractError);
}

TEST(Rng, DeterministicAndSplitIndependent) {
  RngStream a(42), b(42);
  for (int i = 0; i < 10; ++i) EXPECT_EQ(a.next_u64(), b.next_u64());
  RngStream parent(42);
  const auto before = parent.counter();
  RngStream child = parent.split("noise");
  EXPECT_EQ(parent.counter(), before);
  EXPECT_NE(child.next_u64(), RngStream(42).next_u64());
  double mean = 0.0, sq = 0.0;
  RngStream n(9);
  for (int i = 0; i < 20000; ++i) {
    const double x = n.normal();
    mean += x;
    sq += x * x;
  }
  EXPECT_NEAR(mean / 20000, 0.0, 0.03);
  EXPECT_NEAR(sq / 20000, 1.0, 0.04);
}
