#include <doctest.h>

#include <filesystem>
#include <fstream>

#include "helpers.hpp"
#include "lamino/io.hpp"
#include "lamino/types.hpp"

using namespace lamino;

TEST_CASE("density at the center of a single gaussian equals rho") {
  GaussianScene scene = testing::random_scene(1, 64.0, 1);
  const RadiativeGaussian& g = scene.gaussians[0];
  CHECK(scene.density_at(g.position) == doctest::Approx(g.density()).epsilon(1e-12));
}

TEST_CASE("isotropic gaussian at one sigma gives rho * exp(-1/2)") {
  GaussianScene scene;
  scene.bounds = {Vec3::Constant(-32), Vec3::Constant(32)};
  RadiativeGaussian g;
  g.position = Vec3(1.0, -2.0, 3.0);
  g.raw_density = std::log(1.7);
  const double s = 4.0;
  g.raw_scale = Vec3::Constant(RadiativeGaussian::raw_from_scale(s, scene.scale_floor()));
  scene.gaussians.push_back(g);

  const Vec3 probe = g.position + Vec3(s, 0, 0);
  CHECK(scene.density_at(probe) ==
        doctest::Approx(1.7 * std::exp(-0.5)).epsilon(1e-12));
}

TEST_CASE("two identical gaussians at the same point double the density") {
  GaussianScene scene = testing::random_scene(1, 64.0, 7);
  scene.gaussians.push_back(scene.gaussians[0]);
  const Vec3 p = scene.gaussians[0].position;
  GaussianScene single = scene;
  single.gaussians.pop_back();
  CHECK(scene.density_at(p) == doctest::Approx(2.0 * single.density_at(p)).epsilon(1e-12));
}

TEST_CASE("scene density matches a term-by-term summation oracle") {
  GaussianScene scene = testing::random_scene(5, 64.0, 3);
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> u(-30.0, 30.0);
  const double floor = scene.scale_floor();
  for (int trial = 0; trial < 20; ++trial) {
    const Vec3 x(u(rng), u(rng), u(rng));
    double expected = 0.0;
    for (const RadiativeGaussian& g : scene.gaussians) {
      const Vec3 d = x - g.position;
      const Mat3 inv = g.covariance(floor).inverse();
      expected += g.density() * std::exp(-0.5 * d.dot(inv * d));
    }
    CHECK(scene.density_at(x) == doctest::Approx(expected).epsilon(1e-12));
  }
}

TEST_CASE("covariance from quaternion and scales is symmetric with eigenvalues s^2") {
  std::mt19937_64 rng(5);
  std::normal_distribution<double> normal(0, 1);
  std::uniform_real_distribution<double> u(0.5, 4.0);
  for (int trial = 0; trial < 100; ++trial) {
    RadiativeGaussian g;
    Vec4 q(normal(rng), normal(rng), normal(rng), normal(rng));
    g.raw_quat = q;
    Vec3 s(u(rng), u(rng), u(rng));
    for (int a = 0; a < 3; ++a) g.raw_scale[a] = RadiativeGaussian::raw_from_scale(s[a], 0.0);
    const Mat3 cov = g.covariance(0.0);
    CHECK((cov - cov.transpose()).cwiseAbs().maxCoeff() < 1e-12);
    Eigen::SelfAdjointEigenSolver<Mat3> eig(cov);
    Vec3 expected = s.cwiseProduct(s);
    std::sort(expected.data(), expected.data() + 3);
    for (int a = 0; a < 3; ++a)
      CHECK(eig.eigenvalues()[a] == doctest::Approx(expected[a]).epsilon(1e-9));
    // rotation matrix is orthonormal
    const Mat3 r = g.rotation();
    CHECK((r.transpose() * r - Mat3::Identity()).cwiseAbs().maxCoeff() < 1e-6);
  }
}

TEST_CASE("rasterize_scene_to_volume") {
  SUBCASE("far-away gaussians leave the grid essentially empty") {
    GaussianScene scene = testing::random_scene(3, 64.0, 9, 0.01, 0.02);
    for (RadiativeGaussian& g : scene.gaussians) g.position += Vec3(500, 0, 0);
    const Volume vol = rasterize_scene_to_volume(scene, GridSpec::centered_cube(16, 4.0));
    double max_rho = 0.0;
    for (const RadiativeGaussian& g : scene.gaussians)
      max_rho = std::max(max_rho, g.density());
    CHECK(vol.max_value() < max_rho * std::exp(-18.0));
  }

  SUBCASE("peak voxel lands within one voxel of the gaussian center") {
    GaussianScene scene = testing::random_scene(1, 64.0, 13, 0.05, 0.08);
    const GridSpec grid = GridSpec::centered_cube(64, 1.0);
    const Volume vol = rasterize_scene_to_volume(scene, grid);
    int best[3] = {0, 0, 0};
    double best_v = -1.0;
    for (int k = 0; k < 64; ++k)
      for (int j = 0; j < 64; ++j)
        for (int i = 0; i < 64; ++i)
          if (vol.at(i, j, k) > best_v) {
            best_v = vol.at(i, j, k);
            best[0] = i;
            best[1] = j;
            best[2] = k;
          }
    const Vec3 peak = grid.voxel_center(best[0], best[1], best[2]);
    CHECK((peak - scene.gaussians[0].position).cwiseAbs().maxCoeff() <=
          grid.voxel_size * 1.0 + 1e-12);
  }

  SUBCASE("total mass matches the closed-form gaussian integral within 1%") {
    GaussianScene scene = testing::random_scene(4, 64.0, 17, 0.02, 0.04);
    const GridSpec grid = GridSpec::centered_cube(96, 1.0);  // generous margins
    const Volume vol = rasterize_scene_to_volume(scene, grid);
    double mass = 0.0;
    for (double v : vol.data) mass += v;
    mass *= std::pow(grid.voxel_size, 3);
    double expected = 0.0;
    const double floor = scene.scale_floor();
    for (const RadiativeGaussian& g : scene.gaussians)
      expected += g.density() * std::pow(2.0 * 3.14159265358979323846, 1.5) *
                  g.scale(floor).prod();
    CHECK(mass == doctest::Approx(expected).epsilon(0.01));
  }
}

TEST_CASE("scene serialization round-trips bit-exactly") {
  namespace fs = std::filesystem;
  GaussianScene scene = testing::random_scene(37, 64.0, 23);
  const fs::path dir = fs::temp_directory_path() / "lamino_test_io";
  fs::create_directories(dir);
  const fs::path p1 = dir / "a.lgsc", p2 = dir / "b.lgsc";

  save_scene(p1, scene);
  GaussianScene loaded = load_scene(p1, scene.bounds);
  REQUIRE(loaded.count() == scene.count());
  save_scene(p2, loaded);

  std::ifstream f1(p1, std::ios::binary), f2(p2, std::ios::binary);
  const std::string b1((std::istreambuf_iterator<char>(f1)), {});
  const std::string b2((std::istreambuf_iterator<char>(f2)), {});
  CHECK(b1 == b2);
  CHECK(b1.size() == 4 + 4 + 8 + scene.count() * 44);

  // loaded raw parameters are exactly the f32-rounded originals
  for (size_t i = 0; i < scene.count(); ++i) {
    CHECK(loaded.gaussians[i].raw_density == double(float(scene.gaussians[i].raw_density)));
    for (int a = 0; a < 3; ++a)
      CHECK(loaded.gaussians[i].position[a] == double(float(scene.gaussians[i].position[a])));
  }
  fs::remove_all(dir);
}

TEST_CASE("volume and stack files round-trip through their sidecars") {
  namespace fs = std::filesystem;
  const fs::path dir = fs::temp_directory_path() / "lamino_test_io2";
  fs::create_directories(dir);

  Volume vol = testing::random_volume(8, 3);
  vol.grid.origin = Vec3(0.5, -1.0, 2.0);
  save_volume(dir / "v.f32", vol);
  const Volume loaded = load_volume(dir / "v.f32");
  CHECK(loaded.grid.dims == vol.grid.dims);
  CHECK(loaded.grid.origin == vol.grid.origin);
  for (size_t i = 0; i < vol.data.size(); ++i)
    CHECK(loaded.data[i] == double(float(vol.data[i])));

  ProjectionStack stack;
  stack.geom = {0.5, 100.0, 200.0, 6, 5, 2.0};
  stack.angles = {0.0, 1.25};
  stack.images.assign(2, Image(6, 5));
  stack.images[1].at(3, 2) = 7.5;
  save_stack(dir / "p.f32", stack);
  const ProjectionStack sl = load_stack(dir / "p.f32");
  CHECK(sl.views() == 2);
  CHECK(sl.geom.tilt_alpha == stack.geom.tilt_alpha);
  CHECK(sl.images[1].at(3, 2) == 7.5);
  fs::remove_all(dir);
}
