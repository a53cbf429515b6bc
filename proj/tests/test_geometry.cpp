#include <doctest.h>

#include "helpers.hpp"
#include "lamino/geometry.hpp"

using namespace lamino;

namespace {
constexpr double kPi = 3.14159265358979323846;
LaminographyGeometry make_geom(double alpha, double d_so = 400.0, double d_sd = 800.0,
                               int nu = 64, int nv = 64, double px = 4.0) {
  return {alpha, d_so, d_sd, nu, nv, px};
}
}  // namespace

TEST_CASE("build_view at theta=0, alpha=0 reproduces the CT matrix") {
  const auto geom = make_geom(0.0);
  const ViewTransform v = build_view(geom, 0.0);
  Mat3 expected;
  expected << 0, 1, 0, 0, 0, -1, -1, 0, 0;
  CHECK((v.W - expected).cwiseAbs().maxCoeff() < 1e-15);
  CHECK((v.t - Vec3(0, 0, geom.d_so)).cwiseAbs().maxCoeff() < 1e-15);
}

TEST_CASE("build_view at theta=pi/2, alpha=pi/6 matches direct substitution") {
  const auto geom = make_geom(kPi / 6);
  const ViewTransform v = build_view(geom, kPi / 2);
  const double r3 = std::sqrt(3.0) / 2.0;
  Mat3 expected;
  expected << -1, 0, 0, 0, 0.5, -r3, 0, -r3, -0.5;
  CHECK((v.W - expected).cwiseAbs().maxCoeff() < 1e-12);
  CHECK((v.t - geom.d_so * Vec3(0, -0.5, r3)).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("W stays orthonormal and |t| = d_so over a (theta, alpha) grid") {
  for (int it = 0; it < 32; ++it) {
    for (int ia = 0; ia < 32; ++ia) {
      const double theta = 2.0 * kPi * it / 32.0;
      const double alpha = 0.5 * kPi * ia / 31.0;
      const auto geom = make_geom(alpha);
      const ViewTransform v = build_view(geom, theta);
      CHECK((v.W.transpose() * v.W - Mat3::Identity()).cwiseAbs().maxCoeff() < 1e-12);
      CHECK(std::abs(v.t.norm() - geom.d_so) < 1e-12 * geom.d_so);
    }
  }
}

TEST_CASE("matrix entries are continuous as alpha -> 0") {
  for (int it = 0; it < 8; ++it) {
    const double theta = 2.0 * kPi * it / 8.0;
    const ViewTransform a = build_view(make_geom(0.0), theta);
    const ViewTransform b = build_view(make_geom(1e-9), theta);
    CHECK((a.W - b.W).cwiseAbs().maxCoeff() < 1e-8);
    CHECK((a.t - b.t).cwiseAbs().maxCoeff() < 1e-8 * 400.0);
  }
}

TEST_CASE("orthonormality at an arbitrary view") {
  const ViewTransform v = build_view(make_geom(0.52), 0.7);
  CHECK((v.W * v.W.transpose() - Mat3::Identity()).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("world origin projects to the detector center at source distance d_so") {
  for (double alpha : {0.0, kPi / 6, kPi / 4}) {
    for (double theta : {0.0, 0.9, 4.0}) {
      const auto geom = make_geom(alpha);
      const auto p = project_point(build_view(geom, theta), geom, Vec3::Zero());
      REQUIRE(p.has_value());
      CHECK(p->pixel.x() == doctest::Approx(0.5 * (geom.nu - 1)).epsilon(1e-12));
      CHECK(p->pixel.y() == doctest::Approx(0.5 * (geom.nv - 1)).epsilon(1e-12));
      CHECK(p->ray.z() == doctest::Approx(geom.d_so).epsilon(1e-12));
    }
  }
}

TEST_CASE("moving toward the source along the central ray keeps uv, shortens depth") {
  const auto geom = make_geom(kPi / 6);
  const ViewTransform view = build_view(geom, 1.1);
  const Vec3 src = -view.W.transpose() * view.t;
  const double delta = 7.0;
  const Vec3 p = delta * src.normalized();  // origin shifted toward the source
  const auto proj = project_point(view, geom, p);
  REQUIRE(proj.has_value());
  CHECK(proj->pixel.x() == doctest::Approx(0.5 * (geom.nu - 1)).epsilon(1e-9));
  CHECK(proj->pixel.y() == doctest::Approx(0.5 * (geom.nv - 1)).epsilon(1e-9));
  CHECK(proj->ray.z() == doctest::Approx(geom.d_so - delta).epsilon(1e-12));
}

TEST_CASE("alpha=0 projection agrees with the standalone CT reference") {
  const auto geom = make_geom(0.0);
  std::mt19937_64 rng(41);
  std::uniform_real_distribution<double> u(-30.0, 30.0);
  for (int trial = 0; trial < 50; ++trial) {
    const double theta = 2 * kPi * u(rng) / 60.0;
    const ViewTransform view = build_view(geom, theta);
    const testing::CtReference ct(theta, geom.d_so, geom.d_sd, geom.nu, geom.nv,
                                  geom.pixel_size);
    const Vec3 p(u(rng), u(rng), u(rng));
    const auto proj = project_point(view, geom, p);
    REQUIRE(proj.has_value());
    const Vec2 expected = ct.pixel(p);
    CHECK(proj->pixel.x() == doctest::Approx(expected.x()).epsilon(1e-9));
    CHECK(proj->pixel.y() == doctest::Approx(expected.y()).epsilon(1e-9));
  }
}

TEST_CASE("points at or behind the source are reported as non-positive depth") {
  const auto geom = make_geom(0.3);
  const ViewTransform view = build_view(geom, 0.0);
  const Vec3 src = -view.W.transpose() * view.t;
  CHECK(!project_point(view, geom, src).has_value());
  CHECK(!project_point(view, geom, 2.0 * src).has_value());
}

TEST_CASE("projection jacobian") {
  const auto geom = make_geom(0.4);

  SUBCASE("on-axis block is (d_sd/z) I with zero shear") {
    const Vec3 p(0, 0, 350.0);
    const Mat3 j = projection_jacobian(p, geom);
    CHECK(j(0, 0) == doctest::Approx(geom.d_sd / 350.0).epsilon(1e-15));
    CHECK(j(1, 1) == doctest::Approx(geom.d_sd / 350.0).epsilon(1e-15));
    CHECK(j(0, 1) == 0.0);
    CHECK(j(1, 0) == 0.0);
    CHECK(j(0, 2) == 0.0);
    CHECK(j(1, 2) == 0.0);
  }

  SUBCASE("doubling z halves the 2x2 block") {
    const Vec3 p(11.0, -4.0, 300.0);
    const Mat3 j1 = projection_jacobian(p, geom);
    const Mat3 j2 = projection_jacobian(Vec3(11.0, -4.0, 600.0), geom);
    CHECK(j2(0, 0) == doctest::Approx(0.5 * j1(0, 0)).epsilon(1e-12));
    CHECK(j2(1, 1) == doctest::Approx(0.5 * j1(1, 1)).epsilon(1e-12));
  }

  SUBCASE("matches central differences of the ray-space map") {
    std::mt19937_64 rng(17);
    std::uniform_real_distribution<double> u(-40.0, 40.0);
    const auto phi = [&](const Vec3& p) {
      return Vec3(geom.d_sd * p.x() / p.z(), geom.d_sd * p.y() / p.z(), p.norm());
    };
    for (int trial = 0; trial < 20; ++trial) {
      const Vec3 p(u(rng), u(rng), 300.0 + u(rng));
      const Mat3 j = projection_jacobian(p, geom);
      const double h = 1e-4 * p.z();
      for (int c = 0; c < 3; ++c) {
        Vec3 dp = Vec3::Zero();
        dp[c] = h;
        const Vec3 fd = (phi(p + dp) - phi(p - dp)) / (2 * h);
        for (int r = 0; r < 3; ++r)
          CHECK(j(r, c) == doctest::Approx(fd[r]).epsilon(1e-5));
      }
    }
  }
}

TEST_CASE("transform_covariance") {
  SUBCASE("isotropic covariance is invariant under the orthographic limit") {
    const ViewTransform view = build_view(make_geom(0.35), 1.3);
    const Mat3 sigma = 4.0 * Mat3::Identity();
    const Mat3 out = transform_covariance(view, Mat3::Identity(), sigma);
    CHECK((out - sigma).cwiseAbs().maxCoeff() < 1e-12);
  }

  SUBCASE("random SPD stays symmetric positive semidefinite") {
    std::mt19937_64 rng(29);
    std::normal_distribution<double> n(0, 1);
    const auto geom = make_geom(0.6);
    for (int trial = 0; trial < 50; ++trial) {
      Mat3 a;
      for (int i = 0; i < 9; ++i) a.data()[i] = n(rng);
      const Mat3 sigma = a * a.transpose() + 0.1 * Mat3::Identity();
      const ViewTransform view = build_view(geom, n(rng));
      const Vec3 p(10 * n(rng), 10 * n(rng), 380 + 10 * n(rng));
      const Mat3 j = projection_jacobian(p, geom);
      const Mat3 out = transform_covariance(view, j, sigma);
      CHECK((out - out.transpose()).cwiseAbs().maxCoeff() < 1e-12);
      Eigen::SelfAdjointEigenSolver<Mat3> eig(out);
      CHECK(eig.eigenvalues().minCoeff() > -1e-12);
    }
  }

  SUBCASE("alpha=0 equals the CT-geometry route") {
    const auto geom = make_geom(0.0);
    const double theta = 0.0;
    const ViewTransform view = build_view(geom, theta);
    const testing::CtReference ct(theta, geom.d_so, geom.d_sd, geom.nu, geom.nv,
                                  geom.pixel_size);
    const Vec3 p(8.0, -5.0, 12.0);
    Mat3 sigma;
    sigma << 9, 1, 0, 1, 6, -1, 0, -1, 4;
    const Vec3 cam = view.W * p + view.t;
    const Mat3 j = projection_jacobian(cam, geom);
    const Mat3 ours = transform_covariance(view, j, sigma);

    const Vec3 cam_ct = ct.cam(p);
    const Mat3 j_ct = projection_jacobian(cam_ct, geom);
    const Mat3 ref = j_ct * ct.W * sigma * ct.W.transpose() * j_ct.transpose();
    CHECK((ours - ref).cwiseAbs().maxCoeff() < 1e-12 * ref.cwiseAbs().maxCoeff());
  }
}

TEST_CASE("view theta decomposes into the fixed tilt camera and a z-rotation") {
  // W(theta) = W(0) Rz(-theta) and t(theta) = Rz(theta) t(0), so projecting p
  // under view theta equals projecting Rz(-theta) p under view 0 with the
  // camera translated by (Rz(theta) - I) t(0).
  const auto geom = make_geom(kPi / 5);
  const ViewTransform v0 = build_view(geom, 0.0);
  std::mt19937_64 rng(53);
  std::uniform_real_distribution<double> u(-25.0, 25.0);
  for (int trial = 0; trial < 40; ++trial) {
    const double theta = 2 * kPi * (trial / 40.0);
    const ViewTransform v = build_view(geom, theta);
    Mat3 rz;
    rz << std::cos(theta), -std::sin(theta), 0, std::sin(theta), std::cos(theta), 0, 0,
        0, 1;
    const Vec3 p(u(rng), u(rng), u(rng));
    const Vec3 lhs = v.W * p + v.t;
    const Vec3 rhs = v0.W * (rz.transpose() * p) + rz * v0.t;
    CHECK((lhs - rhs).cwiseAbs().maxCoeff() < 1e-9);
  }
}
