#pragma once

#include <random>

#include "lamino/geometry.hpp"
#include "lamino/types.hpp"

namespace lamino::testing {

/// Random scene in a centered cube of the given extent. Scales are drawn as a
/// fraction of the extent from [scale_lo, scale_hi].
inline GaussianScene random_scene(int count, double extent, uint64_t seed,
                                  double scale_lo = 0.10, double scale_hi = 0.20) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u01(0.0, 1.0);
  std::normal_distribution<double> normal(0.0, 1.0);

  GaussianScene scene;
  scene.bounds = {Vec3::Constant(-0.5 * extent), Vec3::Constant(0.5 * extent)};
  const double floor = scene.scale_floor();
  for (int i = 0; i < count; ++i) {
    RadiativeGaussian g;
    for (int a = 0; a < 3; ++a) g.position[a] = (u01(rng) - 0.5) * 0.5 * extent;
    g.raw_density = std::log(0.5 + 1.5 * u01(rng));
    Vec4 q(normal(rng), normal(rng), normal(rng), normal(rng));
    g.raw_quat = q / q.norm();
    for (int a = 0; a < 3; ++a) {
      const double s = (scale_lo + (scale_hi - scale_lo) * u01(rng)) * extent;
      g.raw_scale[a] = RadiativeGaussian::raw_from_scale(s, floor);
    }
    scene.gaussians.push_back(g);
  }
  return scene;
}

/// Independent circular cone-beam CT reference: source on a circle of radius
/// d_so in the z = 0 plane, camera aimed at the origin, detector centered on
/// the optical axis. Written from scratch against the usual construction so it
/// shares no code with build_view/project_point.
struct CtReference {
  Mat3 W;
  Vec3 source;
  double d_sd, pixel_size;
  int nu, nv;

  CtReference(double theta, double d_so, double d_sd_, int nu_, int nv_, double px)
      : d_sd(d_sd_), pixel_size(px), nu(nu_), nv(nv_) {
    source = d_so * Vec3(std::cos(theta), std::sin(theta), 0.0);
    const Vec3 zhat = (-source).normalized();
    const Vec3 xhat(-std::sin(theta), std::cos(theta), 0.0);
    const Vec3 yhat = zhat.cross(xhat);
    W.row(0) = xhat;
    W.row(1) = yhat;
    W.row(2) = zhat;
  }

  Vec3 cam(const Vec3& p) const { return W * (p - source); }

  Vec2 pixel(const Vec3& p) const {
    const Vec3 c = cam(p);
    return Vec2(d_sd * c.x() / c.z() / pixel_size + 0.5 * (nu - 1),
                d_sd * c.y() / c.z() / pixel_size + 0.5 * (nv - 1));
  }
};

/// Solid sphere of the given density centered at the origin.
inline Volume sphere_volume(int n, double voxel, double radius, double density) {
  Volume vol(GridSpec::centered_cube(n, voxel));
  for (int k = 0; k < n; ++k)
    for (int j = 0; j < n; ++j)
      for (int i = 0; i < n; ++i)
        if (vol.grid.voxel_center(i, j, k).norm() <= radius)
          vol.at(i, j, k) = density;
  return vol;
}

/// Smooth radial bump (1 - (r/R)^2)^2: spherically symmetric to within the
/// trilinear grid representation, unlike a binarized sphere.
inline Volume smooth_blob_volume(int n, double voxel, double radius) {
  Volume vol(GridSpec::centered_cube(n, voxel));
  for (int k = 0; k < n; ++k)
    for (int j = 0; j < n; ++j)
      for (int i = 0; i < n; ++i) {
        const double r = vol.grid.voxel_center(i, j, k).norm() / radius;
        if (r < 1.0) vol.at(i, j, k) = (1 - r * r) * (1 - r * r);
      }
  return vol;
}

inline Volume random_volume(int n, uint64_t seed, double lo = 0.0, double hi = 1.0) {
  Volume vol(GridSpec::centered_cube(n, 1.0));
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(lo, hi);
  for (double& v : vol.data) v = u(rng);
  return vol;
}

}  // namespace lamino::testing
