#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <vector>

#include "lamino/common.hpp"

namespace lamino {

// ---------------------------------------------------------------------------
// Radiative Gaussian primitives
//
// All learnable quantities are stored as unconstrained raw parameters:
//   density:  rho = exp(raw_density)                  (> 0)
//   scale:    s_k = scale_floor + exp(raw_scale_k)    (> scale_floor)
//   rotation: unit quaternion obtained by normalizing raw_quat (w,x,y,z)
// ---------------------------------------------------------------------------

struct RadiativeGaussian {
  double raw_density = 0.0;
  Vec3 position = Vec3::Zero();
  Vec4 raw_quat = Vec4(1, 0, 0, 0);  // w, x, y, z
  Vec3 raw_scale = Vec3::Zero();

  double density() const { return std::exp(raw_density); }

  Vec4 quaternion() const {
    const double n = raw_quat.norm();
    return n > 0 ? Vec4(raw_quat / n) : Vec4(1, 0, 0, 0);
  }

  Vec3 scale(double floor) const {
    return Vec3(floor + std::exp(raw_scale.x()), floor + std::exp(raw_scale.y()),
                floor + std::exp(raw_scale.z()));
  }

  Mat3 rotation() const { return rotation_from_unit_quat(quaternion()); }

  /// Sigma = R S S^T R^T.
  Mat3 covariance(double floor) const {
    const Mat3 r = rotation();
    const Vec3 s = scale(floor);
    const Mat3 a = r * s.asDiagonal();
    return a * a.transpose();
  }

  static Mat3 rotation_from_unit_quat(const Vec4& q) {
    const double w = q[0], x = q[1], y = q[2], z = q[3];
    Mat3 r;
    r << 1 - 2 * (y * y + z * z), 2 * (x * y - w * z), 2 * (x * z + w * y),
        2 * (x * y + w * z), 1 - 2 * (x * x + z * z), 2 * (y * z - w * x),
        2 * (x * z - w * y), 2 * (y * z + w * x), 1 - 2 * (x * x + y * y);
    return r;
  }

  /// Inverse of the raw parameter maps, used by initializers.
  static double raw_from_density(double rho) { return std::log(rho); }
  static double raw_from_scale(double s, double floor) { return std::log(s - floor); }
};

struct GaussianScene {
  std::vector<RadiativeGaussian> gaussians;
  Aabb bounds;

  size_t count() const { return gaussians.size(); }

  /// Scale activation floor: 1e-4 of the largest bounds extent.
  double scale_floor() const { return 1e-4 * bounds.max_extent(); }

  /// sigma(x) = sum_i rho_i exp(-1/2 (x-p_i)^T Sigma_i^{-1} (x-p_i)).
  double density_at(const Vec3& x) const;
};

// ---------------------------------------------------------------------------
// Dense voxel grids
//
// Layout: x fastest, then y, then z. Voxel (i,j,k) center sits at
// origin + (i,j,k) * voxel_size; origin is itself a voxel center.
// ---------------------------------------------------------------------------

struct GridSpec {
  std::array<int, 3> dims = {0, 0, 0};  // nx, ny, nz
  double voxel_size = 1.0;
  Vec3 origin = Vec3::Zero();

  size_t voxel_count() const {
    return size_t(dims[0]) * size_t(dims[1]) * size_t(dims[2]);
  }
  Vec3 voxel_center(int i, int j, int k) const {
    return origin + voxel_size * Vec3(i, j, k);
  }
  Aabb bounds() const {
    const Vec3 half(0.5 * voxel_size, 0.5 * voxel_size, 0.5 * voxel_size);
    return {origin - half,
            origin + voxel_size * Vec3(dims[0] - 1, dims[1] - 1, dims[2] - 1) + half};
  }
  /// Cube grid of n^3 voxels centered on the world origin.
  static GridSpec centered_cube(int n, double voxel_size) {
    GridSpec g;
    g.dims = {n, n, n};
    g.voxel_size = voxel_size;
    g.origin = Vec3::Constant(-0.5 * voxel_size * (n - 1));
    return g;
  }
  void validate() const;
};

struct Volume {
  GridSpec grid;
  std::vector<double> data;

  Volume() = default;
  explicit Volume(const GridSpec& g) : grid(g), data(g.voxel_count(), 0.0) {}

  double& at(int i, int j, int k) {
    return data[(size_t(k) * grid.dims[1] + j) * grid.dims[0] + i];
  }
  double at(int i, int j, int k) const {
    return data[(size_t(k) * grid.dims[1] + j) * grid.dims[0] + i];
  }

  double min_value() const;
  double max_value() const;

  /// Trilinear interpolation at a world point; zero outside the grid.
  double sample_trilinear(const Vec3& p) const;
};

// ---------------------------------------------------------------------------
// Detector images and projection stacks (log-domain line integrals)
// ---------------------------------------------------------------------------

struct Image {
  int nu = 0;  // columns, detector u
  int nv = 0;  // rows, detector v
  std::vector<double> data;

  Image() = default;
  Image(int nu_, int nv_) : nu(nu_), nv(nv_), data(size_t(nu_) * nv_, 0.0) {}

  double& at(int iu, int iv) { return data[size_t(iv) * nu + iu]; }
  double at(int iu, int iv) const { return data[size_t(iv) * nu + iu]; }
};

struct LaminographyGeometry {
  double tilt_alpha = 0.0;  // radians, [0, pi/2]
  double d_so = 1.0;        // source-to-object distance
  double d_sd = 2.0;        // source-to-detector distance
  int nu = 0;
  int nv = 0;
  double pixel_size = 1.0;

  void validate() const;
};

struct ProjectionStack {
  LaminographyGeometry geom;
  std::vector<double> angles;  // radians, one per view
  std::vector<Image> images;

  size_t views() const { return images.size(); }
  void validate() const;
};

/// Sample sigma(x) at every voxel center of the requested grid. Gaussians are
/// evaluated out to 6 sigma (Mahalanobis), beyond which the contribution is
/// below exp(-18) of the peak.
Volume rasterize_scene_to_volume(const GaussianScene& scene, const GridSpec& grid);

}  // namespace lamino
