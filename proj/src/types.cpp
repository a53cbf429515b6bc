#include "lamino/types.hpp"

#include <algorithm>
#include <limits>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace lamino {

void GridSpec::validate() const {
  if (dims[0] <= 0 || dims[1] <= 0 || dims[2] <= 0)
    throw ValidationError("grid dims must be positive");
  if (!(voxel_size > 0) || !std::isfinite(voxel_size))
    throw ValidationError("voxel_size must be positive and finite");
  if (!origin.allFinite()) throw ValidationError("grid origin must be finite");
  // Guard absurd allocations before they overflow size arithmetic.
  const double total = double(dims[0]) * double(dims[1]) * double(dims[2]);
  if (total > 4e9) throw ValidationError("grid too large");
}

void LaminographyGeometry::validate() const {
  const double half_pi = std::asin(1.0);
  if (!(tilt_alpha >= 0.0 && tilt_alpha <= half_pi))
    throw ValidationError("tilt angle must lie in [0, pi/2]");
  if (!(d_so > 0)) throw ValidationError("d_so must be positive");
  if (!(d_sd >= d_so)) throw ValidationError("d_sd must be >= d_so");
  if (nu < 1 || nv < 1) throw ValidationError("detector dims must be positive");
  if (!(pixel_size > 0)) throw ValidationError("pixel_size must be positive");
}

void ProjectionStack::validate() const {
  geom.validate();
  if (images.size() != angles.size())
    throw ValidationError("projection stack: images and angles length mismatch");
  for (const Image& im : images) {
    if (im.nu != geom.nu || im.nv != geom.nv)
      throw ValidationError("projection stack: image dims do not match detector");
    for (double v : im.data)
      if (!std::isfinite(v)) throw ValidationError("projection stack: non-finite pixel");
  }
}

double Volume::min_value() const {
  double m = std::numeric_limits<double>::infinity();
  for (double v : data) m = std::min(m, v);
  return m;
}

double Volume::max_value() const {
  double m = -std::numeric_limits<double>::infinity();
  for (double v : data) m = std::max(m, v);
  return m;
}

double Volume::sample_trilinear(const Vec3& p) const {
  const Vec3 f = (p - grid.origin) / grid.voxel_size;
  const int i0 = int(std::floor(f.x()));
  const int j0 = int(std::floor(f.y()));
  const int k0 = int(std::floor(f.z()));
  const double fx = f.x() - i0, fy = f.y() - j0, fz = f.z() - k0;

  double acc = 0.0;
  for (int dk = 0; dk <= 1; ++dk)
    for (int dj = 0; dj <= 1; ++dj)
      for (int di = 0; di <= 1; ++di) {
        const int i = i0 + di, j = j0 + dj, k = k0 + dk;
        if (i < 0 || j < 0 || k < 0 || i >= grid.dims[0] || j >= grid.dims[1] ||
            k >= grid.dims[2])
          continue;
        const double w = (di ? fx : 1 - fx) * (dj ? fy : 1 - fy) * (dk ? fz : 1 - fz);
        acc += w * at(i, j, k);
      }
  return acc;
}

double GaussianScene::density_at(const Vec3& x) const {
  const double floor = scale_floor();
  double acc = 0.0;
  for (const RadiativeGaussian& g : gaussians) {
    const Vec3 d = x - g.position;
    const Mat3 cov = g.covariance(floor);
    const double q = d.dot(cov.llt().solve(d));
    acc += g.density() * std::exp(-0.5 * q);
  }
  return acc;
}

Volume rasterize_scene_to_volume(const GaussianScene& scene, const GridSpec& grid) {
  grid.validate();
  Volume vol(grid);
  const double floor = scene.scale_floor();
  const int nx = grid.dims[0], ny = grid.dims[1], nz = grid.dims[2];

  // Precompute per-gaussian inverse covariance and 6-sigma voxel bounds.
  struct Entry {
    Mat3 inv;
    Vec3 pos;
    double rho;
    int lo[3], hi[3];
  };
  std::vector<Entry> entries;
  entries.reserve(scene.count());
  for (const RadiativeGaussian& g : scene.gaussians) {
    Entry e;
    const Mat3 cov = g.covariance(floor);
    e.inv = cov.inverse();
    e.pos = g.position;
    e.rho = g.density();
    bool empty = false;
    for (int a = 0; a < 3; ++a) {
      const double r = 6.0 * std::sqrt(cov(a, a));
      const double flo = (e.pos[a] - r - grid.origin[a]) / grid.voxel_size;
      const double fhi = (e.pos[a] + r - grid.origin[a]) / grid.voxel_size;
      e.lo[a] = std::max(0, int(std::ceil(flo)));
      e.hi[a] = std::min(grid.dims[a] - 1, int(std::floor(fhi)));
      if (e.lo[a] > e.hi[a]) empty = true;
    }
    if (!empty) entries.push_back(e);
  }

  // Gather per z-slice so accumulation order per voxel is fixed regardless of
  // thread count.
#ifdef _OPENMP
#pragma omp parallel for schedule(dynamic, 1)
#endif
  for (int k = 0; k < nz; ++k) {
    for (const Entry& e : entries) {
      if (k < e.lo[2] || k > e.hi[2]) continue;
      for (int j = e.lo[1]; j <= e.hi[1]; ++j) {
        for (int i = e.lo[0]; i <= e.hi[0]; ++i) {
          const Vec3 d = grid.voxel_center(i, j, k) - e.pos;
          const double q = d.dot(e.inv * d);
          if (q > 36.0) continue;
          vol.data[(size_t(k) * ny + j) * nx + i] += e.rho * std::exp(-0.5 * q);
        }
      }
    }
  }
  return vol;
}

}  // namespace lamino
