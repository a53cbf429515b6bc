#include "lamino/phantom.hpp"

#include <cmath>

#include "lamino/oracle.hpp"

namespace lamino {

PhantomSpec::Kind phantom_kind_from_string(const std::string& name) {
  if (name == "engine-like") return PhantomSpec::Kind::EngineLike;
  if (name == "nested-shells") return PhantomSpec::Kind::NestedShells;
  if (name == "random-ellipsoids") return PhantomSpec::Kind::RandomEllipsoids;
  throw ValidationError("unknown phantom kind: " + name);
}

namespace {

struct Ellipsoid {
  Vec3 center;
  Vec3 semi;
  double value;
};

struct Cylinder {  // axis along z
  double cx, cy, radius, z_lo, z_hi;
  double value;
};

void paint(Volume& vol, const std::vector<Ellipsoid>& ells,
           const std::vector<Cylinder>& cyls) {
  const GridSpec& g = vol.grid;
  for (int k = 0; k < g.dims[2]; ++k)
    for (int j = 0; j < g.dims[1]; ++j)
      for (int i = 0; i < g.dims[0]; ++i) {
        const Vec3 p = g.voxel_center(i, j, k);
        double& v = vol.at(i, j, k);
        for (const Ellipsoid& e : ells) {
          const Vec3 d = (p - e.center).cwiseQuotient(e.semi);
          if (d.squaredNorm() <= 1.0) v = e.value;
        }
        for (const Cylinder& c : cyls) {
          if (p.z() < c.z_lo || p.z() > c.z_hi) continue;
          const double dx = p.x() - c.cx, dy = p.y() - c.cy;
          if (dx * dx + dy * dy <= c.radius * c.radius) v = c.value;
        }
      }
}

}  // namespace

Volume generate_phantom(const PhantomSpec& spec) {
  spec.validate();
  GridSpec grid;
  grid.dims = spec.dims;
  grid.voxel_size = spec.voxel_size;
  for (int a = 0; a < 3; ++a) grid.origin[a] = -0.5 * spec.voxel_size * (spec.dims[a] - 1);
  Volume vol(grid);

  const Vec3 ext = grid.bounds().extent();
  std::mt19937_64 rng = make_rng(spec.rng_seed, 0x9a11'70a1);
  std::uniform_real_distribution<double> u01(0.0, 1.0);
  const auto uniform = [&](double lo, double hi) { return lo + u01(rng) * (hi - lo); };

  switch (spec.kind) {
    case PhantomSpec::Kind::EngineLike: {
      const double plate_half = 0.5 * spec.plate_fraction * ext.z();
      // Base plate.
      for (int k = 0; k < grid.dims[2]; ++k) {
        const double z = grid.voxel_center(0, 0, k).z();
        if (std::abs(z) > plate_half) continue;
        for (int j = 0; j < grid.dims[1]; ++j)
          for (int i = 0; i < grid.dims[0]; ++i) vol.at(i, j, k) = spec.level_lo;
      }
      std::vector<Ellipsoid> cavities;
      for (int c = 0; c < 6; ++c) {
        Ellipsoid e;
        e.center = Vec3(uniform(-0.3, 0.3) * ext.x(), uniform(-0.3, 0.3) * ext.y(),
                        uniform(-0.4, 0.4) * plate_half);
        e.semi = Vec3(uniform(0.04, 0.09) * ext.x(), uniform(0.04, 0.09) * ext.y(),
                      uniform(0.25, 0.5) * plate_half);
        e.value = 0.0;
        cavities.push_back(e);
      }
      std::vector<Cylinder> pipes;
      for (int c = 0; c < 4; ++c) {
        Cylinder p;
        p.cx = uniform(-0.32, 0.32) * ext.x();
        p.cy = uniform(-0.32, 0.32) * ext.y();
        p.radius = uniform(0.025, 0.05) * ext.x();
        p.z_lo = -plate_half;
        p.z_hi = plate_half;
        p.value = spec.level_hi;
        pipes.push_back(p);
      }
      paint(vol, cavities, pipes);
      break;
    }
    case PhantomSpec::Kind::NestedShells: {
      const double r_out = 0.38 * ext.minCoeff();
      for (int k = 0; k < grid.dims[2]; ++k)
        for (int j = 0; j < grid.dims[1]; ++j)
          for (int i = 0; i < grid.dims[0]; ++i) {
            const double r = grid.voxel_center(i, j, k).norm();
            double v = 0.0;
            if (r <= 0.35 * r_out) v = spec.level_hi;
            else if (r > 0.5 * r_out && r <= 0.75 * r_out) v = spec.level_lo;
            else if (r > 0.85 * r_out && r <= r_out) v = spec.level_hi;
            vol.at(i, j, k) = v;
          }
      break;
    }
    case PhantomSpec::Kind::RandomEllipsoids: {
      std::vector<Ellipsoid> ells;
      for (int c = 0; c < 8; ++c) {
        Ellipsoid e;
        for (int a = 0; a < 3; ++a) e.center[a] = uniform(-0.28, 0.28) * ext[a];
        for (int a = 0; a < 3; ++a) e.semi[a] = uniform(0.05, 0.14) * ext[a];
        e.value = (c % 2 == 0) ? spec.level_lo : spec.level_hi;
        ells.push_back(e);
      }
      paint(vol, ells, {});
      break;
    }
  }
  return vol;
}

ProjectionStack simulate_dataset(const Volume& phantom, const LaminographyGeometry& geom,
                                 int n_views, double noise_sigma, uint64_t seed,
                                 int samples_per_ray) {
  if (n_views < 1) throw ValidationError("simulate: n_views must be >= 1");
  geom.validate();

  ProjectionStack stack;
  stack.geom = geom;
  constexpr double two_pi = 6.283185307179586476925286766559;
  stack.angles.resize(n_views);
  for (int i = 0; i < n_views; ++i) stack.angles[i] = two_pi * i / n_views;

  stack.images.reserve(n_views);
  for (int i = 0; i < n_views; ++i) {
    const ViewTransform view = build_view(geom, stack.angles[i]);
    Image img = raymarch_project_volume(phantom, view, geom, samples_per_ray);
    if (noise_sigma > 0.0) {
      std::mt19937_64 rng = make_rng(seed, 0xa015'e000 + uint64_t(i));
      std::normal_distribution<double> noise(0.0, noise_sigma);
      for (double& v : img.data) v += noise(rng);
    }
    stack.images.push_back(std::move(img));
  }
  return stack;
}

double default_pixel_size(const GridSpec& grid, const LaminographyGeometry& geom,
                          double margin) {
  const double mag = geom.d_sd / geom.d_so;
  return margin * mag * grid.bounds().diagonal() / std::min(geom.nu, geom.nv);
}

LaminographyGeometry default_geometry(const GridSpec& grid, double tilt_alpha,
                                      int nu, int nv) {
  LaminographyGeometry geom;
  geom.tilt_alpha = tilt_alpha;
  geom.d_so = 4.0 * grid.bounds().diagonal();
  geom.d_sd = 2.0 * geom.d_so;
  geom.nu = nu;
  geom.nv = nv;
  geom.pixel_size = default_pixel_size(grid, geom);
  return geom;
}

}  // namespace lamino
