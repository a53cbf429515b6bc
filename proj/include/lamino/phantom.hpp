#pragma once

#include "lamino/geometry.hpp"

namespace lamino {

// Synthetic test objects. The "engine-like" kind is a flat plate with
// embedded ellipsoidal cavities and through-going cylindrical pipes at two
// density levels: the plate geometry that makes laminography preferable to CT
// in the first place.

struct PhantomSpec {
  enum class Kind { EngineLike, NestedShells, RandomEllipsoids };
  Kind kind = Kind::EngineLike;
  std::array<int, 3> dims = {64, 64, 64};
  double voxel_size = 1.0;
  double plate_fraction = 0.25;  // plate thickness as a fraction of z extent
  uint64_t rng_seed = 0;
  double level_lo = 1.0;  // base material density
  double level_hi = 1.6;  // insert density

  void validate() const {
    if (!(plate_fraction > 0.0 && plate_fraction < 1.0))
      throw ValidationError("phantom: plate_fraction must lie in (0, 1)");
    GridSpec g{dims, voxel_size, Vec3::Zero()};
    g.validate();
  }
};

PhantomSpec::Kind phantom_kind_from_string(const std::string& name);

/// Deterministic volume on a grid centered at the world origin.
Volume generate_phantom(const PhantomSpec& spec);

/// Uniform angles over [0, 2pi), projections through the oracle ray marcher,
/// optional additive Gaussian noise (log domain) with a per-view seed.
ProjectionStack simulate_dataset(const Volume& phantom, const LaminographyGeometry& geom,
                                 int n_views, double noise_sigma, uint64_t seed,
                                 int samples_per_ray = 512);

/// Detector pixel size that frames the whole volume with a small margin.
double default_pixel_size(const GridSpec& grid, const LaminographyGeometry& geom,
                          double margin = 1.25);

/// Desk-scale default geometry for a reconstruction grid: d_so at 4x and
/// d_sd at 8x the volume diagonal.
LaminographyGeometry default_geometry(const GridSpec& grid, double tilt_alpha,
                                      int nu, int nv);

}  // namespace lamino
