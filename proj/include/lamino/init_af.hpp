#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include "lamino/types.hpp"

namespace lamino {

// Artifact-filtering initialization: smooth the FDK volume, Otsu-binarize it,
// sample seed points from the mask, query seed densities from the raw FDK
// values. Falls back to uniform sampling over the bounds when the mask or the
// histogram degenerates.

struct AfConfig {
  double smoothing_sigma = 2.0;   // voxels
  double kernel_truncation = 3.0;  // in sigmas
  int otsu_bins = 256;
  int num_points = 2000;
  uint64_t rng_seed = 0;

  void validate() const {
    if (!(smoothing_sigma > 0)) throw ValidationError("af: smoothing_sigma must be > 0");
    if (otsu_bins < 16) throw ValidationError("af: otsu_bins must be >= 16");
    if (num_points < 1) throw ValidationError("af: num_points must be >= 1");
    if (!(kernel_truncation > 0)) throw ValidationError("af: truncation must be > 0");
  }
};

/// Separable Gaussian blur; kernel truncated at truncation*sigma taps and
/// renormalized to unit sum, zero padding at the boundary.
Volume smooth_volume(const Volume& vol, double sigma, double truncation = 3.0);

/// Histogram threshold maximizing between-class variance. Candidate values
/// are the interior bin edges of a [min, max] histogram; ties resolve to the
/// lower edge. Throws DegenerateHistogram when all voxels are equal.
double otsu_threshold(const Volume& vol, int bins);

/// mask = (smoothed >= tau), flat layout matching the volume. Throws
/// EmptyMask when nothing passes.
std::vector<uint8_t> build_mask(const Volume& smoothed, double tau);

/// Draws M voxels uniformly from the mask (with replacement when the mask is
/// smaller than M), jitters each within its voxel and queries the density by
/// trilinear lookup in fdk_vol. Densities are clamped to
/// 1e-4 * max(fdk_vol) from below.
std::vector<std::pair<Vec3, double>> sample_init_points(const Volume& fdk_vol,
                                                        const std::vector<uint8_t>& mask,
                                                        int num_points, uint64_t seed);

struct InitResult {
  GaussianScene scene;
  bool used_fallback = false;  // uniform sampling because AF degenerated
  double otsu_tau = 0.0;
};

/// Full AF pipeline on an FDK volume. Initial scales are isotropic at the
/// mean 3-nearest-neighbor spacing of the sampled points, clamped to
/// [scale floor, 2% of the scene extent]; rotations start at identity.
InitResult initialize_scene(const Volume& fdk_vol, const AfConfig& cfg);

/// Baseline initializer: positions uniform over the bounds, densities all at
/// mean |fdk_vol|, same scale rule as initialize_scene.
GaussianScene initialize_scene_uniform(const Volume& fdk_vol, int num_points,
                                       uint64_t seed);

}  // namespace lamino
