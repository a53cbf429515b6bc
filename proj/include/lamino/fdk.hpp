#pragma once

#include "lamino/geometry.hpp"

namespace lamino {

// Feldkamp-style filtered backprojection under the laminography transform.
// Exactness is not a goal here: for tilted axes FDK is approximate by nature
// and the result only seeds the artifact-filtering initializer.

struct FdkConfig {
  enum class Filter { Ramp, RampHann };
  Filter filter = Filter::RampHann;
  int padding_factor = 2;  // power of two; rows are padded to padding_factor * nu
  GridSpec grid;

  void validate(int nu) const;
};

/// Cosine-weights each projection and convolves every detector row with the
/// band-limited ramp kernel (FFT-based, padded to padding_factor * nu).
ProjectionStack filter_projections(const ProjectionStack& stack, const FdkConfig& cfg);

/// Voxel-driven backprojection with bilinear detector sampling, (d_so/z)^2
/// distance weighting and full-circle angular weights.
Volume backproject(const ProjectionStack& filtered, const GridSpec& grid);

/// filter_projections followed by backproject.
Volume fdk_reconstruct(const ProjectionStack& stack, const FdkConfig& cfg);

}  // namespace lamino
