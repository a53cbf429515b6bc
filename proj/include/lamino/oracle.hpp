#pragma once

#include "lamino/geometry.hpp"

namespace lamino {

// Slow, independent reference projector: composite Simpson quadrature of the
// line integral along each detector ray. Never used in the optimization loop.

/// Projects an analytic Gaussian scene for a single view. Integration bounds
/// come from the scene box inflated by 4x the largest Gaussian scale.
Image raymarch_project(const GaussianScene& scene, const ViewTransform& view,
                       const LaminographyGeometry& geom, int samples_per_ray = 512);

/// Projects a voxel volume (trilinear interpolation, zero outside).
Image raymarch_project_volume(const Volume& vol, const ViewTransform& view,
                              const LaminographyGeometry& geom,
                              int samples_per_ray = 512);

/// Source position in world coordinates for a view.
Vec3 source_position(const ViewTransform& view);

/// World-space ray through a (fractional) detector pixel. Returns origin at
/// the source and a unit direction.
void pixel_ray(const ViewTransform& view, const LaminographyGeometry& geom,
               double pixel_u, double pixel_v, Vec3& origin, Vec3& dir);

}  // namespace lamino
