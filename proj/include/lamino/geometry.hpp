#pragma once

#include <optional>

#include "lamino/types.hpp"

namespace lamino {

// ---------------------------------------------------------------------------
// Laminography viewing geometry.
//
// World coordinates are sample-fixed with the rotation axis along +z. For a
// view angle theta the world-to-camera transform is x_cam = W x + t with
//
//   W = [ -sin t            cos t            0      ]
//       [  cos t sin a      sin t sin a     -cos a  ]
//       [ -cos t cos a     -sin t cos a     -sin a  ]
//
//   t = d_so * ( -cos t sin a, -sin t sin a, cos a )
//
// where a is the tilt angle. a = 0 reduces to the circular cone-beam CT
// transform (source on a circle of radius d_so in the z = 0 plane).
//
// The detector plane is z_cam = d_sd, and the panel is aimed so that the
// rotation center projects onto the panel center: pixel coordinates subtract
// the per-view principal offset (the image of the world origin). Ray space
// follows the EWA convention: the first two coordinates are the perspective
// detector coordinates, the third is the distance from the source, so that
// integrating a Gaussian over the third axis walks arc length along the ray.
// ---------------------------------------------------------------------------

struct ViewTransform {
  Mat3 W = Mat3::Identity();
  Vec3 t = Vec3::Zero();
  double theta = 0.0;
};

struct ProjectedPoint {
  Vec3 ray;     // (u, v, depth): physical detector coords and source distance
  Vec2 pixel;   // fractional pixel indices, (0,0) at the (-u,-v) corner pixel
  Vec3 cam;     // camera-space coordinates
};

ViewTransform build_view(const LaminographyGeometry& geom, double theta);

/// Depth floor guarding the perspective division.
inline double depth_epsilon(const LaminographyGeometry& geom) { return 1e-6 * geom.d_so; }

/// Physical detector coordinates of the world origin ("principal offset").
Vec2 principal_offset(const ViewTransform& view, const LaminographyGeometry& geom);

/// Projects a world point; empty when the camera-space depth is <= eps_z
/// (point at or behind the source) and the caller must cull.
std::optional<ProjectedPoint> project_point(const ViewTransform& view,
                                            const LaminographyGeometry& geom,
                                            const Vec3& p_world);

/// Jacobian of the ray-space mapping at a camera-space point. Rows 1-2 are
/// the perspective derivatives, row 3 the unit ray direction.
Mat3 projection_jacobian(const Vec3& p_cam, const LaminographyGeometry& geom);

/// Sigma_ray = J W Sigma W^T J^T, symmetrized.
Mat3 transform_covariance(const ViewTransform& view, const Mat3& jacobian,
                          const Mat3& cov_world);

}  // namespace lamino
