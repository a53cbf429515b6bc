#include "lamino/geometry.hpp"

#include <cmath>

namespace lamino {

ViewTransform build_view(const LaminographyGeometry& geom, double theta) {
  const double st = std::sin(theta), ct = std::cos(theta);
  const double sa = std::sin(geom.tilt_alpha), ca = std::cos(geom.tilt_alpha);
  ViewTransform v;
  v.theta = theta;
  v.W << -st, ct, 0,
      ct * sa, st * sa, -ca,
      -ct * ca, -st * ca, -sa;
  v.t = geom.d_so * Vec3(-ct * sa, -st * sa, ca);
  return v;
}

Vec2 principal_offset(const ViewTransform& view, const LaminographyGeometry& geom) {
  const double z = view.t.z();
  if (z <= depth_epsilon(geom))
    throw ValidationError("degenerate geometry: rotation center at non-positive depth");
  return Vec2(geom.d_sd * view.t.x() / z, geom.d_sd * view.t.y() / z);
}

std::optional<ProjectedPoint> project_point(const ViewTransform& view,
                                            const LaminographyGeometry& geom,
                                            const Vec3& p_world) {
  const Vec3 cam = view.W * p_world + view.t;
  if (cam.z() <= depth_epsilon(geom)) return std::nullopt;

  ProjectedPoint out;
  out.cam = cam;
  const double u = geom.d_sd * cam.x() / cam.z();
  const double v = geom.d_sd * cam.y() / cam.z();
  out.ray = Vec3(u, v, cam.norm());

  const Vec2 pp = principal_offset(view, geom);
  out.pixel = Vec2((u - pp.x()) / geom.pixel_size + 0.5 * (geom.nu - 1),
                   (v - pp.y()) / geom.pixel_size + 0.5 * (geom.nv - 1));
  return out;
}

Mat3 projection_jacobian(const Vec3& p, const LaminographyGeometry& geom) {
  const double x = p.x(), y = p.y(), z = p.z();
  const double f = geom.d_sd;
  const double len = p.norm();
  Mat3 j;
  j << f / z, 0, -f * x / (z * z),
      0, f / z, -f * y / (z * z),
      x / len, y / len, z / len;
  return j;
}

Mat3 transform_covariance(const ViewTransform& view, const Mat3& jacobian,
                          const Mat3& cov_world) {
  const Mat3 k = jacobian * view.W;
  const Mat3 c = k * cov_world * k.transpose();
  return 0.5 * (c + c.transpose());
}

}  // namespace lamino
