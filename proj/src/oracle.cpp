#include "lamino/oracle.hpp"

#include <cmath>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace lamino {

Vec3 source_position(const ViewTransform& view) {
  return -view.W.transpose() * view.t;
}

void pixel_ray(const ViewTransform& view, const LaminographyGeometry& geom,
               double pixel_u, double pixel_v, Vec3& origin, Vec3& dir) {
  const Vec2 pp = principal_offset(view, geom);
  const double u = (pixel_u - 0.5 * (geom.nu - 1)) * geom.pixel_size + pp.x();
  const double v = (pixel_v - 0.5 * (geom.nv - 1)) * geom.pixel_size + pp.y();
  const Vec3 on_detector = view.W.transpose() * (Vec3(u, v, geom.d_sd) - view.t);
  origin = source_position(view);
  dir = (on_detector - origin).normalized();
}

namespace {

// Entry/exit parameters of a ray against an axis-aligned box; false on miss.
bool intersect_box(const Vec3& origin, const Vec3& dir, const Aabb& box, double& t0,
                   double& t1) {
  t0 = 0.0;
  t1 = std::numeric_limits<double>::infinity();
  for (int a = 0; a < 3; ++a) {
    if (std::abs(dir[a]) < 1e-15) {
      if (origin[a] < box.lo[a] || origin[a] > box.hi[a]) return false;
      continue;
    }
    double ta = (box.lo[a] - origin[a]) / dir[a];
    double tb = (box.hi[a] - origin[a]) / dir[a];
    if (ta > tb) std::swap(ta, tb);
    t0 = std::max(t0, ta);
    t1 = std::min(t1, tb);
  }
  return t0 < t1;
}

template <typename Field>
Image raymarch(const Field& field, const Aabb& bounds, const ViewTransform& view,
               const LaminographyGeometry& geom, int samples_per_ray) {
  if (samples_per_ray < 64)
    throw ValidationError("raymarch: samples_per_ray must be >= 64");
  int n = samples_per_ray;
  if (n % 2 != 0) ++n;  // composite Simpson needs an even interval count

  Image img(geom.nu, geom.nv);
#ifdef _OPENMP
#pragma omp parallel for schedule(dynamic, 1)
#endif
  for (int pv = 0; pv < geom.nv; ++pv) {
    for (int pu = 0; pu < geom.nu; ++pu) {
      Vec3 origin, dir;
      pixel_ray(view, geom, pu, pv, origin, dir);
      double t0, t1;
      if (!intersect_box(origin, dir, bounds, t0, t1)) continue;
      const double h = (t1 - t0) / n;
      double acc = field(origin + t0 * dir) + field(origin + t1 * dir);
      for (int i = 1; i < n; ++i) {
        const double w = (i % 2 == 1) ? 4.0 : 2.0;
        acc += w * field(origin + (t0 + i * h) * dir);
      }
      img.at(pu, pv) = acc * h / 3.0;
    }
  }
  return img;
}

}  // namespace

Image raymarch_project(const GaussianScene& scene, const ViewTransform& view,
                       const LaminographyGeometry& geom, int samples_per_ray) {
  double max_scale = 0.0;
  const double floor = scene.scale_floor();
  for (const RadiativeGaussian& g : scene.gaussians)
    max_scale = std::max(max_scale, g.scale(floor).maxCoeff());
  Aabb bounds = scene.bounds;
  bounds.lo -= Vec3::Constant(4.0 * max_scale);
  bounds.hi += Vec3::Constant(4.0 * max_scale);

  struct Term {
    Mat3 inv;
    Vec3 pos;
    double rho;
  };
  std::vector<Term> terms(scene.count());
  for (size_t i = 0; i < scene.count(); ++i) {
    const RadiativeGaussian& g = scene.gaussians[i];
    terms[i] = {g.covariance(floor).inverse(), g.position, g.density()};
  }
  const auto field = [&](const Vec3& p) {
    double acc = 0.0;
    for (const Term& t : terms) {
      const Vec3 d = p - t.pos;
      acc += t.rho * std::exp(-0.5 * d.dot(t.inv * d));
    }
    return acc;
  };
  return raymarch(field, bounds, view, geom, samples_per_ray);
}

Image raymarch_project_volume(const Volume& vol, const ViewTransform& view,
                              const LaminographyGeometry& geom, int samples_per_ray) {
  return raymarch([&](const Vec3& p) { return vol.sample_trilinear(p); },
                  vol.grid.bounds(), view, geom, samples_per_ray);
}

}  // namespace lamino
