#include "lamino/rasterizer.hpp"

#include <algorithm>
#include <cmath>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace lamino {

namespace {
constexpr double kTwoPi = 6.283185307179586476925286766559;
constexpr int kTileSize = 16;

// The contribution fades to zero over the outermost sliver of the 3-sigma
// cutoff so the rendered image is C1 in the splat parameters; a hard cutoff
// would make finite-difference gradient validation ill-posed. kFadeStart was
// chosen so the extra bias stays below exp(-4.35) of a splat's peak.
constexpr double kFadeStart = 8.7;

// w(q) and dw/dq for the faded gaussian kernel; zero at and beyond q = 9.
template <typename T>
inline T kernel_weight(T q) {
  const T g = std::exp(T(-0.5) * q);
  if (q <= T(kFadeStart)) return g;
  const T t = (T(kCutoffSq) - q) / T(kCutoffSq - kFadeStart);
  return g * t * t * (T(3) - T(2) * t);
}

inline void kernel_weight_grad(double q, double& w, double& dw_dq) {
  const double g = std::exp(-0.5 * q);
  if (q <= kFadeStart) {
    w = g;
    dw_dq = -0.5 * g;
    return;
  }
  const double inv = 1.0 / (kCutoffSq - kFadeStart);
  const double t = (kCutoffSq - q) * inv;
  const double phi = t * t * (3.0 - 2.0 * t);
  const double dphi_dq = (6.0 * t - 6.0 * t * t) * -inv;
  w = g * phi;
  dw_dq = g * (dphi_dq - 0.5 * phi);
}
}  // namespace

std::optional<Splat2D> splat_gaussian(const RadiativeGaussian& g, double scale_floor,
                                      const ViewTransform& view,
                                      const LaminographyGeometry& geom, int index) {
  const auto proj = project_point(view, geom, g.position);
  if (!proj) return std::nullopt;

  Splat2D s;
  s.index = index;
  s.cam = proj->cam;
  s.center_px = proj->pixel;
  s.jac = projection_jacobian(proj->cam, geom);
  s.cov_ray = transform_covariance(view, s.jac, g.covariance(scale_floor));

  const Mat2 cov2 = s.cov_ray.topLeftCorner<2, 2>();
  const double det3 = s.cov_ray.determinant();
  const double det2 = cov2.determinant();
  if (!(det2 > 0.0) || !(det3 > 0.0)) return std::nullopt;

  s.mu = std::sqrt(kTwoPi * det3 / det2);
  s.amp = s.mu * g.density();
  if (!std::isfinite(s.amp)) return std::nullopt;

  const double px2 = geom.pixel_size * geom.pixel_size;
  s.cov_px = cov2 / px2;
  Mat2 m = s.cov_px;
  m(0, 0) += kCovFloorPx;
  m(1, 1) += kCovFloorPx;
  const double det_m = m.determinant();
  if (!(det_m > 0.0)) return std::nullopt;
  s.eval_inv << m(1, 1), -m(0, 1), -m(1, 0), m(0, 0);
  s.eval_inv /= det_m;

  const double rx = 3.0 * std::sqrt(m(0, 0));
  const double ry = 3.0 * std::sqrt(m(1, 1));
  s.x0 = std::max(0, int(std::ceil(s.center_px.x() - rx)));
  s.x1 = std::min(geom.nu - 1, int(std::floor(s.center_px.x() + rx)));
  s.y0 = std::max(0, int(std::ceil(s.center_px.y() - ry)));
  s.y1 = std::min(geom.nv - 1, int(std::floor(s.center_px.y() + ry)));
  if (s.x0 > s.x1 || s.y0 > s.y1) return std::nullopt;
  return s;
}

template <typename T>
RenderOutput render(const GaussianScene& scene, const ViewTransform& view,
                    const LaminographyGeometry& geom) {
  RenderOutput out;
  out.image = Image(geom.nu, geom.nv);
  const double floor = scene.scale_floor();

  out.splats.reserve(scene.count());
  for (size_t i = 0; i < scene.count(); ++i) {
    auto s = splat_gaussian(scene.gaussians[i], floor, view, geom, int(i));
    if (s) out.splats.push_back(*s);
  }

  const int tiles_x = (geom.nu + kTileSize - 1) / kTileSize;
  const int tiles_y = (geom.nv + kTileSize - 1) / kTileSize;
  std::vector<std::vector<int>> tile_splats(size_t(tiles_x) * tiles_y);
  for (size_t si = 0; si < out.splats.size(); ++si) {
    const Splat2D& s = out.splats[si];
    for (int ty = s.y0 / kTileSize; ty <= s.y1 / kTileSize; ++ty)
      for (int tx = s.x0 / kTileSize; tx <= s.x1 / kTileSize; ++tx)
        tile_splats[size_t(ty) * tiles_x + tx].push_back(int(si));
  }

#ifdef _OPENMP
#pragma omp parallel for schedule(dynamic, 1)
#endif
  for (int tile = 0; tile < tiles_x * tiles_y; ++tile) {
    const std::vector<int>& list = tile_splats[tile];
    if (list.empty()) continue;
    const int px0 = (tile % tiles_x) * kTileSize;
    const int py0 = (tile / tiles_x) * kTileSize;
    const int px1 = std::min(px0 + kTileSize, geom.nu);
    const int py1 = std::min(py0 + kTileSize, geom.nv);
    for (int py = py0; py < py1; ++py) {
      for (int px = px0; px < px1; ++px) {
        double acc = 0.0;
        for (int si : list) {
          const Splat2D& s = out.splats[si];
          if (px < s.x0 || px > s.x1 || py < s.y0 || py > s.y1) continue;
          const T dx = T(px - s.center_px.x());
          const T dy = T(py - s.center_px.y());
          const T q = dx * (T(s.eval_inv(0, 0)) * dx + T(s.eval_inv(0, 1)) * dy) +
                      dy * (T(s.eval_inv(1, 0)) * dx + T(s.eval_inv(1, 1)) * dy);
          if (!(q < T(kCutoffSq))) continue;
          acc += double(T(s.amp) * kernel_weight(q));
        }
        out.image.at(px, py) = acc;
      }
    }
  }
  return out;
}

template RenderOutput render<float>(const GaussianScene&, const ViewTransform&,
                                    const LaminographyGeometry&);
template RenderOutput render<double>(const GaussianScene&, const ViewTransform&,
                                     const LaminographyGeometry&);

namespace {

// d R / d q_c for a unit quaternion (w, x, y, z), c = 0..3.
void quat_rotation_partials(const Vec4& q, Mat3 dr[4]) {
  const double w = q[0], x = q[1], y = q[2], z = q[3];
  dr[0] << 0, -z, y, z, 0, -x, -y, x, 0;
  dr[1] << 0, y, z, y, -2 * x, -w, z, w, -2 * x;
  dr[2] << -2 * y, x, w, x, 0, z, -w, z, -2 * y;
  dr[3] << -2 * z, -w, x, w, -2 * z, y, x, y, 0;
  for (int c = 0; c < 4; ++c) dr[c] *= 2.0;
}

}  // namespace

SceneGrads render_backward(const GaussianScene& scene, const ViewTransform& view,
                           const LaminographyGeometry& geom, const Image& upstream,
                           const RenderOutput& forward) {
  SceneGrads grads(scene.count());
  const double floor = scene.scale_floor();
  const double f = geom.d_sd;
  const double inv_px = 1.0 / geom.pixel_size;
  const double px2 = geom.pixel_size * geom.pixel_size;
  const int n_splats = int(forward.splats.size());

  // Each splat reduces over its own pixel footprint, so the loop is
  // deterministic for any thread count.
#ifdef _OPENMP
#pragma omp parallel for schedule(dynamic, 16)
#endif
  for (int si = 0; si < n_splats; ++si) {
    const Splat2D& s = forward.splats[si];
    const RadiativeGaussian& g = scene.gaussians[s.index];

    double amp_grad = 0.0;
    Vec2 center_grad = Vec2::Zero();
    Mat2 m_grad = Mat2::Zero();
    for (int py = s.y0; py <= s.y1; ++py) {
      for (int px = s.x0; px <= s.x1; ++px) {
        const double gup = upstream.at(px, py);
        if (gup == 0.0) continue;
        const Vec2 d(px - s.center_px.x(), py - s.center_px.y());
        const Vec2 vv = s.eval_inv * d;
        const double q = d.dot(vv);
        if (q >= kCutoffSq) continue;
        double w, dw_dq;
        kernel_weight_grad(q, w, dw_dq);
        amp_grad += gup * w;
        // dq/dcenter = -2 Minv d, dq/dM = -(Minv d)(Minv d)^T
        const double common = gup * s.amp * dw_dq;
        center_grad += (-2.0 * common) * vv;
        m_grad += (-common) * (vv * vv.transpose());
      }
    }

    grads.visible[s.index] = 1;
    grads.screen_grad_norm[s.index] = center_grad.norm();
    if (amp_grad == 0.0 && center_grad.isZero() && m_grad.isZero()) continue;

    const double rho = g.density();
    grads.raw_density[s.index] = amp_grad * s.amp;  // d amp/d raw = amp
    const double mu_grad = amp_grad * rho;

    // dL/dSigma_ray: mu path over the full 3x3 plus the pixel-space
    // evaluation path through the top-left block.
    const Mat2 cov2 = s.cov_ray.topLeftCorner<2, 2>();
    const Mat3 ray_inv = s.cov_ray.inverse();
    const Mat2 cov2_inv = cov2.inverse();
    Mat3 g_ray = (0.5 * mu_grad * s.mu) * ray_inv;
    g_ray.topLeftCorner<2, 2>() +=
        m_grad / px2 - (0.5 * mu_grad * s.mu) * cov2_inv;

    // Sigma_ray = K Sigma K^T with K = J W.
    const Mat3 K = s.jac * view.W;
    const Mat3 cov_world = g.covariance(floor);
    const Mat3 g_sigma = K.transpose() * g_ray * K;
    const Mat3 g_k = 2.0 * g_ray * K * cov_world;
    const Mat3 g_j = g_k * view.W.transpose();

    // Position: through the projected center and through J.
    Vec3 cam_grad =
        s.jac.topRows<2>().transpose() * (center_grad * inv_px);
    {
      const double x = s.cam.x(), y = s.cam.y(), z = s.cam.z();
      const double inv_z2 = 1.0 / (z * z);
      cam_grad.x() += g_j(0, 2) * (-f * inv_z2);
      cam_grad.y() += g_j(1, 2) * (-f * inv_z2);
      cam_grad.z() += (g_j(0, 0) + g_j(1, 1)) * (-f * inv_z2) +
                      g_j(0, 2) * (2 * f * x * inv_z2 / z) +
                      g_j(1, 2) * (2 * f * y * inv_z2 / z);
      const double len = s.cam.norm();
      const Vec3 n = s.cam / len;
      const Vec3 row3_grad(g_j(2, 0), g_j(2, 1), g_j(2, 2));
      cam_grad += (row3_grad - n * n.dot(row3_grad)) / len;
    }
    grads.position[s.index] = view.W.transpose() * cam_grad;

    // Scale and rotation through Sigma = A A^T, A = R diag(s).
    const Mat3 rot = g.rotation();
    const Vec3 sc = g.scale(floor);
    const Mat3 a = rot * sc.asDiagonal();
    const Mat3 a_grad = 2.0 * g_sigma * a;
    for (int k = 0; k < 3; ++k) {
      const double s_grad = a_grad.col(k).dot(rot.col(k));
      grads.raw_scale[s.index][k] = s_grad * (sc[k] - floor);
    }
    const Mat3 r_grad = a_grad * sc.asDiagonal();
    Mat3 dr[4];
    const Vec4 qn = g.quaternion();
    quat_rotation_partials(qn, dr);
    Vec4 qn_grad;
    for (int c = 0; c < 4; ++c) qn_grad[c] = (r_grad.array() * dr[c].array()).sum();
    const double raw_norm = g.raw_quat.norm();
    grads.raw_quat[s.index] = (qn_grad - qn * qn.dot(qn_grad)) / raw_norm;
  }
  return grads;
}

}  // namespace lamino
