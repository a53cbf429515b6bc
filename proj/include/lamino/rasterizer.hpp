#pragma once

#include <optional>
#include <vector>

#include "lamino/geometry.hpp"

namespace lamino {

// ---------------------------------------------------------------------------
// Differentiable X-ray splatting.
//
// Each 3D Gaussian is pushed to ray space (geometry module), the third ray
// coordinate is marginalized out, and the resulting 2D Gaussian is rendered
// additively:
//
//   image(q) = sum_i amp_i * exp(-1/2 d^T M_i^{-1} d),  d = q - center_i
//
// amp_i = mu_i * rho_i with mu_i = sqrt(2*pi*det(Sigma_ray)/det(Sigma_2d));
// because the third ray axis measures arc length along the ray, amp_i equals
// the line integral of the 3D Gaussian through its center. M_i is the 2D
// covariance in pixel units plus an anti-aliasing floor of (0.3 px)^2 on the
// diagonal (mu uses the pre-floor determinant). Contributions are cut off
// beyond 3 sigma of M_i.
//
// The per-pixel weight is evaluated in the precision given by the template
// parameter (float for the training path, double for gradient checks);
// accumulation is always double.
// ---------------------------------------------------------------------------

constexpr double kCovFloorPx = 0.3 * 0.3;  // (0.3 px)^2 diagonal loading
constexpr double kCutoffSq = 9.0;          // 3 sigma, squared Mahalanobis

struct Splat2D {
  int index = -1;          // gaussian index in the scene
  Vec2 center_px;          // projected center, fractional pixel coords
  Mat2 cov_px;             // pre-floor 2D covariance, pixel units
  Mat2 eval_inv;           // inverse of (cov_px + floor)
  double amp = 0.0;        // mu * rho
  double mu = 0.0;
  // cached intermediates for the backward pass
  Vec3 cam;                // camera-space center
  Mat3 cov_ray;            // Sigma_ray
  Mat3 jac;                // EWA jacobian J
  // pixel-space 3-sigma bounding box, clamped to the detector
  int x0 = 0, x1 = -1, y0 = 0, y1 = -1;
};

struct RenderOutput {
  Image image;
  std::vector<Splat2D> splats;  // non-culled, ascending gaussian index
};

/// Per-gaussian gradient buffers (raw parameter space) plus the screen-space
/// positional gradient norms used by adaptive density control.
struct SceneGrads {
  std::vector<double> raw_density;
  std::vector<Vec3> position;
  std::vector<Vec4> raw_quat;
  std::vector<Vec3> raw_scale;
  std::vector<double> screen_grad_norm;  // ||dL/d center_px|| per gaussian
  std::vector<uint8_t> visible;          // 1 when the gaussian produced a splat

  explicit SceneGrads(size_t n)
      : raw_density(n, 0.0),
        position(n, Vec3::Zero()),
        raw_quat(n, Vec4::Zero()),
        raw_scale(n, Vec3::Zero()),
        screen_grad_norm(n, 0.0),
        visible(n, 0) {}
};

/// Projects one gaussian; empty result means culled (behind the source or its
/// 3-sigma ellipse misses the detector).
std::optional<Splat2D> splat_gaussian(const RadiativeGaussian& g, double scale_floor,
                                      const ViewTransform& view,
                                      const LaminographyGeometry& geom, int index = -1);

template <typename T>
RenderOutput render(const GaussianScene& scene, const ViewTransform& view,
                    const LaminographyGeometry& geom);

/// Analytic gradients of sum_q upstream(q) * image(q) with respect to every
/// raw gaussian parameter. Requires the RenderOutput of the matching forward
/// pass; all arithmetic is double.
SceneGrads render_backward(const GaussianScene& scene, const ViewTransform& view,
                           const LaminographyGeometry& geom, const Image& upstream,
                           const RenderOutput& forward);

extern template RenderOutput render<float>(const GaussianScene&, const ViewTransform&,
                                           const LaminographyGeometry&);
extern template RenderOutput render<double>(const GaussianScene&, const ViewTransform&,
                                            const LaminographyGeometry&);

}  // namespace lamino
