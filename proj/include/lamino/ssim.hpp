#pragma once

#include "lamino/types.hpp"

namespace lamino {

// SSIM after Wang et al.: 11x11 Gaussian window (sigma 1.5), C1 = (0.01 L)^2,
// C2 = (0.03 L)^2. The map is computed over fully-interior window positions
// (no padding) and averaged. When an image is smaller than 11 pixels the
// window shrinks to the largest odd size that fits.

struct SsimResult {
  double value = 0.0;
  Image grad_x;  // d mean-SSIM / d x, same shape as the inputs (optional)
};

/// Mean SSIM of x against y with dynamic range L. Fills grad_x when
/// with_gradient is set.
SsimResult ssim(const Image& x, const Image& y, double dynamic_range,
                bool with_gradient = false);

}  // namespace lamino
