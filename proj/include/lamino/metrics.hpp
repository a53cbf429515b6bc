#pragma once

#include "lamino/types.hpp"

namespace lamino {

/// PSNR cap reported when the volumes are identical.
constexpr double kPsnrCap = 99.0;

/// 10*log10(peak^2 / MSE) of a against reference b. peak <= 0 selects the
/// maximum of b. Identical volumes return the 99 dB cap.
double psnr_volume(const Volume& a, const Volume& b, double peak = 0.0);

/// PSNR between two images (peak from the reference b when peak <= 0).
double psnr_image(const Image& a, const Image& b, double peak = 0.0);

/// Mean over 2D slices along axis (0=x, 1=y, 2=z) of SSIM(a_slice, b_slice).
/// The dynamic range is the combined value range of both volumes, which keeps
/// the metric symmetric.
double ssim_slices(const Volume& a, const Volume& b, int axis = 2);

}  // namespace lamino
