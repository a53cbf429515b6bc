#include "lamino/metrics.hpp"

#include <cmath>

#include "lamino/ssim.hpp"

namespace lamino {

namespace {

double psnr_from_buffers(const std::vector<double>& a, const std::vector<double>& b,
                         double peak) {
  double mse = 0.0;
  for (size_t i = 0; i < a.size(); ++i) {
    const double d = a[i] - b[i];
    mse += d * d;
  }
  mse /= double(a.size());
  if (peak <= 0.0) {
    peak = 0.0;
    for (double v : b) peak = std::max(peak, v);
  }
  if (mse == 0.0) return kPsnrCap;
  return std::min(kPsnrCap, 10.0 * std::log10(peak * peak / mse));
}

}  // namespace

double psnr_volume(const Volume& a, const Volume& b, double peak) {
  if (a.grid.dims != b.grid.dims)
    throw ValidationError("psnr_volume: volume dims differ");
  return psnr_from_buffers(a.data, b.data, peak);
}

double psnr_image(const Image& a, const Image& b, double peak) {
  if (a.nu != b.nu || a.nv != b.nv) throw ValidationError("psnr_image: shapes differ");
  return psnr_from_buffers(a.data, b.data, peak);
}

double ssim_slices(const Volume& a, const Volume& b, int axis) {
  if (a.grid.dims != b.grid.dims)
    throw ValidationError("ssim_slices: volume dims differ");
  if (axis < 0 || axis > 2) throw ValidationError("ssim_slices: axis must be 0..2");

  const double range = std::max(a.max_value(), b.max_value()) -
                       std::min(a.min_value(), b.min_value());

  const int a1 = (axis + 1) % 3, a2 = (axis + 2) % 3;
  const int n_slices = a.grid.dims[axis];
  const int w = a.grid.dims[a1], h = a.grid.dims[a2];

  double total = 0.0;
  Image sa(w, h), sb(w, h);
  for (int s = 0; s < n_slices; ++s) {
    for (int row = 0; row < h; ++row)
      for (int col = 0; col < w; ++col) {
        int idx[3];
        idx[axis] = s;
        idx[a1] = col;
        idx[a2] = row;
        sa.at(col, row) = a.at(idx[0], idx[1], idx[2]);
        sb.at(col, row) = b.at(idx[0], idx[1], idx[2]);
      }
    total += ssim(sa, sb, range).value;
  }
  return total / n_slices;
}

}  // namespace lamino
