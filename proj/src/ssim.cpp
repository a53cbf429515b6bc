#include "lamino/ssim.hpp"

#include <cmath>

namespace lamino {

namespace {

std::vector<double> gaussian_window(int size, double sigma) {
  std::vector<double> w(size);
  const double c = 0.5 * (size - 1);
  double sum = 0.0;
  for (int i = 0; i < size; ++i) {
    w[i] = std::exp(-0.5 * (i - c) * (i - c) / (sigma * sigma));
    sum += w[i];
  }
  for (double& v : w) v /= sum;
  return w;
}

// Valid-mode separable windowed sum: out is (nu-W+1) x (nv-W+1).
void window_sums(const std::vector<double>& src, int nu, int nv,
                 const std::vector<double>& w, std::vector<double>& tmp,
                 std::vector<double>& out) {
  const int ws = int(w.size());
  const int ou = nu - ws + 1, ov = nv - ws + 1;
  tmp.assign(size_t(ou) * nv, 0.0);
  for (int y = 0; y < nv; ++y)
    for (int ox = 0; ox < ou; ++ox) {
      double acc = 0.0;
      for (int k = 0; k < ws; ++k) acc += w[k] * src[size_t(y) * nu + ox + k];
      tmp[size_t(y) * ou + ox] = acc;
    }
  out.assign(size_t(ou) * ov, 0.0);
  for (int oy = 0; oy < ov; ++oy)
    for (int ox = 0; ox < ou; ++ox) {
      double acc = 0.0;
      for (int k = 0; k < ws; ++k) acc += w[k] * tmp[size_t(oy + k) * ou + ox];
      out[size_t(oy) * ou + ox] = acc;
    }
}

// Transpose of window_sums: scatter a map back to image coordinates (gather
// form, separable).
void window_scatter(const std::vector<double>& map, int ou, int ov, int nu, int nv,
                    const std::vector<double>& w, std::vector<double>& tmp,
                    std::vector<double>& out) {
  const int ws = int(w.size());
  tmp.assign(size_t(ou) * nv, 0.0);
  for (int qy = 0; qy < nv; ++qy) {
    const int oy_lo = std::max(0, qy - ws + 1), oy_hi = std::min(ov - 1, qy);
    for (int ox = 0; ox < ou; ++ox) {
      double acc = 0.0;
      for (int oy = oy_lo; oy <= oy_hi; ++oy)
        acc += w[qy - oy] * map[size_t(oy) * ou + ox];
      tmp[size_t(qy) * ou + ox] = acc;
    }
  }
  out.assign(size_t(nu) * nv, 0.0);
  for (int qy = 0; qy < nv; ++qy) {
    const int row = qy * nu;
    for (int qx = 0; qx < nu; ++qx) {
      const int ox_lo = std::max(0, qx - ws + 1), ox_hi = std::min(ou - 1, qx);
      double acc = 0.0;
      for (int ox = ox_lo; ox <= ox_hi; ++ox)
        acc += w[qx - ox] * tmp[size_t(qy) * ou + ox];
      out[size_t(row) + qx] = acc;
    }
  }
}

}  // namespace

SsimResult ssim(const Image& x, const Image& y, double dynamic_range,
                bool with_gradient) {
  if (x.nu != y.nu || x.nv != y.nv)
    throw ValidationError("ssim: image shapes differ");
  int ws = std::min({11, x.nu, x.nv});
  if (ws % 2 == 0) --ws;
  if (ws < 1) throw ValidationError("ssim: image too small");

  const double range = dynamic_range > 0 ? dynamic_range : 1e-12;
  const double c1 = (0.01 * range) * (0.01 * range);
  const double c2 = (0.03 * range) * (0.03 * range);
  const std::vector<double> w = gaussian_window(ws, 1.5);

  const int nu = x.nu, nv = x.nv;
  const int ou = nu - ws + 1, ov = nv - ws + 1;
  const size_t n = size_t(nu) * nv;

  std::vector<double> xx(n), yy(n), xy(n);
  for (size_t i = 0; i < n; ++i) {
    xx[i] = x.data[i] * x.data[i];
    yy[i] = y.data[i] * y.data[i];
    xy[i] = x.data[i] * y.data[i];
  }

  std::vector<double> tmp, mu_x, mu_y, ex2, ey2, exy;
  window_sums(x.data, nu, nv, w, tmp, mu_x);
  window_sums(y.data, nu, nv, w, tmp, mu_y);
  window_sums(xx, nu, nv, w, tmp, ex2);
  window_sums(yy, nu, nv, w, tmp, ey2);
  window_sums(xy, nu, nv, w, tmp, exy);

  const size_t nm = size_t(ou) * ov;
  std::vector<double> f1, f2, f3;
  if (with_gradient) {
    f1.assign(nm, 0.0);
    f2.assign(nm, 0.0);
    f3.assign(nm, 0.0);
  }

  double total = 0.0;
  for (size_t i = 0; i < nm; ++i) {
    const double mx = mu_x[i], my = mu_y[i];
    const double sx = ex2[i] - mx * mx;
    const double sy = ey2[i] - my * my;
    const double sxy = exy[i] - mx * my;
    const double a1 = 2 * mx * my + c1, a2 = 2 * sxy + c2;
    const double b1 = mx * mx + my * my + c1, b2 = sx + sy + c2;
    total += (a1 * a2) / (b1 * b2);

    if (with_gradient) {
      const double ds_dmu = 2 * a2 * (my * b1 - mx * a1) / (b1 * b1 * b2);
      const double ds_dsx = -(a1 * a2) / (b1 * b2 * b2);
      const double ds_dsxy = 2 * a1 / (b1 * b2);
      f1[i] = ds_dmu - 2 * mx * ds_dsx - my * ds_dsxy;
      f2[i] = ds_dsx;
      f3[i] = ds_dsxy;
    }
  }

  SsimResult out;
  out.value = total / double(nm);
  if (with_gradient) {
    std::vector<double> g1, g2, g3;
    window_scatter(f1, ou, ov, nu, nv, w, tmp, g1);
    window_scatter(f2, ou, ov, nu, nv, w, tmp, g2);
    window_scatter(f3, ou, ov, nu, nv, w, tmp, g3);
    out.grad_x = Image(nu, nv);
    const double inv_nm = 1.0 / double(nm);
    for (size_t i = 0; i < n; ++i)
      out.grad_x.data[i] = inv_nm * (g1[i] + 2 * x.data[i] * g2[i] + y.data[i] * g3[i]);
  }
  return out;
}

}  // namespace lamino
