#include "lamino/fdk.hpp"

#include <fftw3.h>

#include <cmath>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace lamino {

namespace {
constexpr double kPi = 3.14159265358979323846;

bool is_pow2(int v) { return v > 0 && (v & (v - 1)) == 0; }
}  // namespace

void FdkConfig::validate(int nu) const {
  if (nu < 4) throw ValidationError("fdk: detector must have nu >= 4");
  if (padding_factor < 2 || !is_pow2(padding_factor))
    throw ValidationError("fdk: padding_factor must be a power of two >= 2");
  grid.validate();
}

ProjectionStack filter_projections(const ProjectionStack& stack, const FdkConfig& cfg) {
  const LaminographyGeometry& geom = stack.geom;
  cfg.validate(geom.nu);

  const int nu = geom.nu, nv = geom.nv;
  const int padded = cfg.padding_factor * nu;
  const int spec_len = padded / 2 + 1;
  // Detector sampling rescaled to the isocenter plane.
  const double du = geom.pixel_size * geom.d_so / geom.d_sd;

  // Band-limited ramp kernel, truncated at |n| <= nu-1. With padding >= 2*nu
  // the circular convolution below equals the linear one for any row of
  // support nu, so the truncation is exact rather than an approximation.
  std::vector<double> kernel(padded, 0.0);
  kernel[0] = 1.0 / (4.0 * du * du);
  for (int n = 1; n < nu; n += 2) {
    const double tap = -1.0 / (kPi * kPi * double(n) * double(n) * du * du);
    kernel[n] = tap;
    kernel[padded - n] = tap;
  }

  double* buf = fftw_alloc_real(padded);
  fftw_complex* spec = fftw_alloc_complex(spec_len);
  fftw_complex* kernel_spec = fftw_alloc_complex(spec_len);
  fftw_plan fwd = fftw_plan_dft_r2c_1d(padded, buf, spec, FFTW_ESTIMATE);
  fftw_plan bwd = fftw_plan_dft_c2r_1d(padded, spec, buf, FFTW_ESTIMATE);

  std::copy(kernel.begin(), kernel.end(), buf);
  fftw_execute(fwd);
  for (int j = 0; j < spec_len; ++j) {
    double window = 1.0;
    if (cfg.filter == FdkConfig::Filter::RampHann)
      window = 0.5 * (1.0 + std::cos(2.0 * kPi * j / padded));
    kernel_spec[j][0] = spec[j][0] * window;
    kernel_spec[j][1] = spec[j][1] * window;
  }

  ProjectionStack out;
  out.geom = geom;
  out.angles = stack.angles;
  out.images.assign(stack.views(), Image(nu, nv));

  for (size_t vi = 0; vi < stack.views(); ++vi) {
    const ViewTransform view = build_view(geom, stack.angles[vi]);
    const Vec2 pp = principal_offset(view, geom);
    const Image& src = stack.images[vi];
    Image& dst = out.images[vi];
    for (int row = 0; row < nv; ++row) {
      const double v = (row - 0.5 * (nv - 1)) * geom.pixel_size + pp.y();
      for (int i = 0; i < nu; ++i) {
        const double u = (i - 0.5 * (nu - 1)) * geom.pixel_size + pp.x();
        const double cosw =
            geom.d_sd / std::sqrt(geom.d_sd * geom.d_sd + u * u + v * v);
        buf[i] = src.at(i, row) * cosw;
      }
      std::fill(buf + nu, buf + padded, 0.0);
      fftw_execute(fwd);
      for (int j = 0; j < spec_len; ++j) {
        const double re = spec[j][0] * kernel_spec[j][0] - spec[j][1] * kernel_spec[j][1];
        const double im = spec[j][0] * kernel_spec[j][1] + spec[j][1] * kernel_spec[j][0];
        spec[j][0] = re;
        spec[j][1] = im;
      }
      fftw_execute(bwd);
      const double scale = du / padded;  // du: Riemann sum, 1/padded: FFT norm
      for (int i = 0; i < nu; ++i) dst.at(i, row) = buf[i] * scale;
    }
  }

  fftw_destroy_plan(fwd);
  fftw_destroy_plan(bwd);
  fftw_free(buf);
  fftw_free(spec);
  fftw_free(kernel_spec);
  return out;
}

Volume backproject(const ProjectionStack& filtered, const GridSpec& grid) {
  grid.validate();
  if (filtered.views() < 1) throw ValidationError("fdk: need at least one view");
  const LaminographyGeometry& geom = filtered.geom;

  std::vector<ViewTransform> views(filtered.views());
  for (size_t vi = 0; vi < filtered.views(); ++vi)
    views[vi] = build_view(geom, filtered.angles[vi]);

  // Full-circle weighting: each direction is covered twice over 2*pi.
  const double dtheta = 2.0 * kPi / double(filtered.views());
  const double weight0 = 0.5 * dtheta * geom.d_so * geom.d_so;

  Volume vol(grid);
  const int nx = grid.dims[0], ny = grid.dims[1], nz = grid.dims[2];

#ifdef _OPENMP
#pragma omp parallel for schedule(dynamic, 1)
#endif
  for (int k = 0; k < nz; ++k) {
    for (size_t vi = 0; vi < filtered.views(); ++vi) {
      const Image& img = filtered.images[vi];
      const ViewTransform& view = views[vi];
      for (int j = 0; j < ny; ++j) {
        for (int i = 0; i < nx; ++i) {
          const auto proj = project_point(view, geom, grid.voxel_center(i, j, k));
          if (!proj) continue;
          const double pu = proj->pixel.x(), pv = proj->pixel.y();
          const int iu = int(std::floor(pu)), iv = int(std::floor(pv));
          if (iu < 0 || iv < 0 || iu + 1 >= geom.nu || iv + 1 >= geom.nv) continue;
          const double fu = pu - iu, fv = pv - iv;
          const double sample = (1 - fu) * (1 - fv) * img.at(iu, iv) +
                                fu * (1 - fv) * img.at(iu + 1, iv) +
                                (1 - fu) * fv * img.at(iu, iv + 1) +
                                fu * fv * img.at(iu + 1, iv + 1);
          const double z = proj->cam.z();
          vol.data[(size_t(k) * ny + j) * nx + i] += weight0 / (z * z) * sample;
        }
      }
    }
  }
  return vol;
}

Volume fdk_reconstruct(const ProjectionStack& stack, const FdkConfig& cfg) {
  return backproject(filter_projections(stack, cfg), cfg.grid);
}

}  // namespace lamino
