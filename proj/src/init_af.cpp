#include "lamino/init_af.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace lamino {

Volume smooth_volume(const Volume& vol, double sigma, double truncation) {
  if (!(sigma > 0)) throw ValidationError("smooth_volume: sigma must be > 0");
  const int radius = std::max(1, int(std::ceil(truncation * sigma)));
  std::vector<double> kernel(2 * radius + 1);
  double sum = 0.0;
  for (int i = -radius; i <= radius; ++i) {
    kernel[i + radius] = std::exp(-0.5 * i * i / (sigma * sigma));
    sum += kernel[i + radius];
  }
  for (double& k : kernel) k /= sum;

  const int nx = vol.grid.dims[0], ny = vol.grid.dims[1], nz = vol.grid.dims[2];
  Volume a = vol, b(vol.grid);

  // One pass per axis; zero padding means out-of-range taps contribute nothing.
  const auto pass = [&](const Volume& src, Volume& dst, int axis) {
    const int n[3] = {nx, ny, nz};
#ifdef _OPENMP
#pragma omp parallel for schedule(static)
#endif
    for (int k = 0; k < nz; ++k)
      for (int j = 0; j < ny; ++j)
        for (int i = 0; i < nx; ++i) {
          int idx[3] = {i, j, k};
          double acc = 0.0;
          const int lo = std::max(-radius, -idx[axis]);
          const int hi = std::min(radius, n[axis] - 1 - idx[axis]);
          for (int o = lo; o <= hi; ++o) {
            int q[3] = {idx[0], idx[1], idx[2]};
            q[axis] += o;
            acc += kernel[o + radius] * src.at(q[0], q[1], q[2]);
          }
          dst.at(i, j, k) = acc;
        }
  };
  pass(a, b, 0);
  pass(b, a, 1);
  pass(a, b, 2);
  return b;
}

double otsu_threshold(const Volume& vol, int bins) {
  if (bins < 2) throw ValidationError("otsu: bins must be >= 2");
  const double lo = vol.min_value(), hi = vol.max_value();
  if (!(hi > lo)) throw DegenerateHistogram();

  // Per-bin count and value sum; class means come from exact value sums, not
  // bin centers.
  std::vector<double> count(bins, 0.0), value(bins, 0.0);
  const double scale = bins / (hi - lo);
  for (double v : vol.data) {
    int b = int((v - lo) * scale);
    b = std::clamp(b, 0, bins - 1);
    count[b] += 1.0;
    value[b] += v;
  }

  const double total_n = double(vol.data.size());
  const double total_v = std::accumulate(value.begin(), value.end(), 0.0);

  double best_var = -1.0, best_tau = lo;
  double n0 = 0.0, v0 = 0.0;
  for (int k = 1; k < bins; ++k) {
    n0 += count[k - 1];
    v0 += value[k - 1];
    const double n1 = total_n - n0;
    if (n0 == 0.0 || n1 == 0.0) continue;
    const double m0 = v0 / n0, m1 = (total_v - v0) / n1;
    const double var = (n0 / total_n) * (n1 / total_n) * (m0 - m1) * (m0 - m1);
    if (var > best_var) {
      best_var = var;
      best_tau = lo + k * (hi - lo) / bins;
    }
  }
  if (best_var < 0.0) throw DegenerateHistogram();
  return best_tau;
}

std::vector<uint8_t> build_mask(const Volume& smoothed, double tau) {
  if (!std::isfinite(tau)) throw ValidationError("build_mask: tau must be finite");
  std::vector<uint8_t> mask(smoothed.data.size());
  size_t n_true = 0;
  for (size_t i = 0; i < smoothed.data.size(); ++i) {
    mask[i] = smoothed.data[i] >= tau ? 1 : 0;
    n_true += mask[i];
  }
  if (n_true == 0) throw EmptyMask();
  return mask;
}

std::vector<std::pair<Vec3, double>> sample_init_points(const Volume& fdk_vol,
                                                        const std::vector<uint8_t>& mask,
                                                        int num_points, uint64_t seed) {
  std::vector<uint32_t> candidates;
  candidates.reserve(mask.size() / 8);
  for (size_t i = 0; i < mask.size(); ++i)
    if (mask[i]) candidates.push_back(uint32_t(i));
  if (candidates.empty()) throw EmptyMask();

  const GridSpec& grid = fdk_vol.grid;
  const double rho_min = 1e-4 * std::max(fdk_vol.max_value(), 0.0) + 1e-30;

  std::mt19937_64 rng = make_rng(seed, 0x5eed'a11f);
  std::uniform_int_distribution<size_t> pick(0, candidates.size() - 1);
  std::uniform_real_distribution<double> jitter(-0.5, 0.5);

  std::vector<std::pair<Vec3, double>> points;
  points.reserve(num_points);
  for (int s = 0; s < num_points; ++s) {
    const uint32_t idx = candidates[pick(rng)];
    const int i = int(idx % grid.dims[0]);
    const int j = int((idx / grid.dims[0]) % grid.dims[1]);
    const int k = int(idx / (size_t(grid.dims[0]) * grid.dims[1]));
    Vec3 p = grid.voxel_center(i, j, k);
    p += grid.voxel_size * Vec3(jitter(rng), jitter(rng), jitter(rng));
    const double rho = std::max(fdk_vol.sample_trilinear(p), rho_min);
    points.emplace_back(p, rho);
  }
  return points;
}

namespace {

// Mean distance to the 3 nearest neighbors, averaged over all points.
double mean_knn_spacing(const std::vector<std::pair<Vec3, double>>& pts) {
  const int n = int(pts.size());
  if (n < 2) return 0.0;
  const int k = std::min(3, n - 1);
  double total = 0.0;
#ifdef _OPENMP
#pragma omp parallel for reduction(+ : total) schedule(static)
#endif
  for (int i = 0; i < n; ++i) {
    double best[3] = {1e300, 1e300, 1e300};
    for (int j = 0; j < n; ++j) {
      if (j == i) continue;
      const double d2 = (pts[i].first - pts[j].first).squaredNorm();
      if (d2 < best[2]) {
        best[2] = d2;
        if (best[2] < best[1]) std::swap(best[1], best[2]);
        if (best[1] < best[0]) std::swap(best[0], best[1]);
      }
    }
    double acc = 0.0;
    for (int m = 0; m < k; ++m) acc += std::sqrt(best[m]);
    total += acc / k;
  }
  return total / n;
}

GaussianScene scene_from_points(const std::vector<std::pair<Vec3, double>>& pts,
                                const Aabb& bounds) {
  GaussianScene scene;
  scene.bounds = bounds;
  const double floor = scene.scale_floor();
  double s0 = mean_knn_spacing(pts);
  s0 = std::clamp(s0, 1.05 * floor, 0.02 * bounds.max_extent());
  const double raw_scale = RadiativeGaussian::raw_from_scale(s0, floor);

  scene.gaussians.reserve(pts.size());
  for (const auto& [pos, rho] : pts) {
    RadiativeGaussian g;
    g.position = pos;
    g.raw_density = RadiativeGaussian::raw_from_density(rho);
    g.raw_quat = Vec4(1, 0, 0, 0);
    g.raw_scale = Vec3::Constant(raw_scale);
    scene.gaussians.push_back(g);
  }
  return scene;
}

std::vector<std::pair<Vec3, double>> uniform_points(const Volume& fdk_vol,
                                                    int num_points, uint64_t seed) {
  const Aabb bounds = fdk_vol.grid.bounds();
  double mean_abs = 0.0;
  for (double v : fdk_vol.data) mean_abs += std::abs(v);
  mean_abs /= double(fdk_vol.data.size());
  if (mean_abs <= 0.0) mean_abs = 1e-6;

  std::mt19937_64 rng = make_rng(seed, 0x0f0f'1337);
  std::uniform_real_distribution<double> u01(0.0, 1.0);
  std::vector<std::pair<Vec3, double>> pts;
  pts.reserve(num_points);
  for (int s = 0; s < num_points; ++s) {
    Vec3 p;
    for (int a = 0; a < 3; ++a)
      p[a] = bounds.lo[a] + u01(rng) * (bounds.hi[a] - bounds.lo[a]);
    pts.emplace_back(p, mean_abs);
  }
  return pts;
}

}  // namespace

InitResult initialize_scene(const Volume& fdk_vol, const AfConfig& cfg) {
  cfg.validate();
  InitResult out;
  try {
    const Volume smoothed =
        smooth_volume(fdk_vol, cfg.smoothing_sigma, cfg.kernel_truncation);
    out.otsu_tau = otsu_threshold(smoothed, cfg.otsu_bins);
    const std::vector<uint8_t> mask = build_mask(smoothed, out.otsu_tau);
    const auto pts = sample_init_points(fdk_vol, mask, cfg.num_points, cfg.rng_seed);
    out.scene = scene_from_points(pts, fdk_vol.grid.bounds());
  } catch (const DegenerateHistogram&) {
    out.used_fallback = true;
  } catch (const EmptyMask&) {
    out.used_fallback = true;
  }
  if (out.used_fallback) {
    std::fprintf(stderr,
                 "warning: artifact-filtering mask degenerated; "
                 "falling back to uniform initialization\n");
    out.scene = scene_from_points(uniform_points(fdk_vol, cfg.num_points, cfg.rng_seed),
                                  fdk_vol.grid.bounds());
  }
  return out;
}

GaussianScene initialize_scene_uniform(const Volume& fdk_vol, int num_points,
                                       uint64_t seed) {
  return scene_from_points(uniform_points(fdk_vol, num_points, seed),
                           fdk_vol.grid.bounds());
}

}  // namespace lamino
