#pragma once

#include <functional>
#include <random>
#include <vector>

#include "lamino/rasterizer.hpp"

namespace lamino {

// Training loop: renders one (or a few) random views per step, minimizes
// L1 + lambda_ssim * (1 - SSIM), applies per-group Adam updates and runs
// clone/split/prune adaptive density control on a fixed schedule.

struct TrainConfig {
  int iterations = 30000;
  double lambda_ssim = 0.25;

  // Learning rates. Position is scaled by the scene extent and decays
  // exponentially from lr_position to lr_position_final over the run.
  double lr_density = 5e-2;
  double lr_position = 2e-4;
  double lr_position_final = 2e-6;
  double lr_rotation = 1e-3;
  double lr_scale = 5e-3;

  int densify_start = 500;
  int densify_end = 20000;
  int densify_interval = 100;
  double grad_threshold = 5e-5;          // mean screen-space gradient, pixels
  double prune_density_rel = 1e-4;       // of the current max activated density
  double split_scale_threshold = 0.01;   // fraction of the scene extent
  double prune_scale_fraction = 0.5;     // of the scene extent

  uint64_t rng_seed = 0;
  int views_per_step = 1;
  bool use_holdout = true;  // reserve the last view for PSNR logging
  int log_interval = 50;
  bool log_wall_time = true;

  void validate() const;
};

struct LossResult {
  double loss = 0.0;
  double l1 = 0.0;
  double ssim_term = 0.0;  // lambda * (1 - ssim)
  Image grad;              // d loss / d rendered
};

/// Eq-style training loss with its analytic image gradient. dynamic_range is
/// the measured stack's value range (fixed over a run).
LossResult compute_loss(const Image& rendered, const Image& measured,
                        double lambda_ssim, double dynamic_range);

struct AdamParams {
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

/// One element-wise Adam update; t is the 1-based step count.
inline double adam_step(double& m, double& v, double grad, double lr, int64_t t,
                        const AdamParams& p = {}) {
  m = p.beta1 * m + (1 - p.beta1) * grad;
  v = p.beta2 * v + (1 - p.beta2) * grad * grad;
  const double mhat = m / (1 - std::pow(p.beta1, double(t)));
  const double vhat = v / (1 - std::pow(p.beta2, double(t)));
  return lr * mhat / (std::sqrt(vhat) + p.eps);
}

struct MetricRecord {
  int64_t iter = 0;
  double loss = 0.0;
  double l1 = 0.0;
  double ssim_term = 0.0;
  size_t gaussians = 0;
  double wall_ms = 0.0;
  double holdout_psnr = std::numeric_limits<double>::quiet_NaN();
};

struct TrainState {
  GaussianScene scene;
  // Adam moments, row-aligned with the scene.
  std::vector<double> m_density, v_density;
  std::vector<Vec3> m_position, v_position;
  std::vector<Vec4> m_quat, v_quat;
  std::vector<Vec3> m_scale, v_scale;
  // Screen-gradient statistics since the last densify event.
  std::vector<double> grad_accum;
  std::vector<int> grad_obs;
  int64_t iter = 0;
  double dynamic_range = 1.0;
  std::mt19937_64 rng;
  std::vector<MetricRecord> records;

  explicit TrainState(GaussianScene s, uint64_t seed = 0);
  /// Buffer rows must track the gaussian count at all times.
  void check_alignment() const;
  void resize_buffers();
};

/// Renders each listed view, backpropagates the loss, applies one Adam update
/// per parameter group, renormalizes quaternions and clamps positions to
/// 1.2x the scene bounds.
LossResult train_step(TrainState& state, const ProjectionStack& stack,
                      const std::vector<int>& view_indices, const TrainConfig& cfg);

struct DensifyStats {
  int cloned = 0;
  int split = 0;
  int pruned = 0;
};

DensifyStats densify_and_prune(TrainState& state, const TrainConfig& cfg);

struct TrainResult {
  GaussianScene scene;
  std::vector<MetricRecord> records;
};

using TrainObserver = std::function<void(int64_t completed_iters, const TrainState&)>;

TrainResult train(const ProjectionStack& projections, const GaussianScene& init_scene,
                  const TrainConfig& cfg, const TrainObserver& observer = nullptr);

}  // namespace lamino
