#include "lamino/optimizer.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>

#include "lamino/metrics.hpp"
#include "lamino/ssim.hpp"

namespace lamino {

void TrainConfig::validate() const {
  if (iterations < 0) throw ValidationError("train: iterations must be >= 0");
  if (!(lambda_ssim >= 0.0 && lambda_ssim <= 1.0))
    throw ValidationError("train: lambda_ssim must lie in [0, 1]");
  if (!(densify_start < densify_end && densify_end <= std::max(iterations, 1)))
    throw ValidationError("train: need densify_start < densify_end <= iterations");
  if (!(grad_threshold > 0)) throw ValidationError("train: grad_threshold must be > 0");
  if (densify_interval < 1) throw ValidationError("train: densify_interval must be >= 1");
  if (views_per_step < 1) throw ValidationError("train: views_per_step must be >= 1");
}

LossResult compute_loss(const Image& rendered, const Image& measured,
                        double lambda_ssim, double dynamic_range) {
  if (rendered.nu != measured.nu || rendered.nv != measured.nv)
    throw ValidationError("compute_loss: image shapes differ");
  const size_t n = rendered.data.size();

  LossResult out;
  out.grad = Image(rendered.nu, rendered.nv);
  double l1 = 0.0;
  const double inv_n = 1.0 / double(n);
  for (size_t i = 0; i < n; ++i) {
    const double d = rendered.data[i] - measured.data[i];
    l1 += std::abs(d);
    out.grad.data[i] = (d > 0 ? 1.0 : (d < 0 ? -1.0 : 0.0)) * inv_n;
  }
  out.l1 = l1 * inv_n;

  if (lambda_ssim > 0.0) {
    const SsimResult s = ssim(rendered, measured, dynamic_range, true);
    out.ssim_term = lambda_ssim * (1.0 - s.value);
    for (size_t i = 0; i < n; ++i)
      out.grad.data[i] -= lambda_ssim * s.grad_x.data[i];
  }
  out.loss = out.l1 + out.ssim_term;
  return out;
}

TrainState::TrainState(GaussianScene s, uint64_t seed)
    : scene(std::move(s)), rng(make_rng(seed, 0x7247'1234)) {
  resize_buffers();
}

void TrainState::resize_buffers() {
  const size_t n = scene.count();
  m_density.resize(n, 0.0);
  v_density.resize(n, 0.0);
  m_position.resize(n, Vec3::Zero());
  v_position.resize(n, Vec3::Zero());
  m_quat.resize(n, Vec4::Zero());
  v_quat.resize(n, Vec4::Zero());
  m_scale.resize(n, Vec3::Zero());
  v_scale.resize(n, Vec3::Zero());
  grad_accum.resize(n, 0.0);
  grad_obs.resize(n, 0);
}

void TrainState::check_alignment() const {
  const size_t n = scene.count();
  if (m_density.size() != n || m_position.size() != n || m_quat.size() != n ||
      m_scale.size() != n || grad_accum.size() != n || grad_obs.size() != n)
    throw ComputeError("train state buffers out of sync with the scene");
}

namespace {

template <int N>
void adam_update_vec(Eigen::Matrix<double, N, 1>& m, Eigen::Matrix<double, N, 1>& v,
                     const Eigen::Matrix<double, N, 1>& g,
                     Eigen::Matrix<double, N, 1>& x, double lr, int64_t t) {
  for (int i = 0; i < N; ++i) {
    double mi = m[i], vi = v[i];
    x[i] -= adam_step(mi, vi, g[i], lr, t);
    m[i] = mi;
    v[i] = vi;
  }
}

}  // namespace

LossResult train_step(TrainState& state, const ProjectionStack& stack,
                      const std::vector<int>& view_indices, const TrainConfig& cfg) {
  if (view_indices.empty()) throw ValidationError("train_step: empty view batch");
  state.check_alignment();
  GaussianScene& scene = state.scene;
  const size_t n = scene.count();

  SceneGrads total(n);
  LossResult batch_loss;
  for (int vi : view_indices) {
    const ViewTransform view = build_view(stack.geom, stack.angles[vi]);
    const RenderOutput fwd = render<float>(scene, view, stack.geom);
    LossResult loss =
        compute_loss(fwd.image, stack.images[vi], cfg.lambda_ssim, state.dynamic_range);
    if (!std::isfinite(loss.loss))
      throw NonFiniteLoss("non-finite loss at iteration " + std::to_string(state.iter) +
                          ", view " + std::to_string(vi));
    batch_loss.loss += loss.loss;
    batch_loss.l1 += loss.l1;
    batch_loss.ssim_term += loss.ssim_term;

    const SceneGrads g = render_backward(scene, view, stack.geom, loss.grad, fwd);
    for (size_t i = 0; i < n; ++i) {
      total.raw_density[i] += g.raw_density[i];
      total.position[i] += g.position[i];
      total.raw_quat[i] += g.raw_quat[i];
      total.raw_scale[i] += g.raw_scale[i];
      if (g.visible[i]) {
        state.grad_accum[i] += g.screen_grad_norm[i];
        state.grad_obs[i] += 1;
      }
    }
  }
  const double inv_b = 1.0 / double(view_indices.size());
  batch_loss.loss *= inv_b;
  batch_loss.l1 *= inv_b;
  batch_loss.ssim_term *= inv_b;

  const int64_t t = state.iter + 1;
  const double extent = scene.bounds.max_extent();
  const double frac =
      cfg.iterations > 1 ? double(state.iter) / double(cfg.iterations - 1) : 0.0;
  const double lr_pos = extent * cfg.lr_position *
                        std::pow(cfg.lr_position_final / cfg.lr_position, frac);

  const Aabb clamp_box = scene.bounds.scaled(1.2);
  for (size_t i = 0; i < n; ++i) {
    RadiativeGaussian& g = scene.gaussians[i];
    {
      double m = state.m_density[i], v = state.v_density[i];
      g.raw_density -= adam_step(m, v, total.raw_density[i] * inv_b, cfg.lr_density, t);
      state.m_density[i] = m;
      state.v_density[i] = v;
    }
    {
      Vec3 grad = total.position[i] * inv_b;
      adam_update_vec<3>(state.m_position[i], state.v_position[i], grad, g.position,
                         lr_pos, t);
    }
    {
      Vec4 grad = total.raw_quat[i] * inv_b;
      adam_update_vec<4>(state.m_quat[i], state.v_quat[i], grad, g.raw_quat,
                         cfg.lr_rotation, t);
    }
    {
      Vec3 grad = total.raw_scale[i] * inv_b;
      adam_update_vec<3>(state.m_scale[i], state.v_scale[i], grad, g.raw_scale,
                         cfg.lr_scale, t);
    }
    g.raw_quat = g.quaternion();
    for (int a = 0; a < 3; ++a)
      g.position[a] = std::clamp(g.position[a], clamp_box.lo[a], clamp_box.hi[a]);
  }

  state.iter += 1;
  return batch_loss;
}

DensifyStats densify_and_prune(TrainState& state, const TrainConfig& cfg) {
  state.check_alignment();
  GaussianScene& scene = state.scene;
  const double extent = scene.bounds.max_extent();
  const double floor = scene.scale_floor();
  DensifyStats stats;

  std::normal_distribution<double> normal(0.0, 1.0);
  const auto sample_offset = [&](const RadiativeGaussian& g) {
    Vec3 z(normal(state.rng), normal(state.rng), normal(state.rng));
    return Vec3(g.rotation() * (g.scale(floor).asDiagonal() * z));
  };

  const size_t n0 = scene.count();
  for (size_t i = 0; i < n0; ++i) {
    if (state.grad_obs[i] == 0) continue;
    const double mean_grad = state.grad_accum[i] / state.grad_obs[i];
    if (mean_grad <= cfg.grad_threshold) continue;

    RadiativeGaussian& g = scene.gaussians[i];
    const Vec3 sc = g.scale(floor);
    if (sc.maxCoeff() < cfg.split_scale_threshold * extent) {
      // Clone: duplicate, offset by one standard deviation of the parent.
      RadiativeGaussian child = g;
      child.position += sample_offset(g);
      scene.gaussians.push_back(child);
      ++stats.cloned;
    } else {
      // Split into two shrunk children scattered inside the parent.
      RadiativeGaussian child = g;
      for (int a = 0; a < 3; ++a) {
        const double s_new = std::max(sc[a] / 1.6, 1.05 * floor);
        child.raw_scale[a] = RadiativeGaussian::raw_from_scale(s_new, floor);
      }
      const Vec3 parent_pos = g.position;
      child.position = parent_pos + sample_offset(g);
      RadiativeGaussian second = child;
      second.position = parent_pos + sample_offset(g);
      g = child;  // re-uses the parent's row; moments reset below
      state.m_density[i] = state.v_density[i] = 0.0;
      state.m_position[i].setZero();
      state.v_position[i].setZero();
      state.m_quat[i].setZero();
      state.v_quat[i].setZero();
      state.m_scale[i].setZero();
      state.v_scale[i].setZero();
      scene.gaussians.push_back(second);
      ++stats.split;
    }
  }
  state.resize_buffers();  // new rows appear zero-initialized

  // Prune: negligible density or degenerate size.
  double max_rho = 0.0;
  for (const RadiativeGaussian& g : scene.gaussians)
    max_rho = std::max(max_rho, g.density());
  const double rho_floor = cfg.prune_density_rel * max_rho;

  std::vector<uint8_t> keep(scene.count(), 1);
  size_t kept = 0;
  for (size_t i = 0; i < scene.count(); ++i) {
    const RadiativeGaussian& g = scene.gaussians[i];
    if (g.density() < rho_floor ||
        g.scale(floor).maxCoeff() > cfg.prune_scale_fraction * extent)
      keep[i] = 0;
    kept += keep[i];
  }
  if (kept == 0) {
    std::fprintf(stderr, "warning: prune would remove every gaussian; skipping\n");
  } else if (kept < scene.count()) {
    size_t w = 0;
    for (size_t i = 0; i < scene.count(); ++i) {
      if (!keep[i]) continue;
      scene.gaussians[w] = scene.gaussians[i];
      state.m_density[w] = state.m_density[i];
      state.v_density[w] = state.v_density[i];
      state.m_position[w] = state.m_position[i];
      state.v_position[w] = state.v_position[i];
      state.m_quat[w] = state.m_quat[i];
      state.v_quat[w] = state.v_quat[i];
      state.m_scale[w] = state.m_scale[i];
      state.v_scale[w] = state.v_scale[i];
      ++w;
    }
    stats.pruned = int(scene.count() - kept);
    scene.gaussians.resize(kept);
    state.m_density.resize(kept);
    state.v_density.resize(kept);
    state.m_position.resize(kept);
    state.v_position.resize(kept);
    state.m_quat.resize(kept);
    state.v_quat.resize(kept);
    state.m_scale.resize(kept);
    state.v_scale.resize(kept);
    state.grad_accum.resize(kept);
    state.grad_obs.resize(kept);
  }

  std::fill(state.grad_accum.begin(), state.grad_accum.end(), 0.0);
  std::fill(state.grad_obs.begin(), state.grad_obs.end(), 0);
  state.check_alignment();
  return stats;
}

TrainResult train(const ProjectionStack& projections, const GaussianScene& init_scene,
                  const TrainConfig& cfg, const TrainObserver& observer) {
  cfg.validate();
  projections.validate();
  if (init_scene.count() < 1) throw ValidationError("train: initial scene is empty");

  TrainState state(init_scene, cfg.rng_seed);
  double lo = std::numeric_limits<double>::infinity(), hi = -lo;
  for (const Image& im : projections.images)
    for (double v : im.data) {
      lo = std::min(lo, v);
      hi = std::max(hi, v);
    }
  state.dynamic_range = std::max(hi - lo, 1e-12);

  const int n_views = int(projections.views());
  const bool holdout = cfg.use_holdout && n_views >= 2;
  const int pool = holdout ? n_views - 1 : n_views;
  const int holdout_index = n_views - 1;
  std::uniform_int_distribution<int> pick_view(0, pool - 1);

  const auto wall_start = std::chrono::steady_clock::now();
  const auto elapsed_ms = [&] {
    if (!cfg.log_wall_time) return 0.0;
    return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() -
                                                     wall_start)
        .count();
  };

  const auto log_record = [&](const LossResult& loss) {
    MetricRecord rec;
    rec.iter = state.iter;
    rec.loss = loss.loss;
    rec.l1 = loss.l1;
    rec.ssim_term = loss.ssim_term;
    rec.gaussians = state.scene.count();
    rec.wall_ms = elapsed_ms();
    if (holdout) {
      const ViewTransform view =
          build_view(projections.geom, projections.angles[holdout_index]);
      const RenderOutput out = render<float>(state.scene, view, projections.geom);
      rec.holdout_psnr = psnr_image(out.image, projections.images[holdout_index]);
    }
    state.records.push_back(rec);
  };

  std::vector<int> batch(cfg.views_per_step);
  for (int64_t it = 0; it < cfg.iterations; ++it) {
    for (int& b : batch) b = pick_view(state.rng);
    const LossResult loss = train_step(state, projections, batch, cfg);

    if (state.iter >= cfg.densify_start && state.iter <= cfg.densify_end &&
        state.iter % cfg.densify_interval == 0)
      densify_and_prune(state, cfg);

    if (state.iter % cfg.log_interval == 0 || state.iter == cfg.iterations)
      log_record(loss);
    if (observer) observer(state.iter, state);
  }

  return {std::move(state.scene), std::move(state.records)};
}

}  // namespace lamino
