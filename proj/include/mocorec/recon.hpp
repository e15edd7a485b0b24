#pragma once

#include <cstdio>
#include <functional>

#include "mocorec/generator.hpp"
#include "mocorec/nudft.hpp"
#include "mocorec/types.hpp"
#include "mocorec/warp.hpp"

// Joint estimation of the template f, generator weights theta, and latent
// trajectory Z by Adam on the data-fidelity cost plus a squared-l2 temporal
// smoothness penalty on Z, with a coarse-to-fine two-stage schedule.

namespace mocorec {

struct AdamConfig {
  double lr_f = 1e-1;
  double lr_theta = 1e-3;
  double lr_z = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

struct ReconConfig {
  double lambda_smooth = 0.02;
  double anchor_weight = 1e6;  // pins the first frame's motion to zero
  AdamConfig adam;
  int epochs_coarse = 40;
  int epochs_fine = 60;
  double coarse_fraction = 0.5;  // resolution + k-radius fraction of stage 1
  int batch_frames = 8;
  uint64_t seed = 0;
  GeneratorKind generator = GeneratorKind::decoder;
  int latent_dim = 1;
  double init_scale = 1.0;

  void validate() const {
    require(lambda_smooth >= 0, "config: lambda_smooth must be >= 0");
    require(anchor_weight >= 0, "config: anchor_weight must be >= 0");
    require(adam.lr_f > 0 && adam.lr_theta > 0 && adam.lr_z > 0,
            "config: learning rates must be positive");
    require(adam.beta1 > 0 && adam.beta1 < 1 && adam.beta2 > 0 && adam.beta2 < 1,
            "config: betas must be in (0,1)");
    require(epochs_coarse >= 0 && epochs_fine >= 1, "config: bad epoch counts");
    require(coarse_fraction > 0 && coarse_fraction <= 1, "config: coarse_fraction in (0,1]");
    require(batch_frames >= 1, "config: batch_frames must be >= 1");
    require(latent_dim >= 1, "config: latent_dim must be >= 1");
  }
};

struct AdamMoments {
  std::vector<double> m, v;
  void init(size_t n) {
    m.assign(n, 0.0);
    v.assign(n, 0.0);
  }
};

struct ReconState {
  ComplexImage f;
  GeneratorParams theta;
  LatentTrajectory Z;
  AdamMoments mom_f, mom_theta, mom_z;
  int64_t step = 0;   // Adam steps taken in the current stage
  int stage = 0;      // 0 = coarse, 1 = fine
  int epoch = 0;      // epochs completed in the current stage
  std::vector<double> loss_history;
  double runtime_seconds = 0.0;
};

struct Gradients {
  double loss = 0.0;
  double data_loss = 0.0;
  ComplexImage grad_f;
  std::vector<double> grad_theta;
  std::vector<double> grad_z;
};

struct FrameForwardResult {
  std::vector<std::vector<cplx>> residual;
  ComplexImage f_t;
  MotionField phi_t;
};

// phi_t = upsample(G_theta(z_t)); f_t = warp(f, phi_t); residual = A_t f_t - b_t.
inline FrameForwardResult frame_forward(const ReconState& state, int t,
                                        const SpokeFrame& data,
                                        const std::vector<ComplexImage>& coil_maps) {
  require(t >= 0 && t < state.Z.frames, "frame_forward: frame index out of range");
  FrameForwardResult r;
  std::vector<double> zt(state.Z.row(t), state.Z.row(t) + state.Z.dim);
  const MotionField phi_coarse = generator_forward(state.theta, zt);
  r.phi_t = upsample_motion(phi_coarse, state.f.h, state.f.w);
  r.f_t = warp_forward(state.f, r.phi_t);
  r.residual = nudft_forward(r.f_t, coil_maps, data.kx, data.ky);
  for (size_t c = 0; c < r.residual.size(); ++c)
    for (size_t p = 0; p < r.residual[c].size(); ++p)
      r.residual[c][p] -= data.samples[c][p];
  return r;
}

// Squared norm of the first frame's generated coarse-grid motion field.
inline double anchor_value(const GeneratorParams& theta, const LatentTrajectory& Z) {
  std::vector<double> z0(Z.row(0), Z.row(0) + Z.dim);
  const MotionField phi0 = generator_forward(theta, z0);
  double acc = 0.0;
  for (size_t i = 0; i < phi0.size(); ++i)
    acc += phi0.dx[i] * phi0.dx[i] + phi0.dy[i] * phi0.dy[i];
  return acc;
}

inline double smoothness_value(const LatentTrajectory& Z) {
  double acc = 0.0;
  for (int t = 0; t + 1 < Z.frames; ++t)
    for (int k = 0; k < Z.dim; ++k) {
      const double d = Z.row(t + 1)[k] - Z.row(t)[k];
      acc += d * d;
    }
  return acc;
}

// Loss over a frame batch plus the full-trajectory smoothness term (scaled by
// batch/M), with exact adjoint-chain gradients for (f, theta, Z).
inline Gradients loss_and_gradients(const ReconState& state,
                                    const std::vector<int>& batch,
                                    const Dataset& dataset,
                                    const ReconConfig& config) {
  require(!batch.empty(), "loss_and_gradients: empty batch");
  const int M = state.Z.frames;
  Gradients g;
  g.grad_f = ComplexImage(state.f.h, state.f.w);
  g.grad_theta.assign(state.theta.theta.size(), 0.0);
  g.grad_z.assign(state.Z.z.size(), 0.0);

  for (int t : batch) {
    const FrameForwardResult fr = frame_forward(state, t, dataset.frames[t],
                                                dataset.coil_maps);
    double frame_loss = 0.0;
    for (const auto& coil : fr.residual)
      for (const auto& s : coil) frame_loss += std::norm(s);
    if (!std::isfinite(frame_loss))
      throw std::runtime_error("loss_and_gradients: non-finite loss at frame " +
                               std::to_string(t));
    g.data_loss += frame_loss;

    // d||r||^2 / d f_t = 2 A^H r
    ComplexImage g_ft = nudft_adjoint(fr.residual, dataset.coil_maps,
                                      dataset.frames[t].kx, dataset.frames[t].ky);
    for (auto& v : g_ft.data) v *= 2.0;

    const ComplexImage gf = warp_adjoint_image(g_ft, fr.phi_t);
    for (size_t i = 0; i < gf.size(); ++i) g.grad_f.data[i] += gf.data[i];

    const MotionField gphi = warp_grad_motion(g_ft, state.f, fr.phi_t);
    const MotionField gphi_coarse =
        upsample_motion_adjoint(gphi, state.theta.grid, state.theta.grid);

    std::vector<double> zt(state.Z.row(t), state.Z.row(t) + state.Z.dim);
    std::vector<double> gz(state.Z.dim, 0.0);
    generator_backward(state.theta, zt, gphi_coarse, g.grad_theta, gz);
    for (int k = 0; k < state.Z.dim; ++k)
      g.grad_z[size_t(t) * state.Z.dim + k] += gz[k];
  }

  const double scale = double(batch.size()) / M;
  const double lam = config.lambda_smooth * scale;
  g.loss = g.data_loss + lam * smoothness_value(state.Z);
  for (int t = 0; t < M; ++t)
    for (int k = 0; k < state.Z.dim; ++k) {
      double acc = 0.0;
      if (t > 0) acc += state.Z.row(t)[k] - state.Z.row(t - 1)[k];
      if (t + 1 < M) acc += state.Z.row(t)[k] - state.Z.row(t + 1)[k];
      g.grad_z[size_t(t) * state.Z.dim + k] += 2.0 * lam * acc;
    }

  // Gauge anchor: the cost is invariant to shifting the template and adding
  // the opposite constant to every motion field, so the reference frame would
  // otherwise drift. Penalizing the first frame's generated (coarse-grid)
  // field toward zero pins the reference to frame 0.
  if (config.anchor_weight > 0) {
    const double aw = config.anchor_weight * scale;
    std::vector<double> z0(state.Z.row(0), state.Z.row(0) + state.Z.dim);
    const MotionField phi0 = generator_forward(state.theta, z0);
    double anchor = 0.0;
    MotionField gphi0(phi0.h, phi0.w);
    for (size_t i = 0; i < phi0.size(); ++i) {
      anchor += phi0.dx[i] * phi0.dx[i] + phi0.dy[i] * phi0.dy[i];
      gphi0.dx[i] = 2.0 * aw * phi0.dx[i];
      gphi0.dy[i] = 2.0 * aw * phi0.dy[i];
    }
    g.loss += aw * anchor;
    std::vector<double> gz0(state.Z.dim, 0.0);
    generator_backward(state.theta, z0, gphi0, g.grad_theta, gz0);
    for (int k = 0; k < state.Z.dim; ++k) g.grad_z[k] += gz0[k];
  }
  return g;
}

namespace detail {

inline void adam_update(std::vector<double>& m, std::vector<double>& v,
                        double* x, const double* grad, size_t n, double lr,
                        const AdamConfig& a, double bc1, double bc2) {
  for (size_t i = 0; i < n; ++i) {
    m[i] = a.beta1 * m[i] + (1 - a.beta1) * grad[i];
    v[i] = a.beta2 * v[i] + (1 - a.beta2) * grad[i] * grad[i];
    x[i] -= lr * (m[i] / bc1) / (std::sqrt(v[i] / bc2) + a.eps);
  }
}

}  // namespace detail

// Standard Adam with bias correction and separate learning rates for f, theta,
// Z; f's real and imaginary parts are independent real coordinates.
inline void adam_step(ReconState& state, const Gradients& g, const ReconConfig& config) {
  const AdamConfig& a = config.adam;
  state.step += 1;
  const double bc1 = 1.0 - std::pow(a.beta1, double(state.step));
  const double bc2 = 1.0 - std::pow(a.beta2, double(state.step));
  static_assert(sizeof(cplx) == 2 * sizeof(double));
  detail::adam_update(state.mom_f.m, state.mom_f.v,
                      reinterpret_cast<double*>(state.f.data.data()),
                      reinterpret_cast<const double*>(g.grad_f.data.data()),
                      2 * state.f.size(), a.lr_f, a, bc1, bc2);
  detail::adam_update(state.mom_theta.m, state.mom_theta.v,
                      state.theta.theta.data(), g.grad_theta.data(),
                      state.theta.theta.size(), a.lr_theta, a, bc1, bc2);
  detail::adam_update(state.mom_z.m, state.mom_z.v, state.Z.z.data(),
                      g.grad_z.data(), state.Z.z.size(), a.lr_z, a, bc1, bc2);
}

// Corner-aligned bilinear resize of a complex image (used for the coarse-stage
// coil maps).
inline ComplexImage resize_bilinear(const ComplexImage& img, int H, int W) {
  ComplexImage out(H, W);
  for (int y = 0; y < H; ++y) {
    const double sy = (H == 1) ? 0.0 : double(y) * (img.h - 1) / (H - 1);
    const int y0 = std::min(int(sy), img.h - 2 >= 0 ? img.h - 2 : 0);
    const double fy = sy - y0;
    for (int x = 0; x < W; ++x) {
      const double sx = (W == 1) ? 0.0 : double(x) * (img.w - 1) / (W - 1);
      const int x0 = std::min(int(sx), img.w - 2 >= 0 ? img.w - 2 : 0);
      const double fx = sx - x0;
      const int x1 = std::min(x0 + 1, img.w - 1), y1 = std::min(y0 + 1, img.h - 1);
      out.at(y, x) = (1 - fy) * ((1 - fx) * img.at(y0, x0) + fx * img.at(y0, x1)) +
                     fy * ((1 - fx) * img.at(y1, x0) + fx * img.at(y1, x1));
    }
  }
  return out;
}

// Stage-1 dataset: keep samples with radial |k| <= 0.5 * fraction, rescale
// coordinates by 1/fraction, resize coil maps to the reduced grid.
inline Dataset coarsen_dataset(const Dataset& ds, double fraction) {
  require(fraction > 0 && fraction <= 1, "coarsen_dataset: bad fraction");
  const int H = int(std::lround(ds.grid_h * fraction));
  const int W = int(std::lround(ds.grid_w * fraction));
  require(H >= 2 && W >= 2, "coarsen_dataset: coarse grid too small");
  Dataset out;
  out.grid_h = H;
  out.grid_w = W;
  out.spokes_per_frame = ds.spokes_per_frame;
  out.samples_per_spoke = ds.samples_per_spoke;
  for (const auto& cm : ds.coil_maps) out.coil_maps.push_back(resize_bilinear(cm, H, W));
  const double cutoff = 0.5 * fraction;
  for (const auto& fr : ds.frames) {
    SpokeFrame cf;
    cf.frame_index = fr.frame_index;
    cf.samples.resize(fr.samples.size());
    for (size_t p = 0; p < fr.num_points(); ++p) {
      if (std::hypot(fr.kx[p], fr.ky[p]) > cutoff) continue;
      cf.kx.push_back(fr.kx[p] / fraction);
      cf.ky.push_back(fr.ky[p] / fraction);
      for (size_t c = 0; c < fr.samples.size(); ++c)
        cf.samples[c].push_back(fr.samples[c][p]);
    }
    require(cf.num_points() >= 1, "coarsen_dataset: frame lost all samples");
    out.frames.push_back(std::move(cf));
  }
  return out;
}

using EpochCallback = std::function<void(const ReconState&)>;

// One optimization stage: deterministic sequential mini-batches, per-epoch
// loss logging (full data term + full smoothness).
inline void train_stage(ReconState& state, const Dataset& dataset,
                        const ReconConfig& config, int target_epochs,
                        const EpochCallback& on_epoch = {}) {
  const int M = dataset.num_frames();
  while (state.epoch < target_epochs) {
    double data_loss = 0.0;
    for (int start = 0; start < M; start += config.batch_frames) {
      std::vector<int> batch;
      for (int t = start; t < std::min(start + config.batch_frames, M); ++t)
        batch.push_back(t);
      const Gradients g = loss_and_gradients(state, batch, dataset, config);
      adam_step(state, g, config);
      data_loss += g.data_loss;
    }
    state.loss_history.push_back(data_loss +
                                 config.lambda_smooth * smoothness_value(state.Z) +
                                 config.anchor_weight * anchor_value(state.theta, state.Z));
    state.epoch += 1;
    if (on_epoch) on_epoch(state);
  }
}

inline void validate_dataset(const Dataset& ds) {
  require(ds.grid_h >= 2 && ds.grid_w >= 2, "dataset: bad grid");
  require(!ds.coil_maps.empty(), "dataset: no coil maps");
  require(!ds.frames.empty(), "dataset: no frames");
  for (const auto& fr : ds.frames) {
    require(fr.num_points() >= 1, "dataset: frame " +
                                      std::to_string(fr.frame_index) + " has no samples");
    require(fr.samples.size() == ds.coil_maps.size(), "dataset: coil count mismatch");
  }
}

inline ReconState init_state(const Dataset& dataset, const ReconConfig& config,
                             int grid_h, int grid_w) {
  ReconState st;
  st.f = ComplexImage(grid_h, grid_w);
  const int coarse_grid = std::max(dataset.grid_h, dataset.grid_w) / 4;
  st.theta = init_params(config.generator, config.latent_dim, coarse_grid,
                         config.seed, config.init_scale);
  st.Z = LatentTrajectory(dataset.num_frames(), config.latent_dim);
  st.mom_f.init(2 * st.f.size());
  st.mom_theta.init(st.theta.theta.size());
  st.mom_z.init(st.Z.z.size());
  return st;
}

// Two-stage solve: stage 0 at reduced resolution on the central k-space
// samples, stage 1 at full resolution with f reinitialized to zeros and
// (theta, Z) carried over. `resume` continues from a saved state.
inline ReconState progressive_solve(const Dataset& dataset, const ReconConfig& config,
                                    const ReconState* resume = nullptr,
                                    const EpochCallback& on_epoch = {}) {
  config.validate();
  validate_dataset(dataset);
  require(is_power_of_two(dataset.grid_h) && is_power_of_two(dataset.grid_w),
          "progressive_solve: grid must be a power of two");

  ReconState state;
  const bool do_coarse = config.epochs_coarse > 0 && config.coarse_fraction < 1.0;
  if (resume) {
    state = *resume;
  } else {
    if (do_coarse) {
      const int H = int(std::lround(dataset.grid_h * config.coarse_fraction));
      const int W = int(std::lround(dataset.grid_w * config.coarse_fraction));
      state = init_state(dataset, config, H, W);
      state.stage = 0;
    } else {
      state = init_state(dataset, config, dataset.grid_h, dataset.grid_w);
      state.stage = 1;
    }
  }

  if (state.stage == 0) {
    const Dataset coarse = coarsen_dataset(dataset, config.coarse_fraction);
    train_stage(state, coarse, config, config.epochs_coarse, on_epoch);
    // Promote to full resolution: fresh f and optimizer, same theta and Z.
    state.stage = 1;
    state.epoch = 0;
    state.step = 0;
    state.f = ComplexImage(dataset.grid_h, dataset.grid_w);
    state.mom_f.init(2 * state.f.size());
    state.mom_theta.init(state.theta.theta.size());
    state.mom_z.init(state.Z.z.size());
    if (on_epoch) on_epoch(state);
  }

  const size_t stage2_begin = state.loss_history.size() - size_t(state.epoch);
  train_stage(state, dataset, config, config.epochs_fine, on_epoch);

  // Soft sanity check on the fine-stage loss trend.
  for (size_t i = stage2_begin; i + 10 < state.loss_history.size(); ++i)
    if (state.loss_history[i + 10] > state.loss_history[i]) {
      std::fprintf(stderr,
                   "warning: fine-stage loss increased over a 10-epoch window "
                   "(epoch %zu)\n",
                   i - stage2_begin);
      break;
    }
  return state;
}

}  // namespace mocorec
