#pragma once

#include <algorithm>
#include <cmath>

#include "mocorec/baseline.hpp"
#include "mocorec/phantom.hpp"
#include "mocorec/recon.hpp"

// Scoring of a reconstruction against the simulator's ground truth: template
// PSNR (after max normalization and integer translation registration), mean
// motion endpoint error in the lung ROI at peak inhale, sign-aligned latent
// correlation, and relative respiratory-period error.

namespace mocorec {

struct Metrics {
  double psnr_template = 0.0;  // dB, capped at 99
  double motion_epe = 0.0;     // pixels
  double latent_corr = 0.0;    // |Pearson r| after sign alignment
  double period_error = 0.0;   // relative
  double runtime = 0.0;        // seconds
};

constexpr double kPsnrCap = 99.0;

namespace detail {

inline std::vector<double> magnitude_unit_max(const ComplexImage& img) {
  std::vector<double> m(img.size());
  double mx = 0.0;
  for (size_t i = 0; i < img.size(); ++i) {
    m[i] = std::abs(img.data[i]);
    mx = std::max(mx, m[i]);
  }
  if (mx > 0)
    for (auto& v : m) v /= mx;
  return m;
}

inline double shifted_mse(const std::vector<double>& a, const std::vector<double>& b,
                          int h, int w, int sy, int sx) {
  // a sampled at (y,x), b at (y+sy, x+sx); out-of-range pixels are skipped.
  double acc = 0.0;
  size_t count = 0;
  for (int y = 0; y < h; ++y) {
    const int yb = y + sy;
    if (yb < 0 || yb >= h) continue;
    for (int x = 0; x < w; ++x) {
      const int xb = x + sx;
      if (xb < 0 || xb >= w) continue;
      const double d = a[size_t(y) * w + x] - b[size_t(yb) * w + xb];
      acc += d * d;
      ++count;
    }
  }
  return count ? acc / count : 1e300;
}

}  // namespace detail

// PSNR between unit-max-normalized magnitudes, maximized over integer global
// translations in [-4, 4]^2 (the template is defined only up to the motion
// model's reference frame). Symmetric in its arguments.
inline double psnr_registered(const ComplexImage& est, const ComplexImage& ref) {
  require(est.same_dims(ref), "psnr_registered: dims mismatch");
  const auto a = detail::magnitude_unit_max(est);
  const auto b = detail::magnitude_unit_max(ref);
  double best = 1e300;
  for (int sy = -4; sy <= 4; ++sy)
    for (int sx = -4; sx <= 4; ++sx)
      best = std::min(best, detail::shifted_mse(a, b, est.h, est.w, sy, sx));
  if (best <= 0.0) return kPsnrCap;
  return std::min(kPsnrCap, 10.0 * std::log10(1.0 / best));
}

inline double mean_endpoint_error(const MotionField& est, const MotionField& gt,
                                  const std::vector<uint8_t>& mask) {
  require(est.h == gt.h && est.w == gt.w, "mean_endpoint_error: dims mismatch");
  require(mask.size() == est.size(), "mean_endpoint_error: mask size mismatch");
  double acc = 0.0;
  size_t count = 0;
  for (size_t i = 0; i < est.size(); ++i) {
    if (!mask[i]) continue;
    acc += std::hypot(est.dx[i] - gt.dx[i], est.dy[i] - gt.dy[i]);
    ++count;
  }
  return count ? acc / count : 0.0;
}

// |Pearson r|; returns 0 when either series is (numerically) constant.
inline double latent_correlation(const std::vector<double>& z,
                                 const std::vector<double>& ref) {
  require(z.size() == ref.size(), "latent_correlation: length mismatch");
  return std::abs(detail::pearson(z, ref));
}

// Period (in frames) of the dominant nonzero DFT bin of a series.
inline double dominant_period(const std::vector<double>& x) {
  const int f = detail::dominant_frequency(x);
  return double(x.size()) / f;
}

inline Metrics compute_metrics(const ReconState& state, const GroundTruth& gt) {
  require(state.f.same_dims(gt.template_image), "compute_metrics: grid mismatch");
  const int M = state.Z.frames;
  require(int(gt.motion.size()) == M && int(gt.respiratory_signal.size()) == M,
          "compute_metrics: ground-truth sections missing or mismatched");

  Metrics m;
  m.runtime = state.runtime_seconds;
  m.psnr_template = psnr_registered(state.f, gt.template_image);

  // peak-inhale frame = max ground-truth respiratory amplitude
  const int t_peak = int(std::max_element(gt.respiratory_signal.begin(),
                                          gt.respiratory_signal.end()) -
                         gt.respiratory_signal.begin());
  std::vector<double> z_peak(state.Z.row(t_peak), state.Z.row(t_peak) + state.Z.dim);
  const MotionField phi_est =
      upsample_motion(generator_forward(state.theta, z_peak), state.f.h, state.f.w);
  m.motion_epe = mean_endpoint_error(phi_est, gt.motion[t_peak],
                                     lung_mask(state.f.h, state.f.w));

  std::vector<double> z_trace(M);
  for (int t = 0; t < M; ++t) z_trace[t] = state.Z.row(t)[0];
  m.latent_corr = latent_correlation(z_trace, gt.respiratory_signal);

  const double period_est = dominant_period(z_trace);
  const double period_gt = dominant_period(gt.respiratory_signal);
  m.period_error = std::abs(period_est - period_gt) / period_gt;
  return m;
}

}  // namespace mocorec
