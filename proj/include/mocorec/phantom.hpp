#pragma once

#include <cmath>
#include <random>

#include "mocorec/nudft.hpp"
#include "mocorec/types.hpp"
#include "mocorec/warp.hpp"

// Synthetic breathing acquisition: an analytic torso phantom, a raised-cosine
// respiratory waveform driving a fixed smooth displacement basis, smooth coil
// maps, and exact multicoil radial k-space with optional complex noise.

namespace mocorec {

struct PhantomSpec {
  int grid_size = 64;
  int num_frames = 40;
  int spokes_per_frame = 12;
  int samples_per_spoke = 65;
  int num_coils = 4;
  double breathing_period = 10.0;  // frames
  double breathing_amplitude = 4.0;  // pixels
  double noise_sigma = 0.0;  // complex std in k-space units
  uint64_t seed = 0;
  SpokeOrdering ordering = SpokeOrdering::bit_reversed;
};

struct GroundTruth {
  ComplexImage template_image;
  std::vector<MotionField> motion;
  std::vector<double> respiratory_signal;
  std::vector<ComplexImage> coil_maps;
};

inline void validate(const PhantomSpec& s) {
  require(s.grid_size >= 8 && is_power_of_two(s.grid_size),
          "phantom: grid_size must be a power of two >= 8");
  require(s.num_frames >= 2, "phantom: num_frames must be >= 2");
  require(s.spokes_per_frame >= 1, "phantom: spokes_per_frame must be >= 1");
  require(s.samples_per_spoke >= 1, "phantom: samples_per_spoke must be >= 1");
  require(s.num_coils >= 1, "phantom: num_coils must be >= 1");
  require(s.breathing_period > 0, "phantom: breathing_period must be positive");
  require(s.breathing_amplitude < s.grid_size / 4.0,
          "phantom: breathing_amplitude must be < grid_size/4");
  require(s.noise_sigma >= 0, "phantom: noise_sigma must be >= 0");
}

namespace phantom_geom {

// All geometry lives in unit coordinates u = (x+0.5)/w - 0.5, v = (y+0.5)/h - 0.5.
constexpr double torso_cu = 0.0, torso_cv = 0.03, torso_au = 0.42, torso_av = 0.40;
constexpr double lung_cu = 0.17, lung_cv = -0.08, lung_au = 0.13, lung_av = 0.20;
constexpr double dia_v0 = 0.14, dia_v1 = 0.24;

inline bool in_ellipse(double u, double v, double cu, double cv, double au, double av) {
  const double du = (u - cu) / au, dv = (v - cv) / av;
  return du * du + dv * dv <= 1.0;
}

inline double torso_rho2(double u, double v) {
  const double du = (u - torso_cu) / torso_au, dv = (v - torso_cv) / torso_av;
  return du * du + dv * dv;
}

inline double intensity(double u, double v) {
  if (torso_rho2(u, v) > 1.0) return 0.0;
  double val = 0.7;  // torso tissue
  if (v >= dia_v0 && v <= dia_v1) val = 1.0;  // diaphragm band
  const bool left = in_ellipse(u, v, -lung_cu, lung_cv, lung_au, lung_av);
  const bool right = in_ellipse(u, v, lung_cu, lung_cv, lung_au, lung_av);
  if (left || right) {
    val = 0.15;  // lung parenchyma
    // small high-contrast vessels inside the lungs
    static const double vx[] = {-0.17, -0.20, 0.17, 0.14, 0.21};
    static const double vy[] = {-0.14, -0.02, -0.16, -0.04, -0.06};
    for (int i = 0; i < 5; ++i) {
      const double du = u - vx[i], dv = v - vy[i];
      if (du * du + dv * dv <= 0.018 * 0.018) val = 0.9;
    }
  }
  return val;
}

// Smooth spatial motion basis: largest near the diaphragm band, zero at the
// torso boundary, predominantly along the superior-inferior (y) axis.
// Not normalized; see make_motion.
inline void basis_raw(double u, double v, double& bx, double& by) {
  const double rho2 = torso_rho2(u, v);
  if (rho2 >= 1.0) {
    bx = by = 0.0;
    return;
  }
  const double window = (1.0 - rho2) * (1.0 - rho2);
  const double dv = (v - 0.19) / 0.22;
  const double axial = std::exp(-dv * dv);
  by = window * axial;
  bx = 0.15 * window * axial * std::sin(2.0 * u / torso_au);
}

}  // namespace phantom_geom

// Respiratory waveform r(t) = A (1 - cos(2 pi t / period)) / 2.
inline double respiratory_waveform(const PhantomSpec& spec, double t) {
  return spec.breathing_amplitude *
         (1.0 - std::cos(2.0 * std::numbers::pi * t / spec.breathing_period)) / 2.0;
}

inline ComplexImage make_template(const PhantomSpec& spec) {
  validate(spec);
  const int n = spec.grid_size;
  ComplexImage img(n, n);
  // 2x2 supersampling softens the analytic edges slightly.
  for (int y = 0; y < n; ++y)
    for (int x = 0; x < n; ++x) {
      double acc = 0.0;
      for (int sy = 0; sy < 2; ++sy)
        for (int sx = 0; sx < 2; ++sx) {
          const double u = (x + 0.25 + 0.5 * sx) / n - 0.5;
          const double v = (y + 0.25 + 0.5 * sy) / n - 0.5;
          acc += phantom_geom::intensity(u, v);
        }
      img.at(y, x) = acc / 4.0;
    }
  return img;
}

// Binary lung region-of-interest mask (used for motion scoring).
inline std::vector<uint8_t> lung_mask(int h, int w) {
  using namespace phantom_geom;
  std::vector<uint8_t> m(size_t(h) * w, 0);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) {
      const double u = (x + 0.5) / w - 0.5, v = (y + 0.5) / h - 0.5;
      if (in_ellipse(u, v, -lung_cu, lung_cv, lung_au, lung_av) ||
          in_ellipse(u, v, lung_cu, lung_cv, lung_au, lung_av))
        m[size_t(y) * w + x] = 1;
    }
  return m;
}

// phi_gt(t) = r(t) * B(x,y), with B normalized so max |B| = 1 on the grid.
inline MotionField make_motion(const PhantomSpec& spec, int t) {
  validate(spec);
  require(t >= 0 && t < spec.num_frames, "make_motion: frame index out of range");
  const int n = spec.grid_size;
  MotionField phi(n, n);
  double max_mag = 0.0;
  for (int y = 0; y < n; ++y)
    for (int x = 0; x < n; ++x) {
      const double u = (x + 0.5) / n - 0.5, v = (y + 0.5) / n - 0.5;
      double bx, by;
      phantom_geom::basis_raw(u, v, bx, by);
      const size_t i = size_t(y) * n + x;
      phi.dx[i] = bx;
      phi.dy[i] = by;
      max_mag = std::max(max_mag, std::hypot(bx, by));
    }
  const double r = respiratory_waveform(spec, double(t));
  const double scale = (max_mag > 0) ? r / max_mag : 0.0;
  for (size_t i = 0; i < phi.size(); ++i) {
    phi.dx[i] *= scale;
    phi.dy[i] *= scale;
  }
  return phi;
}

// Smooth Gaussian-weighted sensitivities at evenly spaced angles with linear
// phase, normalized so the root-sum-of-squares magnitude is 1 at grid center.
inline std::vector<ComplexImage> make_coil_maps(const PhantomSpec& spec) {
  validate(spec);
  const int n = spec.grid_size, nc = spec.num_coils;
  const double radius = (nc == 1) ? 0.0 : 0.35;
  const double sigma2 = 0.75 * 0.75;
  std::vector<ComplexImage> maps(nc, ComplexImage(n, n));
  for (int c = 0; c < nc; ++c) {
    const double ang = 2.0 * std::numbers::pi * c / nc;
    const double cu = radius * std::cos(ang), cv = radius * std::sin(ang);
    // mild per-coil linear phase
    const double pu = 0.6 * std::cos(ang), pv = 0.6 * std::sin(ang);
    for (int y = 0; y < n; ++y)
      for (int x = 0; x < n; ++x) {
        const double u = (x + 0.5) / n - 0.5, v = (y + 0.5) / n - 0.5;
        const double d2 = (u - cu) * (u - cu) + (v - cv) * (v - cv);
        const double mag = std::exp(-d2 / (2.0 * sigma2));
        const double ph = 2.0 * std::numbers::pi * (pu * u + pv * v);
        maps[c].at(y, x) = std::polar(mag, ph);
      }
  }
  double rss = 0.0;
  for (int c = 0; c < nc; ++c) rss += std::norm(maps[c].at(n / 2, n / 2));
  rss = std::sqrt(rss);
  for (int c = 0; c < nc; ++c)
    for (auto& v : maps[c].data) v /= rss;
  return maps;
}

inline GroundTruth make_ground_truth(const PhantomSpec& spec) {
  GroundTruth gt;
  gt.template_image = make_template(spec);
  gt.coil_maps = make_coil_maps(spec);
  gt.motion.reserve(spec.num_frames);
  gt.respiratory_signal.reserve(spec.num_frames);
  for (int t = 0; t < spec.num_frames; ++t) {
    gt.motion.push_back(make_motion(spec, t));
    gt.respiratory_signal.push_back(respiratory_waveform(spec, double(t)));
  }
  return gt;
}

// Warps the template per frame, applies coil maps, evaluates the exact NUDFT
// at the frame's spoke coordinates, and adds circular complex Gaussian noise
// with total std noise_sigma. Pure function of (spec, gt, trajectory).
inline std::vector<SpokeFrame> simulate_kspace(const PhantomSpec& spec,
                                               const GroundTruth& gt,
                                               const Trajectory& trajectory) {
  validate(spec);
  require(int(trajectory.frames.size()) == spec.num_frames,
          "simulate_kspace: trajectory frame count mismatch");
  require(gt.template_image.h == spec.grid_size && gt.template_image.w == spec.grid_size,
          "simulate_kspace: template grid mismatch");
  for (const auto& m : gt.motion)
    require(m.h == spec.grid_size && m.w == spec.grid_size,
            "simulate_kspace: motion grid mismatch");

  std::mt19937_64 rng(spec.seed ^ 0x6b7370616365ULL);
  std::normal_distribution<double> gauss(0.0, 1.0);
  const double comp_sigma = spec.noise_sigma / std::sqrt(2.0);

  std::vector<SpokeFrame> out;
  out.reserve(spec.num_frames);
  for (int t = 0; t < spec.num_frames; ++t) {
    const SpokeFrame& coords = trajectory.frames[t];
    SpokeFrame fr;
    fr.frame_index = t;
    fr.kx = coords.kx;
    fr.ky = coords.ky;
    const ComplexImage ft = warp_forward(gt.template_image, gt.motion[t]);
    fr.samples = nudft_forward(ft, gt.coil_maps, fr.kx, fr.ky);
    if (spec.noise_sigma > 0)
      for (auto& coil : fr.samples)
        for (auto& s : coil)
          s += cplx(comp_sigma * gauss(rng), comp_sigma * gauss(rng));
    out.push_back(std::move(fr));
  }
  return out;
}

// Noiseless per-sample RMS magnitude, used to derive noise_sigma for a target SNR.
inline double kspace_rms(const std::vector<SpokeFrame>& frames) {
  double acc = 0.0;
  size_t count = 0;
  for (const auto& fr : frames)
    for (const auto& coil : fr.samples) {
      for (const auto& s : coil) acc += std::norm(s);
      count += coil.size();
    }
  return count ? std::sqrt(acc / count) : 0.0;
}

inline Dataset make_dataset(const PhantomSpec& spec, const GroundTruth& gt,
                            std::vector<SpokeFrame> frames) {
  Dataset ds;
  ds.grid_h = ds.grid_w = spec.grid_size;
  ds.spokes_per_frame = spec.spokes_per_frame;
  ds.samples_per_spoke = spec.samples_per_spoke;
  ds.coil_maps = gt.coil_maps;
  ds.frames = std::move(frames);
  return ds;
}

}  // namespace mocorec
