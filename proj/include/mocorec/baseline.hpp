#pragma once

#include <algorithm>
#include <cmath>
#include <numeric>

#include "mocorec/nudft.hpp"
#include "mocorec/types.hpp"

// Motion-resolved comparison pipeline: respiratory self-gating from the
// central k-space sample of each spoke (coil sign clustering + zero-phase
// moving-average filtering), amplitude binning into respiratory phases, and
// per-phase gradient-descent reconstruction with smoothed isotropic TV.

namespace mocorec {

struct GatingSignal {
  std::vector<double> values;   // one per spoke, acquisition order
  double filter_cutoff = 0.0;   // cycles/spoke of the estimated dominant peak
};

struct PhaseBin {
  int phase_index = 0;
  std::vector<int> spoke_indices;  // global spoke indices
  ComplexImage recon;
};

namespace detail {

inline std::vector<double> zscore(const std::vector<double>& x) {
  const size_t n = x.size();
  double mean = std::accumulate(x.begin(), x.end(), 0.0) / n;
  double var = 0.0;
  for (double v : x) var += (v - mean) * (v - mean);
  var /= n;
  std::vector<double> out(n, 0.0);
  if (var <= 1e-24) return out;  // zero-variance guard
  const double inv = 1.0 / std::sqrt(var);
  for (size_t i = 0; i < n; ++i) out[i] = (x[i] - mean) * inv;
  return out;
}

inline double pearson(const std::vector<double>& a, const std::vector<double>& b) {
  const size_t n = a.size();
  double ma = 0, mb = 0;
  for (size_t i = 0; i < n; ++i) {
    ma += a[i];
    mb += b[i];
  }
  ma /= n;
  mb /= n;
  double sab = 0, saa = 0, sbb = 0;
  for (size_t i = 0; i < n; ++i) {
    sab += (a[i] - ma) * (b[i] - mb);
    saa += (a[i] - ma) * (a[i] - ma);
    sbb += (b[i] - mb) * (b[i] - mb);
  }
  if (saa <= 0 || sbb <= 0) return 0.0;
  return sab / std::sqrt(saa * sbb);
}

// Magnitude of the dominant nonzero-frequency DFT bin; returns the bin index.
inline int dominant_frequency(const std::vector<double>& x) {
  const int n = int(x.size());
  double mean = std::accumulate(x.begin(), x.end(), 0.0) / n;
  int best = 1;
  double best_mag = -1.0;
  for (int f = 1; f <= n / 2; ++f) {
    double re = 0, im = 0;
    for (int i = 0; i < n; ++i) {
      const double a = -2.0 * std::numbers::pi * f * i / n;
      re += (x[i] - mean) * std::cos(a);
      im += (x[i] - mean) * std::sin(a);
    }
    const double mag = re * re + im * im;
    if (mag > best_mag) {
      best_mag = mag;
      best = f;
    }
  }
  return best;
}

// Zero-phase centered moving average with edge reflection.
inline std::vector<double> moving_average(const std::vector<double>& x, int window) {
  const int n = int(x.size());
  if (window <= 1) return x;
  const int half = window / 2;
  std::vector<double> out(n);
  for (int i = 0; i < n; ++i) {
    double acc = 0.0;
    int count = 0;
    for (int j = i - half; j <= i + half; ++j) {
      int jj = j;
      if (jj < 0) jj = -jj;
      if (jj >= n) jj = 2 * (n - 1) - jj;
      acc += x[jj];
      ++count;
    }
    out[i] = acc / count;
  }
  return out;
}

}  // namespace detail

// Per coil, the magnitude of each spoke's centermost sample forms a series;
// series are z-scored, sign-aligned against the best-connected coil, the
// positively aligned group is averaged, and the average is low-pass filtered
// with window = (spokes per dominant period) / 8.
inline GatingSignal extract_gating(const Dataset& ds) {
  require(!ds.frames.empty(), "extract_gating: empty dataset");
  const int S = ds.samples_per_spoke;
  const int spf = ds.spokes_per_frame;
  const int nc = ds.num_coils();
  const int total = int(ds.frames.size()) * spf;

  std::vector<std::vector<double>> series(nc, std::vector<double>(total));
  for (int t = 0; t < int(ds.frames.size()); ++t) {
    const SpokeFrame& fr = ds.frames[t];
    require(int(fr.num_points()) == spf * S, "extract_gating: ragged frame");
    for (int s = 0; s < spf; ++s) {
      // centermost sample of this spoke
      int best = s * S;
      double best_r = 1e30;
      for (int j = 0; j < S; ++j) {
        const size_t p = size_t(s) * S + j;
        const double r = std::hypot(fr.kx[p], fr.ky[p]);
        if (r < best_r) {
          best_r = r;
          best = int(p);
        }
      }
      require(best_r <= 1.0 / S, "extract_gating: no sample near k=0");
      for (int c = 0; c < nc; ++c)
        series[c][size_t(t) * spf + s] = std::abs(fr.samples[c][best]);
    }
  }

  for (auto& s : series) s = detail::zscore(s);

  // Seed = coil with the strongest total coupling; flip negatively correlated
  // coils, keep the aligned group.
  int seed = 0;
  double best_sum = -1.0;
  for (int c = 0; c < nc; ++c) {
    double sum = 0.0;
    for (int c2 = 0; c2 < nc; ++c2)
      if (c2 != c) sum += std::abs(detail::pearson(series[c], series[c2]));
    if (nc == 1) sum = 0.0;
    if (sum > best_sum) {
      best_sum = sum;
      seed = c;
    }
  }
  std::vector<double> avg(total, 0.0);
  int kept = 0;
  for (int c = 0; c < nc; ++c) {
    const double r = (c == seed) ? 1.0 : detail::pearson(series[seed], series[c]);
    const double sign = (r < 0) ? -1.0 : 1.0;
    if (c != seed && r == 0.0) continue;  // flat or uncorrelated coil
    for (int i = 0; i < total; ++i) avg[i] += sign * series[c][i];
    ++kept;
  }
  for (double& v : avg) v /= std::max(kept, 1);

  GatingSignal g;
  const int fpeak = detail::dominant_frequency(avg);
  const double period_spokes = double(total) / fpeak;
  const int window = std::max(1, int(std::lround(period_spokes / 8.0)));
  g.values = detail::moving_average(avg, window);
  g.filter_cutoff = double(fpeak) / total;
  return g;
}

// Amplitude binning: sort spokes by gating value and split into equal-count
// bins (ties broken by spoke index).
inline std::vector<PhaseBin> bin_spokes(const GatingSignal& g, int num_phases) {
  require(num_phases >= 2, "bin_spokes: need at least 2 phases");
  const int n = int(g.values.size());
  require(num_phases <= n, "bin_spokes: more phases than spokes");
  std::vector<int> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](int a, int b) { return g.values[a] < g.values[b]; });
  std::vector<PhaseBin> bins(num_phases);
  for (int i = 0; i < n; ++i) {
    const int b = std::min(int(size_t(i) * num_phases / n), num_phases - 1);
    bins[b].phase_index = b;
    bins[b].spoke_indices.push_back(order[i]);
  }
  for (auto& b : bins) std::sort(b.spoke_indices.begin(), b.spoke_indices.end());
  return bins;
}

struct PhaseReconConfig {
  double mu = 1e-3;        // TV weight
  double tv_eps = 1e-6;    // isotropic TV smoothing
  int max_iters = 80;
  double tol = 1e-6;       // relative objective change stop
  double step_scale = 0.9; // fraction of 1/L
};

namespace detail {

// Gathers one phase bin's coordinates and samples from the frame-chunked data.
inline void gather_bin(const Dataset& ds, const PhaseBin& bin,
                       std::vector<double>& kx, std::vector<double>& ky,
                       std::vector<std::vector<cplx>>& b) {
  const int S = ds.samples_per_spoke;
  const int spf = ds.spokes_per_frame;
  const int nc = ds.num_coils();
  b.assign(nc, {});
  for (int spoke : bin.spoke_indices) {
    const int t = spoke / spf, s = spoke % spf;
    const SpokeFrame& fr = ds.frames[t];
    for (int j = 0; j < S; ++j) {
      const size_t p = size_t(s) * S + j;
      kx.push_back(fr.kx[p]);
      ky.push_back(fr.ky[p]);
      for (int c = 0; c < nc; ++c) b[c].push_back(fr.samples[c][p]);
    }
  }
}

inline double tv_value(const ComplexImage& x, double eps) {
  double acc = 0.0;
  for (int y = 0; y < x.h; ++y)
    for (int xx = 0; xx < x.w; ++xx) {
      const cplx gx = (xx + 1 < x.w) ? x.at(y, xx + 1) - x.at(y, xx) : cplx(0);
      const cplx gy = (y + 1 < x.h) ? x.at(y + 1, xx) - x.at(y, xx) : cplx(0);
      acc += std::sqrt(std::norm(gx) + std::norm(gy) + eps * eps);
    }
  return acc;
}

inline ComplexImage tv_gradient(const ComplexImage& x, double eps) {
  const int h = x.h, w = x.w;
  ComplexImage g(h, w);
  auto mag = [&](int y, int xx) {
    const cplx gx = (xx + 1 < w) ? x.at(y, xx + 1) - x.at(y, xx) : cplx(0);
    const cplx gy = (y + 1 < h) ? x.at(y + 1, xx) - x.at(y, xx) : cplx(0);
    return std::sqrt(std::norm(gx) + std::norm(gy) + eps * eps);
  };
  for (int y = 0; y < h; ++y)
    for (int xx = 0; xx < w; ++xx) {
      const double m = mag(y, xx);
      if (xx + 1 < w) {
        const cplx gx = (x.at(y, xx + 1) - x.at(y, xx)) / m;
        g.at(y, xx) -= gx;
        g.at(y, xx + 1) += gx;
      }
      if (y + 1 < h) {
        const cplx gy = (x.at(y + 1, xx) - x.at(y, xx)) / m;
        g.at(y, xx) -= gy;
        g.at(y + 1, xx) += gy;
      }
    }
  return g;
}

// Largest eigenvalue of 2 A^H A by power iteration.
inline double data_term_lipschitz(const std::vector<ComplexImage>& coil_maps,
                                  const std::vector<double>& kx,
                                  const std::vector<double>& ky, int h, int w) {
  ComplexImage x(h, w);
  for (size_t i = 0; i < x.size(); ++i)
    x.data[i] = cplx(std::cos(0.7 * double(i) + 0.3), std::sin(1.3 * double(i)));
  double lam = 1.0;
  for (int it = 0; it < 8; ++it) {
    auto y = nudft_forward(x, coil_maps, kx, ky);
    ComplexImage z = nudft_adjoint(y, coil_maps, kx, ky);
    double nrm = 0.0;
    for (const auto& v : z.data) nrm += std::norm(v);
    nrm = std::sqrt(nrm);
    if (nrm == 0.0) return 1.0;
    lam = nrm;
    for (size_t i = 0; i < z.size(); ++i) x.data[i] = z.data[i] / nrm;
  }
  return 2.0 * lam;
}

}  // namespace detail

// min_x ||A x - b||^2 + mu TV_eps(x) by fixed-step gradient descent,
// initialized from the density-compensated (radial ramp) adjoint. The ramp is
// used only here, never in gradients.
inline ComplexImage recon_phase(const Dataset& ds, const PhaseBin& bin,
                                const PhaseReconConfig& cfg,
                                std::vector<double>* objective_trace = nullptr) {
  require(!bin.spoke_indices.empty(), "recon_phase: empty bin");
  std::vector<double> kx, ky;
  std::vector<std::vector<cplx>> b;
  detail::gather_bin(ds, bin, kx, ky, b);

  const int h = ds.grid_h, w = ds.grid_w;
  const size_t np = kx.size();

  // density-compensated adjoint as the initializer
  std::vector<std::vector<cplx>> bw(b);
  double bnorm2 = 0.0;
  for (size_t c = 0; c < b.size(); ++c)
    for (size_t p = 0; p < np; ++p) {
      bw[c][p] *= std::hypot(kx[p], ky[p]);
      bnorm2 += std::norm(b[c][p]);
    }
  ComplexImage x = nudft_adjoint(bw, ds.coil_maps, kx, ky);
  if (bnorm2 == 0.0) {
    for (auto& v : x.data) v = 0.0;
    return x;
  }
  // Scale the initializer to least-squares-match the data along its direction.
  {
    auto ax = nudft_forward(x, ds.coil_maps, kx, ky);
    cplx num = 0.0;
    double den = 0.0;
    for (size_t c = 0; c < b.size(); ++c)
      for (size_t p = 0; p < np; ++p) {
        num += std::conj(ax[c][p]) * b[c][p];
        den += std::norm(ax[c][p]);
      }
    const cplx alpha = (den > 0) ? num / den : cplx(0);
    for (auto& v : x.data) v *= alpha;
  }

  const double L = detail::data_term_lipschitz(ds.coil_maps, kx, ky, h, w);
  const double step = cfg.step_scale / L;

  double prev_obj = 1e300;
  int rising = 0;
  for (int it = 0; it < cfg.max_iters; ++it) {
    auto ax = nudft_forward(x, ds.coil_maps, kx, ky);
    double data = 0.0;
    for (size_t c = 0; c < b.size(); ++c)
      for (size_t p = 0; p < np; ++p) {
        ax[c][p] -= b[c][p];
        data += std::norm(ax[c][p]);
      }
    const double obj = data + cfg.mu * detail::tv_value(x, cfg.tv_eps);
    if (objective_trace) objective_trace->push_back(obj);
    if (obj > prev_obj) {
      if (++rising >= 20)
        throw std::runtime_error("recon_phase: objective diverged");
    } else {
      rising = 0;
    }
    if (std::abs(prev_obj - obj) <= cfg.tol * std::max(obj, 1e-30) && it > 0) break;
    prev_obj = obj;

    ComplexImage grad = nudft_adjoint(ax, ds.coil_maps, kx, ky);
    for (auto& v : grad.data) v *= 2.0;
    if (cfg.mu > 0) {
      const ComplexImage tvg = detail::tv_gradient(x, cfg.tv_eps);
      for (size_t i = 0; i < grad.size(); ++i) grad.data[i] += cfg.mu * tvg.data[i];
    }
    for (size_t i = 0; i < x.size(); ++i) x.data[i] -= step * grad.data[i];
  }
  return x;
}

}  // namespace mocorec
