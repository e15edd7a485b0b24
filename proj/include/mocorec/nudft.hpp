#pragma once

#include <cmath>
#include <numbers>

#include "mocorec/types.hpp"

// Exact type-2 non-uniform DFT (forward + adjoint) for multicoil radial data,
// and radial trajectory generation. Coordinates are in cycles/pixel with the
// image center as the spatial origin; |k| <= 0.5 is the Nyquist disc.

namespace mocorec {

inline bool is_power_of_two(long n) { return n > 0 && (n & (n - 1)) == 0; }

inline std::vector<int> bit_reversed_order(int n) {
  require(is_power_of_two(n), "bit_reversed_order: n must be a power of two");
  int bits = 0;
  while ((1 << bits) < n) ++bits;
  std::vector<int> perm(n);
  for (int i = 0; i < n; ++i) {
    int r = 0;
    for (int b = 0; b < bits; ++b)
      if (i & (1 << b)) r |= 1 << (bits - 1 - b);
    perm[i] = r;
  }
  return perm;
}

// Spoke angles: bit_reversed uses pi*sigma(i)/n, golden_angle steps by
// pi*(golden ratio conjugate), uniform is pi*i/n. Samples are radially
// uniform with an exact DC sample at index floor(S/2).
inline Trajectory make_trajectory(int total_spokes, int samples_per_spoke,
                                  int spokes_per_frame, SpokeOrdering ordering) {
  require(total_spokes >= 1 && samples_per_spoke >= 1 && spokes_per_frame >= 1,
          "make_trajectory: counts must be positive");
  require(total_spokes % spokes_per_frame == 0,
          "make_trajectory: total_spokes not divisible by spokes_per_frame");
  if (ordering == SpokeOrdering::bit_reversed)
    require(is_power_of_two(total_spokes),
            "make_trajectory: bit_reversed needs power-of-two total_spokes");

  std::vector<int> sigma;
  if (ordering == SpokeOrdering::bit_reversed) sigma = bit_reversed_order(total_spokes);

  constexpr double kGoldenConj = 0.6180339887498949;  // (sqrt(5)-1)/2
  const double pi = std::numbers::pi;
  const int S = samples_per_spoke;
  const int dc = S / 2;

  Trajectory traj;
  traj.ordering = ordering;
  traj.total_spokes = total_spokes;
  traj.spokes_per_frame = spokes_per_frame;
  traj.samples_per_spoke = S;
  const int num_frames = total_spokes / spokes_per_frame;
  traj.frames.resize(num_frames);

  for (int i = 0; i < total_spokes; ++i) {
    double angle;
    switch (ordering) {
      case SpokeOrdering::bit_reversed: angle = pi * sigma[i] / total_spokes; break;
      case SpokeOrdering::golden_angle: angle = std::fmod(pi * kGoldenConj * i, pi); break;
      default: angle = pi * i / total_spokes; break;
    }
    const double ca = std::cos(angle), sa = std::sin(angle);
    SpokeFrame& fr = traj.frames[i / spokes_per_frame];
    fr.frame_index = i / spokes_per_frame;
    for (int s = 0; s < S; ++s) {
      const double r = double(s - dc) / S;  // [-0.5, 0.5), exact 0 at s = dc
      fr.kx.push_back(r * ca);
      fr.ky.push_back(r * sa);
    }
  }
  return traj;
}

namespace detail {

// Split-complex 1D phase table exp(sign * i*2*pi*k*xc), xc centered.
inline void phase_table(double k, int n, double sign, std::vector<double>& re,
                        std::vector<double>& im) {
  re.resize(n);
  im.resize(n);
  const double c = sign * 2.0 * std::numbers::pi * k;
  const int half = n / 2;
  for (int i = 0; i < n; ++i) {
    const double a = c * (i - half);
    re[i] = std::cos(a);
    im[i] = std::sin(a);
  }
}

}  // namespace detail

// Forward: samples[c][p] = sum_x s_c(x) f(x) exp(-i*2*pi*k_p.x), image center
// is the spatial origin.
inline std::vector<std::vector<cplx>> nudft_forward(
    const ComplexImage& image, const std::vector<ComplexImage>& coil_maps,
    const std::vector<double>& kx, const std::vector<double>& ky) {
  require(!coil_maps.empty(), "nudft_forward: need at least one coil map");
  require(kx.size() == ky.size(), "nudft_forward: kx/ky length mismatch");
  for (const auto& s : coil_maps)
    require(s.same_dims(image), "nudft_forward: coil map dims mismatch");

  const int h = image.h, w = image.w, nc = int(coil_maps.size());
  const size_t np = kx.size();

  // Coil-weighted images, split into real/imag planes for the hot loop.
  std::vector<std::vector<double>> wr(nc), wi(nc);
  for (int c = 0; c < nc; ++c) {
    wr[c].resize(size_t(h) * w);
    wi[c].resize(size_t(h) * w);
    for (size_t i = 0; i < image.size(); ++i) {
      const cplx v = coil_maps[c].data[i] * image.data[i];
      wr[c][i] = v.real();
      wi[c][i] = v.imag();
    }
  }

  std::vector<std::vector<cplx>> out(nc, std::vector<cplx>(np));
  std::vector<double> pxr, pxi, pyr, pyi;
  for (size_t p = 0; p < np; ++p) {
    detail::phase_table(kx[p], w, -1.0, pxr, pxi);
    detail::phase_table(ky[p], h, -1.0, pyr, pyi);
    for (int c = 0; c < nc; ++c) {
      const double* ar = wr[c].data();
      const double* ai = wi[c].data();
      double accr = 0.0, acci = 0.0;
      for (int y = 0; y < h; ++y) {
        const double* rr = ar + size_t(y) * w;
        const double* ri = ai + size_t(y) * w;
        double rowr = 0.0, rowi = 0.0;
        for (int x = 0; x < w; ++x) {
          rowr += rr[x] * pxr[x] - ri[x] * pxi[x];
          rowi += rr[x] * pxi[x] + ri[x] * pxr[x];
        }
        accr += rowr * pyr[y] - rowi * pyi[y];
        acci += rowr * pyi[y] + rowi * pyr[y];
      }
      out[c][p] = {accr, acci};
    }
  }
  return out;
}

// Adjoint: image(x) = sum_c conj(s_c(x)) sum_p y[c][p] exp(+i*2*pi*k_p.x).
inline ComplexImage nudft_adjoint(const std::vector<std::vector<cplx>>& samples,
                                  const std::vector<ComplexImage>& coil_maps,
                                  const std::vector<double>& kx,
                                  const std::vector<double>& ky) {
  require(!coil_maps.empty(), "nudft_adjoint: need at least one coil map");
  require(samples.size() == coil_maps.size(), "nudft_adjoint: coil count mismatch");
  require(kx.size() == ky.size(), "nudft_adjoint: kx/ky length mismatch");
  const int h = coil_maps[0].h, w = coil_maps[0].w;
  const int nc = int(coil_maps.size());
  const size_t np = kx.size();
  for (const auto& row : samples)
    require(row.size() == np, "nudft_adjoint: samples/coords length mismatch");

  ComplexImage out(h, w);
  std::vector<double> accr(size_t(h) * w), acci(size_t(h) * w);
  std::vector<double> pxr, pxi, pyr, pyi;
  for (int c = 0; c < nc; ++c) {
    std::fill(accr.begin(), accr.end(), 0.0);
    std::fill(acci.begin(), acci.end(), 0.0);
    for (size_t p = 0; p < np; ++p) {
      detail::phase_table(kx[p], w, +1.0, pxr, pxi);
      detail::phase_table(ky[p], h, +1.0, pyr, pyi);
      const double vr = samples[c][p].real(), vi = samples[c][p].imag();
      for (int y = 0; y < h; ++y) {
        const double fr = vr * pyr[y] - vi * pyi[y];
        const double fi = vr * pyi[y] + vi * pyr[y];
        double* rr = accr.data() + size_t(y) * w;
        double* ri = acci.data() + size_t(y) * w;
        for (int x = 0; x < w; ++x) {
          rr[x] += fr * pxr[x] - fi * pxi[x];
          ri[x] += fr * pxi[x] + fi * pxr[x];
        }
      }
    }
    for (size_t i = 0; i < out.size(); ++i) {
      const cplx s = std::conj(coil_maps[c].data[i]);
      out.data[i] += s * cplx(accr[i], acci[i]);
    }
  }
  return out;
}

}  // namespace mocorec
