#pragma once

#include <complex>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace mocorec {

using cplx = std::complex<double>;

// Dense complex image on a regular grid, row-major, index (y, x).
struct ComplexImage {
  int h = 0, w = 0;
  std::vector<cplx> data;

  ComplexImage() = default;
  ComplexImage(int h_, int w_) : h(h_), w(w_), data(size_t(h_) * w_) {}

  cplx& at(int y, int x) { return data[size_t(y) * w + x]; }
  const cplx& at(int y, int x) const { return data[size_t(y) * w + x]; }
  size_t size() const { return data.size(); }
  bool same_dims(const ComplexImage& o) const { return h == o.h && w == o.w; }
};

// Per-pixel displacement in pixels: dx along columns, dy along rows.
struct MotionField {
  int h = 0, w = 0;
  std::vector<double> dx, dy;

  MotionField() = default;
  MotionField(int h_, int w_)
      : h(h_), w(w_), dx(size_t(h_) * w_, 0.0), dy(size_t(h_) * w_, 0.0) {}

  size_t size() const { return dx.size(); }
};

// M x d latent matrix, row-major (frame-major).
struct LatentTrajectory {
  int frames = 0;
  int dim = 1;
  std::vector<double> z;

  LatentTrajectory() = default;
  LatentTrajectory(int m, int d) : frames(m), dim(d), z(size_t(m) * d, 0.0) {}

  double* row(int t) { return z.data() + size_t(t) * dim; }
  const double* row(int t) const { return z.data() + size_t(t) * dim; }
};

// One time frame: k-space coordinates (cycles/pixel) and multicoil samples.
struct SpokeFrame {
  int frame_index = 0;
  std::vector<double> kx, ky;
  std::vector<std::vector<cplx>> samples;  // [coil][point]

  size_t num_points() const { return kx.size(); }
};

enum class SpokeOrdering { bit_reversed, golden_angle, uniform };

inline std::string to_string(SpokeOrdering o) {
  switch (o) {
    case SpokeOrdering::bit_reversed: return "bit_reversed";
    case SpokeOrdering::golden_angle: return "golden_angle";
    case SpokeOrdering::uniform: return "uniform";
  }
  return "?";
}

struct Trajectory {
  std::vector<SpokeFrame> frames;  // coordinates only; samples filled later
  SpokeOrdering ordering = SpokeOrdering::uniform;
  int total_spokes = 0;
  int spokes_per_frame = 0;
  int samples_per_spoke = 0;
};

// A full acquisition: grid, coil maps, and the measured frames.
struct Dataset {
  int grid_h = 0, grid_w = 0;
  int spokes_per_frame = 0;
  int samples_per_spoke = 0;
  std::vector<ComplexImage> coil_maps;
  std::vector<SpokeFrame> frames;

  int num_frames() const { return int(frames.size()); }
  int num_coils() const { return int(coil_maps.size()); }
};

inline void require(bool cond, const std::string& msg) {
  if (!cond) throw std::invalid_argument(msg);
}

}  // namespace mocorec
