#pragma once

#include <cmath>

#include "mocorec/types.hpp"

// Backward (Eulerian) bilinear warp out(x) = f(x - phi(x)) with clamp-to-edge
// boundary handling, its exact adjoint in the image, the analytic gradient of
// the sampling coordinates, and the corner-aligned motion-field upsampler.

namespace mocorec {

namespace detail {

struct BilinearCell {
  int x0, y0;
  double fx, fy;     // fractional offsets within the cell
  bool clamped_x, clamped_y;  // source coordinate was outside the grid
};

inline BilinearCell bilinear_cell(double sx, double sy, int h, int w) {
  BilinearCell c{};
  c.clamped_x = (sx < 0.0 || sx > w - 1.0);
  c.clamped_y = (sy < 0.0 || sy > h - 1.0);
  sx = std::min(std::max(sx, 0.0), double(w - 1));
  sy = std::min(std::max(sy, 0.0), double(h - 1));
  c.x0 = std::min(int(std::floor(sx)), w - 2);
  c.y0 = std::min(int(std::floor(sy)), h - 2);
  if (w == 1) c.x0 = 0;
  if (h == 1) c.y0 = 0;
  c.fx = (w == 1) ? 0.0 : sx - c.x0;
  c.fy = (h == 1) ? 0.0 : sy - c.y0;
  return c;
}

inline void check_warp_args(const ComplexImage& f, const MotionField& phi,
                            const char* who) {
  require(f.h == phi.h && f.w == phi.w, std::string(who) + ": dims mismatch");
  for (size_t i = 0; i < phi.size(); ++i)
    require(std::isfinite(phi.dx[i]) && std::isfinite(phi.dy[i]),
            std::string(who) + ": non-finite displacement");
}

}  // namespace detail

inline ComplexImage warp_forward(const ComplexImage& f, const MotionField& phi) {
  detail::check_warp_args(f, phi, "warp_forward");
  const int h = f.h, w = f.w;
  ComplexImage out(h, w);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      const size_t i = size_t(y) * w + x;
      const auto c = detail::bilinear_cell(x - phi.dx[i], y - phi.dy[i], h, w);
      const int x1 = std::min(c.x0 + 1, w - 1), y1 = std::min(c.y0 + 1, h - 1);
      out.data[i] = (1 - c.fy) * ((1 - c.fx) * f.at(c.y0, c.x0) + c.fx * f.at(c.y0, x1)) +
                    c.fy * ((1 - c.fx) * f.at(y1, c.x0) + c.fx * f.at(y1, x1));
    }
  }
  return out;
}

// Transpose of the interpolation matrix: scatters each output pixel's weight
// back onto its four source pixels.
inline ComplexImage warp_adjoint_image(const ComplexImage& g_out,
                                       const MotionField& phi) {
  detail::check_warp_args(g_out, phi, "warp_adjoint_image");
  const int h = g_out.h, w = g_out.w;
  ComplexImage out(h, w);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      const size_t i = size_t(y) * w + x;
      const auto c = detail::bilinear_cell(x - phi.dx[i], y - phi.dy[i], h, w);
      const int x1 = std::min(c.x0 + 1, w - 1), y1 = std::min(c.y0 + 1, h - 1);
      const cplx g = g_out.data[i];
      out.at(c.y0, c.x0) += (1 - c.fy) * (1 - c.fx) * g;
      out.at(c.y0, x1) += (1 - c.fy) * c.fx * g;
      out.at(y1, c.x0) += c.fy * (1 - c.fx) * g;
      out.at(y1, x1) += c.fy * c.fx * g;
    }
  }
  return out;
}

// d/dphi of L = Re<g_out, warp_forward(f, phi)>. The interpolant's spatial
// derivative is piecewise constant per cell; it is zero at clamped samples.
inline MotionField warp_grad_motion(const ComplexImage& g_out,
                                    const ComplexImage& f,
                                    const MotionField& phi) {
  detail::check_warp_args(f, phi, "warp_grad_motion");
  require(g_out.same_dims(f), "warp_grad_motion: dims mismatch");
  const int h = f.h, w = f.w;
  MotionField grad(h, w);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      const size_t i = size_t(y) * w + x;
      const auto c = detail::bilinear_cell(x - phi.dx[i], y - phi.dy[i], h, w);
      const int x1 = std::min(c.x0 + 1, w - 1), y1 = std::min(c.y0 + 1, h - 1);
      const cplx f00 = f.at(c.y0, c.x0), f01 = f.at(c.y0, x1);
      const cplx f10 = f.at(y1, c.x0), f11 = f.at(y1, x1);
      cplx du = (1 - c.fy) * (f01 - f00) + c.fy * (f11 - f10);
      cplx dv = (1 - c.fx) * (f10 - f00) + c.fx * (f11 - f01);
      if (c.clamped_x) du = 0.0;
      if (c.clamped_y) dv = 0.0;
      const cplx gc = std::conj(g_out.data[i]);
      // out = f(x - phi), so d(out)/d(phi) = -d(f)/du at the sample point.
      grad.dx[i] = -std::real(gc * du);
      grad.dy[i] = -std::real(gc * dv);
    }
  }
  return grad;
}

namespace detail {

// Corner-aligned bilinear sampling weights for fine index i on an n_c-long axis.
inline void axis_weights(int i, int n_fine, int n_coarse, int& j0, double& t) {
  if (n_coarse == 1 || n_fine == 1) {
    j0 = 0;
    t = 0.0;
    return;
  }
  const double s = double(i) * (n_coarse - 1) / (n_fine - 1);
  j0 = std::min(int(std::floor(s)), n_coarse - 2);
  t = s - j0;
}

}  // namespace detail

// Bilinear upsampling of each displacement component with corner alignment;
// displacement values are rescaled to target-grid pixels (dy by H/h, dx by W/w).
inline MotionField upsample_motion(const MotionField& coarse, int H, int W) {
  require(H >= coarse.h && W >= coarse.w, "upsample_motion: target must not be smaller");
  require(coarse.h >= 1 && coarse.w >= 1, "upsample_motion: empty field");
  const double sx = double(W) / coarse.w, sy = double(H) / coarse.h;
  MotionField out(H, W);
  for (int y = 0; y < H; ++y) {
    int j0;
    double ty;
    detail::axis_weights(y, H, coarse.h, j0, ty);
    const int j1 = std::min(j0 + 1, coarse.h - 1);
    for (int x = 0; x < W; ++x) {
      int i0;
      double tx;
      detail::axis_weights(x, W, coarse.w, i0, tx);
      const int i1 = std::min(i0 + 1, coarse.w - 1);
      const size_t a = size_t(j0) * coarse.w, b = size_t(j1) * coarse.w;
      const double wx0 = 1 - tx, wy0 = 1 - ty;
      const double vdx = wy0 * (wx0 * coarse.dx[a + i0] + tx * coarse.dx[a + i1]) +
                         ty * (wx0 * coarse.dx[b + i0] + tx * coarse.dx[b + i1]);
      const double vdy = wy0 * (wx0 * coarse.dy[a + i0] + tx * coarse.dy[a + i1]) +
                         ty * (wx0 * coarse.dy[b + i0] + tx * coarse.dy[b + i1]);
      const size_t o = size_t(y) * W + x;
      out.dx[o] = vdx * sx;
      out.dy[o] = vdy * sy;
    }
  }
  return out;
}

// Exact transpose of upsample_motion, used to chain fine-grid motion gradients
// back to the generator's coarse grid.
inline MotionField upsample_motion_adjoint(const MotionField& fine, int h, int w) {
  require(fine.h >= h && fine.w >= w, "upsample_motion_adjoint: coarse must not be larger");
  const double sx = double(fine.w) / w, sy = double(fine.h) / h;
  MotionField out(h, w);
  for (int y = 0; y < fine.h; ++y) {
    int j0;
    double ty;
    detail::axis_weights(y, fine.h, h, j0, ty);
    const int j1 = std::min(j0 + 1, h - 1);
    for (int x = 0; x < fine.w; ++x) {
      int i0;
      double tx;
      detail::axis_weights(x, fine.w, w, i0, tx);
      const int i1 = std::min(i0 + 1, w - 1);
      const size_t o = size_t(y) * fine.w + x;
      const double gx = fine.dx[o] * sx, gy = fine.dy[o] * sy;
      const size_t a = size_t(j0) * w, b = size_t(j1) * w;
      const double wx0 = 1 - tx, wy0 = 1 - ty;
      out.dx[a + i0] += wy0 * wx0 * gx;
      out.dx[a + i1] += wy0 * tx * gx;
      out.dx[b + i0] += ty * wx0 * gx;
      out.dx[b + i1] += ty * tx * gx;
      out.dy[a + i0] += wy0 * wx0 * gy;
      out.dy[a + i1] += wy0 * tx * gy;
      out.dy[b + i0] += ty * wx0 * gy;
      out.dy[b + i1] += ty * tx * gy;
    }
  }
  return out;
}

}  // namespace mocorec
