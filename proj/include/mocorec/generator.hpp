#pragma once

#include <cmath>
#include <random>

#include "mocorec/types.hpp"

// Latent-to-motion generator: a small fixed decoder (fully connected stem,
// three nearest-neighbor x2 upsampling stages with 3x3 convolutions and tanh,
// linear 3x3 head to 2 displacement channels), or a pure MLP for ablation.
// Forward and reverse-mode gradients are hand-derived for this architecture.

namespace mocorec {

enum class GeneratorKind { decoder, mlp };

struct LayerDesc {
  enum Kind { fc, conv3x3 } kind;
  int in_ch, out_ch;        // fc: in/out unit counts; conv: channel counts
  size_t w_offset, b_offset;
  int fan_in;
};

struct GeneratorParams {
  GeneratorKind kind = GeneratorKind::decoder;
  int latent_dim = 1;
  int grid = 16;  // native output grid g (displacements on a g x g grid)
  std::vector<LayerDesc> layout;
  std::vector<double> theta;

  size_t param_count() const { return theta.size(); }
};

namespace detail {

inline std::vector<LayerDesc> make_layout(GeneratorKind kind, int d, int g,
                                          size_t* total) {
  std::vector<LayerDesc> L;
  size_t off = 0;
  auto add_fc = [&](int in, int out) {
    L.push_back({LayerDesc::fc, in, out, off, off + size_t(in) * out, in});
    off += size_t(in) * out + out;
  };
  auto add_conv = [&](int in, int out) {
    L.push_back({LayerDesc::conv3x3, in, out, off, off + size_t(in) * out * 9, in * 9});
    off += size_t(in) * out * 9 + out;
  };
  if (kind == GeneratorKind::decoder) {
    require(g >= 8 && g % 8 == 0, "generator: decoder needs grid multiple of 8, >= 8");
    const int base = g / 8;
    add_fc(d, 32 * base * base);
    add_conv(32, 16);
    add_conv(16, 8);
    add_conv(8, 8);
    add_conv(8, 2);
  } else {
    require(g >= 1, "generator: grid must be positive");
    add_fc(d, 64);
    add_fc(64, 64);
    add_fc(64, 2 * g * g);
  }
  *total = off;
  return L;
}

// 3x3 convolution, stride 1, zero padding, square n x n planes.
inline void conv3x3(const double* in, int in_ch, double* out, int out_ch, int n,
                    const double* W, const double* b) {
  const size_t plane = size_t(n) * n;
  for (int oc = 0; oc < out_ch; ++oc) {
    double* o = out + oc * plane;
    for (size_t i = 0; i < plane; ++i) o[i] = b[oc];
    for (int ic = 0; ic < in_ch; ++ic) {
      const double* src = in + ic * plane;
      const double* k = W + (size_t(oc) * in_ch + ic) * 9;
      for (int y = 0; y < n; ++y)
        for (int x = 0; x < n; ++x) {
          double acc = 0.0;
          for (int dy = -1; dy <= 1; ++dy) {
            const int yy = y + dy;
            if (yy < 0 || yy >= n) continue;
            for (int dx = -1; dx <= 1; ++dx) {
              const int xx = x + dx;
              if (xx < 0 || xx >= n) continue;
              acc += k[(dy + 1) * 3 + (dx + 1)] * src[size_t(yy) * n + xx];
            }
          }
          o[size_t(y) * n + x] += acc;
        }
    }
  }
}

// Gradients of conv3x3 w.r.t. input, weights, and bias given upstream dOut.
inline void conv3x3_backward(const double* in, int in_ch, const double* dOut,
                             int out_ch, int n, const double* W, double* dIn,
                             double* dW, double* dB) {
  const size_t plane = size_t(n) * n;
  for (int oc = 0; oc < out_ch; ++oc) {
    const double* go = dOut + oc * plane;
    for (size_t i = 0; i < plane; ++i) dB[oc] += go[i];
    for (int ic = 0; ic < in_ch; ++ic) {
      const double* src = in + ic * plane;
      const double* k = W + (size_t(oc) * in_ch + ic) * 9;
      double* dk = dW + (size_t(oc) * in_ch + ic) * 9;
      double* di = dIn + ic * plane;
      for (int y = 0; y < n; ++y)
        for (int x = 0; x < n; ++x) {
          const double g = go[size_t(y) * n + x];
          if (g == 0.0) continue;
          for (int dy = -1; dy <= 1; ++dy) {
            const int yy = y + dy;
            if (yy < 0 || yy >= n) continue;
            for (int dx = -1; dx <= 1; ++dx) {
              const int xx = x + dx;
              if (xx < 0 || xx >= n) continue;
              const size_t si = size_t(yy) * n + xx;
              dk[(dy + 1) * 3 + (dx + 1)] += g * src[si];
              di[si] += g * k[(dy + 1) * 3 + (dx + 1)];
            }
          }
        }
    }
  }
}

inline void upsample2_nn(const double* in, int ch, int n, double* out) {
  for (int c = 0; c < ch; ++c) {
    const double* src = in + size_t(c) * n * n;
    double* dst = out + size_t(c) * 4 * n * n;
    for (int y = 0; y < 2 * n; ++y)
      for (int x = 0; x < 2 * n; ++x)
        dst[size_t(y) * 2 * n + x] = src[size_t(y / 2) * n + x / 2];
  }
}

inline void upsample2_nn_backward(const double* dOut, int ch, int n, double* dIn) {
  for (int c = 0; c < ch; ++c) {
    const double* go = dOut + size_t(c) * 4 * n * n;
    double* di = dIn + size_t(c) * n * n;
    for (int y = 0; y < 2 * n; ++y)
      for (int x = 0; x < 2 * n; ++x)
        di[size_t(y / 2) * n + x / 2] += go[size_t(y) * 2 * n + x];
  }
}

struct DecoderTrace {
  // Pre- and post-activation buffers for every stage, kept for backprop.
  std::vector<std::vector<double>> act;   // tanh outputs (and final linear out)
  std::vector<std::vector<double>> up;    // nearest-neighbor upsampled inputs
};

inline std::vector<double> decoder_forward(const GeneratorParams& p,
                                           const double* z, DecoderTrace* tr) {
  const int g = p.grid, base = g / 8;
  const auto& L = p.layout;
  const double* th = p.theta.data();

  // FC stem -> tanh, 32 channels on a base x base grid.
  std::vector<double> a0(size_t(32) * base * base);
  {
    const auto& l = L[0];
    for (int o = 0; o < l.out_ch; ++o) {
      double acc = th[l.b_offset + o];
      for (int i = 0; i < l.in_ch; ++i) acc += th[l.w_offset + size_t(o) * l.in_ch + i] * z[i];
      a0[o] = std::tanh(acc);
    }
  }
  if (tr) tr->act.push_back(a0);

  std::vector<double> cur = std::move(a0);
  int n = base;
  const int chans[4] = {32, 16, 8, 8};
  for (int s = 1; s <= 3; ++s) {
    std::vector<double> up(size_t(chans[s - 1]) * 4 * n * n);
    upsample2_nn(cur.data(), chans[s - 1], n, up.data());
    n *= 2;
    std::vector<double> conv(size_t(chans[s]) * n * n);
    conv3x3(up.data(), chans[s - 1], conv.data(), chans[s], n,
            th + L[s].w_offset, th + L[s].b_offset);
    for (auto& v : conv) v = std::tanh(v);
    if (tr) {
      tr->up.push_back(std::move(up));
      tr->act.push_back(conv);
    }
    cur = std::move(conv);
  }
  // Linear head to 2 displacement channels at full g x g.
  std::vector<double> out(size_t(2) * g * g);
  conv3x3(cur.data(), chans[3], out.data(), 2, g, th + L[4].w_offset,
          th + L[4].b_offset);
  return out;
}

inline std::vector<double> mlp_forward(const GeneratorParams& p, const double* z,
                                       std::vector<std::vector<double>>* acts) {
  const double* th = p.theta.data();
  std::vector<double> cur(z, z + p.latent_dim);
  for (size_t li = 0; li < p.layout.size(); ++li) {
    const auto& l = p.layout[li];
    std::vector<double> next(l.out_ch);
    for (int o = 0; o < l.out_ch; ++o) {
      double acc = th[l.b_offset + o];
      for (int i = 0; i < l.in_ch; ++i)
        acc += th[l.w_offset + size_t(o) * l.in_ch + i] * cur[i];
      next[o] = (li + 1 < p.layout.size()) ? std::tanh(acc) : acc;
    }
    if (acts && li + 1 < p.layout.size()) acts->push_back(next);
    cur = std::move(next);
  }
  return cur;
}

}  // namespace detail

inline GeneratorParams make_generator(GeneratorKind kind, int latent_dim, int grid) {
  GeneratorParams p;
  p.kind = kind;
  p.latent_dim = latent_dim;
  p.grid = grid;
  size_t total = 0;
  p.layout = detail::make_layout(kind, latent_dim, grid, &total);
  p.theta.assign(total, 0.0);
  return p;
}

// Weights i.i.d. uniform in [-scale/sqrt(fan_in), +scale/sqrt(fan_in)],
// biases zero.
inline GeneratorParams init_params(GeneratorKind kind, int latent_dim, int grid,
                                   uint64_t seed, double scale) {
  require(scale > 0.0, "init_params: scale must be positive");
  GeneratorParams p = make_generator(kind, latent_dim, grid);
  std::mt19937_64 rng(seed);
  for (const auto& l : p.layout) {
    const double bound = scale / std::sqrt(double(l.fan_in));
    std::uniform_real_distribution<double> u(-bound, bound);
    const size_t nw = l.b_offset - l.w_offset;
    for (size_t i = 0; i < nw; ++i) p.theta[l.w_offset + i] = u(rng);
    // biases stay zero
  }
  return p;
}

// phi = G_theta(z) on the native coarse grid, channel 0 = dx, channel 1 = dy.
inline MotionField generator_forward(const GeneratorParams& p,
                                     const std::vector<double>& z) {
  require(int(z.size()) == p.latent_dim, "generator_forward: latent size mismatch");
  const int g = p.grid;
  std::vector<double> out;
  if (p.kind == GeneratorKind::decoder)
    out = detail::decoder_forward(p, z.data(), nullptr);
  else
    out = detail::mlp_forward(p, z.data(), nullptr);
  MotionField phi(g, g);
  const size_t plane = size_t(g) * g;
  std::copy(out.begin(), out.begin() + plane, phi.dx.begin());
  std::copy(out.begin() + plane, out.end(), phi.dy.begin());
  return phi;
}

// Reverse-mode gradients of <upstream, G_theta(z)> w.r.t. theta and z;
// contributions are accumulated into grad_theta / grad_z.
inline void generator_backward(const GeneratorParams& p,
                               const std::vector<double>& z,
                               const MotionField& upstream,
                               std::vector<double>& grad_theta,
                               std::vector<double>& grad_z) {
  require(int(z.size()) == p.latent_dim, "generator_backward: latent size mismatch");
  require(upstream.h == p.grid && upstream.w == p.grid,
          "generator_backward: upstream grid mismatch");
  require(grad_theta.size() == p.theta.size(), "generator_backward: grad_theta size");
  require(grad_z.size() == z.size(), "generator_backward: grad_z size");

  const int g = p.grid;
  const size_t plane = size_t(g) * g;
  std::vector<double> dOut(2 * plane);
  std::copy(upstream.dx.begin(), upstream.dx.end(), dOut.begin());
  std::copy(upstream.dy.begin(), upstream.dy.end(), dOut.begin() + plane);
  const double* th = p.theta.data();

  if (p.kind == GeneratorKind::mlp) {
    std::vector<std::vector<double>> acts;
    detail::mlp_forward(p, z.data(), &acts);
    std::vector<double> grad = std::move(dOut);
    for (int li = int(p.layout.size()) - 1; li >= 0; --li) {
      const auto& l = p.layout[li];
      const std::vector<double> in =
          (li == 0) ? std::vector<double>(z.begin(), z.end()) : acts[li - 1];
      std::vector<double> din(l.in_ch, 0.0);
      for (int o = 0; o < l.out_ch; ++o) {
        const double go = grad[o];
        grad_theta[l.b_offset + o] += go;
        for (int i = 0; i < l.in_ch; ++i) {
          grad_theta[l.w_offset + size_t(o) * l.in_ch + i] += go * in[i];
          din[i] += go * th[l.w_offset + size_t(o) * l.in_ch + i];
        }
      }
      if (li > 0)
        for (int i = 0; i < l.in_ch; ++i) din[i] *= 1.0 - in[i] * in[i];  // tanh'
      grad = std::move(din);
    }
    for (int i = 0; i < p.latent_dim; ++i) grad_z[i] += grad[i];
    return;
  }

  detail::DecoderTrace tr;
  detail::decoder_forward(p, z.data(), &tr);
  const auto& L = p.layout;
  const int base = g / 8;
  const int chans[4] = {32, 16, 8, 8};

  // Head conv backward.
  int n = g;
  std::vector<double> dCur(size_t(chans[3]) * n * n, 0.0);
  {
    std::vector<double> dW(size_t(2) * chans[3] * 9, 0.0), dB(2, 0.0);
    detail::conv3x3_backward(tr.act[3].data(), chans[3], dOut.data(), 2, n,
                             th + L[4].w_offset, dCur.data(), dW.data(), dB.data());
    for (size_t i = 0; i < dW.size(); ++i) grad_theta[L[4].w_offset + i] += dW[i];
    for (size_t i = 0; i < dB.size(); ++i) grad_theta[L[4].b_offset + i] += dB[i];
  }

  for (int s = 3; s >= 1; --s) {
    // Through tanh of this stage's conv output.
    const auto& a = tr.act[s];
    for (size_t i = 0; i < dCur.size(); ++i) dCur[i] *= 1.0 - a[i] * a[i];
    // Conv backward into the upsampled buffer.
    std::vector<double> dUp(size_t(chans[s - 1]) * n * n, 0.0);
    std::vector<double> dW(size_t(chans[s]) * chans[s - 1] * 9, 0.0), dB(chans[s], 0.0);
    detail::conv3x3_backward(tr.up[s - 1].data(), chans[s - 1], dCur.data(),
                             chans[s], n, th + L[s].w_offset, dUp.data(),
                             dW.data(), dB.data());
    for (size_t i = 0; i < dW.size(); ++i) grad_theta[L[s].w_offset + i] += dW[i];
    for (size_t i = 0; i < dB.size(); ++i) grad_theta[L[s].b_offset + i] += dB[i];
    // Undo the nearest-neighbor upsample.
    n /= 2;
    dCur.assign(size_t(chans[s - 1]) * n * n, 0.0);
    detail::upsample2_nn_backward(dUp.data(), chans[s - 1], n, dCur.data());
  }

  // Through the stem tanh and FC.
  const auto& a0 = tr.act[0];
  for (size_t i = 0; i < dCur.size(); ++i) dCur[i] *= 1.0 - a0[i] * a0[i];
  const auto& l = L[0];
  (void)base;
  for (int o = 0; o < l.out_ch; ++o) {
    const double go = dCur[o];
    grad_theta[l.b_offset + o] += go;
    for (int i = 0; i < l.in_ch; ++i) {
      grad_theta[l.w_offset + size_t(o) * l.in_ch + i] += go * z[i];
      grad_z[i] += go * th[l.w_offset + size_t(o) * l.in_ch + i];
    }
  }
}

}  // namespace mocorec
