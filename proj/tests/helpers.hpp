#pragma once

#include <random>

#include "mocorec/types.hpp"

namespace mocotest {

using mocorec::ComplexImage;
using mocorec::cplx;

inline ComplexImage random_image(int h, int w, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  ComplexImage img(h, w);
  for (auto& v : img.data) v = cplx(u(rng), u(rng));
  return img;
}

inline std::vector<cplx> random_samples(size_t n, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  std::vector<cplx> out(n);
  for (auto& v : out) v = cplx(u(rng), u(rng));
  return out;
}

inline void random_coords(size_t n, std::mt19937_64& rng, std::vector<double>& kx,
                          std::vector<double>& ky) {
  std::uniform_real_distribution<double> u(-0.5, 0.5);
  kx.resize(n);
  ky.resize(n);
  for (size_t i = 0; i < n; ++i) {
    kx[i] = u(rng);
    ky[i] = u(rng);
  }
}

inline double dot_re(const ComplexImage& a, const ComplexImage& b) {
  double acc = 0.0;
  for (size_t i = 0; i < a.size(); ++i)
    acc += std::real(std::conj(a.data[i]) * b.data[i]);
  return acc;
}

inline cplx dot(const ComplexImage& a, const ComplexImage& b) {
  cplx acc = 0.0;
  for (size_t i = 0; i < a.size(); ++i) acc += std::conj(a.data[i]) * b.data[i];
  return acc;
}

inline double norm(const ComplexImage& a) {
  double acc = 0.0;
  for (const auto& v : a.data) acc += std::norm(v);
  return std::sqrt(acc);
}

}  // namespace mocotest
