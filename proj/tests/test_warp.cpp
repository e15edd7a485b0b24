#include <catch2/catch_amalgamated.hpp>

#include "helpers.hpp"
#include "mocorec/warp.hpp"

using namespace mocorec;
using namespace mocotest;

namespace {

MotionField constant_field(int h, int w, double dx, double dy) {
  MotionField phi(h, w);
  std::fill(phi.dx.begin(), phi.dx.end(), dx);
  std::fill(phi.dy.begin(), phi.dy.end(), dy);
  return phi;
}

MotionField random_field(int h, int w, double amp, std::mt19937_64& rng) {
  // offsets kept away from integer cell boundaries
  std::uniform_real_distribution<double> u(0.1, 0.9);
  std::uniform_int_distribution<int> sign(0, 1);
  MotionField phi(h, w);
  for (size_t i = 0; i < phi.size(); ++i) {
    phi.dx[i] = (sign(rng) ? 1 : -1) * amp * u(rng);
    phi.dy[i] = (sign(rng) ? 1 : -1) * amp * u(rng);
  }
  return phi;
}

}  // namespace

TEST_CASE("warp_forward: zero field is the identity") {
  std::mt19937_64 rng(11);
  auto f = random_image(6, 7, rng);
  auto out = warp_forward(f, MotionField(6, 7));
  for (size_t i = 0; i < f.size(); ++i) CHECK(out.data[i] == f.data[i]);
}

TEST_CASE("warp_forward: constant integer shift") {
  const int n = 8;
  ComplexImage f(n, n);
  f.at(4, 4) = cplx(2.0, -1.0);  // supported away from borders
  auto out = warp_forward(f, constant_field(n, n, 1.0, 0.0));
  CHECK(out.at(4, 5) == cplx(2.0, -1.0));
  CHECK(out.at(4, 4) == cplx(0.0));
}

TEST_CASE("warp_forward: half-pixel shift of a ramp") {
  const int n = 8;
  ComplexImage f(n, n);
  for (int y = 0; y < n; ++y)
    for (int x = 0; x < n; ++x) f.at(y, x) = double(x);
  auto out = warp_forward(f, constant_field(n, n, 0.5, 0.0));
  // interior: out(x) = (x - 0.5), hand-evaluated bilinear on the ramp
  for (int y = 0; y < n; ++y)
    for (int x = 1; x < n; ++x)
      CHECK(std::abs(out.at(y, x) - cplx(x - 0.5)) < 1e-14);
}

TEST_CASE("warp_forward rejects non-finite displacement") {
  ComplexImage f(4, 4);
  MotionField phi(4, 4);
  phi.dx[3] = std::numeric_limits<double>::quiet_NaN();
  CHECK_THROWS(warp_forward(f, phi));
}

TEST_CASE("warp_forward is linear in the image") {
  std::mt19937_64 rng(12);
  auto f = random_image(8, 8, rng);
  auto g = random_image(8, 8, rng);
  auto phi = random_field(8, 8, 1.5, rng);
  const cplx a(0.4, 0.9), b(-1.2, 0.1);
  ComplexImage comb(8, 8);
  for (size_t i = 0; i < comb.size(); ++i) comb.data[i] = a * f.data[i] + b * g.data[i];
  auto wc = warp_forward(comb, phi);
  auto wf = warp_forward(f, phi);
  auto wg = warp_forward(g, phi);
  for (size_t i = 0; i < wc.size(); ++i)
    CHECK(std::abs(wc.data[i] - (a * wf.data[i] + b * wg.data[i])) < 1e-12);
}

TEST_CASE("warp_adjoint_image: zero field is the identity") {
  std::mt19937_64 rng(13);
  auto g = random_image(5, 5, rng);
  auto out = warp_adjoint_image(g, MotionField(5, 5));
  for (size_t i = 0; i < g.size(); ++i) CHECK(out.data[i] == g.data[i]);
}

TEST_CASE("warp_adjoint_image: delta scatters bilinear weights") {
  const int n = 8;
  ComplexImage g(n, n);
  g.at(4, 4) = 1.0;  // source location (3.5, 3.5)
  auto out = warp_adjoint_image(g, constant_field(n, n, 0.5, 0.5));
  CHECK(std::abs(out.at(3, 3) - cplx(0.25)) < 1e-15);
  CHECK(std::abs(out.at(3, 4) - cplx(0.25)) < 1e-15);
  CHECK(std::abs(out.at(4, 3) - cplx(0.25)) < 1e-15);
  CHECK(std::abs(out.at(4, 4) - cplx(0.25)) < 1e-15);
}

TEST_CASE("warp adjoint identity on random instances") {
  std::mt19937_64 rng(14);
  for (int trial = 0; trial < 20; ++trial) {
    const int n = 8 + int(rng() % 9);
    auto f = random_image(n, n, rng);
    auto g = random_image(n, n, rng);
    auto phi = random_field(n, n, 2.0, rng);
    auto wf = warp_forward(f, phi);
    auto atg = warp_adjoint_image(g, phi);
    const cplx lhs = dot(wf, g);
    const cplx rhs = dot(f, atg);
    CHECK(std::abs(lhs - rhs) < 1e-12 * std::max(1.0, std::abs(lhs)));
  }
}

TEST_CASE("warp_grad_motion: flat image and zero upstream give zero") {
  const int n = 6;
  ComplexImage flat(n, n);
  for (auto& v : flat.data) v = cplx(3.0, -2.0);
  std::mt19937_64 rng(15);
  auto g = random_image(n, n, rng);
  auto phi = random_field(n, n, 1.0, rng);
  auto grad = warp_grad_motion(g, flat, phi);
  for (size_t i = 0; i < grad.size(); ++i) {
    CHECK(grad.dx[i] == 0.0);
    CHECK(grad.dy[i] == 0.0);
  }
  auto f = random_image(n, n, rng);
  auto grad2 = warp_grad_motion(ComplexImage(n, n), f, phi);
  for (size_t i = 0; i < grad2.size(); ++i) {
    CHECK(grad2.dx[i] == 0.0);
    CHECK(grad2.dy[i] == 0.0);
  }
}

TEST_CASE("warp_grad_motion matches central finite differences") {
  std::mt19937_64 rng(16);
  const int n = 8;
  // smooth image so the bilinear derivative is informative
  ComplexImage f(n, n);
  for (int y = 0; y < n; ++y)
    for (int x = 0; x < n; ++x)
      f.at(y, x) = cplx(std::sin(0.7 * x + 0.3 * y), std::cos(0.5 * x - 0.9 * y));
  auto g = random_image(n, n, rng);
  auto phi = random_field(n, n, 1.0, rng);
  auto grad = warp_grad_motion(g, f, phi);

  const double h = 1e-4;
  auto loss = [&](const MotionField& p) { return dot_re(g, warp_forward(f, p)); };
  int checked = 0;
  for (int y = 1; y < n - 1 && checked < 24; ++y)
    for (int x = 1; x < n - 1 && checked < 24; ++x) {
      const size_t i = size_t(y) * n + x;
      for (int axis = 0; axis < 2; ++axis) {
        MotionField pp = phi, pm = phi;
        (axis ? pp.dy : pp.dx)[i] += h;
        (axis ? pm.dy : pm.dx)[i] -= h;
        const double fd = (loss(pp) - loss(pm)) / (2 * h);
        const double an = axis ? grad.dy[i] : grad.dx[i];
        if (std::abs(fd) > 1e-6)
          CHECK(std::abs(an - fd) / std::abs(fd) < 1e-5);
        ++checked;
      }
    }
  REQUIRE(checked > 0);
}

TEST_CASE("upsample_motion: same size is identity") {
  std::mt19937_64 rng(17);
  auto phi = random_field(6, 6, 2.0, rng);
  auto up = upsample_motion(phi, 6, 6);
  for (size_t i = 0; i < phi.size(); ++i) {
    CHECK(up.dx[i] == Catch::Approx(phi.dx[i]).margin(1e-15));
    CHECK(up.dy[i] == Catch::Approx(phi.dy[i]).margin(1e-15));
  }
}

TEST_CASE("upsample_motion: constant field scales by the grid ratio") {
  auto up = upsample_motion(constant_field(4, 4, 2.0, 2.0), 16, 16);
  for (size_t i = 0; i < up.size(); ++i) {
    CHECK(up.dx[i] == Catch::Approx(8.0));
    CHECK(up.dy[i] == Catch::Approx(8.0));
  }
  CHECK_THROWS(upsample_motion(constant_field(4, 4, 0, 0), 2, 2));
}

TEST_CASE("upsample_motion reproduces linear ramps with fixed endpoints") {
  const int h = 4, H = 13;
  MotionField phi(h, h);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < h; ++x) phi.dx[size_t(y) * h + x] = double(x);
  auto up = upsample_motion(phi, H, H);
  const double scale = double(H) / h;
  for (int y = 0; y < H; ++y)
    for (int x = 0; x < H; ++x) {
      const double expect = scale * (double(x) * (h - 1) / (H - 1));
      CHECK(up.dx[size_t(y) * H + x] == Catch::Approx(expect).margin(1e-12));
    }
  CHECK(up.dx[0] == Catch::Approx(0.0).margin(1e-15));
  CHECK(up.dx[H - 1] == Catch::Approx(scale * (h - 1)));
}

TEST_CASE("upsample_motion followed by warp of a constant image is a no-op") {
  const int n = 12;
  ComplexImage f(n, n);
  for (auto& v : f.data) v = cplx(1.5, 0.5);
  std::mt19937_64 rng(18);
  auto phi = random_field(3, 3, 0.4, rng);
  auto out = warp_forward(f, upsample_motion(phi, n, n));
  for (const auto& v : out.data) CHECK(std::abs(v - cplx(1.5, 0.5)) < 1e-12);
}

TEST_CASE("upsample_motion_adjoint is the exact transpose") {
  std::mt19937_64 rng(19);
  for (int trial = 0; trial < 10; ++trial) {
    const int h = 3 + int(rng() % 4);
    const int H = h + 1 + int(rng() % 20);
    auto coarse = random_field(h, h, 1.0, rng);
    auto fine = random_field(H, H, 1.0, rng);
    auto up = upsample_motion(coarse, H, H);
    auto down = upsample_motion_adjoint(fine, h, h);
    double lhs = 0, rhs = 0;
    for (size_t i = 0; i < up.size(); ++i)
      lhs += up.dx[i] * fine.dx[i] + up.dy[i] * fine.dy[i];
    for (size_t i = 0; i < down.size(); ++i)
      rhs += down.dx[i] * coarse.dx[i] + down.dy[i] * coarse.dy[i];
    CHECK(lhs == Catch::Approx(rhs).epsilon(1e-12));
  }
}
