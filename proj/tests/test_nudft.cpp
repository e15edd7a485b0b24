#include <catch2/catch_amalgamated.hpp>

#include "helpers.hpp"
#include "mocorec/nudft.hpp"

using namespace mocorec;
using namespace mocotest;

namespace {

// Independent triple-loop DFT sum, the oracle for nudft_forward.
cplx brute_force_sample(const ComplexImage& img, const ComplexImage& coil,
                        double kx, double ky) {
  cplx acc = 0.0;
  for (int y = 0; y < img.h; ++y)
    for (int x = 0; x < img.w; ++x) {
      const double xc = x - img.w / 2, yc = y - img.h / 2;
      const double ph = -2.0 * std::numbers::pi * (kx * xc + ky * yc);
      acc += coil.at(y, x) * img.at(y, x) * cplx(std::cos(ph), std::sin(ph));
    }
  return acc;
}

ComplexImage flat_coil(int n) {
  ComplexImage c(n, n);
  for (auto& v : c.data) v = 1.0;
  return c;
}

}  // namespace

TEST_CASE("bit_reversed_order known values") {
  CHECK(bit_reversed_order(2) == std::vector<int>{0, 1});
  // 3-bit reversals worked out by hand
  CHECK(bit_reversed_order(8) == std::vector<int>{0, 4, 2, 6, 1, 5, 3, 7});
}

TEST_CASE("bit_reversed_order is a bijection and an involution") {
  for (int n : {4, 16, 256, 4096}) {
    auto perm = bit_reversed_order(n);
    auto sorted = perm;
    std::sort(sorted.begin(), sorted.end());
    for (int i = 0; i < n; ++i) {
      CHECK(sorted[i] == i);
      CHECK(perm[perm[i]] == i);
    }
  }
}

TEST_CASE("bit_reversed_order rejects non powers of two") {
  CHECK_THROWS(bit_reversed_order(6));
  CHECK_THROWS(bit_reversed_order(0));
}

TEST_CASE("trajectory angles: uniform spacing") {
  auto traj = make_trajectory(4, 5, 2, SpokeOrdering::uniform);
  // spoke angle shows up in the outermost sample direction
  REQUIRE(traj.frames.size() == 2);
  const double pi = std::numbers::pi;
  std::vector<double> expected{0, pi / 4, pi / 2, 3 * pi / 4};
  int spoke = 0;
  for (const auto& fr : traj.frames)
    for (size_t s = 0; s + 5 <= fr.num_points(); s += 5) {
      // first sample of the spoke is at radius -2/5
      const double ang = std::atan2(-fr.ky[s], -fr.kx[s]);
      CHECK(std::abs(std::fmod(ang + 2 * pi, pi) - std::fmod(expected[spoke], pi)) < 1e-12);
      ++spoke;
    }
}

TEST_CASE("trajectory: bit-reversed frame 0 gets spokes sigma=[0,4]") {
  auto traj = make_trajectory(8, 9, 2, SpokeOrdering::bit_reversed);
  const double pi = std::numbers::pi;
  const auto& fr = traj.frames[0];
  // spoke 0 at angle 0: ky == 0 along the spoke
  for (int j = 0; j < 9; ++j) CHECK(fr.ky[j] == 0.0);
  // spoke 1 at angle pi/2 (sigma(1)=4): kx == 0 along the spoke
  for (int j = 9; j < 18; ++j) CHECK(std::abs(fr.kx[j]) < 1e-15);
  CHECK(std::abs(std::atan2(fr.ky[17], fr.kx[17]) - pi / 2) < 1e-12);
}

TEST_CASE("trajectory invariants: angle range, DC sample, partition") {
  for (auto ord : {SpokeOrdering::uniform, SpokeOrdering::golden_angle,
                   SpokeOrdering::bit_reversed}) {
    auto traj = make_trajectory(16, 8, 4, ord);
    size_t total_points = 0;
    for (const auto& fr : traj.frames) {
      total_points += fr.num_points();
      for (size_t s = 0; s < fr.num_points(); s += 8) {
        double min_r = 1e30;
        double max_r = 0;
        for (int j = 0; j < 8; ++j) {
          const double r = std::hypot(fr.kx[s + j], fr.ky[s + j]);
          min_r = std::min(min_r, r);
          max_r = std::max(max_r, r);
        }
        CHECK(min_r <= 0.5 / 8);
        CHECK(max_r <= 0.5 + 1e-15);
      }
    }
    CHECK(total_points == 16u * 8u);
  }
  CHECK_THROWS(make_trajectory(10, 8, 3, SpokeOrdering::uniform));
  CHECK_THROWS(make_trajectory(12, 8, 4, SpokeOrdering::bit_reversed));
}

TEST_CASE("nudft_forward: delta at center gives all-ones") {
  const int n = 8;
  ComplexImage img(n, n);
  img.at(n / 2, n / 2) = 1.0;
  std::mt19937_64 rng(1);
  std::vector<double> kx, ky;
  random_coords(7, rng, kx, ky);
  auto out = nudft_forward(img, {flat_coil(n)}, kx, ky);
  for (const auto& s : out[0]) CHECK(std::abs(s - cplx(1.0, 0.0)) < 1e-13);
}

TEST_CASE("nudft_forward: DC equals coil-weighted sum") {
  const int n = 8;
  std::mt19937_64 rng(2);
  auto img = random_image(n, n, rng);
  auto coil = random_image(n, n, rng);
  auto out = nudft_forward(img, {coil}, {0.0}, {0.0});
  cplx expect = 0.0;
  for (size_t i = 0; i < img.size(); ++i) expect += coil.data[i] * img.data[i];
  CHECK(std::abs(out[0][0] - expect) < 1e-12 * std::abs(expect));
}

TEST_CASE("nudft_forward matches brute-force DFT sum") {
  const int n = 8;
  std::mt19937_64 rng(3);
  auto img = random_image(n, n, rng);
  std::vector<ComplexImage> coils{random_image(n, n, rng), random_image(n, n, rng)};
  std::vector<double> kx, ky;
  random_coords(5, rng, kx, ky);
  auto out = nudft_forward(img, coils, kx, ky);
  for (size_t c = 0; c < coils.size(); ++c)
    for (size_t p = 0; p < kx.size(); ++p) {
      const cplx ref = brute_force_sample(img, coils[c], kx[p], ky[p]);
      CHECK(std::abs(out[c][p] - ref) < 1e-12 * std::max(1.0, std::abs(ref)));
    }
}

TEST_CASE("nudft_forward is linear") {
  const int n = 8;
  std::mt19937_64 rng(4);
  auto f = random_image(n, n, rng);
  auto g = random_image(n, n, rng);
  auto coil = random_image(n, n, rng);
  std::vector<double> kx, ky;
  random_coords(9, rng, kx, ky);
  const cplx alpha(0.3, -1.1), beta(-0.7, 0.2);
  ComplexImage comb(n, n);
  for (size_t i = 0; i < comb.size(); ++i)
    comb.data[i] = alpha * f.data[i] + beta * g.data[i];
  auto out_comb = nudft_forward(comb, {coil}, kx, ky);
  auto out_f = nudft_forward(f, {coil}, kx, ky);
  auto out_g = nudft_forward(g, {coil}, kx, ky);
  for (size_t p = 0; p < kx.size(); ++p) {
    const cplx ref = alpha * out_f[0][p] + beta * out_g[0][p];
    CHECK(std::abs(out_comb[0][p] - ref) < 1e-12 * std::max(1.0, std::abs(ref)));
  }
}

TEST_CASE("nudft_adjoint trivial cases") {
  const int n = 8;
  auto coil = flat_coil(n);
  // all-zero samples -> zero image
  auto img = nudft_adjoint({std::vector<cplx>(3, 0.0)}, {coil}, {0.1, 0.2, 0.3},
                           {0.0, -0.1, 0.4});
  for (const auto& v : img.data) CHECK(v == cplx(0.0));
  // one unit sample at k=0 -> constant ones
  auto ones = nudft_adjoint({std::vector<cplx>{1.0}}, {coil}, {0.0}, {0.0});
  for (const auto& v : ones.data) CHECK(std::abs(v - cplx(1.0)) < 1e-14);
}

TEST_CASE("adjoint identity <Ax,y> == <x,A^H y>") {
  std::mt19937_64 rng(5);
  for (int trial = 0; trial < 20; ++trial) {
    std::uniform_int_distribution<int> gsz(8, 16), csz(1, 3), psz(5, 17);
    const int n = gsz(rng), nc = csz(rng), np = psz(rng);
    auto x = random_image(n, n, rng);
    std::vector<ComplexImage> coils;
    for (int c = 0; c < nc; ++c) coils.push_back(random_image(n, n, rng));
    std::vector<double> kx, ky;
    random_coords(np, rng, kx, ky);
    std::vector<std::vector<cplx>> y;
    for (int c = 0; c < nc; ++c) y.push_back(random_samples(np, rng));

    auto ax = nudft_forward(x, coils, kx, ky);
    auto aty = nudft_adjoint(y, coils, kx, ky);

    cplx lhs = 0.0;
    double ax_norm = 0.0, y_norm = 0.0;
    for (int c = 0; c < nc; ++c)
      for (int p = 0; p < np; ++p) {
        lhs += std::conj(ax[c][p]) * y[c][p];
        ax_norm += std::norm(ax[c][p]);
        y_norm += std::norm(y[c][p]);
      }
    const cplx rhs = dot(x, aty);
    const double denom = std::sqrt(ax_norm) * std::sqrt(y_norm);
    REQUIRE(denom > 0);
    CHECK(std::abs(lhs - rhs) / denom < 1e-12);
  }
}
