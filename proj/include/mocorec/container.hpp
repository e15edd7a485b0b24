#pragma once

#include <bit>
#include <cstring>
#include <fstream>
#include <optional>

#include "mocorec/phantom.hpp"
#include "mocorec/recon.hpp"
#include "mocorec/types.hpp"

// Binary container ("MCSD") for acquisitions and checkpoint format ("MCCK")
// for reconstruction state. All payloads are little-endian float64 in declared
// section order; round trips are bit-exact.
//
// MCSD v1 layout:
//   magic "MCSD" | u16 version | u16 flags (bit0: ground truth present)
//   u32 H, W, M, coils, spokes_per_frame, samples_per_spoke, ordering
//   coords:  M * P * 2 f64              (kx, ky per point)
//   samples: M * C * P * 2 f64          (re, im interleaved)
//   if ground truth:
//     template:   H * W * 2 f64
//     motion:     M * 2 * H * W f64     (dx plane then dy plane per frame)
//     respiratory: M f64
//     coil maps:  C * H * W * 2 f64

namespace mocorec {

static_assert(std::endian::native == std::endian::little,
              "container format assumes a little-endian host");

struct ContainerData {
  Dataset dataset;
  SpokeOrdering ordering = SpokeOrdering::bit_reversed;
  std::optional<GroundTruth> ground_truth;
};

namespace detail {

inline void wr(std::ofstream& f, const void* p, size_t n) {
  f.write(reinterpret_cast<const char*>(p), std::streamsize(n));
}
inline void rd(std::ifstream& f, void* p, size_t n) {
  f.read(reinterpret_cast<char*>(p), std::streamsize(n));
  require(bool(f), "container: truncated file");
}
template <typename T>
inline void wr1(std::ofstream& f, T v) { wr(f, &v, sizeof(T)); }
template <typename T>
inline T rd1(std::ifstream& f) {
  T v;
  rd(f, &v, sizeof(T));
  return v;
}

inline void wr_image(std::ofstream& f, const ComplexImage& img) {
  wr(f, img.data.data(), img.size() * sizeof(cplx));
}
inline void rd_image(std::ifstream& f, ComplexImage& img) {
  rd(f, img.data.data(), img.size() * sizeof(cplx));
}

}  // namespace detail

inline void write_container(const std::string& path, const ContainerData& cd) {
  const Dataset& ds = cd.dataset;
  require(!ds.frames.empty(), "write_container: empty dataset");
  const int M = ds.num_frames(), C = ds.num_coils();
  const size_t P = ds.frames[0].num_points();
  for (const auto& fr : ds.frames)
    require(fr.num_points() == P, "write_container: ragged frames");

  std::ofstream f(path, std::ios::binary);
  require(bool(f), "write_container: cannot open " + path);
  f.write("MCSD", 4);
  detail::wr1<uint16_t>(f, 1);
  detail::wr1<uint16_t>(f, cd.ground_truth ? 1 : 0);
  for (uint32_t v : {uint32_t(ds.grid_h), uint32_t(ds.grid_w), uint32_t(M),
                     uint32_t(C), uint32_t(ds.spokes_per_frame),
                     uint32_t(ds.samples_per_spoke), uint32_t(cd.ordering)})
    detail::wr1(f, v);

  for (const auto& fr : ds.frames)
    for (size_t p = 0; p < P; ++p) {
      detail::wr1(f, fr.kx[p]);
      detail::wr1(f, fr.ky[p]);
    }
  for (const auto& fr : ds.frames)
    for (int c = 0; c < C; ++c)
      detail::wr(f, fr.samples[c].data(), P * sizeof(cplx));

  if (cd.ground_truth) {
    const GroundTruth& gt = *cd.ground_truth;
    detail::wr_image(f, gt.template_image);
    for (const auto& m : gt.motion) {
      detail::wr(f, m.dx.data(), m.dx.size() * sizeof(double));
      detail::wr(f, m.dy.data(), m.dy.size() * sizeof(double));
    }
    detail::wr(f, gt.respiratory_signal.data(), gt.respiratory_signal.size() * sizeof(double));
    for (const auto& cm : gt.coil_maps) detail::wr_image(f, cm);
  }
}

inline ContainerData read_container(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  require(bool(f), "read_container: cannot open " + path);
  char magic[4];
  detail::rd(f, magic, 4);
  require(std::memcmp(magic, "MCSD", 4) == 0, "read_container: bad magic");
  const uint16_t version = detail::rd1<uint16_t>(f);
  require(version == 1, "read_container: unsupported version " + std::to_string(version));
  const uint16_t flags = detail::rd1<uint16_t>(f);

  ContainerData cd;
  Dataset& ds = cd.dataset;
  ds.grid_h = int(detail::rd1<uint32_t>(f));
  ds.grid_w = int(detail::rd1<uint32_t>(f));
  const int M = int(detail::rd1<uint32_t>(f));
  const int C = int(detail::rd1<uint32_t>(f));
  ds.spokes_per_frame = int(detail::rd1<uint32_t>(f));
  ds.samples_per_spoke = int(detail::rd1<uint32_t>(f));
  cd.ordering = SpokeOrdering(detail::rd1<uint32_t>(f));
  require(M >= 1 && C >= 1 && ds.spokes_per_frame >= 1 && ds.samples_per_spoke >= 1,
          "read_container: degenerate header");
  const size_t P = size_t(ds.spokes_per_frame) * ds.samples_per_spoke;

  ds.frames.resize(M);
  for (int t = 0; t < M; ++t) {
    SpokeFrame& fr = ds.frames[t];
    fr.frame_index = t;
    fr.kx.resize(P);
    fr.ky.resize(P);
    for (size_t p = 0; p < P; ++p) {
      fr.kx[p] = detail::rd1<double>(f);
      fr.ky[p] = detail::rd1<double>(f);
    }
  }
  for (int t = 0; t < M; ++t) {
    ds.frames[t].samples.assign(C, std::vector<cplx>(P));
    for (int c = 0; c < C; ++c)
      detail::rd(f, ds.frames[t].samples[c].data(), P * sizeof(cplx));
  }

  if (flags & 1) {
    GroundTruth gt;
    gt.template_image = ComplexImage(ds.grid_h, ds.grid_w);
    detail::rd_image(f, gt.template_image);
    gt.motion.assign(M, MotionField(ds.grid_h, ds.grid_w));
    for (auto& m : gt.motion) {
      detail::rd(f, m.dx.data(), m.dx.size() * sizeof(double));
      detail::rd(f, m.dy.data(), m.dy.size() * sizeof(double));
    }
    gt.respiratory_signal.resize(M);
    detail::rd(f, gt.respiratory_signal.data(), size_t(M) * sizeof(double));
    gt.coil_maps.assign(C, ComplexImage(ds.grid_h, ds.grid_w));
    for (auto& cm : gt.coil_maps) detail::rd_image(f, cm);
    cd.ground_truth = std::move(gt);
  }
  ds.coil_maps = cd.ground_truth ? cd.ground_truth->coil_maps
                                 : std::vector<ComplexImage>{};
  require(!ds.coil_maps.empty(), "read_container: no coil maps available");
  return cd;
}

// ---- checkpoint ("MCCK" v1) ----

inline void write_checkpoint(const std::string& path, const ReconState& st,
                             uint64_t config_hash) {
  std::ofstream f(path, std::ios::binary);
  require(bool(f), "write_checkpoint: cannot open " + path);
  f.write("MCCK", 4);
  detail::wr1<uint16_t>(f, 1);
  detail::wr1<uint16_t>(f, 0);
  for (uint32_t v : {uint32_t(st.f.h), uint32_t(st.f.w), uint32_t(st.theta.kind),
                     uint32_t(st.theta.latent_dim), uint32_t(st.theta.grid),
                     uint32_t(st.Z.frames), uint32_t(st.Z.dim),
                     uint32_t(st.stage), uint32_t(st.epoch)})
    detail::wr1(f, v);
  detail::wr1<uint64_t>(f, uint64_t(st.theta.theta.size()));
  detail::wr1<int64_t>(f, st.step);
  detail::wr1<uint64_t>(f, config_hash);
  detail::wr1<double>(f, st.runtime_seconds);
  detail::wr_image(f, st.f);
  detail::wr(f, st.theta.theta.data(), st.theta.theta.size() * sizeof(double));
  detail::wr(f, st.Z.z.data(), st.Z.z.size() * sizeof(double));
  for (const auto* mom : {&st.mom_f, &st.mom_theta, &st.mom_z}) {
    detail::wr(f, mom->m.data(), mom->m.size() * sizeof(double));
    detail::wr(f, mom->v.data(), mom->v.size() * sizeof(double));
  }
  detail::wr1<uint64_t>(f, uint64_t(st.loss_history.size()));
  detail::wr(f, st.loss_history.data(), st.loss_history.size() * sizeof(double));
}

inline ReconState read_checkpoint(const std::string& path, uint64_t* config_hash = nullptr) {
  std::ifstream f(path, std::ios::binary);
  require(bool(f), "read_checkpoint: cannot open " + path);
  char magic[4];
  detail::rd(f, magic, 4);
  require(std::memcmp(magic, "MCCK", 4) == 0, "read_checkpoint: bad magic");
  const uint16_t version = detail::rd1<uint16_t>(f);
  require(version == 1, "read_checkpoint: unsupported version");
  detail::rd1<uint16_t>(f);  // reserved

  ReconState st;
  const int h = int(detail::rd1<uint32_t>(f));
  const int w = int(detail::rd1<uint32_t>(f));
  const auto kind = GeneratorKind(detail::rd1<uint32_t>(f));
  const int d = int(detail::rd1<uint32_t>(f));
  const int g = int(detail::rd1<uint32_t>(f));
  const int M = int(detail::rd1<uint32_t>(f));
  const int zdim = int(detail::rd1<uint32_t>(f));
  st.stage = int(detail::rd1<uint32_t>(f));
  st.epoch = int(detail::rd1<uint32_t>(f));
  const uint64_t theta_len = detail::rd1<uint64_t>(f);
  st.step = detail::rd1<int64_t>(f);
  const uint64_t hash = detail::rd1<uint64_t>(f);
  if (config_hash) *config_hash = hash;
  st.runtime_seconds = detail::rd1<double>(f);

  st.f = ComplexImage(h, w);
  detail::rd_image(f, st.f);
  st.theta = make_generator(kind, d, g);
  require(st.theta.theta.size() == theta_len, "read_checkpoint: theta size mismatch");
  detail::rd(f, st.theta.theta.data(), theta_len * sizeof(double));
  st.Z = LatentTrajectory(M, zdim);
  detail::rd(f, st.Z.z.data(), st.Z.z.size() * sizeof(double));
  st.mom_f.init(2 * st.f.size());
  st.mom_theta.init(theta_len);
  st.mom_z.init(st.Z.z.size());
  for (auto* mom : {&st.mom_f, &st.mom_theta, &st.mom_z}) {
    detail::rd(f, mom->m.data(), mom->m.size() * sizeof(double));
    detail::rd(f, mom->v.data(), mom->v.size() * sizeof(double));
  }
  const uint64_t nl = detail::rd1<uint64_t>(f);
  st.loss_history.resize(nl);
  if (nl) detail::rd(f, st.loss_history.data(), nl * sizeof(double));
  return st;
}

inline uint64_t fnv1a_hash(const std::string& s) {
  uint64_t h = 1469598103934665603ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  return h;
}

}  // namespace mocorec
