// Command-line front end: synthetic data simulation, motion-compensated
// reconstruction, motion-resolved baseline, numerical self-checks, metrics,
// and a lambda sweep. Every run writes a JSON echo of its effective
// configuration so results are reproducible from the echo alone.

#include <CLI11.hpp>
#include <json.hpp>

#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <random>

#include "mocorec/baseline.hpp"
#include "mocorec/container.hpp"
#include "mocorec/metrics.hpp"
#include "mocorec/png.hpp"

using nlohmann::json;
using namespace mocorec;

namespace {

int effective_threads() {
  const char* env = std::getenv("MOCOREC_THREADS");
  if (!env) return 1;
  const int n = std::atoi(env);
  if (n > 1)
    std::cerr << "note: this build executes serially; MOCOREC_THREADS=" << n
              << " is recorded but one thread is used\n";
  return n >= 1 ? n : 1;
}

// Pre-scan for --config and load the JSON file; CLI flags override its values.
json load_config_file(int argc, char** argv) {
  for (int i = 1; i + 1 < argc; ++i)
    if (std::string(argv[i]) == "--config") {
      std::ifstream f(argv[i + 1]);
      require(bool(f), std::string("cannot open config file ") + argv[i + 1]);
      json j;
      f >> j;
      return j;
    }
  return json::object();
}

template <typename T>
void from_cfg(const json& j, const char* key, T& value) {
  if (j.contains(key)) value = j.at(key).get<T>();
}

void write_echo(const std::string& dir, const json& echo) {
  std::ofstream f(dir + "/config_echo.json");
  require(bool(f), "cannot write config echo in " + dir);
  f << echo.dump(2) << "\n";
}

SpokeOrdering parse_ordering(const std::string& s) {
  if (s == "bit_reversed") return SpokeOrdering::bit_reversed;
  if (s == "golden_angle") return SpokeOrdering::golden_angle;
  if (s == "uniform") return SpokeOrdering::uniform;
  throw std::invalid_argument("unknown spoke ordering: " + s);
}

void write_motion_csv(const std::string& path, const MotionField& phi) {
  std::ofstream f(path);
  require(bool(f), "cannot write " + path);
  f << "x,y,dx,dy\n";
  for (int y = 0; y < phi.h; ++y)
    for (int x = 0; x < phi.w; ++x)
      f << x << ',' << y << ',' << phi.dx[size_t(y) * phi.w + x] << ','
        << phi.dy[size_t(y) * phi.w + x] << "\n";
}

// ---- simulate ----

struct SimArgs {
  PhantomSpec spec;
  double snr_db = -1.0;  // if >= 0, noise_sigma is derived from it
  std::string out = "out";
  std::string ordering = "golden_angle";
  std::string preset;
};

int run_simulate(SimArgs a) {
  if (a.preset == "desk") {
    a.spec = PhantomSpec{};
    a.spec.grid_size = 64;
    a.spec.num_frames = 40;
    a.spec.spokes_per_frame = 12;
    a.spec.samples_per_spoke = 65;
    a.spec.num_coils = 4;
    a.spec.breathing_period = 10;
    a.spec.breathing_amplitude = 4;
    a.snr_db = 30.0;
    a.ordering = "golden_angle";
  } else if (!a.preset.empty()) {
    throw std::invalid_argument("unknown preset: " + a.preset);
  }
  a.spec.ordering = parse_ordering(a.ordering);
  validate(a.spec);

  auto gt = make_ground_truth(a.spec);
  auto traj = make_trajectory(a.spec.num_frames * a.spec.spokes_per_frame,
                              a.spec.samples_per_spoke, a.spec.spokes_per_frame,
                              a.spec.ordering);
  if (a.snr_db >= 0) {
    PhantomSpec clean = a.spec;
    clean.noise_sigma = 0.0;
    a.spec.noise_sigma =
        kspace_rms(simulate_kspace(clean, gt, traj)) / std::pow(10.0, a.snr_db / 20.0);
  }

  std::filesystem::create_directories(a.out);
  ContainerData cd;
  cd.dataset = make_dataset(a.spec, gt, simulate_kspace(a.spec, gt, traj));
  cd.ordering = a.spec.ordering;
  cd.ground_truth = gt;
  write_container(a.out + "/dataset.mcsd", cd);
  write_png_magnitude(a.out + "/template.png", gt.template_image);
  {
    std::ofstream f(a.out + "/respiratory.csv");
    f << "frame,amplitude\n";
    for (int t = 0; t < a.spec.num_frames; ++t)
      f << t << ',' << gt.respiratory_signal[t] << "\n";
  }
  json echo{{"command", "simulate"},
            {"grid", a.spec.grid_size},
            {"frames", a.spec.num_frames},
            {"spokes_per_frame", a.spec.spokes_per_frame},
            {"samples_per_spoke", a.spec.samples_per_spoke},
            {"coils", a.spec.num_coils},
            {"period", a.spec.breathing_period},
            {"amplitude", a.spec.breathing_amplitude},
            {"noise_sigma", a.spec.noise_sigma},
            {"snr_db", a.snr_db},
            {"seed", a.spec.seed},
            {"ordering", a.ordering},
            {"threads", effective_threads()}};
  write_echo(a.out, echo);
  std::cout << "wrote " << a.out << "/dataset.mcsd (" << a.spec.num_frames
            << " frames, sigma=" << a.spec.noise_sigma << ")\n";
  return 0;
}

// ---- reconstruct ----

struct ReconArgs {
  ReconConfig cfg;
  std::string data;
  std::string out = "out";
  std::string resume;
  std::string generator = "decoder";
  std::vector<int> quiver_frames;
};

json recon_echo(const ReconArgs& a) {
  return json{{"command", "reconstruct"},
              {"data", a.data},
              {"lambda_smooth", a.cfg.lambda_smooth},
              {"anchor_weight", a.cfg.anchor_weight},
              {"epochs_coarse", a.cfg.epochs_coarse},
              {"epochs_fine", a.cfg.epochs_fine},
              {"coarse_fraction", a.cfg.coarse_fraction},
              {"batch_frames", a.cfg.batch_frames},
              {"lr_f", a.cfg.adam.lr_f},
              {"lr_theta", a.cfg.adam.lr_theta},
              {"lr_z", a.cfg.adam.lr_z},
              {"generator", a.generator},
              {"latent_dim", a.cfg.latent_dim},
              {"init_scale", a.cfg.init_scale},
              {"seed", a.cfg.seed},
              {"resume", a.resume},
              {"threads", effective_threads()}};
}

int run_reconstruct(ReconArgs a) {
  a.cfg.generator = a.generator == "mlp" ? GeneratorKind::mlp : GeneratorKind::decoder;
  if (a.generator != "mlp" && a.generator != "decoder")
    throw std::invalid_argument("unknown generator: " + a.generator);
  auto cd = read_container(a.data);
  std::filesystem::create_directories(a.out);
  const json echo = recon_echo(a);
  write_echo(a.out, echo);
  const uint64_t hash = fnv1a_hash(echo.dump());

  ReconState resume_state;
  const ReconState* resume = nullptr;
  if (!a.resume.empty()) {
    uint64_t old_hash = 0;
    resume_state = read_checkpoint(a.resume, &old_hash);
    if (old_hash != hash)
      std::cerr << "warning: resume checkpoint was produced by a different "
                   "configuration\n";
    resume = &resume_state;
  }

  const auto t0 = std::chrono::steady_clock::now();
  ReconState st = progressive_solve(cd.dataset, a.cfg, resume);
  st.runtime_seconds =
      (resume ? resume_state.runtime_seconds : 0.0) +
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  write_checkpoint(a.out + "/checkpoint.mcck", st, hash);

  {
    std::ofstream f(a.out + "/loss.csv");
    f << "epoch,loss\n";
    for (size_t i = 0; i < st.loss_history.size(); ++i)
      f << i << ',' << st.loss_history[i] << "\n";
  }
  {
    std::ofstream f(a.out + "/latent.csv");
    f << "frame";
    for (int k = 0; k < st.Z.dim; ++k) f << ",z" << k;
    f << "\n";
    for (int t = 0; t < st.Z.frames; ++t) {
      f << t;
      for (int k = 0; k < st.Z.dim; ++k) f << ',' << st.Z.row(t)[k];
      f << "\n";
    }
  }
  write_png_magnitude(a.out + "/template.png", st.f);

  // motion previews at two frames: defaults are the rest frame and the frame
  // with the largest latent excursion
  std::vector<int> qf = a.quiver_frames;
  if (qf.empty()) {
    int peak = 0;
    for (int t = 1; t < st.Z.frames; ++t)
      if (std::abs(st.Z.row(t)[0]) > std::abs(st.Z.row(peak)[0])) peak = t;
    qf = {0, peak};
  }
  for (int t : qf) {
    require(t >= 0 && t < st.Z.frames, "quiver frame out of range");
    std::vector<double> zt(st.Z.row(t), st.Z.row(t) + st.Z.dim);
    const MotionField phi =
        upsample_motion(generator_forward(st.theta, zt), st.f.h, st.f.w);
    write_motion_csv(a.out + "/motion_frame" + std::to_string(t) + ".csv", phi);
  }
  std::cout << "wrote " << a.out << "/checkpoint.mcck (final loss "
            << st.loss_history.back() << ", " << st.runtime_seconds << " s)\n";
  return 0;
}

// ---- baseline ----

int run_baseline(const std::string& data, const std::string& out, int phases,
                 PhaseReconConfig pc) {
  auto cd = read_container(data);
  std::filesystem::create_directories(out);
  auto g = extract_gating(cd.dataset);
  {
    std::ofstream f(out + "/gating.csv");
    f << "spoke,value\n";
    for (size_t i = 0; i < g.values.size(); ++i) f << i << ',' << g.values[i] << "\n";
  }
  auto bins = bin_spokes(g, phases);
  for (size_t i = 0; i < bins.size(); ++i) {
    auto x = recon_phase(cd.dataset, bins[i], pc);
    write_png_magnitude(out + "/phase_" + std::to_string(i) + ".png", x);
  }
  json echo{{"command", "baseline"}, {"data", data},   {"phases", phases},
            {"mu", pc.mu},           {"max_iters", pc.max_iters},
            {"tol", pc.tol},         {"step_scale", pc.step_scale},
            {"seed", 0},             {"threads", effective_threads()}};
  write_echo(out, echo);
  std::cout << "wrote " << phases << " phase images to " << out << "\n";
  return 0;
}

// ---- adjointcheck / gradcheck ----

int run_adjointcheck() {
  std::mt19937_64 rng(2024);
  std::uniform_int_distribution<int> grid_d(8, 32), coil_d(1, 4), pts_d(5, 64);
  std::normal_distribution<double> gauss;
  auto rand_image = [&](int h, int w) {
    ComplexImage im(h, w);
    for (auto& v : im.data) v = cplx(gauss(rng), gauss(rng));
    return im;
  };
  double worst_nudft = 0.0, worst_warp = 0.0;
  for (int rep = 0; rep < 50; ++rep) {
    const int n = grid_d(rng), nc = coil_d(rng), np = pts_d(rng);
    auto x = rand_image(n, n);
    std::vector<ComplexImage> maps;
    for (int c = 0; c < nc; ++c) maps.push_back(rand_image(n, n));
    std::vector<double> kx(np), ky(np);
    std::uniform_real_distribution<double> u(-0.5, 0.5);
    for (int p = 0; p < np; ++p) {
      kx[p] = u(rng);
      ky[p] = u(rng);
    }
    std::vector<std::vector<cplx>> y(nc, std::vector<cplx>(np));
    for (auto& coil : y)
      for (auto& s : coil) s = cplx(gauss(rng), gauss(rng));
    auto ax = nudft_forward(x, maps, kx, ky);
    auto aty = nudft_adjoint(y, maps, kx, ky);
    cplx lhs = 0.0, mag = 0.0;
    for (int c = 0; c < nc; ++c)
      for (int p = 0; p < np; ++p) {
        lhs += ax[c][p] * std::conj(y[c][p]);
        mag += std::norm(ax[c][p]);
      }
    cplx rhs = 0.0;
    double ny = 0.0;
    for (size_t i = 0; i < x.size(); ++i) rhs += x.data[i] * std::conj(aty.data[i]);
    for (const auto& coil : y)
      for (const auto& s : coil) ny += std::norm(s);
    worst_nudft = std::max(worst_nudft, std::abs(lhs - rhs) /
                                            (std::sqrt(mag.real()) * std::sqrt(ny)));

    MotionField phi(n, n);
    std::uniform_real_distribution<double> d(-2.0, 2.0);
    for (size_t i = 0; i < phi.size(); ++i) {
      phi.dx[i] = d(rng);
      phi.dy[i] = d(rng);
    }
    auto g_img = rand_image(n, n);
    auto wx = warp_forward(x, phi);
    auto wtg = warp_adjoint_image(g_img, phi);
    cplx l2 = 0.0, r2 = 0.0;
    double nx = 0.0, ng = 0.0;
    for (size_t i = 0; i < x.size(); ++i) {
      l2 += wx.data[i] * std::conj(g_img.data[i]);
      r2 += x.data[i] * std::conj(wtg.data[i]);
      nx += std::norm(wx.data[i]);
      ng += std::norm(g_img.data[i]);
    }
    worst_warp = std::max(worst_warp,
                          std::abs(l2 - r2) / std::max(1e-300, std::sqrt(nx * ng)));
  }
  std::cout << "nudft adjoint max relative error: " << worst_nudft << "\n";
  std::cout << "warp adjoint max relative error:  " << worst_warp << "\n";
  return (worst_nudft < 1e-10 && worst_warp < 1e-12) ? 0 : 1;
}

int run_gradcheck() {
  PhantomSpec spec;
  spec.grid_size = 16;
  spec.num_frames = 4;
  spec.spokes_per_frame = 2;
  spec.samples_per_spoke = 9;
  spec.num_coils = 1;
  spec.breathing_period = 4;
  spec.breathing_amplitude = 2;
  spec.noise_sigma = 0.01;
  spec.seed = 11;
  auto gt = make_ground_truth(spec);
  auto traj = make_trajectory(8, 9, 2, SpokeOrdering::uniform);
  Dataset ds = make_dataset(spec, gt, simulate_kspace(spec, gt, traj));

  ReconConfig cfg;
  cfg.generator = GeneratorKind::mlp;
  cfg.seed = 3;
  ReconState st = init_state(ds, cfg, 16, 16);
  std::mt19937_64 rng(5);
  std::normal_distribution<double> gauss;
  for (auto& v : st.f.data) v = cplx(0.2 * gauss(rng), 0.2 * gauss(rng));
  for (auto& z : st.Z.z) z = 0.1 * gauss(rng);
  std::vector<int> batch{0, 1, 2, 3};

  auto loss_at = [&](const ReconState& s) {
    return loss_and_gradients(s, batch, ds, cfg).loss;
  };
  const Gradients g = loss_and_gradients(st, batch, ds, cfg);
  const size_t nf = 2 * st.f.size(), nt = st.theta.theta.size(), nz = st.Z.z.size();
  double worst = 0.0;
  for (int dir = 0; dir < 10; ++dir) {
    std::vector<double> df(nf), dt(nt), dz(nz);
    for (auto& v : df) v = gauss(rng);
    for (auto& v : dt) v = gauss(rng);
    for (auto& v : dz) v = gauss(rng);
    double analytic = 0.0;
    const double* gf = reinterpret_cast<const double*>(g.grad_f.data.data());
    for (size_t i = 0; i < nf; ++i) analytic += gf[i] * df[i];
    for (size_t i = 0; i < nt; ++i) analytic += g.grad_theta[i] * dt[i];
    for (size_t i = 0; i < nz; ++i) analytic += g.grad_z[i] * dz[i];

    const double h = 1e-6;
    auto shifted = [&](double sign) {
      ReconState s = st;
      double* fp = reinterpret_cast<double*>(s.f.data.data());
      for (size_t i = 0; i < nf; ++i) fp[i] += sign * h * df[i];
      for (size_t i = 0; i < nt; ++i) s.theta.theta[i] += sign * h * dt[i];
      for (size_t i = 0; i < nz; ++i) s.Z.z[i] += sign * h * dz[i];
      return loss_at(s);
    };
    const double fd = (shifted(1.0) - shifted(-1.0)) / (2.0 * h);
    worst = std::max(worst, std::abs(fd - analytic) / std::max(1.0, std::abs(fd)));
  }
  std::cout << "end-to-end gradient max relative error: " << worst << "\n";
  return worst < 1e-4 ? 0 : 1;
}

// ---- metrics ----

int run_metrics(const std::string& ckpt, const std::string& data,
                const std::string& out) {
  auto cd = read_container(data);
  require(cd.ground_truth.has_value(), "metrics: container has no ground truth");
  auto st = read_checkpoint(ckpt);
  auto m = compute_metrics(st, *cd.ground_truth);
  std::filesystem::create_directories(out);
  {
    std::ofstream f(out + "/metrics.csv");
    f << "psnr_template,motion_epe,latent_corr,period_error,runtime_seconds\n";
    f << m.psnr_template << ',' << m.motion_epe << ',' << m.latent_corr << ','
      << m.period_error << ',' << st.runtime_seconds << "\n";
  }
  json echo{{"command", "metrics"}, {"checkpoint", ckpt}, {"data", data},
            {"seed", 0},            {"threads", effective_threads()}};
  write_echo(out, echo);
  std::cout << "psnr_template=" << m.psnr_template << " motion_epe=" << m.motion_epe
            << " latent_corr=" << m.latent_corr << " period_error=" << m.period_error
            << " runtime_seconds=" << st.runtime_seconds << "\n";
  return 0;
}

// ---- sweep-lambda ----

int run_sweep(ReconArgs a, std::vector<double> lambdas) {
  a.cfg.generator = a.generator == "mlp" ? GeneratorKind::mlp : GeneratorKind::decoder;
  auto cd = read_container(a.data);
  require(cd.ground_truth.has_value(), "sweep-lambda: container has no ground truth");
  std::filesystem::create_directories(a.out);
  std::ofstream f(a.out + "/sweep.csv");
  f << "lambda,latent_corr,final_loss\n";
  for (double lam : lambdas) {
    ReconConfig cfg = a.cfg;
    cfg.lambda_smooth = lam;
    auto st = progressive_solve(cd.dataset, cfg);
    auto m = compute_metrics(st, *cd.ground_truth);
    f << lam << ',' << m.latent_corr << ',' << st.loss_history.back() << "\n";
    std::cout << "lambda=" << lam << " latent_corr=" << m.latent_corr
              << " final_loss=" << st.loss_history.back() << "\n";
  }
  json echo = recon_echo(a);
  echo["command"] = "sweep-lambda";
  echo["lambdas"] = lambdas;
  write_echo(a.out, echo);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  try {
    const json cfgfile = load_config_file(argc, argv);
    CLI::App app{"motion-compensated dynamic MRI reconstruction toolkit"};
    app.require_subcommand(1);
    app.fallthrough();
    std::string config_path;
    app.add_option("--config", config_path, "JSON config file (flags override)");

    // simulate
    SimArgs sim;
    from_cfg(cfgfile, "grid", sim.spec.grid_size);
    from_cfg(cfgfile, "frames", sim.spec.num_frames);
    from_cfg(cfgfile, "spokes_per_frame", sim.spec.spokes_per_frame);
    from_cfg(cfgfile, "samples_per_spoke", sim.spec.samples_per_spoke);
    from_cfg(cfgfile, "coils", sim.spec.num_coils);
    from_cfg(cfgfile, "period", sim.spec.breathing_period);
    from_cfg(cfgfile, "amplitude", sim.spec.breathing_amplitude);
    from_cfg(cfgfile, "noise_sigma", sim.spec.noise_sigma);
    from_cfg(cfgfile, "snr_db", sim.snr_db);
    from_cfg(cfgfile, "seed", sim.spec.seed);
    from_cfg(cfgfile, "ordering", sim.ordering);
    auto* c_sim = app.add_subcommand("simulate", "generate a synthetic dataset");
    c_sim->add_option("--out", sim.out, "output directory");
    c_sim->add_option("--preset", sim.preset, "named preset (desk)");
    c_sim->add_option("--grid", sim.spec.grid_size);
    c_sim->add_option("--frames", sim.spec.num_frames);
    c_sim->add_option("--spokes-per-frame", sim.spec.spokes_per_frame);
    c_sim->add_option("--samples-per-spoke", sim.spec.samples_per_spoke);
    c_sim->add_option("--coils", sim.spec.num_coils);
    c_sim->add_option("--period", sim.spec.breathing_period);
    c_sim->add_option("--amplitude", sim.spec.breathing_amplitude);
    c_sim->add_option("--sigma", sim.spec.noise_sigma, "k-space noise std");
    c_sim->add_option("--snr", sim.snr_db, "target SNR in dB (overrides --sigma)");
    c_sim->add_option("--seed", sim.spec.seed);
    c_sim->add_option("--ordering", sim.ordering,
                      "bit_reversed | golden_angle | uniform");

    // shared reconstruction options
    ReconArgs rec;
    from_cfg(cfgfile, "lambda_smooth", rec.cfg.lambda_smooth);
    from_cfg(cfgfile, "anchor_weight", rec.cfg.anchor_weight);
    from_cfg(cfgfile, "epochs_coarse", rec.cfg.epochs_coarse);
    from_cfg(cfgfile, "epochs_fine", rec.cfg.epochs_fine);
    from_cfg(cfgfile, "coarse_fraction", rec.cfg.coarse_fraction);
    from_cfg(cfgfile, "batch_frames", rec.cfg.batch_frames);
    from_cfg(cfgfile, "lr_f", rec.cfg.adam.lr_f);
    from_cfg(cfgfile, "lr_theta", rec.cfg.adam.lr_theta);
    from_cfg(cfgfile, "lr_z", rec.cfg.adam.lr_z);
    from_cfg(cfgfile, "generator", rec.generator);
    from_cfg(cfgfile, "latent_dim", rec.cfg.latent_dim);
    from_cfg(cfgfile, "init_scale", rec.cfg.init_scale);
    from_cfg(cfgfile, "recon_seed", rec.cfg.seed);
    auto add_recon_opts = [&](CLI::App* c) {
      c->add_option("--data", rec.data, "input container (.mcsd)")->required();
      c->add_option("--out", rec.out, "output directory");
      c->add_option("--lambda", rec.cfg.lambda_smooth, "latent smoothness weight");
      c->add_option("--anchor", rec.cfg.anchor_weight, "reference-frame anchor weight");
      c->add_option("--epochs-coarse", rec.cfg.epochs_coarse);
      c->add_option("--epochs-fine", rec.cfg.epochs_fine);
      c->add_option("--coarse-fraction", rec.cfg.coarse_fraction);
      c->add_option("--batch-frames", rec.cfg.batch_frames);
      c->add_option("--lr-f", rec.cfg.adam.lr_f);
      c->add_option("--lr-theta", rec.cfg.adam.lr_theta);
      c->add_option("--lr-z", rec.cfg.adam.lr_z);
      c->add_option("--generator", rec.generator, "decoder | mlp");
      c->add_option("--latent-dim", rec.cfg.latent_dim);
      c->add_option("--init-scale", rec.cfg.init_scale);
      c->add_option("--seed", rec.cfg.seed);
    };
    auto* c_rec = app.add_subcommand("reconstruct", "motion-compensated solve");
    add_recon_opts(c_rec);
    c_rec->add_option("--resume", rec.resume, "checkpoint to resume from");
    c_rec->add_option("--quiver-frames", rec.quiver_frames,
                      "frames for motion CSV previews (default: rest and peak)");

    // baseline
    std::string base_data, base_out = "out";
    int phases = 4;
    PhaseReconConfig pc;
    from_cfg(cfgfile, "phases", phases);
    from_cfg(cfgfile, "mu", pc.mu);
    from_cfg(cfgfile, "baseline_iters", pc.max_iters);
    auto* c_base = app.add_subcommand("baseline", "motion-resolved comparison recon");
    c_base->add_option("--data", base_data)->required();
    c_base->add_option("--out", base_out);
    c_base->add_option("--phases", phases, "number of respiratory bins");
    c_base->add_option("--mu", pc.mu, "TV weight");
    c_base->add_option("--iters", pc.max_iters);
    c_base->add_option("--tol", pc.tol);
    c_base->add_option("--step-scale", pc.step_scale);

    auto* c_adj = app.add_subcommand("adjointcheck", "operator adjoint self-test");
    auto* c_grad = app.add_subcommand("gradcheck", "end-to-end gradient self-test");

    // metrics
    std::string m_ckpt, m_data, m_out = "out";
    auto* c_met = app.add_subcommand("metrics", "compare checkpoint to ground truth");
    c_met->add_option("--checkpoint", m_ckpt)->required();
    c_met->add_option("--data", m_data)->required();
    c_met->add_option("--out", m_out);

    // sweep-lambda
    std::vector<double> lambdas{0.0, 0.005, 0.02, 0.08, 0.32};
    from_cfg(cfgfile, "lambdas", lambdas);
    auto* c_sweep = app.add_subcommand("sweep-lambda",
                                       "grid-search the latent smoothness weight");
    add_recon_opts(c_sweep);
    c_sweep->add_option("--lambdas", lambdas, "values to try");

    CLI11_PARSE(app, argc, argv);

    if (c_sim->parsed()) return run_simulate(sim);
    if (c_rec->parsed()) return run_reconstruct(rec);
    if (c_base->parsed()) return run_baseline(base_data, base_out, phases, pc);
    if (c_adj->parsed()) return run_adjointcheck();
    if (c_grad->parsed()) return run_gradcheck();
    if (c_met->parsed()) return run_metrics(m_ckpt, m_data, m_out);
    if (c_sweep->parsed()) return run_sweep(rec, lambdas);
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
