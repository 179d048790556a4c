// Command-line harness: dataset generation, training, rollouts, generative
// sampling, potential probing, and the verification suites. Everything
// numeric happens behind the C API; this file is argument plumbing.

#include <cinttypes>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <memory>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <chlu/chlu.h>

namespace fs = std::filesystem;

namespace {

// Exit codes: 0 success, 1 usage or I/O error, 2 numerical divergence,
// 3 check-suite failure.
int fail(chlu_status s) {
  std::fprintf(stderr, "error: %s\n", chlu_last_error());
  return s == CHLU_ERR_DIVERGED ? 2 : 1;
}

#define TRY(call)                                  \
  do {                                             \
    const chlu_status s_ = (call);                 \
    if (s_ != CHLU_OK) return fail(s_);            \
  } while (0)

template <typename T, void (*Free)(T*)>
struct Handle {
  T* h = nullptr;
  ~Handle() { Free(h); }
  T** out() { return &h; }
  operator T*() const { return h; }
};

using ModelHandle = Handle<chlu_model, chlu_model_free>;
using DatasetHandle = Handle<chlu_dataset, chlu_dataset_free>;
using ImagesHandle = Handle<chlu_images, chlu_images_free>;
using TrajectoryHandle = Handle<chlu_trajectory, chlu_trajectory_free>;

std::vector<std::string> split_colon(const std::string& s) {
  std::vector<std::string> parts;
  std::size_t from = 0;
  for (std::size_t at = s.find(':'); at != std::string::npos;
       from = at + 1, at = s.find(':', from))
    parts.push_back(s.substr(from, at - from));
  parts.push_back(s.substr(from));
  return parts;
}

bool parse_number(const std::string& s, double* out) {
  try {
    std::size_t used = 0;
    *out = std::stod(s, &used);
    return used == s.size();
  } catch (const std::exception&) {
    return false;
  }
}

// Atomic text write for the files the CLI assembles itself.
int write_text_atomic(const std::string& path, const std::string& text) {
  const std::string tmp = path + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out.good()) {
      std::fprintf(stderr, "error: cannot open '%s' for writing\n", tmp.c_str());
      return 1;
    }
    out.write(text.data(), static_cast<std::streamsize>(text.size()));
    if (!out.good()) {
      std::fprintf(stderr, "error: write failed for '%s'\n", tmp.c_str());
      return 1;
    }
  }
  std::error_code ec;
  fs::rename(tmp, path, ec);
  if (ec) {
    std::fprintf(stderr, "error: cannot rename '%s' to '%s'\n", tmp.c_str(),
                 path.c_str());
    return 1;
  }
  return 0;
}

// Most-square factorization of d, for displaying flat vectors as images.
void image_shape(std::size_t d, int* w, int* h) {
  std::size_t side = static_cast<std::size_t>(std::sqrt(static_cast<double>(d)));
  while (side > 1 && d % side != 0) --side;
  *w = static_cast<int>(d / side);
  *h = static_cast<int>(side);
}

void print_metrics(const chlu_step_metrics* s, void*) {
  if (s->diverged != 0) {
    std::printf("step=%" PRIu64 " diverged at inner step %" PRIu64 ": %s\n", s->step,
                s->divergence_step, s->divergence_what);
    return;
  }
  std::printf("step=%" PRIu64 " wake_mse=%.6g lyap=%.6g penalty=%.6g loss=%.6g"
              " H_wake=%.6g H_sleep=%.6g gap=%.6g grad_norm=%.6g%s\n",
              s->step, s->wake_mse, s->lyapunov, s->lyap_penalty, s->wake_loss,
              s->mean_wake_H, s->mean_sleep_H, s->contrastive_gap, s->grad_norm,
              s->clipped != 0 ? " clipped" : "");
}

// ---------------------------------------------------------------------------
// gen-data

struct GenDataArgs {
  std::string kind;
  std::string out;
  double cycles = 3.0;
  std::uint64_t samples_per_cycle = 200;
  std::size_t count = 0; // resolved per kind
  std::size_t length = 1000;
  std::string omega = "0.5:2.0";
  double epsilon = 0.0;
  std::uint64_t seed = 0;
  int width = 28;
  int height = 28;
  bool pool = false;
};

int run_gen_data(const GenDataArgs& a) {
  if (a.kind == "lemniscate") {
    const double eps =
        a.epsilon > 0.0 ? a.epsilon
                        : 2.0 * M_PI / static_cast<double>(a.samples_per_cycle);
    DatasetHandle ds;
    TRY(chlu_dataset_lemniscate(a.cycles, a.samples_per_cycle, eps, ds.out()));
    TRY(chlu_dataset_save_csv(ds, a.out.c_str()));
    std::printf("wrote %s (%zu items, %zu states)\n", a.out.c_str(),
                chlu_dataset_count(ds), chlu_dataset_length(ds, 0));
    return 0;
  }
  if (a.kind == "sine") {
    const std::vector<std::string> parts = split_colon(a.omega);
    double lo = 0.0, hi = 0.0;
    if (parts.size() != 2 || !parse_number(parts[0], &lo) ||
        !parse_number(parts[1], &hi)) {
      std::fprintf(stderr, "error: --omega wants LO:HI, got '%s'\n", a.omega.c_str());
      return 1;
    }
    const std::size_t count = a.count > 0 ? a.count : 100;
    const double eps = a.epsilon > 0.0 ? a.epsilon : 0.05;
    DatasetHandle ds;
    TRY(chlu_dataset_sine(count, a.length, lo, hi, a.seed, eps, ds.out()));
    TRY(chlu_dataset_save_csv(ds, a.out.c_str()));
    std::printf("wrote %s (%zu items of %zu states)\n", a.out.c_str(),
                chlu_dataset_count(ds), chlu_dataset_length(ds, 0));
    return 0;
  }
  // images: synthetic digit shapes, optionally mean-pooled 2x2.
  const std::size_t count = a.count > 0 ? a.count : 1000;
  ImagesHandle full;
  TRY(chlu_images_synthetic(count, a.width, a.height, a.seed, full.out()));
  if (a.pool) {
    ImagesHandle pooled;
    TRY(chlu_images_pool2(full, pooled.out()));
    TRY(chlu_images_save_idx(pooled, a.out.c_str()));
    std::printf("wrote %s (%zu images, %dx%d)\n", a.out.c_str(),
                chlu_images_count(pooled), chlu_images_width(pooled),
                chlu_images_height(pooled));
  } else {
    TRY(chlu_images_save_idx(full, a.out.c_str()));
    std::printf("wrote %s (%zu images, %dx%d)\n", a.out.c_str(),
                chlu_images_count(full), chlu_images_width(full),
                chlu_images_height(full));
  }
  return 0;
}

// ---------------------------------------------------------------------------
// train

struct TrainArgs {
  std::string kind;
  std::string data;
  std::string config;
  std::string out;
  bool alg1_literal = false;
};

int run_train(const TrainArgs& a) {
  chlu_train_config cfg;
  chlu_model_params mp;
  TRY(chlu_experiment_defaults(a.kind.c_str(), &cfg, &mp));
  if (!a.config.empty()) TRY(chlu_config_load(a.config.c_str(), &cfg, &mp));
  if (a.alg1_literal) cfg.beta_mse = 0.0; // sleep-only contrastive updates

  ModelHandle model;
  uint64_t diverged = 0;
  if (a.kind == "images") {
    ImagesHandle imgs;
    TRY(chlu_images_load_idx(a.data.c_str(), imgs.out()));
    const std::size_t d = static_cast<std::size_t>(chlu_images_width(imgs)) *
                          static_cast<std::size_t>(chlu_images_height(imgs));
    TRY(chlu_model_create(d, mp.hidden, mp.hidden_count, mp.c, mp.m0, mp.alpha,
                          mp.seed, model.out()));
    TRY(chlu_train_images(model, imgs, &cfg, print_metrics, nullptr, &diverged));
    std::vector<double> centroid(d);
    TRY(chlu_images_centroid(imgs, 0.0, 0, centroid.data()));
    TRY(chlu_model_set_start_centroid(model, centroid.data(), d));
  } else {
    DatasetHandle ds;
    TRY(chlu_dataset_load_csv(a.data.c_str(), ds.out()));
    if (cfg.epsilon <= 0.0) cfg.epsilon = chlu_dataset_epsilon(ds);
    TRY(chlu_model_create(chlu_dataset_dim(ds), mp.hidden, mp.hidden_count, mp.c,
                          mp.m0, mp.alpha, mp.seed, model.out()));
    TRY(chlu_train_trajectories(model, ds, &cfg, print_metrics, nullptr, &diverged));
  }
  TRY(chlu_model_set_generator(model, a.kind.c_str()));
  TRY(chlu_model_save(model, a.out.c_str()));
  std::printf("trained %s model, diverged_batches=%" PRIu64 ", wrote %s\n",
              a.kind.c_str(), diverged, a.out.c_str());
  return 0;
}

// ---------------------------------------------------------------------------
// rollout

struct RolloutArgs {
  std::string ckpt;
  std::string init = "lemniscate-start";
  std::uint64_t steps = 1000;
  double epsilon = 0.0; // 0 resolves to the checkpoint's training step
  double gamma = 0.0;
  std::uint64_t record_every = 1;
  std::string out;
  bool verify = false;
};

int resolve_init(const std::string& spec, std::size_t d, std::vector<double>* q,
                 std::vector<double>* p) {
  q->assign(d, 0.0);
  p->assign(d, 0.0);
  if (spec == "lemniscate-start") {
    if (d != 2) {
      std::fprintf(stderr, "error: lemniscate-start needs a 2-dimensional model\n");
      return 1;
    }
    (*q)[0] = 1.0;
    (*p)[1] = 1.0;
    return 0;
  }
  std::string path = spec;
  std::size_t row = 0;
  if (spec.rfind("csv-row:", 0) == 0) {
    const std::string rest = spec.substr(8);
    const std::size_t cut = rest.rfind(':');
    if (cut == std::string::npos) {
      std::fprintf(stderr, "error: --init csv-row wants csv-row:PATH:ROW\n");
      return 1;
    }
    double rowd = 0.0;
    if (!parse_number(rest.substr(cut + 1), &rowd) || rowd < 0) {
      std::fprintf(stderr, "error: bad row in --init '%s'\n", spec.c_str());
      return 1;
    }
    path = rest.substr(0, cut);
    row = static_cast<std::size_t>(rowd);
  } else if (spec.rfind("file:", 0) == 0) {
    path = spec.substr(5);
  }
  std::size_t found = 0;
  TRY(chlu_state_from_csv(path.c_str(), row, q->data(), p->data(), d, &found));
  if (found != d) {
    std::fprintf(stderr, "error: state in '%s' has dimension %zu, model wants %zu\n",
                 path.c_str(), found, d);
    return 1;
  }
  return 0;
}

int run_rollout(const RolloutArgs& a) {
  ModelHandle model;
  TRY(chlu_model_load(a.ckpt.c_str(), model.out()));
  if (a.verify) TRY(chlu_model_verify(model));
  const std::size_t d = chlu_model_dim(model);

  double epsilon = a.epsilon;
  if (epsilon <= 0.0) {
    chlu_train_config stored;
    TRY(chlu_model_train_config(model, &stored));
    epsilon = stored.epsilon;
    if (epsilon <= 0.0) {
      std::fprintf(stderr, "error: no --epsilon given and none stored in the checkpoint\n");
      return 1;
    }
  }

  std::vector<double> q, p;
  const int rc = resolve_init(a.init, d, &q, &p);
  if (rc != 0) return rc;

  TrajectoryHandle traj;
  TRY(chlu_rollout(model, q.data(), p.data(), a.steps, epsilon, a.gamma,
                   a.record_every, traj.out()));
  TRY(chlu_trajectory_save_csv(traj, a.out.c_str()));
  std::printf("wrote %s (%zu records)\n", a.out.c_str(), chlu_trajectory_size(traj));
  return 0;
}

// ---------------------------------------------------------------------------
// generate

struct GenerateArgs {
  std::string ckpt;
  std::string mode = "thermal";
  std::uint64_t steps = 1000;
  std::size_t count = 25;
  std::string temp_schedule = "geometric:1.0:0.01";
  std::string gamma_schedule = "linear:0.01:0.2";
  std::uint64_t seed = 0;
  std::uint64_t record_every = 10;
  int cols = 5;
  std::string out_dir;
  bool verify = false;
};

int run_generate(const GenerateArgs& a) {
  ModelHandle model;
  TRY(chlu_model_load(a.ckpt.c_str(), model.out()));
  if (a.verify) TRY(chlu_model_verify(model));
  const std::size_t d = chlu_model_dim(model);

  chlu_train_config stored;
  TRY(chlu_model_train_config(model, &stored));
  const double epsilon = stored.epsilon > 0.0 ? stored.epsilon : 0.05;
  const double sigma = stored.sigma_init;

  std::vector<double> centroid(d, 0.0);
  std::size_t cd = 0;
  if (chlu_model_start_centroid(model, centroid.data(), d, &cd) != CHLU_OK)
    std::fill(centroid.begin(), centroid.end(), 0.0); // untagged model: origin

  std::error_code ec;
  fs::create_directories(a.out_dir, ec);
  if (ec) {
    std::fprintf(stderr, "error: cannot create '%s'\n", a.out_dir.c_str());
    return 1;
  }

  std::vector<double> initials(a.count * d), finals(a.count * d);
  std::string energy_csv = "sample,step,t,H,T,V,C\n";
  char line[256];

  for (std::size_t i = 0; i < a.count; ++i) {
    std::vector<double> q(centroid), p(d, 0.0), noise(d);
    const std::string label = "generate-init-" + std::to_string(i);
    TRY(chlu_rng_normal(a.seed, label.c_str(), d, noise.data()));
    for (std::size_t k = 0; k < d; ++k) q[k] += sigma * noise[k];
    std::memcpy(initials.data() + i * d, q.data(), d * sizeof(double));

    TrajectoryHandle traj;
    if (a.mode == "deterministic") {
      // Non-thermal conservative flow: no noise, no friction.
      TRY(chlu_rollout(model, q.data(), p.data(), a.steps, epsilon, 0.0,
                       a.record_every, traj.out()));
    } else {
      const uint64_t chain_seed = a.seed ^ (0x9E3779B97F4A7C15ull * (i + 1));
      TRY(chlu_langevin(model, q.data(), p.data(), a.steps, epsilon,
                        a.temp_schedule.c_str(), a.gamma_schedule.c_str(),
                        chain_seed, a.record_every, traj.out()));
    }

    const std::size_t n = chlu_trajectory_size(traj);
    for (std::size_t k = 0; k < n; ++k) {
      uint64_t step = 0;
      double t = 0, H = 0, T = 0, V = 0, C = 0;
      TRY(chlu_trajectory_record(traj, k, &step, &t, &H, &T, &V, &C));
      std::snprintf(line, sizeof line,
                    "%zu,%" PRIu64 ",%.17g,%.17g,%.17g,%.17g,%.17g\n", i, step, t, H,
                    T, V, C);
      energy_csv += line;
    }
    std::vector<double> qf(d), pf(d);
    TRY(chlu_trajectory_state(traj, n - 1, qf.data(), pf.data()));
    std::memcpy(finals.data() + i * d, qf.data(), d * sizeof(double));
  }

  int w = 0, h = 0;
  image_shape(d, &w, &h);
  const std::string initial_pgm = (fs::path(a.out_dir) / "initial.pgm").string();
  const std::string samples_pgm = (fs::path(a.out_dir) / "samples.pgm").string();
  const std::string energy_path = (fs::path(a.out_dir) / "energy.csv").string();
  TRY(chlu_pgm_save(initials.data(), a.count, w, h, a.cols, 1, initial_pgm.c_str()));
  TRY(chlu_pgm_save(finals.data(), a.count, w, h, a.cols, 1, samples_pgm.c_str()));
  const int rc = write_text_atomic(energy_path, energy_csv);
  if (rc != 0) return rc;
  std::printf("wrote %s, %s, %s (%zu samples, mode=%s)\n", samples_pgm.c_str(),
              initial_pgm.c_str(), energy_path.c_str(), a.count, a.mode.c_str());
  return 0;
}

// ---------------------------------------------------------------------------
// probe

struct ProbeArgs {
  std::string ckpt;
  std::string grid = "-2:2:200";
  std::string out;
  bool verify = false;
};

int run_probe(const ProbeArgs& a) {
  const std::vector<std::string> parts = split_colon(a.grid);
  double lo = 0.0, hi = 0.0, res = 0.0;
  if (parts.size() != 3 || !parse_number(parts[0], &lo) ||
      !parse_number(parts[1], &hi) || !parse_number(parts[2], &res) || res < 1) {
    std::fprintf(stderr, "error: --grid wants LO:HI:RESOLUTION, got '%s'\n",
                 a.grid.c_str());
    return 1;
  }
  ModelHandle model;
  TRY(chlu_model_load(a.ckpt.c_str(), model.out()));
  if (a.verify) TRY(chlu_model_verify(model));
  TRY(chlu_probe(model, lo, hi, static_cast<std::size_t>(res), a.out.c_str()));
  std::printf("wrote %s (%zu samples)\n", a.out.c_str(),
              static_cast<std::size_t>(res) * static_cast<std::size_t>(res));
  return 0;
}

// ---------------------------------------------------------------------------
// check

int run_check(const std::string& suite, std::uint64_t seed) {
  int all_ok = 0;
  const chlu_line_cb print_line = [](const char* text, void*) {
    std::printf("%s\n", text);
  };
  TRY(chlu_check_run(suite.c_str(), seed, print_line, nullptr, &all_ok));
  return all_ok != 0 ? 0 : 3;
}

} // namespace

int main(int argc, char** argv) {
  CLI::App app{"causal Hamiltonian learning unit"};
  app.require_subcommand(1);

  GenDataArgs gen;
  CLI::App* cmd_gen = app.add_subcommand("gen-data", "generate a training dataset");
  cmd_gen->add_option("kind", gen.kind, "lemniscate, sine, or images")
      ->required()
      ->check(CLI::IsMember({"lemniscate", "sine", "images"}));
  cmd_gen->add_option("--out", gen.out, "output path (CSV, or IDX for images)")
      ->required();
  cmd_gen->add_option("--cycles", gen.cycles, "lemniscate cycles (default 3)");
  cmd_gen->add_option("--samples-per-cycle", gen.samples_per_cycle,
                      "lemniscate samples per cycle (default 200)");
  cmd_gen->add_option("--count", gen.count,
                      "items: sine trajectories (default 100) or images (default 1000)");
  cmd_gen->add_option("--length", gen.length, "sine trajectory length (default 1000)");
  cmd_gen->add_option("--omega", gen.omega, "sine frequency range LO:HI (default 0.5:2.0)");
  cmd_gen->add_option("--epsilon", gen.epsilon,
                      "sample spacing (default: 2 pi / samples-per-cycle, or 0.05)");
  cmd_gen->add_option("--seed", gen.seed, "random stream seed (default 0)");
  cmd_gen->add_option("--width", gen.width, "image width (default 28)");
  cmd_gen->add_option("--height", gen.height, "image height (default 28)");
  cmd_gen->add_flag("--pool", gen.pool, "mean-pool images 2x2 before writing");

  TrainArgs train;
  CLI::App* cmd_train = app.add_subcommand("train", "train a model on a dataset");
  cmd_train->add_option("kind", train.kind, "lemniscate, sine, or images")
      ->required()
      ->check(CLI::IsMember({"lemniscate", "sine", "images"}));
  cmd_train->add_option("--data", train.data, "dataset path (CSV or IDX)")->required();
  cmd_train->add_option("--config", train.config,
                        "key-value config overriding the built-in defaults");
  cmd_train->add_option("--out", train.out, "checkpoint output path")->required();
  cmd_train->add_flag("--alg1-literal", train.alg1_literal,
                      "contrastive-only updates (drops the wake reconstruction term)");

  RolloutArgs roll;
  CLI::App* cmd_roll = app.add_subcommand("rollout", "deterministic rollout to CSV");
  cmd_roll->add_option("--ckpt", roll.ckpt, "checkpoint path")->required();
  cmd_roll->add_option("--init", roll.init,
                       "start state: lemniscate-start, PATH, file:PATH, or csv-row:PATH:ROW");
  cmd_roll->add_option("--steps", roll.steps, "integration steps (default 1000)");
  cmd_roll->add_option("--epsilon", roll.epsilon,
                       "step size (default: the checkpoint's training step)");
  cmd_roll->add_option("--gamma", roll.gamma, "friction in [0, 1] (default 0)");
  cmd_roll->add_option("--record-every", roll.record_every,
                       "recording stride (default 1)");
  cmd_roll->add_option("--out", roll.out, "trajectory CSV path")->required();
  cmd_roll->add_flag("--verify", roll.verify, "re-check model invariants after load");

  GenerateArgs gen_samples;
  CLI::App* cmd_generate =
      app.add_subcommand("generate", "sample the learned energy surface");
  cmd_generate->add_option("--ckpt", gen_samples.ckpt, "checkpoint path")->required();
  cmd_generate->add_option("--mode", gen_samples.mode, "thermal or deterministic")
      ->check(CLI::IsMember({"thermal", "deterministic"}));
  cmd_generate->add_option("--steps", gen_samples.steps, "chain length (default 1000)");
  cmd_generate->add_option("--count", gen_samples.count, "sample count (default 25)");
  cmd_generate->add_option("--temp-schedule", gen_samples.temp_schedule,
                           "temperature schedule (default geometric:1.0:0.01)");
  cmd_generate->add_option("--gamma-schedule", gen_samples.gamma_schedule,
                           "friction schedule (default linear:0.01:0.2)");
  cmd_generate->add_option("--seed", gen_samples.seed, "random stream seed (default 0)");
  cmd_generate->add_option("--record-every", gen_samples.record_every,
                           "energy trace stride (default 10)");
  cmd_generate->add_option("--cols", gen_samples.cols,
                           "images per PGM grid row (default 5)");
  cmd_generate->add_option("--out-dir", gen_samples.out_dir, "output directory")
      ->required();
  cmd_generate->add_flag("--verify", gen_samples.verify,
                         "re-check model invariants after load");

  ProbeArgs probe;
  CLI::App* cmd_probe =
      app.add_subcommand("probe", "sample the potential surface on a grid");
  cmd_probe->add_option("--ckpt", probe.ckpt, "checkpoint path")->required();
  cmd_probe->add_option("--grid", probe.grid, "LO:HI:RESOLUTION (default -2:2:200)");
  cmd_probe->add_option("--out", probe.out, "probe CSV path")->required();
  cmd_probe->add_flag("--verify", probe.verify, "re-check model invariants after load");

  std::string check_suite;
  std::uint64_t check_seed = 0;
  CLI::App* cmd_check = app.add_subcommand("check", "run a verification suite");
  cmd_check
      ->add_option("suite", check_suite,
                   "gradients, symplectic, reversibility, velocity-bound, boltzmann, or all")
      ->required()
      ->check(CLI::IsMember({"gradients", "symplectic", "reversibility",
                             "velocity-bound", "boltzmann", "all"}));
  cmd_check->add_option("--seed", check_seed, "random stream seed (default 0)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    // --help exits 0 through here; every real parse problem is a usage error.
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 1;
  }

  if (cmd_gen->parsed()) return run_gen_data(gen);
  if (cmd_train->parsed()) return run_train(train);
  if (cmd_roll->parsed()) return run_rollout(roll);
  if (cmd_generate->parsed()) return run_generate(gen_samples);
  if (cmd_probe->parsed()) return run_probe(probe);
  if (cmd_check->parsed()) return run_check(check_suite, check_seed);
  return 1;
}
