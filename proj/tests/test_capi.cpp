#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <cstring>
#include <filesystem>
#include <string>
#include <vector>

#include <chlu/chlu.h>

#include <fstream>
#include <unistd.h>

namespace fs = std::filesystem;

namespace {

struct Scratch {
  fs::path dir;
  Scratch() : dir(fs::path("capi_scratch") / std::to_string(::getpid())) {
    fs::create_directories(dir);
  }
  ~Scratch() { fs::remove_all(dir); }
  std::string path(const char* name) const { return (dir / name).string(); }
};

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  REQUIRE(in.good());
  return std::string(std::istreambuf_iterator<char>(in),
                     std::istreambuf_iterator<char>());
}

chlu_model* fresh_model(size_t d, size_t hidden, uint64_t seed) {
  const size_t widths[] = {hidden};
  chlu_model* m = nullptr;
  REQUIRE(chlu_model_create(d, widths, 1, 3.0, 1.0, 0.05, seed, &m) == CHLU_OK);
  REQUIRE(m != nullptr);
  return m;
}

} // namespace

TEST_CASE("models round trip through checkpoints with exact energies") {
  Scratch tmp;
  chlu_model* m = fresh_model(2, 8, 41);
  CHECK(chlu_model_dim(m) == 2);

  const double q[2] = {0.3, -0.4};
  const double p[2] = {0.5, 0.2};
  double H0 = 0, T0 = 0, V0 = 0, C0 = 0;
  REQUIRE(chlu_model_energy(m, q, p, &H0, &T0, &V0, &C0) == CHLU_OK);
  CHECK(H0 == T0 + V0 + C0);
  // Fresh output head: the potential starts flat.
  CHECK(V0 == 0.0);
  CHECK(C0 == doctest::Approx(0.05 * 0.25).epsilon(1e-14));

  // Centroid metadata is absent until set.
  double buf[2];
  size_t d = 0;
  CHECK(chlu_model_start_centroid(m, buf, 2, &d) == CHLU_ERR_INVALID_ARGUMENT);
  const double centroid[2] = {1.5, -2.5};
  REQUIRE(chlu_model_set_start_centroid(m, centroid, 2) == CHLU_OK);
  REQUIRE(chlu_model_set_generator(m, "lemniscate") == CHLU_OK);

  const std::string path = tmp.path("m.ckpt");
  REQUIRE(chlu_model_save(m, path.c_str()) == CHLU_OK);

  chlu_model* back = nullptr;
  REQUIRE(chlu_model_load(path.c_str(), &back) == CHLU_OK);
  double H1 = 0, T1 = 0, V1 = 0, C1 = 0;
  REQUIRE(chlu_model_energy(back, q, p, &H1, &T1, &V1, &C1) == CHLU_OK);
  CHECK(H1 == H0);
  CHECK(T1 == T0);
  REQUIRE(chlu_model_start_centroid(back, buf, 2, &d) == CHLU_OK);
  CHECK(d == 2);
  CHECK(buf[0] == 1.5);
  CHECK(buf[1] == -2.5);

  chlu_model_free(back);
  chlu_model_free(m);
}

TEST_CASE("failures set a status and a thread-local message") {
  chlu_model* m = nullptr;
  CHECK(chlu_model_load("does-not-exist.ckpt", &m) == CHLU_ERR_IO);
  CHECK(std::strlen(chlu_last_error()) > 0);
  CHECK(m == nullptr);

  CHECK(chlu_model_dim(nullptr) == 0);
  CHECK(chlu_trajectory_size(nullptr) == 0);
  CHECK(chlu_model_save(nullptr, "x") == CHLU_ERR_INVALID_ARGUMENT);
  CHECK(std::string(chlu_last_error()) == "null argument");

  int ok = 0;
  CHECK(chlu_check_run("entropy", 0, nullptr, nullptr, &ok) ==
        CHLU_ERR_INVALID_ARGUMENT);
  CHECK(std::string(chlu_last_error()) == "unknown check suite 'entropy'");
}

TEST_CASE("trajectory datasets cross the boundary intact") {
  Scratch tmp;
  chlu_dataset* ds = nullptr;
  REQUIRE(chlu_dataset_lemniscate(1.0, 32, 0.05, &ds) == CHLU_OK);
  CHECK(chlu_dataset_count(ds) == 1);
  CHECK(chlu_dataset_dim(ds) == 2);
  CHECK(chlu_dataset_epsilon(ds) == 0.05);
  CHECK(chlu_dataset_length(ds, 0) == 33);

  double q[2], p[2];
  REQUIRE(chlu_dataset_state(ds, 0, 0, q, p) == CHLU_OK);
  CHECK(q[0] == 1.0);
  CHECK(q[1] == 0.0);
  CHECK(p[0] == 0.0);
  CHECK(p[1] == 1.0);
  CHECK(chlu_dataset_state(ds, 0, 33, q, p) == CHLU_ERR_INVALID_ARGUMENT);

  const std::string path = tmp.path("lem.csv");
  REQUIRE(chlu_dataset_save_csv(ds, path.c_str()) == CHLU_OK);
  chlu_dataset* back = nullptr;
  REQUIRE(chlu_dataset_load_csv(path.c_str(), &back) == CHLU_OK);
  double q2[2], p2[2];
  REQUIRE(chlu_dataset_state(back, 0, 17, q, p) == CHLU_OK);
  std::memcpy(q2, q, sizeof q2);
  std::memcpy(p2, p, sizeof p2);
  REQUIRE(chlu_dataset_state(ds, 0, 17, q, p) == CHLU_OK);
  CHECK(q2[0] == q[0]);
  CHECK(p2[1] == p[1]);

  chlu_dataset_free(back);
  chlu_dataset_free(ds);
}

TEST_CASE("training runs to completion and moves the parameters") {
  Scratch tmp;
  chlu_dataset* ds = nullptr;
  REQUIRE(chlu_dataset_sine(6, 24, 0.8, 2.0, 7, 0.05, &ds) == CHLU_OK);

  chlu_model* m = fresh_model(1, 8, 42);
  const std::string before = tmp.path("before.ckpt");
  REQUIRE(chlu_model_save(m, before.c_str()) == CHLU_OK);

  chlu_train_config cfg;
  chlu_train_config_default(&cfg);
  CHECK(cfg.eta == 0.01);
  CHECK(cfg.wake_steps == 16);
  cfg.epochs = 2;
  cfg.batch_size = 4;
  cfg.wake_steps = 8;
  cfg.sleep_steps = 8;
  cfg.seed = 5;

  std::vector<uint64_t> seen;
  const chlu_step_cb cb = [](const chlu_step_metrics* s, void* user) {
    auto* v = static_cast<std::vector<uint64_t>*>(user);
    v->push_back(s->step);
    CHECK(s->diverged == 0);
    CHECK(s->wake_mse >= 0.0);
    CHECK(std::isfinite(s->grad_norm));
  };
  uint64_t diverged = 99;
  REQUIRE(chlu_train_trajectories(m, ds, &cfg, cb, &seen, &diverged) == CHLU_OK);
  CHECK(diverged == 0);
  // 2 epochs of ceil(6 / 4) = 2 steps each.
  CHECK(seen == std::vector<uint64_t>{0, 1, 2, 3});

  const std::string after = tmp.path("after.ckpt");
  REQUIRE(chlu_model_save(m, after.c_str()) == CHLU_OK);
  CHECK(slurp(before) != slurp(after));

  // The run's config rides along in the checkpoint.
  chlu_model* back = nullptr;
  REQUIRE(chlu_model_load(after.c_str(), &back) == CHLU_OK);
  const std::string text = slurp(after);
  CHECK(text.find("train.epsilon = 0.050000000000000003") != std::string::npos);
  CHECK(text.find("train.epoch = 2") != std::string::npos);
  CHECK(text.find("train.generator = none") != std::string::npos);
  chlu_model_free(back);

  // Dimension mismatch is refused before any work happens.
  chlu_model* wide = fresh_model(3, 4, 1);
  CHECK(chlu_train_trajectories(wide, ds, &cfg, nullptr, nullptr, nullptr) ==
        CHLU_ERR_INVALID_ARGUMENT);
  chlu_model_free(wide);

  chlu_model_free(m);
  chlu_dataset_free(ds);
}

TEST_CASE("rollouts record states and energies behind the boundary") {
  Scratch tmp;
  chlu_model* m = fresh_model(2, 6, 43);
  const double q[2] = {1.0, 0.0};
  const double p[2] = {0.0, 0.3};

  chlu_trajectory* traj = nullptr;
  REQUIRE(chlu_rollout(m, q, p, 10, 0.01, 0.0, 1, &traj) == CHLU_OK);
  CHECK(chlu_trajectory_size(traj) == 11);
  CHECK(chlu_trajectory_dim(traj) == 2);

  uint64_t step = 0;
  double t = -1, H = 0, T = 0, V = 0, C = 0;
  REQUIRE(chlu_trajectory_record(traj, 10, &step, &t, &H, &T, &V, &C) == CHLU_OK);
  CHECK(step == 10);
  CHECK(t == doctest::Approx(0.1).epsilon(1e-12));
  CHECK(std::isfinite(H));
  CHECK(H == T + V + C);

  const std::string path = tmp.path("traj.csv");
  REQUIRE(chlu_trajectory_save_csv(traj, path.c_str()) == CHLU_OK);

  double q0[2], p0[2];
  size_t d = 0;
  REQUIRE(chlu_state_from_csv(path.c_str(), 0, q0, p0, 2, &d) == CHLU_OK);
  CHECK(d == 2);
  CHECK(q0[0] == 1.0);
  CHECK(p0[1] == 0.3);
  CHECK(chlu_state_from_csv(path.c_str(), 99, q0, p0, 2, &d) == CHLU_ERR_FORMAT);

  chlu_trajectory_free(traj);
  chlu_model_free(m);
}

TEST_CASE("langevin chains honor schedule strings and seeds") {
  chlu_model* m = fresh_model(2, 6, 44);
  const double q[2] = {0.5, 0.5};
  const double p[2] = {0.0, 0.0};

  chlu_trajectory* a = nullptr;
  chlu_trajectory* b = nullptr;
  chlu_trajectory* c = nullptr;
  REQUIRE(chlu_langevin(m, q, p, 200, 0.01, "geometric:1.0:0.01", "linear:0.01:0.2", 9,
                        200, &a) == CHLU_OK);
  REQUIRE(chlu_langevin(m, q, p, 200, 0.01, "geometric:1.0:0.01", "linear:0.01:0.2", 9,
                        200, &b) == CHLU_OK);
  REQUIRE(chlu_langevin(m, q, p, 200, 0.01, "geometric:1.0:0.01", "linear:0.01:0.2", 10,
                        200, &c) == CHLU_OK);

  double qa[2], pa[2], qb[2], pb[2], qc[2], pc[2];
  const size_t last = chlu_trajectory_size(a) - 1;
  REQUIRE(chlu_trajectory_state(a, last, qa, pa) == CHLU_OK);
  REQUIRE(chlu_trajectory_state(b, last, qb, pb) == CHLU_OK);
  REQUIRE(chlu_trajectory_state(c, last, qc, pc) == CHLU_OK);
  CHECK(qa[0] == qb[0]);
  CHECK(pa[1] == pb[1]);
  CHECK(qa[0] != qc[0]);

  // Bare numbers read as constants; junk is rejected.
  chlu_trajectory* d = nullptr;
  REQUIRE(chlu_langevin(m, q, p, 5, 0.01, "0.5", "0.1", 1, 1, &d) == CHLU_OK);
  chlu_trajectory_free(d);
  CHECK(chlu_langevin(m, q, p, 5, 0.01, "warm:1:2", "0.1", 1, 1, &d) ==
        CHLU_ERR_INVALID_ARGUMENT);
  CHECK(std::string(chlu_last_error()).find("bad schedule") == 0);

  chlu_trajectory_free(c);
  chlu_trajectory_free(b);
  chlu_trajectory_free(a);
  chlu_model_free(m);
}

TEST_CASE("image pipelines work end to end") {
  Scratch tmp;
  chlu_images* digits = nullptr;
  REQUIRE(chlu_images_synthetic(6, 8, 8, 3, &digits) == CHLU_OK);
  CHECK(chlu_images_count(digits) == 6);
  CHECK(chlu_images_width(digits) == 8);

  chlu_images* pooled = nullptr;
  REQUIRE(chlu_images_pool2(digits, &pooled) == CHLU_OK);
  CHECK(chlu_images_width(pooled) == 4);
  CHECK(chlu_images_height(pooled) == 4);

  double px[16];
  REQUIRE(chlu_images_pixels(pooled, 0, px) == CHLU_OK);
  for (double v : px) CHECK(std::abs(v) <= 1.0);

  double centroid[16];
  REQUIRE(chlu_images_centroid(pooled, 0.0, 0, centroid) == CHLU_OK);
  double mean0 = 0;
  for (size_t i = 0; i < 6; ++i) {
    REQUIRE(chlu_images_pixels(pooled, i, px) == CHLU_OK);
    mean0 += px[0] / 6.0;
  }
  CHECK(centroid[0] == doctest::Approx(mean0).epsilon(1e-12));

  const std::string idx = tmp.path("digits.idx");
  REQUIRE(chlu_images_save_idx(pooled, idx.c_str()) == CHLU_OK);
  chlu_images* back = nullptr;
  REQUIRE(chlu_images_load_idx(idx.c_str(), &back) == CHLU_OK);
  CHECK(chlu_images_count(back) == 6);
  CHECK(chlu_images_width(back) == 4);

  const std::string pgm = tmp.path("grid.pgm");
  double flat[2 * 16];
  REQUIRE(chlu_images_pixels(pooled, 0, flat) == CHLU_OK);
  REQUIRE(chlu_images_pixels(pooled, 1, flat + 16) == CHLU_OK);
  REQUIRE(chlu_pgm_save(flat, 2, 4, 4, 2, 1, pgm.c_str()) == CHLU_OK);
  CHECK(slurp(pgm).rfind("P5\n8 4\n255\n", 0) == 0);

  chlu_images_free(back);
  chlu_images_free(pooled);
  chlu_images_free(digits);
}

TEST_CASE("verification suites run through the boundary") {
  std::vector<std::string> lines;
  const chlu_line_cb cb = [](const char* line, void* user) {
    static_cast<std::vector<std::string>*>(user)->push_back(line);
  };
  int ok = 0;
  REQUIRE(chlu_check_run("reversibility", 11, cb, &lines, &ok) == CHLU_OK);
  CHECK(ok == 1);
  REQUIRE(!lines.empty());
  CHECK(lines[0].rfind("check suite=reversibility", 0) == 0);
}

TEST_CASE("experiment presets and config files compose") {
  Scratch tmp;
  chlu_train_config cfg;
  chlu_model_params mp;
  REQUIRE(chlu_experiment_defaults("images", &cfg, &mp) == CHLU_OK);
  CHECK(mp.hidden_count == 1);
  CHECK(mp.hidden[0] == 256);
  CHECK(mp.alpha == 0.2);
  CHECK(cfg.wake_steps == 8);
  CHECK(chlu_experiment_defaults("waves", nullptr, nullptr) ==
        CHLU_ERR_INVALID_ARGUMENT);

  REQUIRE(chlu_experiment_defaults("lemniscate", &cfg, &mp) == CHLU_OK);
  CHECK(cfg.epsilon == 0.0);
  CHECK(cfg.epochs == 600);

  const std::string path = tmp.path("override.cfg");
  {
    std::ofstream out(path);
    out << "chlu-kv 1\ntrain.eta = 0.5\nmodel.hidden = 2 10 4\nmodel.c = 7\n";
  }
  REQUIRE(chlu_config_load(path.c_str(), &cfg, &mp) == CHLU_OK);
  CHECK(cfg.eta == 0.5);
  CHECK(cfg.epochs == 600); // untouched keys keep their preset values
  CHECK(mp.hidden_count == 2);
  CHECK(mp.hidden[0] == 10);
  CHECK(mp.hidden[1] == 4);
  CHECK(mp.c == 7.0);

  {
    std::ofstream out(path);
    out << "chlu-kv 1\ntrain.speed = 9\n";
  }
  CHECK(chlu_config_load(path.c_str(), &cfg, nullptr) == CHLU_ERR_INVALID_ARGUMENT);
  CHECK(std::string(chlu_last_error()) == "config: unknown key 'train.speed'");
}

TEST_CASE("stored train configs and verification survive a checkpoint") {
  Scratch tmp;
  chlu_model* m = fresh_model(1, 6, 50);
  REQUIRE(chlu_model_verify(m) == CHLU_OK);

  chlu_dataset* ds = nullptr;
  REQUIRE(chlu_dataset_sine(4, 20, 0.8, 2.0, 7, 0.05, &ds) == CHLU_OK);
  chlu_train_config cfg;
  chlu_train_config_default(&cfg);
  cfg.epochs = 1;
  cfg.batch_size = 4;
  cfg.wake_steps = 6;
  cfg.sleep_steps = 4;
  cfg.sigma_init = 0.7;
  REQUIRE(chlu_train_trajectories(m, ds, &cfg, nullptr, nullptr, nullptr) == CHLU_OK);

  const std::string path = tmp.path("m.ckpt");
  REQUIRE(chlu_model_save(m, path.c_str()) == CHLU_OK);
  chlu_model* back = nullptr;
  REQUIRE(chlu_model_load(path.c_str(), &back) == CHLU_OK);
  chlu_train_config stored;
  REQUIRE(chlu_model_train_config(back, &stored) == CHLU_OK);
  CHECK(stored.wake_steps == 6);
  CHECK(stored.sigma_init == 0.7);
  REQUIRE(chlu_model_verify(back) == CHLU_OK);

  chlu_model_free(back);
  chlu_model_free(m);
  chlu_dataset_free(ds);
}

TEST_CASE("the named normal streams are deterministic") {
  double a[4], b[4], c[4];
  REQUIRE(chlu_rng_normal(2, "generate-init-0", 4, a) == CHLU_OK);
  REQUIRE(chlu_rng_normal(2, "generate-init-0", 4, b) == CHLU_OK);
  REQUIRE(chlu_rng_normal(2, "generate-init-1", 4, c) == CHLU_OK);
  CHECK(std::memcmp(a, b, sizeof a) == 0);
  CHECK(std::memcmp(a, c, sizeof a) != 0);
  REQUIRE(chlu_rng_normal(2, "x", 0, nullptr) == CHLU_OK);
}
