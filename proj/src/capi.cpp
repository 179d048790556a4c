#include "chlu/chlu.h"

#include <cmath>
#include <cstring>
#include <string>
#include <utility>
#include <vector>

#include "chlu/checks.hpp"
#include "chlu/data.hpp"
#include "chlu/integrate.hpp"
#include "chlu/io.hpp"
#include "chlu/model.hpp"
#include "chlu/presets.hpp"
#include "chlu/text.hpp"
#include "chlu/train.hpp"

// ---------------------------------------------------------------------------
// Handles

struct chlu_model {
  chlu::Model model;
  chlu::CheckpointMeta meta;
};

struct chlu_dataset {
  chlu::TrajectoryDataset ds;
};

struct chlu_images {
  chlu::ImageDataset ds;
};

struct chlu_trajectory {
  chlu::Trajectory traj;
};

// ---------------------------------------------------------------------------
// Error plumbing

namespace {

thread_local std::string g_last_error;

template <typename Fn>
chlu_status guarded(Fn&& fn) {
  try {
    fn();
    return CHLU_OK;
  } catch (const chlu::DivergenceError& e) {
    g_last_error = e.what();
    return CHLU_ERR_DIVERGED;
  } catch (const chlu::InvalidArgument& e) {
    g_last_error = e.what();
    return CHLU_ERR_INVALID_ARGUMENT;
  } catch (const chlu::IoError& e) {
    g_last_error = e.what();
    return CHLU_ERR_IO;
  } catch (const chlu::FormatError& e) {
    g_last_error = e.what();
    return CHLU_ERR_FORMAT;
  } catch (const std::exception& e) {
    g_last_error = e.what();
    return CHLU_ERR_INVALID_ARGUMENT;
  }
}

void require(bool ok, const char* what) {
  if (!ok) throw chlu::InvalidArgument(what);
}

chlu::PhaseState pack_state(const double* q, const double* p, std::size_t d) {
  require(q != nullptr && p != nullptr, "null state buffer");
  require(d >= 1, "state dimension must be >= 1");
  chlu::PhaseState z = chlu::PhaseState::zero(static_cast<Eigen::Index>(d));
  std::memcpy(z.q.data(), q, d * sizeof(double));
  std::memcpy(z.p.data(), p, d * sizeof(double));
  return z;
}

chlu::TrainConfig unpack_config(const chlu_train_config* cfg) {
  require(cfg != nullptr, "null train config");
  chlu::TrainConfig out;
  out.eta = cfg->eta;
  out.lambda = cfg->lambda;
  out.beta_mse = cfg->beta_mse;
  out.beta_cd = cfg->beta_cd;
  out.epsilon = cfg->epsilon;
  out.wake_steps = cfg->wake_steps;
  out.sleep_steps = cfg->sleep_steps;
  out.buffer_capacity = cfg->buffer_capacity;
  out.buffer_reinit_prob = cfg->buffer_reinit_prob;
  out.epochs = cfg->epochs;
  out.batch_size = cfg->batch_size;
  out.seed = cfg->seed;
  out.grad_clip = cfg->grad_clip;
  out.lyap_delta = cfg->lyap_delta;
  out.sigma_init = cfg->sigma_init;
  return out;
}

void pack_train(const chlu::TrainConfig& d, chlu_train_config* out) {
  out->eta = d.eta;
  out->lambda = d.lambda;
  out->beta_mse = d.beta_mse;
  out->beta_cd = d.beta_cd;
  out->epsilon = d.epsilon;
  out->wake_steps = d.wake_steps;
  out->sleep_steps = d.sleep_steps;
  out->buffer_capacity = d.buffer_capacity;
  out->buffer_reinit_prob = d.buffer_reinit_prob;
  out->epochs = d.epochs;
  out->batch_size = d.batch_size;
  out->seed = d.seed;
  out->grad_clip = d.grad_clip;
  out->lyap_delta = d.lyap_delta;
  out->sigma_init = d.sigma_init;
}

void pack_model_params(const chlu::ExperimentPreset& p, chlu_model_params* out) {
  require(p.hidden.size() <= 8, "at most 8 hidden layers");
  out->hidden_count = p.hidden.size();
  for (std::size_t i = 0; i < p.hidden.size(); ++i)
    out->hidden[i] = static_cast<size_t>(p.hidden[i]);
  out->c = p.c;
  out->m0 = p.m0;
  out->alpha = p.alpha;
  out->seed = p.model_seed;
}

chlu::ExperimentPreset to_preset(const chlu_train_config* train,
                                 const chlu_model_params* model) {
  chlu::ExperimentPreset p;
  if (train != nullptr) p.train = unpack_config(train);
  if (model != nullptr) {
    require(model->hidden_count <= 8, "at most 8 hidden layers");
    p.hidden.clear();
    for (std::size_t i = 0; i < model->hidden_count; ++i)
      p.hidden.push_back(static_cast<int>(model->hidden[i]));
    p.c = model->c;
    p.m0 = model->m0;
    p.alpha = model->alpha;
    p.model_seed = model->seed;
  }
  return p;
}

// Shared tail of both training entry points: run the driver, then stamp the
// checkpoint metadata so a subsequent save reflects this run.
void run_training(chlu_model* m, const chlu::TrainConfig& cfg, std::size_t items,
                  const chlu::BatchSource& source, chlu_step_cb on_step, void* user,
                  uint64_t* diverged_batches) {
  cfg.require_valid();
  require(items >= 1, "training needs at least one item");
  const std::uint64_t steps_per_epoch =
      (items + cfg.batch_size - 1) / cfg.batch_size;
  const std::uint64_t total_steps = cfg.epochs * steps_per_epoch;

  chlu::ReplayBuffer buf(cfg.buffer_capacity, cfg.seed);
  chlu::StepCallback cb;
  if (on_step != nullptr) {
    cb = [on_step, user](const chlu::StepMetrics& s) {
      chlu_step_metrics out;
      out.step = s.step;
      out.wake_mse = s.wake_mse;
      out.lyapunov = s.lyapunov;
      out.lyap_penalty = s.lyap_penalty;
      out.wake_loss = s.wake_loss;
      out.mean_wake_H = s.mean_wake_H;
      out.mean_sleep_H = s.mean_sleep_H;
      out.contrastive_gap = s.contrastive_gap;
      out.grad_norm = s.grad_norm;
      out.clipped = s.clipped ? 1 : 0;
      out.diverged = s.diverged ? 1 : 0;
      out.divergence_step = s.divergence_step;
      out.divergence_what = s.divergence_what.c_str();
      on_step(&out, user);
    };
  }

  const chlu::TrainMetrics metrics =
      chlu::train(m->model, buf, cfg, total_steps, source, cb);
  if (diverged_batches != nullptr) *diverged_batches = metrics.diverged_batches;

  m->meta.config = cfg;
  m->meta.seed = cfg.seed;
  m->meta.epoch += cfg.epochs;
}

chlu::AnnealSchedule parse_schedule(const char* text, std::uint64_t total_steps) {
  require(text != nullptr, "null schedule string");
  const std::string s(text);
  const auto fail = [&] {
    throw chlu::InvalidArgument("bad schedule '" + s +
                                "' (want constant:V, linear:A:B, geometric:A:B)");
  };
  std::vector<std::string> parts;
  std::size_t from = 0;
  for (std::size_t at = s.find(':'); at != std::string::npos;
       from = at + 1, at = s.find(':', from))
    parts.push_back(s.substr(from, at - from));
  parts.push_back(s.substr(from));
  if (parts.size() == 1) {
    double v = 0.0;
    try {
      v = chlu::parse_double(parts[0]);
    } catch (const chlu::FormatError&) {
      fail();
    }
    return chlu::AnnealSchedule::constant(v);
  }
  try {
    if (parts.size() == 2 && parts[0] == "constant")
      return chlu::AnnealSchedule::constant(chlu::parse_double(parts[1]));
    if (parts.size() == 3 && parts[0] == "linear")
      return chlu::AnnealSchedule::linear(chlu::parse_double(parts[1]),
                                          chlu::parse_double(parts[2]), total_steps);
    if (parts.size() == 3 && parts[0] == "geometric")
      return chlu::AnnealSchedule::geometric(chlu::parse_double(parts[1]),
                                             chlu::parse_double(parts[2]), total_steps);
  } catch (const chlu::FormatError&) {
    fail();
  }
  fail();
  return chlu::AnnealSchedule::constant(0.0); // unreachable
}

} // namespace

// ---------------------------------------------------------------------------
// Errors

const char* chlu_last_error(void) { return g_last_error.c_str(); }

// ---------------------------------------------------------------------------
// Model

chlu_status chlu_model_create(size_t d, const size_t* hidden, size_t hidden_count,
                              double c, double m0, double alpha, uint64_t seed,
                              chlu_model** out) {
  return guarded([&] {
    require(out != nullptr, "null output handle");
    require(hidden != nullptr || hidden_count == 0, "null hidden layer list");
    std::vector<int> dims;
    dims.push_back(static_cast<int>(d));
    for (size_t i = 0; i < hidden_count; ++i) {
      require(hidden[i] >= 1, "hidden layer width must be >= 1");
      dims.push_back(static_cast<int>(hidden[i]));
    }
    dims.push_back(1);
    *out = new chlu_model{chlu::make_net_model(dims, c, m0, alpha, seed), {}};
  });
}

void chlu_model_free(chlu_model* m) { delete m; }

size_t chlu_model_dim(const chlu_model* m) {
  return m == nullptr ? 0 : static_cast<size_t>(m->model.dim());
}

chlu_status chlu_model_save(const chlu_model* m, const char* path) {
  return guarded([&] {
    require(m != nullptr && path != nullptr, "null argument");
    chlu::save_checkpoint(m->model, m->meta, path);
  });
}

chlu_status chlu_model_load(const char* path, chlu_model** out) {
  return guarded([&] {
    require(path != nullptr && out != nullptr, "null argument");
    chlu::LoadedCheckpoint lc = chlu::load_checkpoint(path);
    *out = new chlu_model{std::move(lc.model), std::move(lc.meta)};
  });
}

chlu_status chlu_model_set_generator(chlu_model* m, const char* generator) {
  return guarded([&] {
    require(m != nullptr && generator != nullptr, "null argument");
    m->meta.generator = generator;
  });
}

chlu_status chlu_model_set_start_centroid(chlu_model* m, const double* q, size_t d) {
  return guarded([&] {
    require(m != nullptr && q != nullptr, "null argument");
    require(d == static_cast<size_t>(m->model.dim()),
            "centroid dimension does not match the model");
    m->meta.start_centroid = Eigen::Map<const chlu::Vec>(q, static_cast<Eigen::Index>(d));
  });
}

chlu_status chlu_model_start_centroid(const chlu_model* m, double* q, size_t cap,
                                      size_t* d) {
  return guarded([&] {
    require(m != nullptr && q != nullptr && d != nullptr, "null argument");
    const chlu::Vec& c = m->meta.start_centroid;
    require(c.size() > 0, "model has no stored start centroid");
    require(cap >= static_cast<size_t>(c.size()), "centroid buffer too small");
    std::memcpy(q, c.data(), static_cast<size_t>(c.size()) * sizeof(double));
    *d = static_cast<size_t>(c.size());
  });
}

chlu_status chlu_model_energy(const chlu_model* m, const double* q, const double* p,
                              double* H, double* T, double* V, double* C) {
  return guarded([&] {
    require(m != nullptr, "null model");
    const chlu::PhaseState z =
        pack_state(q, p, static_cast<size_t>(m->model.dim()));
    const chlu::EnergyBreakdown e = m->model.energy(z);
    if (H != nullptr) *H = e.H;
    if (T != nullptr) *T = e.T;
    if (V != nullptr) *V = e.V;
    if (C != nullptr) *C = e.C;
  });
}

// ---------------------------------------------------------------------------
// Training

void chlu_train_config_default(chlu_train_config* out) {
  if (out == nullptr) return;
  pack_train(chlu::TrainConfig{}, out);
}

chlu_status chlu_experiment_defaults(const char* kind, chlu_train_config* train,
                                     chlu_model_params* model) {
  return guarded([&] {
    require(kind != nullptr, "null experiment kind");
    const chlu::ExperimentPreset p = chlu::experiment_preset(kind);
    if (train != nullptr) pack_train(p.train, train);
    if (model != nullptr) pack_model_params(p, model);
  });
}

chlu_status chlu_config_load(const char* path, chlu_train_config* train,
                             chlu_model_params* model) {
  return guarded([&] {
    require(path != nullptr, "null config path");
    chlu::ExperimentPreset p = to_preset(train, model);
    chlu::overlay_config_file(path, p);
    if (train != nullptr) pack_train(p.train, train);
    if (model != nullptr) pack_model_params(p, model);
  });
}

chlu_status chlu_model_train_config(const chlu_model* m, chlu_train_config* out) {
  return guarded([&] {
    require(m != nullptr && out != nullptr, "null argument");
    pack_train(m->meta.config, out);
  });
}

chlu_status chlu_model_verify(const chlu_model* m) {
  return guarded([&] {
    require(m != nullptr, "null model");
    m->model.require_valid();
    const chlu::PotentialNet* net = m->model.net();
    if (net != nullptr)
      require(net->all_finite(), "model parameters are not finite");
  });
}

chlu_status chlu_train_trajectories(chlu_model* m, const chlu_dataset* data,
                                    const chlu_train_config* cfg, chlu_step_cb on_step,
                                    void* user, uint64_t* diverged_batches) {
  return guarded([&] {
    require(m != nullptr && data != nullptr, "null argument");
    const chlu::TrainConfig tc = unpack_config(cfg);
    require(data->ds.dim() == m->model.dim(),
            "dataset dimension does not match the model");
    chlu::Rng rng = chlu::Rng::stream(tc.seed, "batch-sampler");
    const chlu::TrajectoryDataset& ds = data->ds;
    const chlu::BatchSource source = [&ds, &tc, rng](std::uint64_t) mutable {
      return chlu::sample_windows(ds, tc.batch_size, tc.wake_steps, rng);
    };
    run_training(m, tc, ds.items.size(), source, on_step, user, diverged_batches);
  });
}

chlu_status chlu_train_images(chlu_model* m, const chlu_images* data,
                              const chlu_train_config* cfg, chlu_step_cb on_step,
                              void* user, uint64_t* diverged_batches) {
  return guarded([&] {
    require(m != nullptr && data != nullptr, "null argument");
    const chlu::TrainConfig tc = unpack_config(cfg);
    const chlu::ImageDataset& ds = data->ds;
    require(static_cast<Eigen::Index>(ds.width) * ds.height == m->model.dim(),
            "image dimension does not match the model");
    chlu::Rng rng = chlu::Rng::stream(tc.seed, "batch-sampler");
    const chlu::BatchSource source = [&ds, &tc, rng](std::uint64_t) mutable {
      return chlu::sample_static_batch(ds, tc.batch_size, tc.wake_steps,
                                       tc.sigma_init, rng);
    };
    run_training(m, tc, ds.count(), source, on_step, user, diverged_batches);
  });
}

// ---------------------------------------------------------------------------
// Trajectory datasets

chlu_status chlu_dataset_lemniscate(double cycles, uint64_t samples_per_cycle,
                                    double epsilon, chlu_dataset** out) {
  return guarded([&] {
    require(out != nullptr, "null output handle");
    *out = new chlu_dataset{chlu::lemniscate_dataset(cycles, samples_per_cycle, epsilon)};
  });
}

chlu_status chlu_dataset_sine(size_t count, size_t length, double omega_lo,
                              double omega_hi, uint64_t seed, double epsilon,
                              chlu_dataset** out) {
  return guarded([&] {
    require(out != nullptr, "null output handle");
    *out = new chlu_dataset{
        chlu::sine_dataset(count, length, omega_lo, omega_hi, seed, epsilon)};
  });
}

chlu_status chlu_dataset_save_csv(const chlu_dataset* ds, const char* path) {
  return guarded([&] {
    require(ds != nullptr && path != nullptr, "null argument");
    chlu::write_dataset_csv(ds->ds, path);
  });
}

chlu_status chlu_dataset_load_csv(const char* path, chlu_dataset** out) {
  return guarded([&] {
    require(path != nullptr && out != nullptr, "null argument");
    *out = new chlu_dataset{chlu::load_dataset_csv(path)};
  });
}

size_t chlu_dataset_count(const chlu_dataset* ds) {
  return ds == nullptr ? 0 : ds->ds.items.size();
}

size_t chlu_dataset_dim(const chlu_dataset* ds) {
  return ds == nullptr ? 0 : static_cast<size_t>(ds->ds.dim());
}

double chlu_dataset_epsilon(const chlu_dataset* ds) {
  return ds == nullptr ? 0.0 : ds->ds.epsilon;
}

size_t chlu_dataset_length(const chlu_dataset* ds, size_t item) {
  if (ds == nullptr || item >= ds->ds.items.size()) return 0;
  return ds->ds.items[item].target.states.size();
}

chlu_status chlu_dataset_state(const chlu_dataset* ds, size_t item, size_t step,
                               double* q, double* p) {
  return guarded([&] {
    require(ds != nullptr && q != nullptr && p != nullptr, "null argument");
    require(item < ds->ds.items.size(), "dataset item out of range");
    const auto& states = ds->ds.items[item].target.states;
    require(step < states.size(), "dataset step out of range");
    const chlu::PhaseState& z = states[step];
    std::memcpy(q, z.q.data(), static_cast<size_t>(z.q.size()) * sizeof(double));
    std::memcpy(p, z.p.data(), static_cast<size_t>(z.p.size()) * sizeof(double));
  });
}

void chlu_dataset_free(chlu_dataset* ds) { delete ds; }

// ---------------------------------------------------------------------------
// Image datasets

chlu_status chlu_images_synthetic(size_t count, int width, int height, uint64_t seed,
                                  chlu_images** out) {
  return guarded([&] {
    require(out != nullptr, "null output handle");
    *out = new chlu_images{chlu::synthetic_digits(count, width, height, seed)};
  });
}

chlu_status chlu_images_pool2(const chlu_images* ds, chlu_images** out) {
  return guarded([&] {
    require(ds != nullptr && out != nullptr, "null argument");
    *out = new chlu_images{chlu::mean_pool2(ds->ds)};
  });
}

chlu_status chlu_images_save_idx(const chlu_images* ds, const char* path) {
  return guarded([&] {
    require(ds != nullptr && path != nullptr, "null argument");
    chlu::save_idx(ds->ds, path);
  });
}

chlu_status chlu_images_load_idx(const char* path, chlu_images** out) {
  return guarded([&] {
    require(path != nullptr && out != nullptr, "null argument");
    *out = new chlu_images{chlu::load_idx(path)};
  });
}

size_t chlu_images_count(const chlu_images* ds) {
  return ds == nullptr ? 0 : ds->ds.count();
}

int chlu_images_width(const chlu_images* ds) {
  return ds == nullptr ? 0 : ds->ds.width;
}

int chlu_images_height(const chlu_images* ds) {
  return ds == nullptr ? 0 : ds->ds.height;
}

chlu_status chlu_images_pixels(const chlu_images* ds, size_t index, double* out) {
  return guarded([&] {
    require(ds != nullptr && out != nullptr, "null argument");
    require(index < ds->ds.count(), "image index out of range");
    const chlu::Vec& img = ds->ds.images[index];
    std::memcpy(out, img.data(), static_cast<size_t>(img.size()) * sizeof(double));
  });
}

chlu_status chlu_images_centroid(const chlu_images* ds, double sigma, uint64_t seed,
                                 double* out) {
  return guarded([&] {
    require(ds != nullptr && out != nullptr, "null argument");
    const chlu::Vec c = chlu::centroid_with_noise(ds->ds, sigma, seed);
    std::memcpy(out, c.data(), static_cast<size_t>(c.size()) * sizeof(double));
  });
}

void chlu_images_free(chlu_images* ds) { delete ds; }

// ---------------------------------------------------------------------------
// Rollouts

chlu_status chlu_rollout(const chlu_model* m, const double* q, const double* p,
                         uint64_t steps, double epsilon, double gamma,
                         uint64_t record_every, chlu_trajectory** out) {
  return guarded([&] {
    require(m != nullptr && out != nullptr, "null argument");
    const chlu::PhaseState z0 = pack_state(q, p, static_cast<size_t>(m->model.dim()));
    chlu::IntegratorConfig cfg;
    cfg.epsilon = epsilon;
    cfg.gamma = gamma;
    cfg.steps = steps;
    cfg.record_every = record_every;
    *out = new chlu_trajectory{chlu::rollout(z0, m->model, cfg)};
  });
}

chlu_status chlu_langevin(const chlu_model* m, const double* q, const double* p,
                          uint64_t steps, double epsilon, const char* temp_schedule,
                          const char* gamma_schedule, uint64_t seed,
                          uint64_t record_every, chlu_trajectory** out) {
  return guarded([&] {
    require(m != nullptr && out != nullptr, "null argument");
    require(steps >= 1, "langevin: steps must be >= 1");
    const chlu::PhaseState z0 = pack_state(q, p, static_cast<size_t>(m->model.dim()));
    chlu::LangevinConfig cfg;
    cfg.seed = seed;
    cfg.temp_schedule = parse_schedule(temp_schedule, steps);
    cfg.gamma_schedule = parse_schedule(gamma_schedule, steps);
    cfg.temperature = cfg.temp_schedule.start_value;
    cfg.gamma = cfg.gamma_schedule.start_value;
    *out = new chlu_trajectory{
        chlu::langevin_rollout(z0, m->model, epsilon, cfg, steps, record_every)};
  });
}

size_t chlu_trajectory_size(const chlu_trajectory* t) {
  return t == nullptr ? 0 : t->traj.size();
}

size_t chlu_trajectory_dim(const chlu_trajectory* t) {
  return t == nullptr ? 0 : static_cast<size_t>(t->traj.dim());
}

chlu_status chlu_trajectory_state(const chlu_trajectory* t, size_t index, double* q,
                                  double* p) {
  return guarded([&] {
    require(t != nullptr && q != nullptr && p != nullptr, "null argument");
    require(index < t->traj.size(), "trajectory index out of range");
    const chlu::PhaseState& z = t->traj.states[index];
    std::memcpy(q, z.q.data(), static_cast<size_t>(z.q.size()) * sizeof(double));
    std::memcpy(p, z.p.data(), static_cast<size_t>(z.p.size()) * sizeof(double));
  });
}

chlu_status chlu_trajectory_record(const chlu_trajectory* t, size_t index,
                                   uint64_t* step, double* time, double* H, double* T,
                                   double* V, double* C) {
  return guarded([&] {
    require(t != nullptr, "null trajectory");
    require(index < t->traj.size(), "trajectory index out of range");
    if (step != nullptr) *step = t->traj.steps[index];
    if (time != nullptr) *time = t->traj.times[index];
    const chlu::EnergyBreakdown& e = t->traj.energies[index];
    if (H != nullptr) *H = e.H;
    if (T != nullptr) *T = e.T;
    if (V != nullptr) *V = e.V;
    if (C != nullptr) *C = e.C;
  });
}

chlu_status chlu_trajectory_save_csv(const chlu_trajectory* t, const char* path) {
  return guarded([&] {
    require(t != nullptr && path != nullptr, "null argument");
    chlu::write_file_atomic(path, chlu::trajectory_csv(t->traj));
  });
}

void chlu_trajectory_free(chlu_trajectory* t) { delete t; }

chlu_status chlu_state_from_csv(const char* path, size_t row, double* q, double* p,
                                size_t cap, size_t* d) {
  return guarded([&] {
    require(path != nullptr && q != nullptr && p != nullptr && d != nullptr,
            "null argument");
    const chlu::PhaseState z = chlu::state_from_csv(chlu::read_text_file(path), row);
    require(cap >= static_cast<size_t>(z.dim()), "state buffer too small");
    std::memcpy(q, z.q.data(), static_cast<size_t>(z.q.size()) * sizeof(double));
    std::memcpy(p, z.p.data(), static_cast<size_t>(z.p.size()) * sizeof(double));
    *d = static_cast<size_t>(z.dim());
  });
}

// ---------------------------------------------------------------------------
// Inspection and verification

chlu_status chlu_probe(const chlu_model* m, double lo, double hi, size_t resolution,
                       const char* path) {
  return guarded([&] {
    require(m != nullptr && path != nullptr, "null argument");
    chlu::write_file_atomic(
        path, chlu::probe_csv(chlu::probe_potential(m->model, lo, hi, resolution)));
  });
}

chlu_status chlu_pgm_save(const double* data, size_t count, int width, int height,
                          int cols, int tanh_map, const char* path) {
  return guarded([&] {
    require(data != nullptr && path != nullptr, "null argument");
    require(width >= 1 && height >= 1, "pgm: width, height, and cols must be >= 1");
    const size_t pixels = static_cast<size_t>(width) * static_cast<size_t>(height);
    std::vector<chlu::Vec> images;
    images.reserve(count);
    for (size_t i = 0; i < count; ++i)
      images.push_back(Eigen::Map<const chlu::Vec>(data + i * pixels,
                                                   static_cast<Eigen::Index>(pixels)));
    chlu::write_pgm_grid(images, width, height, cols, path, tanh_map != 0);
  });
}

chlu_status chlu_check_run(const char* suite, uint64_t seed, chlu_line_cb on_line,
                           void* user, int* all_ok) {
  return guarded([&] {
    require(suite != nullptr, "null suite name");
    const std::vector<chlu::CheckResult> results = chlu::run_checks(suite, seed);
    if (on_line != nullptr)
      for (const chlu::CheckResult& r : results)
        on_line(chlu::check_summary_line(r).c_str(), user);
    if (all_ok != nullptr) *all_ok = chlu::all_passed(results) ? 1 : 0;
  });
}

chlu_status chlu_rng_normal(uint64_t seed, const char* label, size_t n, double* out) {
  return guarded([&] {
    require(label != nullptr && (out != nullptr || n == 0), "null argument");
    chlu::Rng rng = chlu::Rng::stream(seed, label);
    for (size_t i = 0; i < n; ++i) out[i] = rng.normal();
  });
}
