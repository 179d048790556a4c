#ifndef CHLU_H
#define CHLU_H

/* C interface to the causal Hamiltonian learning core.
 *
 * Every fallible function returns chlu_status. On failure the returned code
 * classifies the problem and chlu_last_error() holds a message for the
 * calling thread until the next failing call on that thread. Out-parameters
 * are written only on CHLU_OK. Handles are opaque; release each with its
 * matching _free function. NULL is always a safe argument to _free.
 */

#include <stddef.h>
#include <stdint.h>

#if defined(__cplusplus)
extern "C" {
#endif

#define CHLU_API_VERSION 1

typedef enum chlu_status {
  CHLU_OK = 0,
  CHLU_ERR_INVALID_ARGUMENT = 1,
  CHLU_ERR_DIVERGED = 2,
  CHLU_ERR_IO = 3,
  CHLU_ERR_FORMAT = 4,
} chlu_status;

const char* chlu_last_error(void);

typedef struct chlu_model chlu_model;           /* kinetic governor + potential net */
typedef struct chlu_dataset chlu_dataset;       /* trajectory dataset */
typedef struct chlu_images chlu_images;         /* image dataset, pixels in [-1, 1] */
typedef struct chlu_trajectory chlu_trajectory; /* recorded rollout */

/* ------------------------------------------------------------------------- */
/* Model lifecycle                                                           */

/* Fresh model: latent dimension d, hidden layer widths (the scalar output
 * head is implicit), causal speed c > 0, rest mass m0 >= 0, confinement
 * strength alpha >= 0. Hidden weights are seeded; the output head starts
 * flat so the initial potential is identically zero. */
chlu_status chlu_model_create(size_t d, const size_t* hidden, size_t hidden_count,
                              double c, double m0, double alpha, uint64_t seed,
                              chlu_model** out);
void chlu_model_free(chlu_model* m);

size_t chlu_model_dim(const chlu_model* m);

chlu_status chlu_model_save(const chlu_model* m, const char* path);
chlu_status chlu_model_load(const char* path, chlu_model** out);

/* Metadata carried inside the checkpoint. */
chlu_status chlu_model_set_generator(chlu_model* m, const char* generator);
chlu_status chlu_model_set_start_centroid(chlu_model* m, const double* q, size_t d);
/* Fails with CHLU_ERR_INVALID_ARGUMENT when no centroid is stored or cap is
 * smaller than the latent dimension. */
chlu_status chlu_model_start_centroid(const chlu_model* m, double* q, size_t cap,
                                      size_t* d);

/* Energy components at a phase point; q and p hold chlu_model_dim doubles.
 * H = T + V + C with C the confinement term alpha |q|^2. */
chlu_status chlu_model_energy(const chlu_model* m, const double* q, const double* p,
                              double* H, double* T, double* V, double* C);

/* ------------------------------------------------------------------------- */
/* Training                                                                  */

typedef struct chlu_train_config {
  double eta;                /* learning rate */
  double lambda;             /* stability penalty weight */
  double beta_mse;           /* wake reconstruction weight */
  double beta_cd;            /* sleep contrastive weight */
  double epsilon;            /* integrator step during training */
  uint64_t wake_steps;       /* rollout length matched against targets */
  uint64_t sleep_steps;      /* free-running steps per sleep sample */
  size_t buffer_capacity;    /* replay buffer size */
  double buffer_reinit_prob; /* chance a sleep chain restarts fresh */
  uint64_t epochs;
  size_t batch_size;
  uint64_t seed;
  double grad_clip;          /* global norm ceiling, 0 disables */
  double lyap_delta;         /* twin-rollout displacement */
  double sigma_init;         /* start jitter for static targets */
} chlu_train_config;

void chlu_train_config_default(chlu_train_config* out);

/* Model architecture knobs that ride alongside a training configuration. */
typedef struct chlu_model_params {
  size_t hidden[8]; /* hidden layer widths; the scalar head is implicit */
  size_t hidden_count;
  double c;
  double m0;
  double alpha;
  uint64_t seed; /* potential initialization stream */
} chlu_model_params;

/* Built-in defaults for an experiment kind: "lemniscate", "sine", or
 * "images". A train epsilon of 0 means "use the dataset spacing". Either
 * out-pointer may be NULL. */
chlu_status chlu_experiment_defaults(const char* kind, chlu_train_config* train,
                                     chlu_model_params* model);

/* Overlays "train.*" and "model.*" keys from a key-value config file onto
 * the given structs (either may be NULL to ignore that half). Unknown keys
 * are rejected. */
chlu_status chlu_config_load(const char* path, chlu_train_config* train,
                             chlu_model_params* model);

/* Training configuration stored in the model's checkpoint metadata. */
chlu_status chlu_model_train_config(const chlu_model* m, chlu_train_config* out);

/* Re-runs the structural invariants on a model: governor and dimension
 * validity plus finiteness of every parameter. */
chlu_status chlu_model_verify(const chlu_model* m);

typedef struct chlu_step_metrics {
  uint64_t step;
  double wake_mse;
  double lyapunov;
  double lyap_penalty;
  double wake_loss;
  double mean_wake_H;
  double mean_sleep_H;
  double contrastive_gap;
  double grad_norm; /* pre-clip */
  int clipped;
  int diverged;
  uint64_t divergence_step;
  const char* divergence_what; /* valid only during the callback */
} chlu_step_metrics;

typedef void (*chlu_step_cb)(const chlu_step_metrics* metrics, void* user);

/* Wake-sleep training against trajectory windows. Runs
 * epochs * ceil(items / batch_size) steps; a diverged batch is skipped and
 * counted, not fatal. On success the model carries the config, seed, and
 * epoch count into its next checkpoint. */
chlu_status chlu_train_trajectories(chlu_model* m, const chlu_dataset* data,
                                    const chlu_train_config* cfg, chlu_step_cb on_step,
                                    void* user, uint64_t* diverged_batches);

/* Same driver with images as static targets: each batch item pins a training
 * image as a constant trajectory, starting from a jittered copy. The image
 * dimension width * height must equal the model dimension. */
chlu_status chlu_train_images(chlu_model* m, const chlu_images* data,
                              const chlu_train_config* cfg, chlu_step_cb on_step,
                              void* user, uint64_t* diverged_batches);

/* ------------------------------------------------------------------------- */
/* Trajectory datasets                                                       */

chlu_status chlu_dataset_lemniscate(double cycles, uint64_t samples_per_cycle,
                                    double epsilon, chlu_dataset** out);
chlu_status chlu_dataset_sine(size_t count, size_t length, double omega_lo,
                              double omega_hi, uint64_t seed, double epsilon,
                              chlu_dataset** out);
chlu_status chlu_dataset_save_csv(const chlu_dataset* ds, const char* path);
chlu_status chlu_dataset_load_csv(const char* path, chlu_dataset** out);

size_t chlu_dataset_count(const chlu_dataset* ds);
size_t chlu_dataset_dim(const chlu_dataset* ds);
double chlu_dataset_epsilon(const chlu_dataset* ds);
size_t chlu_dataset_length(const chlu_dataset* ds, size_t item);
/* q and p hold chlu_dataset_dim doubles. */
chlu_status chlu_dataset_state(const chlu_dataset* ds, size_t item, size_t step,
                               double* q, double* p);
void chlu_dataset_free(chlu_dataset* ds);

/* ------------------------------------------------------------------------- */
/* Image datasets                                                            */

chlu_status chlu_images_synthetic(size_t count, int width, int height, uint64_t seed,
                                  chlu_images** out);
/* 2x2 mean pooling; both sides must be even. */
chlu_status chlu_images_pool2(const chlu_images* ds, chlu_images** out);
chlu_status chlu_images_save_idx(const chlu_images* ds, const char* path);
chlu_status chlu_images_load_idx(const char* path, chlu_images** out);

size_t chlu_images_count(const chlu_images* ds);
int chlu_images_width(const chlu_images* ds);
int chlu_images_height(const chlu_images* ds);
/* out holds width * height doubles. */
chlu_status chlu_images_pixels(const chlu_images* ds, size_t index, double* out);
/* Pixel-wise mean of the whole set plus sigma-scaled Gaussian noise. */
chlu_status chlu_images_centroid(const chlu_images* ds, double sigma, uint64_t seed,
                                 double* out);
void chlu_images_free(chlu_images* ds);

/* ------------------------------------------------------------------------- */
/* Rollouts                                                                  */

/* Deterministic leapfrog chain from (q, p), recording every record_every
 * steps plus the endpoints. gamma in [0, 1] applies per-step momentum
 * friction. Divergence past the energy guard returns CHLU_ERR_DIVERGED. */
chlu_status chlu_rollout(const chlu_model* m, const double* q, const double* p,
                         uint64_t steps, double epsilon, double gamma,
                         uint64_t record_every, chlu_trajectory** out);

/* Thermal chain under annealed temperature and friction schedules. Schedule
 * strings: "constant:V", "linear:A:B", "geometric:A:B", or a bare number;
 * A-to-B schedules span the full step count. */
chlu_status chlu_langevin(const chlu_model* m, const double* q, const double* p,
                          uint64_t steps, double epsilon, const char* temp_schedule,
                          const char* gamma_schedule, uint64_t seed,
                          uint64_t record_every, chlu_trajectory** out);

size_t chlu_trajectory_size(const chlu_trajectory* t);
size_t chlu_trajectory_dim(const chlu_trajectory* t);
chlu_status chlu_trajectory_state(const chlu_trajectory* t, size_t index, double* q,
                                  double* p);
chlu_status chlu_trajectory_record(const chlu_trajectory* t, size_t index,
                                   uint64_t* step, double* time, double* H, double* T,
                                   double* V, double* C);
chlu_status chlu_trajectory_save_csv(const chlu_trajectory* t, const char* path);
void chlu_trajectory_free(chlu_trajectory* t);

/* Reads one recorded state back from a trajectory CSV file. cap bounds the
 * q and p buffers; *d receives the latent dimension found in the header. */
chlu_status chlu_state_from_csv(const char* path, size_t row, double* q, double* p,
                                size_t cap, size_t* d);

/* ------------------------------------------------------------------------- */
/* Inspection and verification                                               */

/* Writes "x,y,V,fx,fy" samples of the learned potential over the square
 * [lo, hi]^2 at the given resolution. The model must be 2-dimensional. */
chlu_status chlu_probe(const chlu_model* m, double lo, double hi, size_t resolution,
                       const char* path);

/* Tiles count images of width x height (count * width * height doubles,
 * row-major per image) into a PGM grid with cols images per row. tanh_map
 * nonzero squashes values through tanh before the byte mapping; zero clamps
 * to [-1, 1]. */
chlu_status chlu_pgm_save(const double* data, size_t count, int width, int height,
                          int cols, int tanh_map, const char* path);

typedef void (*chlu_line_cb)(const char* line, void* user);

/* Runs a verification suite: "gradients", "symplectic", "reversibility",
 * "velocity-bound", "boltzmann", or "all". Emits one summary line per check
 * through on_line and sets *all_ok. Failing checks leave the status CHLU_OK;
 * only an unknown suite name is an error. */
chlu_status chlu_check_run(const char* suite, uint64_t seed, chlu_line_cb on_line,
                           void* user, int* all_ok);

/* n standard normal draws from the deterministic stream (seed, label). */
chlu_status chlu_rng_normal(uint64_t seed, const char* label, size_t n, double* out);

#if defined(__cplusplus)
} /* extern "C" */
#endif

#endif /* CHLU_H */
