#pragma once

#include <cstdint>
#include <deque>
#include <functional>
#include <string>
#include <vector>

#include "chlu/integrate.hpp"

namespace chlu {

// Persistent pool of hallucination states feeding the sleep phase. FIFO
// eviction at capacity; non-finite states are counted and dropped, never
// stored.
class ReplayBuffer {
public:
  ReplayBuffer(std::size_t capacity, std::uint64_t seed);

  std::size_t size() const { return entries_.size(); }
  std::size_t capacity() const { return capacity_; }
  bool empty() const { return entries_.empty(); }
  std::size_t rejected_count() const { return rejected_; }

  void add(const PhaseState& z);

  // Each draw independently: a fresh state with q, p ~ N(0, I) with
  // probability reinit_prob (always when the buffer is empty), otherwise a
  // uniform pick from the stored entries.
  std::vector<PhaseState> sample(std::size_t n, Eigen::Index d, double reinit_prob);

private:
  std::size_t capacity_;
  std::deque<PhaseState> entries_;
  Rng rng_;
  std::size_t rejected_ = 0;
};

struct TrainConfig {
  double eta = 0.01;         // learning rate
  double lambda = 0.0;       // Lyapunov penalty weight; 0 keeps it diagnostic
  double beta_mse = 1.0;     // weight of the supervised rollout gradient
  double beta_cd = 1.0;      // weight of the contrastive energy gradient
  double epsilon = 0.05;     // integrator step for wake and sleep rollouts
  std::uint64_t wake_steps = 16;
  std::uint64_t sleep_steps = 32;
  std::size_t buffer_capacity = 1024;
  double buffer_reinit_prob = 0.05;
  std::uint64_t epochs = 1;  // used by drivers to size the step count
  std::size_t batch_size = 16;
  std::uint64_t seed = 0;
  double grad_clip = 10.0;   // global-norm ceiling applied before the update
  double lyap_delta = 1e-5;  // twin-rollout perturbation size
  double sigma_init = 0.1;   // q jitter for static-data wake starts

  void require_valid() const;
};

// One train_step's record. All numeric fields stay finite while training is
// healthy; a divergence aborts the batch and is recorded here instead.
struct StepMetrics {
  std::uint64_t step = 0;
  double wake_mse = 0.0;
  double lyapunov = 0.0;        // mean finite-time exponent estimate
  double lyap_penalty = 0.0;    // mean positive part
  double wake_loss = 0.0;       // wake_mse + lambda * lyap_penalty
  double mean_wake_H = 0.0;     // mean H at final wake states
  double mean_sleep_H = 0.0;    // mean H at final hallucination states
  double contrastive_gap = 0.0; // mean_wake_H - mean_sleep_H
  double grad_norm = 0.0;       // pre-clip norm of the combined update
  bool clipped = false;
  bool diverged = false;        // batch aborted, model left untouched
  std::uint64_t divergence_step = 0;
  std::string divergence_what;
};

struct TrainMetrics {
  std::vector<StepMetrics> steps;
  std::size_t diverged_batches = 0;

  const StepMetrics& back() const { return steps.back(); }
  bool all_finite() const;
};

// One wake item: a start state and the target states it is compared against,
// aligned step for step (target.size() == wake_steps + 1). Dynamics data uses
// trajectory windows; static data repeats the same target state.
struct TrainItem {
  PhaseState z0;
  Trajectory target;
};

// ---------------------------------------------------------------------------
// Losses and gradients

// Mean squared error over all (q, p) components of all aligned states, plus
// lambda times the (already positive-part) Lyapunov penalty.
double wake_loss(const Trajectory& traj, const Trajectory& target, double lyap,
                 double lambda);

// Finite-time largest-exponent estimate from a perturbed twin rollout:
// integrates z0 and z0 + delta u (u a seeded random unit direction in phase
// space) for cfg.steps and returns ln(|dz_final| / delta) / (steps * epsilon).
// The penalty used in training is the positive part.
double lyapunov_estimate(const PhaseState& z0, const Model& m,
                         const IntegratorConfig& cfg, double delta = 1e-5,
                         std::uint64_t seed = 0);

// g = grad_theta H(z_wake) - grad_theta H(z_sleep), over the potential
// parameters and log_mass. A descent step along -g lowers energy at the wake
// state and raises it at the sleep state to first order.
ParamGradient contrastive_grad(const Model& m, const PhaseState& z_wake,
                               const PhaseState& z_sleep);

// Forward cache of an unrolled Verlet chain: every state plus the half-step
// momenta the reverse pass needs.
struct RolloutTape {
  std::vector<PhaseState> states; // z_0 .. z_K
  std::vector<Vec> half_momenta;  // h_0 .. h_{K-1}
  double epsilon = 0.0;
  double gamma = 0.0;

  std::uint64_t steps() const { return half_momenta.size(); }
  const PhaseState& back() const { return states.back(); }
};

RolloutTape record_rollout(const PhaseState& z0, const Model& m,
                           const IntegratorConfig& cfg);

// Reverse pass through the recorded chain. seeds[t] holds dL/dz_t, one entry
// per recorded state; returns dL/dtheta over weights, biases, and log_mass.
ParamGradient rollout_backward(const RolloutTape& tape, const Model& m,
                               const std::vector<PhaseState>& seeds);

// Exact reverse-mode gradient of the wake MSE through the unrolled chain,
// bundled with the forward trajectory it was computed on.
struct WakeBackprop {
  ParamGradient grad;
  RolloutTape tape;
  double mse = 0.0;
};

WakeBackprop bptt_grad(const PhaseState& z0, const Trajectory& target,
                       const Model& m, const IntegratorConfig& cfg);

// theta <- theta - eta g, in place, over the net parameters and log_mass.
void sgd_step(Model& m, const ParamGradient& g, double eta);

// ---------------------------------------------------------------------------
// Wake-sleep step and driver

// One wake-sleep update on a batch:
//   wake:   rollout each z0 (gamma = 0) for wake_steps; MSE + Lyapunov BPTT
//   sleep:  sample the buffer, free rollout (gamma = 0) for sleep_steps
//   update: beta_mse (MSE grad + lambda penalty grad) + beta_cd contrastive,
//           clipped at grad_clip, then one SGD step
//   buffer: final hallucination states are added
// A divergence anywhere aborts the batch: the model is left untouched, no
// hallucinations are stored, and the metrics record the event.
StepMetrics train_step(const std::vector<TrainItem>& batch, Model& m,
                       ReplayBuffer& buf, const TrainConfig& cfg,
                       std::uint64_t step_index = 0);

using BatchSource =
    std::function<std::vector<TrainItem>(std::uint64_t step_index)>;
using StepCallback = std::function<void(const StepMetrics&)>;

// Runs total_steps train_steps, pulling each batch from next_batch. Callers
// size total_steps from epochs and dataset length.
TrainMetrics train(Model& m, ReplayBuffer& buf, const TrainConfig& cfg,
                   std::uint64_t total_steps, const BatchSource& next_batch,
                   const StepCallback& on_step = {});

} // namespace chlu
