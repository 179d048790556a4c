#include "chlu/train.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <utility>

namespace chlu {

namespace {

Vec random_unit(Eigen::Index n, Rng& rng) {
  Vec u(n);
  double norm2 = 0.0;
  do {
    for (Eigen::Index i = 0; i < n; ++i) u(i) = rng.normal();
    norm2 = u.squaredNorm();
  } while (!(norm2 > 0.0));
  return u / std::sqrt(norm2);
}

double phase_distance(const PhaseState& a, const PhaseState& b) {
  return std::sqrt((a.q - b.q).squaredNorm() + (a.p - b.p).squaredNorm());
}

// Mean of squares over all 2d components of all aligned states. When seeds is
// non-null it receives d(mse)/dz_t for every state.
double mse_over_states(const std::vector<PhaseState>& states, const Trajectory& target,
                       std::vector<PhaseState>* seeds) {
  if (states.empty()) throw InvalidArgument("wake loss: empty trajectory");
  if (states.size() != target.states.size())
    throw InvalidArgument("wake loss: trajectory and target length mismatch");
  const Eigen::Index d = states.front().dim();
  const double denom =
      static_cast<double>(states.size()) * 2.0 * static_cast<double>(d);
  if (seeds) {
    seeds->clear();
    seeds->reserve(states.size());
  }
  double sum = 0.0;
  for (std::size_t t = 0; t < states.size(); ++t) {
    if (target.states[t].dim() != d || states[t].dim() != d)
      throw InvalidArgument("wake loss: dimension mismatch");
    Vec dq = states[t].q - target.states[t].q;
    Vec dp = states[t].p - target.states[t].p;
    sum += dq.squaredNorm() + dp.squaredNorm();
    if (seeds)
      seeds->emplace_back((2.0 / denom) * dq, (2.0 / denom) * dp);
  }
  return sum / denom;
}

} // namespace

// ---------------------------------------------------------------------------
// ReplayBuffer

ReplayBuffer::ReplayBuffer(std::size_t capacity, std::uint64_t seed)
    : capacity_(capacity), rng_(Rng::stream(seed, "replay-buffer")) {
  if (capacity == 0) throw InvalidArgument("replay buffer: capacity must be >= 1");
}

void ReplayBuffer::add(const PhaseState& z) {
  if (z.q.size() != z.p.size() || z.q.size() < 1 || !z.is_finite()) {
    ++rejected_;
    return;
  }
  entries_.push_back(z);
  while (entries_.size() > capacity_) entries_.pop_front();
}

std::vector<PhaseState> ReplayBuffer::sample(std::size_t n, Eigen::Index d,
                                             double reinit_prob) {
  if (n < 1) throw InvalidArgument("replay buffer: sample count must be >= 1");
  if (d < 1) throw InvalidArgument("replay buffer: dimension must be >= 1");
  if (!(reinit_prob >= 0.0 && reinit_prob <= 1.0))
    throw InvalidArgument("replay buffer: reinit_prob must be in [0, 1]");

  std::vector<PhaseState> out;
  out.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    const bool fresh = entries_.empty() || rng_.uniform() < reinit_prob;
    if (fresh) {
      PhaseState z = PhaseState::zero(d);
      for (Eigen::Index j = 0; j < d; ++j) z.q(j) = rng_.normal();
      for (Eigen::Index j = 0; j < d; ++j) z.p(j) = rng_.normal();
      out.push_back(std::move(z));
    } else {
      const PhaseState& pick = entries_[rng_.index(entries_.size())];
      if (pick.dim() != d)
        throw InvalidArgument("replay buffer: stored dimension mismatch");
      out.push_back(pick);
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// TrainConfig

void TrainConfig::require_valid() const {
  if (!(eta > 0.0)) throw InvalidArgument("train config: eta must be > 0");
  if (!(lambda >= 0.0)) throw InvalidArgument("train config: lambda must be >= 0");
  if (!(beta_mse >= 0.0) || !(beta_cd >= 0.0))
    throw InvalidArgument("train config: beta weights must be >= 0");
  if (!(beta_mse + beta_cd > 0.0))
    throw InvalidArgument("train config: at least one of beta_mse, beta_cd must be > 0");
  if (!(epsilon > 0.0)) throw InvalidArgument("train config: epsilon must be > 0");
  if (wake_steps == 0) throw InvalidArgument("train config: wake_steps must be >= 1");
  if (sleep_steps == 0) throw InvalidArgument("train config: sleep_steps must be >= 1");
  if (buffer_capacity == 0)
    throw InvalidArgument("train config: buffer_capacity must be >= 1");
  if (!(buffer_reinit_prob >= 0.0 && buffer_reinit_prob <= 1.0))
    throw InvalidArgument("train config: buffer_reinit_prob must be in [0, 1]");
  if (epochs == 0) throw InvalidArgument("train config: epochs must be >= 1");
  if (batch_size == 0) throw InvalidArgument("train config: batch_size must be >= 1");
  if (!(grad_clip > 0.0)) throw InvalidArgument("train config: grad_clip must be > 0");
  if (!(lyap_delta > 0.0)) throw InvalidArgument("train config: lyap_delta must be > 0");
  if (!(sigma_init >= 0.0)) throw InvalidArgument("train config: sigma_init must be >= 0");
}

bool TrainMetrics::all_finite() const {
  for (const StepMetrics& s : steps) {
    const double vals[] = {s.wake_mse,    s.lyapunov,     s.lyap_penalty,
                           s.wake_loss,   s.mean_wake_H,  s.mean_sleep_H,
                           s.contrastive_gap, s.grad_norm};
    for (double v : vals)
      if (!std::isfinite(v)) return false;
  }
  return true;
}

// ---------------------------------------------------------------------------
// Losses and gradients

double wake_loss(const Trajectory& traj, const Trajectory& target, double lyap,
                 double lambda) {
  return mse_over_states(traj.states, target, nullptr) + lambda * lyap;
}

double lyapunov_estimate(const PhaseState& z0, const Model& m,
                         const IntegratorConfig& cfg, double delta,
                         std::uint64_t seed) {
  if (!(delta > 0.0)) throw InvalidArgument("lyapunov: delta must be > 0");
  cfg.require_valid();
  z0.require_valid();
  const Eigen::Index d = z0.dim();

  Rng rng = Rng::stream(seed, "lyapunov-direction");
  const Vec u = random_unit(2 * d, rng);
  PhaseState twin(z0.q + delta * u.head(d), z0.p + delta * u.tail(d));

  PhaseState a = z0;
  PhaseState b = std::move(twin);
  for (std::uint64_t k = 1; k <= cfg.steps; ++k) {
    try {
      a = verlet_step(a, m, cfg.epsilon, cfg.gamma);
      b = verlet_step(b, m, cfg.epsilon, cfg.gamma);
    } catch (const DivergenceError& e) {
      throw DivergenceError("integration diverged at step " + std::to_string(k), k,
                            e.record);
    }
  }
  double dist = phase_distance(a, b);
  if (!(dist > 0.0)) dist = std::numeric_limits<double>::min();
  return std::log(dist / delta) /
         (static_cast<double>(cfg.steps) * cfg.epsilon);
}

ParamGradient contrastive_grad(const Model& m, const PhaseState& z_wake,
                               const PhaseState& z_sleep) {
  z_wake.require_valid();
  z_sleep.require_valid();
  if (z_wake.dim() != m.dim() || z_sleep.dim() != m.dim())
    throw InvalidArgument("contrastive: dimension mismatch");
  ParamGradient g = model_energy_grad_params(m, z_wake);
  g.add_scaled(model_energy_grad_params(m, z_sleep), -1.0);
  return g;
}

RolloutTape record_rollout(const PhaseState& z0, const Model& m,
                           const IntegratorConfig& cfg) {
  cfg.require_valid();
  z0.require_valid();

  RolloutTape tape;
  tape.epsilon = cfg.epsilon;
  tape.gamma = cfg.gamma;
  tape.states.reserve(cfg.steps + 1);
  tape.half_momenta.reserve(cfg.steps);
  tape.states.push_back(z0);
  for (std::uint64_t k = 1; k <= cfg.steps; ++k) {
    Vec h;
    try {
      tape.states.push_back(
          verlet_step(tape.states.back(), m, cfg.epsilon, cfg.gamma, &h));
    } catch (const DivergenceError& e) {
      throw DivergenceError("integration diverged at step " + std::to_string(k), k,
                            e.record);
    }
    tape.half_momenta.push_back(std::move(h));
  }
  return tape;
}

ParamGradient rollout_backward(const RolloutTape& tape, const Model& m,
                               const std::vector<PhaseState>& seeds) {
  const PotentialNet* net = m.net();
  if (!net) throw InvalidArgument("model has no trainable potential");
  if (tape.states.empty()) throw InvalidArgument("rollout backward: empty tape");
  if (seeds.size() != tape.states.size())
    throw InvalidArgument("rollout backward: seed count mismatch");
  const Eigen::Index d = m.dim();
  for (const PhaseState& s : seeds)
    if (s.q.size() != d || s.p.size() != d)
      throw InvalidArgument("rollout backward: seed dimension mismatch");

  const double eps = tape.epsilon;
  const double half = 0.5 * eps;
  const std::uint64_t K = tape.steps();

  ParamGradient g = ParamGradient::zero_like(*net, d);
  // Adjoints of the state the reverse sweep currently sits at.
  Vec aq = seeds[K].q;
  Vec ap = seeds[K].p;

  for (std::uint64_t t = K; t-- > 0;) {
    const Vec& q_t = tape.states[t].q;
    const Vec& q_next = tape.states[t + 1].q;
    const Vec& h_t = tape.half_momenta[t];

    // p_{t+1} = (1 - gamma) (h_t + (eps/2) f(q_{t+1}))
    Vec as = (1.0 - tape.gamma) * ap;
    if (as.squaredNorm() != 0.0) {
      aq -= half * (m.potential->hessian_vector_product(q_next, as) +
                    2.0 * m.alpha * as);
      g.add_scaled(potential_mixed_grad_params(*net, q_next, as), -half);
    }
    // q_{t+1} = q_t + eps grad T(h_t)
    Vec ah = as;
    if (aq.squaredNorm() != 0.0) {
      ah += eps * m.governor.hessian_vp(h_t, aq);
      g.log_mass += eps * m.governor.velocity_log_mass_grad(h_t, aq);
    }
    // h_t = p_t + (eps/2) f(q_t)
    if (ah.squaredNorm() != 0.0) {
      aq -= half * (m.potential->hessian_vector_product(q_t, ah) +
                    2.0 * m.alpha * ah);
      g.add_scaled(potential_mixed_grad_params(*net, q_t, ah), -half);
    }
    aq += seeds[t].q;
    ap = ah + seeds[t].p;
  }
  return g;
}

WakeBackprop bptt_grad(const PhaseState& z0, const Trajectory& target,
                       const Model& m, const IntegratorConfig& cfg) {
  WakeBackprop wb;
  wb.tape = record_rollout(z0, m, cfg);
  std::vector<PhaseState> seeds;
  wb.mse = mse_over_states(wb.tape.states, target, &seeds);
  wb.grad = rollout_backward(wb.tape, m, seeds);
  return wb;
}

void sgd_step(Model& m, const ParamGradient& g, double eta) {
  if (!std::isfinite(eta)) throw InvalidArgument("sgd: eta must be finite");
  if (!g.all_finite()) throw InvalidArgument("gradient diverged");
  PotentialNet* net = m.net();
  if (!net) throw InvalidArgument("model has no trainable potential");
  if (g.weights.size() != net->weights().size() ||
      g.log_mass.size() != m.governor.log_mass.size())
    throw InvalidArgument("sgd: gradient shape mismatch");
  for (std::size_t l = 0; l < g.weights.size(); ++l) {
    if (g.weights[l].rows() != net->weights()[l].rows() ||
        g.weights[l].cols() != net->weights()[l].cols() ||
        g.biases[l].size() != net->biases()[l].size())
      throw InvalidArgument("sgd: gradient shape mismatch");
    net->weights()[l] -= eta * g.weights[l];
    net->biases()[l] -= eta * g.biases[l];
  }
  m.governor.log_mass -= eta * g.log_mass;
}

// ---------------------------------------------------------------------------
// Wake-sleep step

StepMetrics train_step(const std::vector<TrainItem>& batch, Model& m,
                       ReplayBuffer& buf, const TrainConfig& cfg,
                       std::uint64_t step_index) {
  cfg.require_valid();
  m.require_valid();
  if (batch.empty()) throw InvalidArgument("train step: empty batch");
  PotentialNet* net = m.net();
  if (!net) throw InvalidArgument("model has no trainable potential");
  const Eigen::Index d = m.dim();

  StepMetrics metrics;
  metrics.step = step_index;

  const IntegratorConfig wake_cfg{cfg.epsilon, 0.0, cfg.wake_steps, 1};
  const IntegratorConfig sleep_cfg{cfg.epsilon, 0.0, cfg.sleep_steps,
                                   cfg.sleep_steps};
  const double nb = static_cast<double>(batch.size());
  const double span = static_cast<double>(cfg.wake_steps) * cfg.epsilon;

  // Per-step stream so twin perturbation directions are reproducible.
  Rng dir_rng = Rng::stream(cfg.seed ^ (0x9e3779b97f4a7c15ull * (step_index + 1)),
                            "lyapunov-direction");

  try {
    ParamGradient wake_grad = ParamGradient::zero_like(*net, d);
    double mse_sum = 0.0, lyap_sum = 0.0, pen_sum = 0.0, wake_h_sum = 0.0;
    std::vector<PhaseState> wake_finals;
    wake_finals.reserve(batch.size());

    for (const TrainItem& item : batch) {
      if (item.z0.dim() != d)
        throw InvalidArgument("train step: batch dimension mismatch");

      RolloutTape tape = record_rollout(item.z0, m, wake_cfg);
      std::vector<PhaseState> seeds;
      mse_sum += mse_over_states(tape.states, item.target,
                                 cfg.beta_mse > 0.0 ? &seeds : nullptr);
      if (cfg.beta_mse > 0.0)
        wake_grad.add_scaled(rollout_backward(tape, m, seeds), 1.0 / nb);

      // Twin rollout: exponent estimate always, its gradient only when the
      // penalty is active and the estimate is expanding.
      const Vec u = random_unit(2 * d, dir_rng);
      PhaseState z_twin(item.z0.q + cfg.lyap_delta * u.head(d),
                        item.z0.p + cfg.lyap_delta * u.tail(d));
      RolloutTape twin = record_rollout(z_twin, m, wake_cfg);
      double dist = phase_distance(tape.back(), twin.back());
      if (!(dist > 0.0)) dist = std::numeric_limits<double>::min();
      const double lam = std::log(dist / cfg.lyap_delta) / span;
      lyap_sum += lam;
      pen_sum += std::max(lam, 0.0);

      if (cfg.beta_mse > 0.0 && cfg.lambda > 0.0 && lam > 0.0) {
        // d lam / d z_K = +-w on the pair of rollouts.
        const double coef = 1.0 / (span * dist * dist);
        PhaseState w(coef * (tape.back().q - twin.back().q),
                     coef * (tape.back().p - twin.back().p));
        std::vector<PhaseState> term(tape.states.size(), PhaseState::zero(d));
        term.back() = w;
        wake_grad.add_scaled(rollout_backward(tape, m, term), cfg.lambda / nb);
        term.back() = PhaseState(-w.q, -w.p);
        wake_grad.add_scaled(rollout_backward(twin, m, term), cfg.lambda / nb);
      }

      wake_h_sum += m.energy(tape.back()).H;
      wake_finals.push_back(tape.back());
    }

    // Sleep phase: free evolution of buffered hallucinations.
    std::vector<PhaseState> starts =
        buf.sample(batch.size(), d, cfg.buffer_reinit_prob);
    std::vector<PhaseState> sleep_finals;
    sleep_finals.reserve(starts.size());
    double sleep_h_sum = 0.0;
    for (const PhaseState& s : starts) {
      Trajectory t = rollout(s, m, sleep_cfg);
      sleep_h_sum += t.energies.back().H;
      sleep_finals.push_back(t.back());
    }

    ParamGradient g_total = ParamGradient::zero_like(*net, d);
    g_total.add_scaled(wake_grad, cfg.beta_mse);
    if (cfg.beta_cd > 0.0) {
      for (std::size_t i = 0; i < batch.size(); ++i)
        g_total.add_scaled(contrastive_grad(m, wake_finals[i], sleep_finals[i]),
                           cfg.beta_cd / nb);
    }

    metrics.grad_norm = g_total.norm();
    if (!g_total.all_finite()) {
      metrics.diverged = true;
      metrics.divergence_what = "gradient diverged";
      metrics.grad_norm = 0.0;
      return metrics;
    }
    if (metrics.grad_norm > cfg.grad_clip) {
      g_total.scale(cfg.grad_clip / metrics.grad_norm);
      metrics.clipped = true;
    }
    sgd_step(m, g_total, cfg.eta);
    for (const PhaseState& z : sleep_finals) buf.add(z);

    metrics.wake_mse = mse_sum / nb;
    metrics.lyapunov = lyap_sum / nb;
    metrics.lyap_penalty = pen_sum / nb;
    metrics.wake_loss = metrics.wake_mse + cfg.lambda * metrics.lyap_penalty;
    metrics.mean_wake_H = wake_h_sum / nb;
    metrics.mean_sleep_H = sleep_h_sum / nb;
    metrics.contrastive_gap = metrics.mean_wake_H - metrics.mean_sleep_H;
  } catch (const DivergenceError& e) {
    metrics.diverged = true;
    metrics.divergence_step = e.step;
    metrics.divergence_what = e.what();
  }
  return metrics;
}

TrainMetrics train(Model& m, ReplayBuffer& buf, const TrainConfig& cfg,
                   std::uint64_t total_steps, const BatchSource& next_batch,
                   const StepCallback& on_step) {
  cfg.require_valid();
  if (!next_batch) throw InvalidArgument("train: missing batch source");

  TrainMetrics out;
  out.steps.reserve(total_steps);
  for (std::uint64_t s = 0; s < total_steps; ++s) {
    out.steps.push_back(train_step(next_batch(s), m, buf, cfg, s));
    if (out.steps.back().diverged) ++out.diverged_batches;
    if (on_step) on_step(out.steps.back());
  }
  return out;
}

} // namespace chlu
