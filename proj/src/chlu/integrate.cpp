#include "chlu/integrate.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <utility>

namespace chlu {

namespace {

bool component_ok(double x) { return std::isfinite(x) && std::abs(x) <= kDivergenceLimit; }

bool state_ok(const PhaseState& z) {
  for (Eigen::Index i = 0; i < z.q.size(); ++i)
    if (!component_ok(z.q(i)) || !component_ok(z.p(i))) return false;
  return true;
}

// Energy at a possibly broken state, for the divergence diagnostic.
EnergyBreakdown energy_unchecked(const PhaseState& z, const Model& m) {
  EnergyBreakdown e;
  try {
    e.T = m.governor.energy(z.p);
  } catch (const Error&) {
    e.T = std::numeric_limits<double>::quiet_NaN();
  }
  try {
    e.V = m.potential->value(z.q);
  } catch (const Error&) {
    e.V = std::numeric_limits<double>::quiet_NaN();
  }
  e.C = m.confinement_energy(z.q);
  e.H = e.T + e.V + e.C;
  return e;
}

[[noreturn]] void throw_diverged(const PhaseState& z, const Model& m, std::uint64_t step) {
  throw DivergenceError("integration diverged", step, energy_unchecked(z, m));
}

void check_post_step(const PhaseState& z, const Model& m, std::uint64_t step) {
  if (!state_ok(z)) throw_diverged(z, m, step);
  const EnergyBreakdown e = energy_unchecked(z, m);
  if (!component_ok(e.H) || !component_ok(e.T) || !component_ok(e.V) || !component_ok(e.C))
    throw_diverged(z, m, step);
}

} // namespace

PhaseState verlet_step(const PhaseState& z, const Model& m, double epsilon, double gamma,
                       Vec* half_momentum) {
  if (!(epsilon > 0.0)) throw InvalidArgument("verlet_step: epsilon must be > 0");
  if (!(gamma >= 0.0 && gamma <= 1.0))
    throw InvalidArgument("verlet_step: gamma must be in [0, 1]");
  z.require_valid();

  const double half = 0.5 * epsilon;
  PhaseState out;
  Vec p_half = z.p + half * m.force(z.q);
  out.q = z.q + epsilon * m.governor.velocity(p_half);
  if (!out.q.allFinite()) throw_diverged(PhaseState(out.q, p_half), m, 0);
  Vec p_star = p_half + half * m.force(out.q);
  out.p = (1.0 - gamma) * p_star;
  check_post_step(out, m, 0);
  if (half_momentum) *half_momentum = std::move(p_half);
  return out;
}

Trajectory rollout(const PhaseState& z0, const Model& m, const IntegratorConfig& cfg) {
  cfg.require_valid();
  z0.require_valid();

  Trajectory traj;
  const std::uint64_t expected =
      2 + (cfg.steps > 0 ? cfg.steps / cfg.record_every : 0);
  traj.states.reserve(expected);
  traj.energies.reserve(expected);
  traj.times.reserve(expected);
  traj.steps.reserve(expected);

  auto record = [&](const PhaseState& z, std::uint64_t step) {
    traj.states.push_back(z);
    traj.energies.push_back(m.energy(z));
    traj.times.push_back(static_cast<double>(step) * cfg.epsilon);
    traj.steps.push_back(step);
  };

  record(z0, 0);
  PhaseState z = z0;
  for (std::uint64_t k = 1; k <= cfg.steps; ++k) {
    try {
      z = verlet_step(z, m, cfg.epsilon, cfg.gamma);
    } catch (const DivergenceError& e) {
      throw DivergenceError("integration diverged at step " + std::to_string(k),
                            k, e.record);
    }
    if (k % cfg.record_every == 0 || k == cfg.steps) record(z, k);
  }
  return traj;
}

double anneal_value(const AnnealSchedule& s, std::uint64_t k) {
  s.require_valid();
  const double frac =
      std::min(static_cast<double>(k) / static_cast<double>(s.total_steps), 1.0);
  switch (s.kind) {
    case AnnealSchedule::Kind::Constant:
      return s.start_value;
    case AnnealSchedule::Kind::Linear:
      return s.start_value + (s.end_value - s.start_value) * frac;
    case AnnealSchedule::Kind::Geometric:
      return s.start_value * std::pow(s.end_value / s.start_value, frac);
  }
  throw InvalidArgument("schedule: unknown kind");
}

PhaseState langevin_step(const PhaseState& z, const Model& m, double epsilon,
                         const LangevinConfig& cfg, std::uint64_t step_index, Rng& rng) {
  if (!(epsilon > 0.0)) throw InvalidArgument("langevin_step: epsilon must be > 0");
  cfg.require_valid();
  z.require_valid();

  const double gamma_k = anneal_value(cfg.gamma_schedule, step_index);
  const double temp_k = anneal_value(cfg.temp_schedule, step_index);
  const double noise_coeff = std::sqrt(2.0 * gamma_k * cfg.kB * temp_k * epsilon);

  PhaseState out;
  out.p = z.p + epsilon * m.force(z.q) - (gamma_k * epsilon) * z.p;
  if (noise_coeff != 0.0) {
    for (Eigen::Index i = 0; i < out.p.size(); ++i) out.p(i) += noise_coeff * rng.normal();
  }
  if (!out.p.allFinite()) throw_diverged(PhaseState(z.q, out.p), m, step_index);
  out.q = z.q + epsilon * m.governor.velocity(out.p);
  check_post_step(out, m, step_index);
  return out;
}

Trajectory langevin_rollout(const PhaseState& z0, const Model& m, double epsilon,
                            const LangevinConfig& cfg, std::uint64_t steps,
                            std::uint64_t record_every) {
  cfg.require_valid();
  if (record_every == 0) throw InvalidArgument("langevin: record_every must be >= 1");
  z0.require_valid();
  Rng rng = Rng::stream(cfg.seed, "langevin-noise");

  Trajectory traj;
  auto record = [&](const PhaseState& z, std::uint64_t step) {
    traj.states.push_back(z);
    traj.energies.push_back(m.energy(z));
    traj.times.push_back(static_cast<double>(step) * epsilon);
    traj.steps.push_back(step);
  };

  record(z0, 0);
  PhaseState z = z0;
  for (std::uint64_t k = 0; k < steps; ++k) {
    try {
      z = langevin_step(z, m, epsilon, cfg, k, rng);
    } catch (const DivergenceError& e) {
      throw DivergenceError("langevin diverged at step " + std::to_string(k + 1),
                            k + 1, e.record);
    }
    if ((k + 1) % record_every == 0 || k + 1 == steps) record(z, k + 1);
  }
  return traj;
}

} // namespace chlu
