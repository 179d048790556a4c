#pragma once

#include <cstdint>
#include <vector>

#include "chlu/model.hpp"
#include "chlu/rng.hpp"

namespace chlu {

// Any state or energy component beyond this magnitude (or non-finite) aborts
// integration with a DivergenceError instead of propagating NaNs.
inline constexpr double kDivergenceLimit = 1e12;

struct IntegratorConfig {
  double epsilon = 0.01;   // step size
  double gamma = 0.0;      // friction in [0, 1]; multiplicative per step
  std::uint64_t steps = 1;
  std::uint64_t record_every = 1; // trajectory recording stride

  void require_valid() const {
    if (!(epsilon > 0.0)) throw InvalidArgument("integrator: epsilon must be > 0");
    if (!(gamma >= 0.0 && gamma <= 1.0))
      throw InvalidArgument("integrator: gamma must be in [0, 1]");
    if (record_every == 0) throw InvalidArgument("integrator: record_every must be >= 1");
  }
};

struct AnnealSchedule {
  enum class Kind { Constant, Linear, Geometric };
  Kind kind = Kind::Constant;
  double start_value = 0.0;
  double end_value = 0.0;
  std::uint64_t total_steps = 1;

  static AnnealSchedule constant(double v) { return {Kind::Constant, v, v, 1}; }
  static AnnealSchedule linear(double start, double end, std::uint64_t total) {
    return {Kind::Linear, start, end, total};
  }
  static AnnealSchedule geometric(double start, double end, std::uint64_t total) {
    return {Kind::Geometric, start, end, total};
  }

  void require_valid() const {
    if (total_steps == 0) throw InvalidArgument("schedule: total_steps must be >= 1");
    if (kind == Kind::Geometric && !(start_value > 0.0 && end_value > 0.0))
      throw InvalidArgument("schedule: geometric endpoints must be positive");
  }
};

// Schedule value at step k; clamps at end_value beyond total_steps.
double anneal_value(const AnnealSchedule& s, std::uint64_t k);

struct LangevinConfig {
  double temperature = 1.0; // base T; the schedule below is authoritative
  double gamma = 0.1;       // base friction; continuous-rate convention (-gamma p dt)
  double kB = 1.0;
  std::uint64_t seed = 0;
  AnnealSchedule temp_schedule = AnnealSchedule::constant(1.0);
  AnnealSchedule gamma_schedule = AnnealSchedule::constant(0.1);

  static LangevinConfig constant(double temperature, double gamma, std::uint64_t seed) {
    LangevinConfig cfg;
    cfg.temperature = temperature;
    cfg.gamma = gamma;
    cfg.seed = seed;
    cfg.temp_schedule = AnnealSchedule::constant(temperature);
    cfg.gamma_schedule = AnnealSchedule::constant(gamma);
    return cfg;
  }

  void require_valid() const {
    if (!(temperature >= 0.0)) throw InvalidArgument("langevin: temperature must be >= 0");
    if (!(kB > 0.0)) throw InvalidArgument("langevin: kB must be > 0");
    temp_schedule.require_valid();
    gamma_schedule.require_valid();
  }
};

struct Trajectory {
  std::vector<PhaseState> states;
  std::vector<EnergyBreakdown> energies;
  std::vector<double> times;
  std::vector<std::uint64_t> steps; // original step index of each record

  std::size_t size() const { return states.size(); }
  Eigen::Index dim() const { return states.empty() ? 0 : states.front().dim(); }
  const PhaseState& front() const { return states.front(); }
  const PhaseState& back() const { return states.back(); }
};

// One step of the dissipative Velocity Verlet scheme:
//   p_half = p - (eps/2) grad(V + alpha q^2)(q)
//   q'     = q + eps grad T(p_half)
//   p_star = p_half - (eps/2) grad(V + alpha q^2)(q')
//   p'     = (1 - gamma) p_star
// gamma = 0 gives the symplectic, time-reversible map. half_momentum, when
// non-null, receives p_half for callers that replay the step in reverse mode.
PhaseState verlet_step(const PhaseState& z, const Model& m, double epsilon, double gamma,
                       Vec* half_momentum = nullptr);

// Applies verlet_step cfg.steps times, recording states, energy components,
// and times every record_every steps (step 0 and the final step always).
Trajectory rollout(const PhaseState& z0, const Model& m, const IntegratorConfig& cfg);

// Euler-Maruyama momentum update with friction and matched noise, then the
// relativistic drift:
//   p' = p - eps grad(V + alpha q^2)(q) - gamma_k p eps
//        + sqrt(2 gamma_k kB T_k eps) xi,     xi ~ N(0, I)
//   q' = q + eps grad T(p')
// gamma_k and T_k come from the schedules at step_index.
PhaseState langevin_step(const PhaseState& z, const Model& m, double epsilon,
                         const LangevinConfig& cfg, std::uint64_t step_index, Rng& rng);

// Full chain of langevin_step with a stream derived from cfg.seed.
Trajectory langevin_rollout(const PhaseState& z0, const Model& m, double epsilon,
                            const LangevinConfig& cfg, std::uint64_t steps,
                            std::uint64_t record_every = 1);

} // namespace chlu
