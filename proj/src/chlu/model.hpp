#pragma once

#include <memory>

#include "chlu/governor.hpp"
#include "chlu/potential.hpp"

namespace chlu {

// H(q, p) = T(p) + V_theta(q) + alpha |q|^2
//
// The separable total energy: relativistic kinetic governor, learnable
// potential, and a weak quadratic confinement that keeps states from drifting
// off when V_theta is flat.
struct Model {
  KineticGovernor governor;
  std::shared_ptr<Potential> potential;
  double alpha = 0.0;

  Model() = default;
  Model(KineticGovernor governor, std::shared_ptr<Potential> potential, double alpha)
      : governor(std::move(governor)), potential(std::move(potential)), alpha(alpha) {
    require_valid();
  }

  Eigen::Index dim() const { return governor.dim(); }

  void require_valid() const {
    governor.require_valid();
    if (!(alpha >= 0.0)) throw InvalidArgument("model: alpha must be >= 0");
    if (!potential) throw InvalidArgument("model: missing potential");
    if (potential->dim() != governor.dim())
      throw InvalidArgument("model: governor and potential dimension mismatch");
  }

  // Trainable potential, or null for analytic fixtures.
  PotentialNet* net() { return dynamic_cast<PotentialNet*>(potential.get()); }
  const PotentialNet* net() const {
    return dynamic_cast<const PotentialNet*>(potential.get());
  }

  double confinement_energy(const Vec& q) const { return alpha * q.squaredNorm(); }
  Vec confinement_gradient(const Vec& q) const { return 2.0 * alpha * q; }

  // Component-wise energy; H is the exact sum of the returned parts.
  EnergyBreakdown energy(const PhaseState& z) const {
    z.require_valid();
    EnergyBreakdown e;
    e.T = governor.energy(z.p);
    e.V = potential->value(z.q);
    e.C = confinement_energy(z.q);
    e.H = e.T + e.V + e.C;
    return e;
  }

  // dp/dt = -dH/dq = -(grad V + 2 alpha q)
  Vec force(const Vec& q) const {
    if (q.size() != dim()) throw InvalidArgument("force: dimension mismatch");
    if (!q.allFinite()) throw InvalidArgument("non-finite state");
    return -(potential->grad_input(q) + confinement_gradient(q));
  }
};

// Convenience builders used by tests and the CLI.
Model make_net_model(std::vector<int> layer_dims, double c, double m0, double alpha,
                     std::uint64_t seed);
Model make_fixture_model(std::shared_ptr<Potential> potential, double c, double m0,
                         double alpha = 0.0);

// grad_theta H(z): potential parameters via the net's reverse pass, log_mass
// via the kinetic governor. Requires a trainable potential.
ParamGradient model_energy_grad_params(const Model& m, const PhaseState& z);

} // namespace chlu
