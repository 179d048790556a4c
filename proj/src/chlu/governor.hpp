#pragma once

#include "chlu/phase.hpp"

namespace chlu {

// Relativistic kinetic term
//
//   T(p) = sqrt(c^2 p^T M^-1 p + m0^2 c^4),   M = diag(exp(log_mass))
//
// c is the speed limit, m0 the rest mass; both are fixed hyperparameters.
// log_mass is the learnable slot: the exponential keeps every diagonal mass
// strictly positive with an unconstrained parameter.
//
// The velocity dq/dt = grad_p T saturates at c in the M-weighted norm:
// sqrt(v^T M v) < c strictly whenever m0 > 0, and -> c as |p| -> inf.
struct KineticGovernor {
  double c = 1.0;
  double m0 = 1.0;
  Vec log_mass; // length d

  KineticGovernor() = default;
  KineticGovernor(double c, double m0, Vec log_mass)
      : c(c), m0(m0), log_mass(std::move(log_mass)) {
    require_valid();
  }

  static KineticGovernor unit(Eigen::Index d, double c = 1.0, double m0 = 1.0) {
    return KineticGovernor(c, m0, Vec::Zero(d));
  }

  Eigen::Index dim() const { return log_mass.size(); }

  void require_valid() const {
    if (!(c > 0.0)) throw InvalidArgument("kinetic governor: c must be > 0");
    if (!(m0 >= 0.0)) throw InvalidArgument("kinetic governor: m0 must be >= 0");
    if (!log_mass.allFinite()) throw InvalidArgument("kinetic governor: non-finite log_mass");
  }

  // M^-1 p, componentwise exp(-log_mass) * p.
  Vec inv_mass_apply(const Vec& p) const {
    return (p.array() * (-log_mass.array()).exp()).matrix();
  }

  // p^T M^-1 p >= 0.
  double momentum_norm2(const Vec& p) const {
    return (p.array().square() * (-log_mass.array()).exp()).sum();
  }

  // T(p); always >= m0 c^2.
  double energy(const Vec& p) const {
    check_momentum(p);
    return std::sqrt(c * c * momentum_norm2(p) + m0 * m0 * std::pow(c, 4));
  }

  // grad_p T = c^2 M^-1 p / T(p). Undefined at p = 0 when m0 = 0.
  Vec velocity(const Vec& p) const {
    check_momentum(p);
    const double T = std::sqrt(c * c * momentum_norm2(p) + m0 * m0 * std::pow(c, 4));
    if (T == 0.0) throw InvalidArgument("undefined massless gradient at origin");
    return (c * c / T) * inv_mass_apply(p);
  }

  // Hessian of T applied to w:
  //   grad^2 T . w = c^2 M^-1 w / T - c^4 (M^-1 p) ((M^-1 p) . w) / T^3
  Vec hessian_vp(const Vec& p, const Vec& w) const {
    const double T = energy(p);
    if (T == 0.0) throw InvalidArgument("undefined massless gradient at origin");
    const Vec minv_p = inv_mass_apply(p);
    const Vec minv_w = inv_mass_apply(w);
    const double c2 = c * c;
    return (c2 / T) * minv_w - (c2 * c2 / (T * T * T)) * (minv_p.dot(w)) * minv_p;
  }

  // grad of T with respect to log_mass:
  //   dT/dlm_i = -c^2 p_i^2 exp(-lm_i) / (2 T)
  Vec log_mass_grad(const Vec& p) const {
    const double T = energy(p);
    if (T == 0.0) return Vec::Zero(p.size()); // m0 = 0, p = 0: T flat in M there
    return (-c * c / (2.0 * T)) *
           (p.array().square() * (-log_mass.array()).exp()).matrix();
  }

  // Mixed second derivative applied to adjoint a:
  //   result_j = sum_i a_i d(velocity_i)/d(log_mass_j)
  //            = -a_j v_j + (c^2 p_j^2 exp(-lm_j) / (2 T^2)) (v . a)
  Vec velocity_log_mass_grad(const Vec& p, const Vec& a) const {
    const double T = energy(p);
    if (T == 0.0) throw InvalidArgument("undefined massless gradient at origin");
    const Vec v = velocity(p);
    const Vec scaled = (p.array().square() * (-log_mass.array()).exp()).matrix() *
                       (c * c / (2.0 * T * T));
    return (-a.array() * v.array()).matrix() + scaled * v.dot(a);
  }

  // M-weighted norm sqrt(v^T M v); the bound companion of velocity().
  double mass_norm(const Vec& v) const {
    return std::sqrt((v.array().square() * log_mass.array().exp()).sum());
  }

private:
  void check_momentum(const Vec& p) const {
    if (p.size() != log_mass.size())
      throw InvalidArgument("kinetic governor: momentum dimension mismatch");
    if (!p.allFinite()) throw InvalidArgument("non-finite state");
  }
};

} // namespace chlu
