#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "chlu/train.hpp"

namespace chlu {

// One verified property: the measured value, the bound it was held to, and
// whether it passed. Suites aggregate many random instances into a handful of
// worst-case results.
struct CheckResult {
  std::string suite;
  std::string name;
  bool passed = false;
  double observed = 0.0;
  double bound = 0.0;
  std::string detail;
};

// "check suite=<s> name=<n> pass=<0|1> observed=<v> bound=<b>"
std::string check_summary_line(const CheckResult& r);
bool all_passed(const std::vector<CheckResult>& results);

// Finite-difference verification of every analytic and reverse-mode
// derivative: kinetic gradients, potential input and parameter gradients,
// Hessian-vector and mixed second-order products, and backprop through
// unrolled integrator chains.
std::vector<CheckResult> run_gradient_checks(std::uint64_t seed);

// Phase-space volume: |det J - 1| for the frictionless step, |det J - (1 -
// gamma)^d| with friction, and long-horizon energy drift on the harmonic
// fixture.
std::vector<CheckResult> run_symplectic_checks(std::uint64_t seed);

// Forward N steps, negate momentum, forward N steps, negate: recovers the
// start to near roundoff when gamma = 0.
std::vector<CheckResult> run_reversibility_checks(std::uint64_t seed);

// Mass-weighted speed strictly below c for finite momenta, saturation toward
// c at extreme momenta, and the per-step displacement bound eps * c.
std::vector<CheckResult> run_velocity_bound_checks(std::uint64_t seed);

// Langevin sampling of a quadratic well at fixed temperature: the empirical
// Var(q) must land within 5% of kB T / k.
std::vector<CheckResult> run_boltzmann_checks(std::uint64_t seed);

// suite: gradients | symplectic | reversibility | velocity-bound | boltzmann
// | all. InvalidArgument on anything else.
std::vector<CheckResult> run_checks(const std::string& suite, std::uint64_t seed);

} // namespace chlu
