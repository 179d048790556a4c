#include "chlu/checks.hpp"

#include <cmath>
#include <memory>
#include <utility>

#include "chlu/text.hpp"

namespace chlu {

namespace {

// ---------------------------------------------------------------------------
// Shared helpers

double rel_err(const Vec& approx, const Vec& exact) {
  const double scale = std::max(1.0, exact.lpNorm<Eigen::Infinity>());
  return (approx - exact).lpNorm<Eigen::Infinity>() / scale;
}

Vec random_vec(Eigen::Index d, Rng& rng, double scale) {
  Vec v(d);
  for (Eigen::Index i = 0; i < d; ++i) v(i) = scale * rng.normal();
  return v;
}

Vec random_unit(Eigen::Index d, Rng& rng) {
  for (;;) {
    Vec v = random_vec(d, rng, 1.0);
    const double n = v.norm();
    if (n > 1e-6) return v / n;
  }
}

KineticGovernor random_governor(Eigen::Index d, Rng& rng, double lm_spread) {
  Vec lm(d);
  for (Eigen::Index i = 0; i < d; ++i) lm(i) = lm_spread * rng.normal();
  return KineticGovernor(rng.uniform(0.5, 4.0), rng.uniform(0.1, 2.0), std::move(lm));
}

// init zeroes the output layer, so jitter every slot to make V nontrivial.
std::shared_ptr<PotentialNet> random_net(const std::vector<int>& dims, Rng& rng,
                                         double jitter = 0.4) {
  auto net = std::make_shared<PotentialNet>(PotentialNet::init(dims, rng.next()));
  for (Mat& w : net->weights())
    for (Eigen::Index i = 0; i < w.size(); ++i) w.data()[i] += jitter * rng.normal();
  for (Vec& b : net->biases())
    for (Eigen::Index i = 0; i < b.size(); ++i) b(i) += jitter * rng.normal();
  return net;
}

// Flat view of a parameter gradient; iteration order matches fd_model_params.
Vec flatten_params(const ParamGradient& g) {
  Eigen::Index count = g.log_mass.size();
  for (const Mat& w : g.weights) count += w.size();
  for (const Vec& b : g.biases) count += b.size();
  Vec out(count);
  Eigen::Index k = 0;
  for (const Mat& w : g.weights)
    for (Eigen::Index i = 0; i < w.size(); ++i) out(k++) = w.data()[i];
  for (const Vec& b : g.biases)
    for (Eigen::Index i = 0; i < b.size(); ++i) out(k++) = b(i);
  for (Eigen::Index i = 0; i < g.log_mass.size(); ++i) out(k++) = g.log_mass(i);
  return out;
}

// Central difference of eval() over every trainable slot of m, restoring each
// slot exactly afterwards.
template <class F>
Vec fd_model_params(Model& m, double h_scale, F&& eval) {
  PotentialNet* net = m.net();
  std::vector<double*> slots;
  for (Mat& w : net->weights())
    for (Eigen::Index i = 0; i < w.size(); ++i) slots.push_back(w.data() + i);
  for (Vec& b : net->biases())
    for (Eigen::Index i = 0; i < b.size(); ++i) slots.push_back(b.data() + i);
  for (Eigen::Index i = 0; i < m.governor.log_mass.size(); ++i)
    slots.push_back(m.governor.log_mass.data() + i);

  Vec g(static_cast<Eigen::Index>(slots.size()));
  for (std::size_t k = 0; k < slots.size(); ++k) {
    double* x = slots[k];
    const double x0 = *x;
    const double h = h_scale * std::max(1.0, std::abs(x0));
    *x = x0 + h;
    const double f1 = eval();
    *x = x0 - h;
    const double f0 = eval();
    *x = x0;
    g(static_cast<Eigen::Index>(k)) = (f1 - f0) / (2.0 * h);
  }
  return g;
}

CheckResult result(const char* suite, const char* name, double observed, double bound,
                   bool passed, std::string detail) {
  CheckResult r;
  r.suite = suite;
  r.name = name;
  r.passed = passed;
  r.observed = observed;
  r.bound = bound;
  r.detail = std::move(detail);
  return r;
}

CheckResult below(const char* suite, const char* name, double observed, double bound,
                  std::string detail = {}) {
  return result(suite, name, observed, bound, observed < bound, std::move(detail));
}

// ---------------------------------------------------------------------------
// Gradient suite

CheckResult kinetic_velocity_check(std::uint64_t seed) {
  Rng rng = Rng::stream(seed, "check-kinetic-grad");
  double worst = 0.0;
  const int instances = 40;
  for (int n = 0; n < instances; ++n) {
    const Eigen::Index d = 1 + static_cast<Eigen::Index>(rng.index(4));
    KineticGovernor gov = random_governor(d, rng, 0.5);
    if (n % 8 == 0) gov.m0 = 0.0; // massless branch, kept away from p = 0
    const double scale = std::exp(rng.uniform(std::log(0.1), std::log(100.0)));
    Vec p = random_vec(d, rng, scale);
    if (gov.m0 == 0.0 && p.norm() < 0.5) p(0) += 1.0;

    const Vec exact = gov.velocity(p);
    Vec fd(d);
    for (Eigen::Index i = 0; i < d; ++i) {
      const double h = 1e-6 * std::max(1.0, std::abs(p(i)));
      Vec hi = p, lo = p;
      hi(i) += h;
      lo(i) -= h;
      fd(i) = (gov.energy(hi) - gov.energy(lo)) / (2.0 * h);
    }
    worst = std::max(worst, rel_err(fd, exact));
  }
  return below("gradients", "kinetic-velocity", worst, 1e-6, "40 instances");
}

CheckResult kinetic_log_mass_check(std::uint64_t seed) {
  Rng rng = Rng::stream(seed, "check-kinetic-log-mass");
  double worst = 0.0;
  const int instances = 24;
  for (int n = 0; n < instances; ++n) {
    const Eigen::Index d = 1 + static_cast<Eigen::Index>(rng.index(4));
    const KineticGovernor gov = random_governor(d, rng, 0.5);
    const Vec p = random_vec(d, rng, rng.uniform(0.2, 5.0));

    const Vec exact = gov.log_mass_grad(p);
    Vec fd(d);
    for (Eigen::Index i = 0; i < d; ++i) {
      const double h = 1e-6 * std::max(1.0, std::abs(gov.log_mass(i)));
      KineticGovernor hi = gov, lo = gov;
      hi.log_mass(i) += h;
      lo.log_mass(i) -= h;
      fd(i) = (hi.energy(p) - lo.energy(p)) / (2.0 * h);
    }
    worst = std::max(worst, rel_err(fd, exact));
  }
  return below("gradients", "kinetic-log-mass", worst, 1e-6, "24 instances");
}

CheckResult potential_input_check(std::uint64_t seed) {
  Rng rng = Rng::stream(seed, "check-potential-grad");
  double worst = 0.0;
  const int instances = 32;
  for (int n = 0; n < instances; ++n) {
    const Eigen::Index d = 1 + static_cast<Eigen::Index>(rng.index(4));
    std::shared_ptr<Potential> pot;
    switch (n % 3) {
      case 0: pot = random_net({static_cast<int>(d), 8, 1}, rng); break;
      case 1: pot = random_net({static_cast<int>(d), 12, 6, 1}, rng); break;
      default: pot = std::make_shared<QuadraticPotential>(d, rng.uniform(-2.0, 2.0));
    }
    const Vec q = random_vec(d, rng, rng.uniform(0.3, 2.0));

    const Vec exact = pot->grad_input(q);
    Vec fd(d);
    for (Eigen::Index i = 0; i < d; ++i) {
      const double h = 1e-6 * std::max(1.0, std::abs(q(i)));
      Vec hi = q, lo = q;
      hi(i) += h;
      lo(i) -= h;
      fd(i) = (pot->value(hi) - pot->value(lo)) / (2.0 * h);
    }
    worst = std::max(worst, rel_err(fd, exact));
  }
  return below("gradients", "potential-input", worst, 1e-6, "32 instances");
}

CheckResult parameter_gradient_check(std::uint64_t seed) {
  Rng rng = Rng::stream(seed, "check-param-grad");
  double worst = 0.0;
  const int instances = 20;
  for (int n = 0; n < instances; ++n) {
    const Eigen::Index d = 1 + static_cast<Eigen::Index>(rng.index(3));
    const std::vector<int> dims = (n % 2 == 0)
                                      ? std::vector<int>{static_cast<int>(d), 8, 1}
                                      : std::vector<int>{static_cast<int>(d), 10, 5, 1};
    Model m(random_governor(d, rng, 0.5), random_net(dims, rng), rng.uniform(0.0, 0.2));
    const PhaseState z(random_vec(d, rng, 1.5), random_vec(d, rng, 3.0));

    const Vec exact = flatten_params(model_energy_grad_params(m, z));
    const Vec fd = fd_model_params(m, 1e-6, [&] { return m.energy(z).H; });
    worst = std::max(worst, rel_err(fd, exact));
  }
  return below("gradients", "parameter-energy", worst, 1e-5, "20 instances");
}

CheckResult kinetic_hvp_check(std::uint64_t seed) {
  Rng rng = Rng::stream(seed, "check-kinetic-hvp");
  double worst = 0.0;
  const int instances = 16;
  for (int n = 0; n < instances; ++n) {
    const Eigen::Index d = 1 + static_cast<Eigen::Index>(rng.index(4));
    const KineticGovernor gov = random_governor(d, rng, 0.5);
    const Vec p = random_vec(d, rng, rng.uniform(0.2, 10.0));
    const Vec w = random_unit(d, rng);

    const Vec exact = gov.hessian_vp(p, w);
    const double h = 1e-5 * std::max(1.0, p.norm());
    const Vec fd = (gov.velocity(p + h * w) - gov.velocity(p - h * w)) / (2.0 * h);
    worst = std::max(worst, rel_err(fd, exact));
  }
  return below("gradients", "kinetic-hessian", worst, 1e-3, "16 instances");
}

CheckResult potential_hvp_check(std::uint64_t seed) {
  Rng rng = Rng::stream(seed, "check-potential-hvp");
  double worst = 0.0;
  const int instances = 16;
  for (int n = 0; n < instances; ++n) {
    const Eigen::Index d = 1 + static_cast<Eigen::Index>(rng.index(3));
    auto pot = random_net({static_cast<int>(d), 10, 1}, rng);
    const Vec q = random_vec(d, rng, 1.0);
    const Vec w = random_unit(d, rng);

    const Vec a = pot->hessian_vector_product(q, w);
    // Independent step size, so agreement is not an artifact of one h.
    const double h = 3.3e-5 * std::max(1.0, q.norm());
    const Vec b = (pot->grad_input(q + h * w) - pot->grad_input(q - h * w)) / (2.0 * h);
    worst = std::max(worst, rel_err(b, a));
  }
  return below("gradients", "potential-hessian", worst, 1e-3, "16 instances");
}

CheckResult mixed_gradient_check(std::uint64_t seed) {
  Rng rng = Rng::stream(seed, "check-mixed-grad");
  double worst = 0.0;
  const int instances = 10;
  for (int n = 0; n < instances; ++n) {
    const Eigen::Index d = 1 + static_cast<Eigen::Index>(rng.index(3));
    auto pot = random_net({static_cast<int>(d), 8, 1}, rng);
    const Vec q = random_vec(d, rng, 1.0);
    const Vec w = random_unit(d, rng);

    const Vec exact = flatten_params(potential_mixed_grad_params(*pot, q, w));
    const double h = 3.3e-5 * std::max(1.0, q.norm());
    ParamGradient hi = potential_grad_params(*pot, q + h * w);
    const ParamGradient lo = potential_grad_params(*pot, q - h * w);
    hi.add_scaled(lo, -1.0);
    hi.scale(1.0 / (2.0 * h));
    worst = std::max(worst, rel_err(flatten_params(hi), exact));
  }
  return below("gradients", "mixed-second-order", worst, 1e-3, "10 instances");
}

CheckResult bptt_check(std::uint64_t seed) {
  Rng rng = Rng::stream(seed, "check-bptt");
  double worst = 0.0;
  const int instances = 6;
  for (int n = 0; n < instances; ++n) {
    Model m(random_governor(2, rng, 0.3), random_net({2, 6, 1}, rng), 0.05);
    IntegratorConfig cfg;
    cfg.epsilon = 0.05;
    cfg.gamma = (n % 2 == 0) ? 0.0 : 0.1;
    cfg.steps = 3 + 2 * static_cast<std::uint64_t>(n);
    cfg.record_every = 1;

    const PhaseState z0(random_vec(2, rng, 1.0), random_vec(2, rng, 1.0));
    const PhaseState z0_target(z0.q + random_vec(2, rng, 0.3),
                               z0.p + random_vec(2, rng, 0.3));
    const Trajectory target = rollout(z0_target, m, cfg);

    const WakeBackprop wb = bptt_grad(z0, target, m, cfg);
    const Vec exact = flatten_params(wb.grad);
    const Vec fd = fd_model_params(m, 1e-5, [&] {
      return wake_loss(rollout(z0, m, cfg), target, 0.0, 0.0);
    });
    worst = std::max(worst, rel_err(fd, exact));
  }
  return below("gradients", "bptt-rollout", worst, 1e-4, "6 instances");
}

// ---------------------------------------------------------------------------
// Symplectic suite

CheckResult jacobian_det_check(std::uint64_t seed, double gamma, const char* name) {
  Rng rng = Rng::stream(seed, "check-jacobian");
  Model m(KineticGovernor(2.0, 1.0, Vec::Zero(1)), random_net({1, 6, 1}, rng), 0.05);
  const double eps = 0.01;
  const double target = 1.0 - gamma; // (1 - gamma)^d with d = 1
  const double h = 1e-6;

  double worst = 0.0;
  for (int n = 0; n < 10; ++n) {
    const PhaseState z(random_vec(1, rng, 1.0), random_vec(1, rng, 1.0));
    Mat jac(2, 2);
    for (int col = 0; col < 2; ++col) {
      PhaseState hi = z, lo = z;
      (col == 0 ? hi.q(0) : hi.p(0)) += h;
      (col == 0 ? lo.q(0) : lo.p(0)) -= h;
      const PhaseState a = verlet_step(hi, m, eps, gamma);
      const PhaseState b = verlet_step(lo, m, eps, gamma);
      jac(0, col) = (a.q(0) - b.q(0)) / (2.0 * h);
      jac(1, col) = (a.p(0) - b.p(0)) / (2.0 * h);
    }
    const double det = jac(0, 0) * jac(1, 1) - jac(0, 1) * jac(1, 0);
    worst = std::max(worst, std::abs(det - target));
  }
  return below("symplectic", name, worst, 1e-6,
               "10 points, gamma=" + format_double(gamma));
}

CheckResult energy_drift_check() {
  // Harmonic well in the near-Newtonian regime; the symplectic step keeps the
  // energy error bounded instead of accumulating over 1e5 steps.
  Model m = make_fixture_model(std::make_shared<QuadraticPotential>(1, 1.0), 10.0, 1.0);
  PhaseState z = PhaseState::zero(1);
  z.q(0) = 1.0;
  const double h0 = m.energy(z).H;

  double worst = 0.0;
  const std::uint64_t steps = 100000;
  for (std::uint64_t k = 0; k < steps; ++k) {
    z = verlet_step(z, m, 0.01, 0.0);
    worst = std::max(worst, std::abs(m.energy(z).H - h0));
  }
  return below("symplectic", "energy-drift", worst, 1e-3, "1e5 steps, eps=0.01");
}

// ---------------------------------------------------------------------------
// Reversibility suite

CheckResult reversibility_check(std::uint64_t seed) {
  Rng rng = Rng::stream(seed, "check-reversibility");
  double worst = 0.0;
  for (int n = 0; n < 5; ++n) {
    Model m(random_governor(2, rng, 0.3), random_net({2, 8, 1}, rng), 0.05);
    const PhaseState z0(random_vec(2, rng, 1.0), random_vec(2, rng, 1.0));

    PhaseState z = z0;
    for (int k = 0; k < 100; ++k) z = verlet_step(z, m, 0.01, 0.0);
    z.p = -z.p;
    for (int k = 0; k < 100; ++k) z = verlet_step(z, m, 0.01, 0.0);
    z.p = -z.p;

    const double err = std::max((z.q - z0.q).lpNorm<Eigen::Infinity>(),
                                (z.p - z0.p).lpNorm<Eigen::Infinity>());
    worst = std::max(worst, err);
  }
  return below("reversibility", "momentum-flip", worst, 1e-10,
               "5 instances, 100 steps each way");
}

// ---------------------------------------------------------------------------
// Velocity bound suite

CheckResult speed_limit_check(std::uint64_t seed) {
  Rng rng = Rng::stream(seed, "check-speed-limit");
  double worst = 0.0;
  for (int g = 0; g < 10; ++g) {
    const Eigen::Index d = 1 + static_cast<Eigen::Index>(rng.index(4));
    const KineticGovernor gov = random_governor(d, rng, 1.0);
    for (int n = 0; n < 1000; ++n) {
      const double mag = std::pow(10.0, rng.uniform(-3.0, 6.0));
      const Vec p = mag * random_unit(d, rng);
      const double ratio = gov.mass_norm(gov.velocity(p)) / gov.c;
      worst = std::max(worst, ratio);
    }
  }
  // Strict inequality: massive particles never reach c.
  return below("velocity-bound", "speed-limit", worst, 1.0, "1e4 momenta");
}

CheckResult saturation_check(std::uint64_t seed) {
  Rng rng = Rng::stream(seed, "check-saturation");
  double lowest = 2.0;
  for (int g = 0; g < 10; ++g) {
    const Eigen::Index d = 1 + static_cast<Eigen::Index>(rng.index(4));
    Vec lm(d);
    for (Eigen::Index i = 0; i < d; ++i) lm(i) = rng.uniform(-1.0, 1.0);
    const KineticGovernor gov(rng.uniform(0.5, 4.0), rng.uniform(0.1, 2.0),
                              std::move(lm));
    for (double mult : {1.0, 10.0, 1000.0}) {
      for (int n = 0; n < 30; ++n) {
        const Vec p = 1e4 * gov.m0 * gov.c * mult * random_unit(d, rng);
        lowest = std::min(lowest, gov.mass_norm(gov.velocity(p)) / gov.c);
      }
    }
  }
  return result("velocity-bound", "saturation", lowest, 0.999, lowest >= 0.999,
                "momenta from 1e4 m0 c up");
}

CheckResult displacement_check(std::uint64_t seed) {
  Rng rng = Rng::stream(seed, "check-displacement");
  double worst = 0.0;
  for (int n = 0; n < 10; ++n) {
    Vec lm(2);
    lm << 0.3 * rng.normal(), 0.3 * rng.normal();
    const KineticGovernor gov(rng.uniform(1.0, 4.0), rng.uniform(0.5, 2.0), lm);
    Model m(gov, random_net({2, 8, 1}, rng), 0.05);
    const double eps = rng.uniform(0.005, 0.05);
    const double gamma = (n % 2 == 0) ? 0.0 : 0.05;
    const double mag = std::pow(10.0, rng.uniform(0.0, 3.0));
    PhaseState z(random_vec(2, rng, 1.0), mag * random_unit(2, rng));

    for (int k = 0; k < 200; ++k) {
      const PhaseState next = verlet_step(z, m, eps, gamma);
      const double ratio = m.governor.mass_norm(next.q - z.q) / (eps * m.governor.c);
      worst = std::max(worst, ratio);
      z = next;
    }
  }
  return result("velocity-bound", "step-displacement", worst, 1.0, worst <= 1.0,
                "2000 steps across 10 rollouts");
}

// ---------------------------------------------------------------------------
// Boltzmann suite

CheckResult boltzmann_check(std::uint64_t seed) {
  // Separable H: the q-marginal is exp(-V / kB T) no matter the kinetic form,
  // so a unit quadratic well must show Var(q) = kB T / k. Large c keeps the
  // discretization bias of the first-order noise update small.
  const double kT = 0.5;
  const double stiffness = 1.0;
  Model m = make_fixture_model(std::make_shared<QuadraticPotential>(1, stiffness),
                               10.0, 1.0);
  LangevinConfig cfg =
      LangevinConfig::constant(kT, 0.5, Rng::stream(seed, "check-boltzmann").next());
  const double eps = 0.02;
  const std::uint64_t burn_in = 100000;
  const std::uint64_t samples = 1000000;

  PhaseState z = PhaseState::zero(1);
  z.q(0) = 1.0;
  Rng noise = Rng::stream(cfg.seed, "langevin-noise");

  double mean = 0.0, m2 = 0.0;
  std::uint64_t count = 0;
  for (std::uint64_t k = 0; k < burn_in + samples; ++k) {
    z = langevin_step(z, m, eps, cfg, k, noise);
    if (k < burn_in) continue;
    ++count;
    const double x = z.q(0);
    const double d0 = x - mean;
    mean += d0 / static_cast<double>(count);
    m2 += d0 * (x - mean);
  }
  const double var = m2 / static_cast<double>(count - 1);
  const double target = kT / stiffness;
  const double observed = std::abs(var - target) / target;
  return below("boltzmann", "quadratic-well-variance", observed, 0.05,
               "var=" + format_double(var) + " target=" + format_double(target) +
                   " eps=" + format_double(eps) + " n=1e6");
}

} // namespace

// ---------------------------------------------------------------------------
// Suites

std::vector<CheckResult> run_gradient_checks(std::uint64_t seed) {
  return {kinetic_velocity_check(seed),  kinetic_log_mass_check(seed),
          potential_input_check(seed),   parameter_gradient_check(seed),
          kinetic_hvp_check(seed),       potential_hvp_check(seed),
          mixed_gradient_check(seed),    bptt_check(seed)};
}

std::vector<CheckResult> run_symplectic_checks(std::uint64_t seed) {
  return {jacobian_det_check(seed, 0.0, "volume-conservative"),
          jacobian_det_check(seed, 0.1, "volume-dissipative"), energy_drift_check()};
}

std::vector<CheckResult> run_reversibility_checks(std::uint64_t seed) {
  return {reversibility_check(seed)};
}

std::vector<CheckResult> run_velocity_bound_checks(std::uint64_t seed) {
  return {speed_limit_check(seed), saturation_check(seed), displacement_check(seed)};
}

std::vector<CheckResult> run_boltzmann_checks(std::uint64_t seed) {
  return {boltzmann_check(seed)};
}

std::vector<CheckResult> run_checks(const std::string& suite, std::uint64_t seed) {
  if (suite == "gradients") return run_gradient_checks(seed);
  if (suite == "symplectic") return run_symplectic_checks(seed);
  if (suite == "reversibility") return run_reversibility_checks(seed);
  if (suite == "velocity-bound") return run_velocity_bound_checks(seed);
  if (suite == "boltzmann") return run_boltzmann_checks(seed);
  if (suite == "all") {
    std::vector<CheckResult> out;
    for (const char* name :
         {"gradients", "symplectic", "reversibility", "velocity-bound", "boltzmann"}) {
      std::vector<CheckResult> part = run_checks(name, seed);
      out.insert(out.end(), part.begin(), part.end());
    }
    return out;
  }
  throw InvalidArgument("unknown check suite '" + suite + "'");
}

std::string check_summary_line(const CheckResult& r) {
  std::string line = "check suite=" + r.suite + " name=" + r.name + " pass=" +
                     (r.passed ? "1" : "0") + " observed=" + format_double(r.observed) +
                     " bound=" + format_double(r.bound);
  if (!r.detail.empty()) line += " detail=\"" + r.detail + "\"";
  return line;
}

bool all_passed(const std::vector<CheckResult>& results) {
  for (const CheckResult& r : results)
    if (!r.passed) return false;
  return true;
}

} // namespace chlu
