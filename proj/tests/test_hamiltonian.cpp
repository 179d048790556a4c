#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <limits>
#include <memory>

#include "chlu/model.hpp"
#include "chlu/rng.hpp"
#include "support/oracles.hpp"

using namespace chlu;

namespace {

Vec random_vec(Eigen::Index d, Rng& rng, double scale = 1.0) {
  Vec v(d);
  for (Eigen::Index i = 0; i < d; ++i) v(i) = scale * rng.normal();
  return v;
}

KineticGovernor random_governor(Eigen::Index d, Rng& rng) {
  Vec lm = random_vec(d, rng, 0.5);
  return KineticGovernor(rng.uniform(0.5, 4.0), rng.uniform(0.1, 2.0), lm);
}

PotentialNet jittered_net(std::vector<int> dims, Rng& rng) {
  PotentialNet net = PotentialNet::init(dims, rng.next());
  for (Mat& w : net.weights())
    for (Eigen::Index i = 0; i < w.size(); ++i) w.data()[i] += 0.4 * rng.normal();
  for (Vec& b : net.biases())
    for (Eigen::Index i = 0; i < b.size(); ++i) b(i) += 0.4 * rng.normal();
  return net;
}

} // namespace

// ---------------------------------------------------------------------------
// Kinetic governor

TEST_CASE("kinetic energy and velocity at a worked point") {
  // c = 2, m0 = 1, M = diag(1, 4), p = (2, 2):
  //   T = sqrt(4 (4 + 1) + 16) = 6,  grad T = c^2 M^-1 p / T = (4/3, 1/3)
  Vec lm(2);
  lm << 0.0, std::log(4.0);
  KineticGovernor gov(2.0, 1.0, lm);
  Vec p(2);
  p << 2.0, 2.0;

  CHECK(gov.energy(p) == doctest::Approx(6.0).epsilon(1e-14));
  const Vec v = gov.velocity(p);
  CHECK(v(0) == doctest::Approx(4.0 / 3.0).epsilon(1e-14));
  CHECK(v(1) == doctest::Approx(1.0 / 3.0).epsilon(1e-14));
}

TEST_CASE("kinetic energy matches the independent definition") {
  Rng rng(11);
  for (int trial = 0; trial < 50; ++trial) {
    const Eigen::Index d = 1 + static_cast<Eigen::Index>(rng.index(5));
    const KineticGovernor gov = random_governor(d, rng);
    const Vec p = random_vec(d, rng, rng.uniform(0.1, 20.0));
    const double ref = oracles::kinetic_energy(gov.c, gov.m0, gov.log_mass, p);
    CHECK(gov.energy(p) == doctest::Approx(ref).epsilon(1e-14));
  }
}

TEST_CASE("rest energy is the kinetic floor") {
  Rng rng(12);
  for (int trial = 0; trial < 30; ++trial) {
    const Eigen::Index d = 1 + static_cast<Eigen::Index>(rng.index(4));
    const KineticGovernor gov = random_governor(d, rng);
    const double rest = gov.m0 * gov.c * gov.c;
    CHECK(gov.energy(Vec::Zero(d)) == doctest::Approx(rest).epsilon(1e-14));
    CHECK(gov.energy(random_vec(d, rng, 5.0)) >= rest);
  }
}

TEST_CASE("velocity stays inside the light cone and saturates") {
  Rng rng(13);
  for (int trial = 0; trial < 200; ++trial) {
    const Eigen::Index d = 1 + static_cast<Eigen::Index>(rng.index(5));
    const KineticGovernor gov = random_governor(d, rng);
    const double mag = std::pow(10.0, rng.uniform(-3.0, 6.0));
    Vec p = random_vec(d, rng);
    if (p.norm() < 1e-9) p(0) = 1.0;
    p *= mag / p.norm();

    const double speed = gov.mass_norm(gov.velocity(p));
    CHECK(speed < gov.c);
  }

  // Far beyond m0 c the M-weighted speed is within 0.1% of c.
  const KineticGovernor gov = KineticGovernor::unit(3, 2.0, 0.5);
  Vec p(3);
  p << 1.0, -2.0, 2.0;
  p *= 1e4 * gov.m0 * gov.c / p.norm();
  CHECK(gov.mass_norm(gov.velocity(p)) >= 0.999 * gov.c);
}

TEST_CASE("massless governor is defined away from the origin only") {
  const KineticGovernor gov(1.5, 0.0, Vec::Zero(2));
  Vec p(2);
  p << 3.0, 4.0;
  // T = c sqrt(p^T p) for unit masses.
  CHECK(gov.energy(p) == doctest::Approx(7.5).epsilon(1e-14));
  CHECK_THROWS_AS(gov.velocity(Vec::Zero(2)), InvalidArgument);
}

TEST_CASE("kinetic gradients match finite differences") {
  Rng rng(14);
  for (int trial = 0; trial < 30; ++trial) {
    const Eigen::Index d = 1 + static_cast<Eigen::Index>(rng.index(4));
    const KineticGovernor gov = random_governor(d, rng);
    const Vec p = random_vec(d, rng, rng.uniform(0.2, 10.0));

    const Vec fd_v = oracles::fd_grad([&](const Vec& x) { return gov.energy(x); }, p);
    CHECK(oracles::rel_diff(fd_v, gov.velocity(p)) < 1e-6);

    const Vec fd_lm = oracles::fd_grad(
        [&](const Vec& lm) {
          return oracles::kinetic_energy(gov.c, gov.m0, lm, p);
        },
        gov.log_mass);
    CHECK(oracles::rel_diff(fd_lm, gov.log_mass_grad(p)) < 1e-6);
  }
}

TEST_CASE("kinetic second-order terms match finite differences") {
  Rng rng(15);
  for (int trial = 0; trial < 20; ++trial) {
    const Eigen::Index d = 1 + static_cast<Eigen::Index>(rng.index(4));
    const KineticGovernor gov = random_governor(d, rng);
    const Vec p = random_vec(d, rng, rng.uniform(0.2, 5.0));
    Vec w = random_vec(d, rng);
    if (w.norm() < 1e-9) w(0) = 1.0;
    w.normalize();

    const double h = 1e-5 * std::max(1.0, p.norm());
    const Vec fd_h = (gov.velocity(p + h * w) - gov.velocity(p - h * w)) / (2.0 * h);
    CHECK(oracles::rel_diff(fd_h, gov.hessian_vp(p, w)) < 1e-6);

    // d(a . v)/d(log_mass) against a finite difference of the velocity.
    const Vec a = random_vec(d, rng);
    const Vec exact = gov.velocity_log_mass_grad(p, a);
    Vec fd(d);
    for (Eigen::Index j = 0; j < d; ++j) {
      KineticGovernor hi = gov, lo = gov;
      const double hj = 1e-6 * std::max(1.0, std::abs(gov.log_mass(j)));
      hi.log_mass(j) += hj;
      lo.log_mass(j) -= hj;
      fd(j) = (a.dot(hi.velocity(p)) - a.dot(lo.velocity(p))) / (2.0 * hj);
    }
    CHECK(oracles::rel_diff(fd, exact) < 1e-6);
  }
}

// ---------------------------------------------------------------------------
// Potentials

TEST_CASE("fixture potentials") {
  const ZeroPotential zero(3);
  CHECK(zero.value(Vec::Ones(3)) == 0.0);
  CHECK(zero.grad_input(Vec::Ones(3)).norm() == 0.0);

  const QuadraticPotential well(2, 2.0);
  Vec q(2);
  q << 1.0, -3.0;
  CHECK(well.value(q) == doctest::Approx(10.0).epsilon(1e-14));
  CHECK(oracles::max_abs_diff(well.grad_input(q), 2.0 * q) == 0.0);

  const QuadraticPotential hill(2, -1.0);
  CHECK(hill.value(q) == doctest::Approx(-5.0).epsilon(1e-14));
}

TEST_CASE("potential net starts flat with a posed hidden stack") {
  Rng rng(16);
  const PotentialNet net = PotentialNet::init({3, 16, 8, 1}, 77);
  for (int trial = 0; trial < 10; ++trial) {
    const Vec q = random_vec(3, rng, 2.0);
    CHECK(net.value(q) == 0.0);
    CHECK(net.grad_input(q).norm() == 0.0);
  }
  // Hidden weights are drawn, not zero; only the head starts silent.
  CHECK(net.weights().front().cwiseAbs().maxCoeff() > 0.0);
  CHECK(net.weights().back().cwiseAbs().maxCoeff() == 0.0);

  const PotentialNet same = PotentialNet::init({3, 16, 8, 1}, 77);
  const PotentialNet other = PotentialNet::init({3, 16, 8, 1}, 78);
  CHECK(oracles::max_abs_diff(Vec(same.weights()[0].reshaped()),
                              Vec(net.weights()[0].reshaped())) == 0.0);
  CHECK(oracles::max_abs_diff(Vec(other.weights()[0].reshaped()),
                              Vec(net.weights()[0].reshaped())) > 0.0);
}

TEST_CASE("potential net value matches a duplicate forward pass") {
  Rng rng(17);
  for (int trial = 0; trial < 20; ++trial) {
    const Eigen::Index d = 1 + static_cast<Eigen::Index>(rng.index(4));
    const PotentialNet net = jittered_net({static_cast<int>(d), 7, 5, 1}, rng);
    const Vec q = random_vec(d, rng, 1.5);
    const double ref = oracles::net_value(net.weights(), net.biases(), q);
    CHECK(net.value(q) == doctest::Approx(ref).epsilon(1e-14));
  }
}

TEST_CASE("potential net input gradient matches finite differences") {
  Rng rng(18);
  for (int trial = 0; trial < 20; ++trial) {
    const Eigen::Index d = 1 + static_cast<Eigen::Index>(rng.index(4));
    const PotentialNet net = jittered_net({static_cast<int>(d), 9, 1}, rng);
    const Vec q = random_vec(d, rng, 1.5);
    const Vec fd = oracles::fd_grad([&](const Vec& x) { return net.value(x); }, q);
    CHECK(oracles::rel_diff(fd, net.grad_input(q)) < 1e-6);
  }
}

TEST_CASE("linear net exposes exact parameter gradients") {
  // [d, 1] has no hidden layer: V = w . q + b, so dV/dw = q^T and dV/db = 1.
  Rng rng(19);
  PotentialNet net = jittered_net({3, 1}, rng);
  const Vec q = random_vec(3, rng, 2.0);

  const ParamGradient g = potential_grad_params(net, q);
  CHECK(oracles::max_abs_diff(Vec(g.weights[0].transpose()), q) == 0.0);
  CHECK(g.biases[0](0) == 1.0);
  CHECK(g.log_mass.norm() == 0.0);
}

TEST_CASE("parameter gradients match finite differences") {
  Rng rng(20);
  for (int trial = 0; trial < 10; ++trial) {
    const Eigen::Index d = 1 + static_cast<Eigen::Index>(rng.index(3));
    PotentialNet net = jittered_net({static_cast<int>(d), 6, 4, 1}, rng);
    const Vec q = random_vec(d, rng, 1.0);
    const ParamGradient g = potential_grad_params(net, q);

    for (std::size_t l = 0; l < net.weights().size(); ++l) {
      for (Eigen::Index i = 0; i < net.weights()[l].size(); ++i) {
        double* slot = net.weights()[l].data() + i;
        const double x0 = *slot;
        const double h = 1e-6 * std::max(1.0, std::abs(x0));
        *slot = x0 + h;
        const double f1 = net.value(q);
        *slot = x0 - h;
        const double f0 = net.value(q);
        *slot = x0;
        const double fd = (f1 - f0) / (2.0 * h);
        CHECK(std::abs(fd - g.weights[l].data()[i]) < 1e-5);
      }
      for (Eigen::Index i = 0; i < net.biases()[l].size(); ++i) {
        double* slot = net.biases()[l].data() + i;
        const double x0 = *slot;
        const double h = 1e-6;
        *slot = x0 + h;
        const double f1 = net.value(q);
        *slot = x0 - h;
        const double f0 = net.value(q);
        *slot = x0;
        CHECK(std::abs((f1 - f0) / (2.0 * h) - g.biases[l](i)) < 1e-5);
      }
    }
  }
}

TEST_CASE("hessian vector product agrees with a gradient difference") {
  Rng rng(21);
  for (int trial = 0; trial < 10; ++trial) {
    const PotentialNet net = jittered_net({2, 8, 1}, rng);
    const Vec q = random_vec(2, rng, 1.0);
    Vec w = random_vec(2, rng);
    if (w.norm() < 1e-9) w(0) = 1.0;
    w.normalize();

    const Vec hvp = net.hessian_vector_product(q, w);
    const double h = 3.3e-5 * std::max(1.0, q.norm());
    const Vec fd = (net.grad_input(q + h * w) - net.grad_input(q - h * w)) / (2.0 * h);
    CHECK(oracles::rel_diff(fd, hvp) < 1e-3);
  }
}

TEST_CASE("mixed parameter gradient on the linear net") {
  // grad_q V = w^T for [d, 1], so w_dir . grad_q V differentiates to the
  // direction itself in the weight slot and to zero in the bias slot.
  Rng rng(22);
  PotentialNet net = jittered_net({3, 1}, rng);
  const Vec q = random_vec(3, rng);
  Vec dir = random_vec(3, rng);
  dir.normalize();

  const ParamGradient g = potential_mixed_grad_params(net, q, dir);
  CHECK(oracles::max_abs_diff(Vec(g.weights[0].transpose()), dir) < 1e-9);
  CHECK(std::abs(g.biases[0](0)) < 1e-9);
}

TEST_CASE("param gradient arithmetic") {
  Rng rng(23);
  const PotentialNet net = jittered_net({2, 4, 1}, rng);
  ParamGradient a = potential_grad_params(net, Vec::Ones(2));
  const ParamGradient b = potential_grad_params(net, -Vec::Ones(2));

  ParamGradient sum = a;
  sum.add_scaled(b, 2.0);
  CHECK(sum.weights[0](0, 0) ==
        doctest::Approx(a.weights[0](0, 0) + 2.0 * b.weights[0](0, 0)).epsilon(1e-14));

  const double n = a.norm();
  a.scale(3.0);
  CHECK(a.norm() == doctest::Approx(3.0 * n).epsilon(1e-12));
  CHECK(a.all_finite());
  CHECK(a.same_shape(b));
}

// ---------------------------------------------------------------------------
// Model

TEST_CASE("model energy is the exact sum of its parts") {
  Rng rng(24);
  Model m = make_net_model({2, 8, 1}, 2.5, 1.0, 0.03, 5);
  for (int trial = 0; trial < 20; ++trial) {
    const PhaseState z(random_vec(2, rng, 2.0), random_vec(2, rng, 3.0));
    const EnergyBreakdown e = m.energy(z);
    CHECK(e.H == e.T + e.V + e.C);
    CHECK(e.T == m.governor.energy(z.p));
    CHECK(e.V == m.potential->value(z.q));
    CHECK(e.C == m.alpha * z.q.squaredNorm());
  }
}

TEST_CASE("model force includes the confinement pull") {
  Rng rng(25);
  Model m(random_governor(2, rng), std::make_shared<PotentialNet>(jittered_net({2, 6, 1}, rng)),
          0.1);
  for (int trial = 0; trial < 10; ++trial) {
    const Vec q = random_vec(2, rng, 1.5);
    const Vec fd = oracles::fd_grad(
        [&](const Vec& x) { return m.potential->value(x) + m.alpha * x.squaredNorm(); },
        q);
    CHECK(oracles::rel_diff(-fd, m.force(q)) < 1e-6);
  }
}

TEST_CASE("model parameter gradient covers weights, biases, and log_mass") {
  Rng rng(26);
  Model m(random_governor(2, rng), std::make_shared<PotentialNet>(jittered_net({2, 5, 1}, rng)),
          0.05);
  const PhaseState z(random_vec(2, rng), random_vec(2, rng, 2.0));
  const ParamGradient g = model_energy_grad_params(m, z);

  CHECK(oracles::rel_diff(g.log_mass, m.governor.log_mass_grad(z.p)) == 0.0);

  Vec fd_lm(2);
  for (Eigen::Index j = 0; j < 2; ++j) {
    Model hi = m, lo = m;
    KineticGovernor ghi = m.governor, glo = m.governor;
    const double h = 1e-6;
    ghi.log_mass(j) += h;
    glo.log_mass(j) -= h;
    hi.governor = ghi;
    lo.governor = glo;
    fd_lm(j) = (hi.energy(z).H - lo.energy(z).H) / (2.0 * h);
  }
  CHECK(oracles::rel_diff(fd_lm, g.log_mass) < 1e-6);
}

TEST_CASE("fixture models refuse parameter gradients") {
  Model m = make_fixture_model(std::make_shared<QuadraticPotential>(2, 1.0), 2.0, 1.0);
  const PhaseState z = PhaseState::zero(2);
  CHECK_THROWS_WITH_AS(model_energy_grad_params(m, z), "model has no trainable potential",
                       InvalidArgument);
}

TEST_CASE("model validation") {
  CHECK_THROWS_AS(Model(KineticGovernor::unit(2), std::make_shared<ZeroPotential>(3), 0.0),
                  InvalidArgument);
  CHECK_THROWS_AS(Model(KineticGovernor::unit(2), std::make_shared<ZeroPotential>(2), -0.1),
                  InvalidArgument);
  CHECK_THROWS_AS(KineticGovernor(0.0, 1.0, Vec::Zero(2)), InvalidArgument);
  CHECK_THROWS_AS(KineticGovernor(1.0, -1.0, Vec::Zero(2)), InvalidArgument);
}

// ---------------------------------------------------------------------------
// Phase states and rng

TEST_CASE("phase state validation") {
  Vec q(2), p(2);
  q << 1.0, 2.0;
  p << 0.0, 1.0;
  PhaseState ok(q, p);
  ok.require_valid();

  q(0) = std::numeric_limits<double>::quiet_NaN();
  CHECK_THROWS_WITH_AS(PhaseState(q, p).require_valid(), "non-finite state",
                       InvalidArgument);
  CHECK_THROWS_AS(PhaseState(Vec::Zero(2), Vec::Zero(3)).require_valid(),
                  InvalidArgument);
}

TEST_CASE("rng streams are deterministic and label-separated") {
  Rng a = Rng::stream(42, "alpha");
  Rng b = Rng::stream(42, "alpha");
  Rng c = Rng::stream(42, "beta");
  Rng d = Rng::stream(43, "alpha");

  bool all_equal = true, label_split = false, seed_split = false;
  for (int i = 0; i < 100; ++i) {
    const std::uint64_t x = a.next();
    all_equal = all_equal && (x == b.next());
    label_split = label_split || (x != c.next());
    seed_split = seed_split || (x != d.next());
  }
  CHECK(all_equal);
  CHECK(label_split);
  CHECK(seed_split);

  Rng u(7);
  for (int i = 0; i < 1000; ++i) {
    const double x = u.uniform();
    CHECK(x >= 0.0);
    CHECK(x < 1.0);
  }
  for (int i = 0; i < 1000; ++i) CHECK(u.index(17) < 17);
  for (int i = 0; i < 100; ++i) CHECK(std::isfinite(u.normal()));
}
