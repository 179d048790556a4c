#pragma once

#include <memory>
#include <vector>

#include "chlu/phase.hpp"

namespace chlu {

// Scalar potential energy over position space. PotentialNet is the learnable
// implementation; the analytic subclasses below serve as integrator fixtures.
class Potential {
public:
  virtual ~Potential() = default;

  virtual Eigen::Index dim() const = 0;
  virtual double value(const Vec& q) const = 0;
  virtual Vec grad_input(const Vec& q) const = 0;

  // Hessian action grad^2 V(q) . v, approximated by a symmetric difference of
  // the exact input gradient:
  //   (grad V(q + h v) - grad V(q - h v)) / (2 h),
  //   h = 1e-4 * max(1, |q|) / max(1, |v|)
  virtual Vec hessian_vector_product(const Vec& q, const Vec& v) const;
};

// V(q) = 0 everywhere.
class ZeroPotential final : public Potential {
public:
  explicit ZeroPotential(Eigen::Index d) : d_(d) {}
  Eigen::Index dim() const override { return d_; }
  double value(const Vec&) const override { return 0.0; }
  Vec grad_input(const Vec& q) const override { return Vec::Zero(q.size()); }
  Vec hessian_vector_product(const Vec&, const Vec& v) const override {
    return Vec::Zero(v.size());
  }

private:
  Eigen::Index d_;
};

// V(q) = (k/2) |q|^2. k < 0 gives the inverted (unstable) well.
class QuadraticPotential final : public Potential {
public:
  QuadraticPotential(Eigen::Index d, double k = 1.0) : d_(d), k_(k) {}
  Eigen::Index dim() const override { return d_; }
  double value(const Vec& q) const override { return 0.5 * k_ * q.squaredNorm(); }
  Vec grad_input(const Vec& q) const override { return k_ * q; }
  Vec hessian_vector_product(const Vec&, const Vec& v) const override { return k_ * v; }
  double stiffness() const { return k_; }

private:
  Eigen::Index d_;
  double k_;
};

// Feed-forward potential V_theta(q): tanh hidden layers, linear scalar output.
// Carries exact reverse-mode gradients with respect to both the input and
// every parameter. layer_dims = [d, h1, ..., hk, 1].
class PotentialNet final : public Potential {
public:
  // Zero-parameter network of the given shape.
  explicit PotentialNet(std::vector<int> layer_dims);

  // Hidden weights ~ U(-1/sqrt(fan_in), 1/sqrt(fan_in)), hidden biases zero,
  // output layer zero so V = 0 identically at init. Deterministic given seed.
  static PotentialNet init(std::vector<int> layer_dims, std::uint64_t seed);

  Eigen::Index dim() const override { return layer_dims_.front(); }
  const std::vector<int>& layer_dims() const { return layer_dims_; }
  std::size_t layer_count() const { return weights_.size(); }

  double value(const Vec& q) const override;
  Vec grad_input(const Vec& q) const override;

  std::vector<Mat>& weights() { return weights_; }
  std::vector<Vec>& biases() { return biases_; }
  const std::vector<Mat>& weights() const { return weights_; }
  const std::vector<Vec>& biases() const { return biases_; }

  std::size_t parameter_count() const;
  bool all_finite() const;

  // Forward pass retaining per-layer activations for the backward passes.
  struct Tape {
    std::vector<Vec> activations; // a_0 = q, ..., a_L (a_L scalar)
  };
  double forward(const Vec& q, Tape* tape) const;

private:
  void check_input(const Vec& q) const;

  std::vector<int> layer_dims_;
  std::vector<Mat> weights_; // weights_[l]: rows = layer_dims[l+1], cols = layer_dims[l]
  std::vector<Vec> biases_;
};

// Gradient (or update direction) over every learnable slot of a model:
// the potential's weights and biases plus the governor's log_mass.
struct ParamGradient {
  std::vector<Mat> weights;
  std::vector<Vec> biases;
  Vec log_mass;

  static ParamGradient zero_like(const PotentialNet& net, Eigen::Index d);

  void add_scaled(const ParamGradient& other, double scale);
  void scale(double s);
  double squared_norm() const;
  double norm() const;
  bool all_finite() const;
  bool same_shape(const ParamGradient& other) const;
};

// Exact gradient of V(q) with respect to every weight and bias. The log_mass
// slot is returned zero; callers differentiating the full Hamiltonian fill it
// from the governor.
ParamGradient potential_grad_params(const PotentialNet& net, const Vec& q);

// Gradient with respect to parameters of the directional derivative
// w . grad_q V(q), via a symmetric difference of potential_grad_params with
// the same step rule as the Hessian-vector product.
ParamGradient potential_mixed_grad_params(const PotentialNet& net, const Vec& q,
                                          const Vec& w);

} // namespace chlu
