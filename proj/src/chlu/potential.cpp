#include "chlu/potential.hpp"

#include <cmath>

#include "chlu/rng.hpp"

namespace chlu {

Vec Potential::hessian_vector_product(const Vec& q, const Vec& v) const {
  if (v.size() != dim())
    throw InvalidArgument("hessian_vector_product: direction dimension mismatch");
  const double h = 1e-4 * std::max(1.0, q.norm()) / std::max(1.0, v.norm());
  return (grad_input(q + h * v) - grad_input(q - h * v)) / (2.0 * h);
}

// ---------------------------------------------------------------------------
// PotentialNet

PotentialNet::PotentialNet(std::vector<int> layer_dims)
    : layer_dims_(std::move(layer_dims)) {
  if (layer_dims_.size() < 2)
    throw InvalidArgument("potential net: need at least [d, 1] layer dims");
  for (int d : layer_dims_)
    if (d < 1) throw InvalidArgument("potential net: layer dims must be positive");
  if (layer_dims_.back() != 1)
    throw InvalidArgument("output dimension must be 1");
  for (std::size_t l = 0; l + 1 < layer_dims_.size(); ++l) {
    weights_.emplace_back(Mat::Zero(layer_dims_[l + 1], layer_dims_[l]));
    biases_.emplace_back(Vec::Zero(layer_dims_[l + 1]));
  }
}

PotentialNet PotentialNet::init(std::vector<int> layer_dims, std::uint64_t seed) {
  PotentialNet net(std::move(layer_dims));
  Rng rng = Rng::stream(seed, "potential-init");
  // All layers except the last get uniform weights; the output layer stays
  // zero so the freshly built potential is flat.
  for (std::size_t l = 0; l + 1 < net.weights_.size(); ++l) {
    const double bound = 1.0 / std::sqrt(static_cast<double>(net.weights_[l].cols()));
    for (Eigen::Index i = 0; i < net.weights_[l].rows(); ++i)
      for (Eigen::Index j = 0; j < net.weights_[l].cols(); ++j)
        net.weights_[l](i, j) = rng.uniform(-bound, bound);
  }
  return net;
}

void PotentialNet::check_input(const Vec& q) const {
  if (q.size() != dim())
    throw InvalidArgument("potential net: input dimension mismatch");
}

double PotentialNet::forward(const Vec& q, Tape* tape) const {
  check_input(q);
  Vec a = q;
  if (tape) {
    tape->activations.clear();
    tape->activations.push_back(a);
  }
  const std::size_t L = weights_.size();
  for (std::size_t l = 0; l < L; ++l) {
    Vec z = weights_[l] * a + biases_[l];
    if (l + 1 < L)
      a = z.array().tanh().matrix();
    else
      a = std::move(z); // linear output
    if (tape) tape->activations.push_back(a);
  }
  return a(0);
}

double PotentialNet::value(const Vec& q) const { return forward(q, nullptr); }

Vec PotentialNet::grad_input(const Vec& q) const {
  Tape tape;
  forward(q, &tape);
  const std::size_t L = weights_.size();
  // Backprop a unit adjoint on the scalar output down to the input.
  Vec delta = Vec::Ones(1);
  for (std::size_t l = L; l-- > 0;) {
    Vec g = weights_[l].transpose() * delta;
    if (l > 0) {
      const Vec& a = tape.activations[l]; // a_l = tanh(z_{l-1})
      delta = (g.array() * (1.0 - a.array().square())).matrix();
    } else {
      return g;
    }
  }
  return delta; // unreachable for valid nets
}

std::size_t PotentialNet::parameter_count() const {
  std::size_t n = 0;
  for (std::size_t l = 0; l < weights_.size(); ++l)
    n += static_cast<std::size_t>(weights_[l].size()) +
         static_cast<std::size_t>(biases_[l].size());
  return n;
}

bool PotentialNet::all_finite() const {
  for (const Mat& w : weights_)
    if (!w.allFinite()) return false;
  for (const Vec& b : biases_)
    if (!b.allFinite()) return false;
  return true;
}

// ---------------------------------------------------------------------------
// ParamGradient

ParamGradient ParamGradient::zero_like(const PotentialNet& net, Eigen::Index d) {
  ParamGradient g;
  for (const Mat& w : net.weights()) g.weights.emplace_back(Mat::Zero(w.rows(), w.cols()));
  for (const Vec& b : net.biases()) g.biases.emplace_back(Vec::Zero(b.size()));
  g.log_mass = Vec::Zero(d);
  return g;
}

void ParamGradient::add_scaled(const ParamGradient& other, double scale) {
  if (!same_shape(other))
    throw InvalidArgument("param gradient: shape mismatch in accumulate");
  for (std::size_t l = 0; l < weights.size(); ++l) {
    weights[l] += scale * other.weights[l];
    biases[l] += scale * other.biases[l];
  }
  log_mass += scale * other.log_mass;
}

void ParamGradient::scale(double s) {
  for (Mat& w : weights) w *= s;
  for (Vec& b : biases) b *= s;
  log_mass *= s;
}

double ParamGradient::squared_norm() const {
  double n = 0.0;
  for (const Mat& w : weights) n += w.squaredNorm();
  for (const Vec& b : biases) n += b.squaredNorm();
  n += log_mass.squaredNorm();
  return n;
}

double ParamGradient::norm() const { return std::sqrt(squared_norm()); }

bool ParamGradient::all_finite() const {
  for (const Mat& w : weights)
    if (!w.allFinite()) return false;
  for (const Vec& b : biases)
    if (!b.allFinite()) return false;
  return log_mass.allFinite();
}

bool ParamGradient::same_shape(const ParamGradient& other) const {
  if (weights.size() != other.weights.size() || biases.size() != other.biases.size())
    return false;
  for (std::size_t l = 0; l < weights.size(); ++l) {
    if (weights[l].rows() != other.weights[l].rows() ||
        weights[l].cols() != other.weights[l].cols() ||
        biases[l].size() != other.biases[l].size())
      return false;
  }
  return log_mass.size() == other.log_mass.size();
}

ParamGradient potential_grad_params(const PotentialNet& net, const Vec& q) {
  PotentialNet::Tape tape;
  net.forward(q, &tape);
  ParamGradient g = ParamGradient::zero_like(net, net.dim());
  const std::size_t L = net.weights().size();
  Vec delta = Vec::Ones(1); // adjoint of the pre-activation of layer l
  for (std::size_t l = L; l-- > 0;) {
    g.weights[l] = delta * tape.activations[l].transpose();
    g.biases[l] = delta;
    if (l > 0) {
      Vec back = net.weights()[l].transpose() * delta;
      const Vec& a = tape.activations[l];
      delta = (back.array() * (1.0 - a.array().square())).matrix();
    }
  }
  return g;
}

ParamGradient potential_mixed_grad_params(const PotentialNet& net, const Vec& q,
                                          const Vec& w) {
  if (w.size() != net.dim())
    throw InvalidArgument("mixed grad: direction dimension mismatch");
  const double h = 1e-4 * std::max(1.0, q.norm()) / std::max(1.0, w.norm());
  ParamGradient g = potential_grad_params(net, q + h * w);
  g.add_scaled(potential_grad_params(net, q - h * w), -1.0);
  g.scale(1.0 / (2.0 * h));
  return g;
}

} // namespace chlu
