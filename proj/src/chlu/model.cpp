#include "chlu/model.hpp"

namespace chlu {

Model make_net_model(std::vector<int> layer_dims, double c, double m0, double alpha,
                     std::uint64_t seed) {
  if (layer_dims.empty()) throw InvalidArgument("model: empty layer dims");
  const Eigen::Index d = layer_dims.front();
  auto net = std::make_shared<PotentialNet>(PotentialNet::init(std::move(layer_dims), seed));
  return Model(KineticGovernor::unit(d, c, m0), std::move(net), alpha);
}

Model make_fixture_model(std::shared_ptr<Potential> potential, double c, double m0,
                         double alpha) {
  const Eigen::Index d = potential->dim();
  return Model(KineticGovernor::unit(d, c, m0), std::move(potential), alpha);
}

ParamGradient model_energy_grad_params(const Model& m, const PhaseState& z) {
  z.require_valid();
  const PotentialNet* net = m.net();
  if (!net) throw InvalidArgument("model has no trainable potential");
  ParamGradient g = potential_grad_params(*net, z.q);
  g.log_mass = m.governor.log_mass_grad(z.p);
  return g;
}

} // namespace chlu
