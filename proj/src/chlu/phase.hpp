#pragma once

#include <Eigen/Core>

#include "chlu/errors.hpp"

namespace chlu {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

// Latent state z = (q, p): generalized positions and momenta of equal length.
struct PhaseState {
  Vec q;
  Vec p;

  PhaseState() = default;
  PhaseState(Vec q, Vec p) : q(std::move(q)), p(std::move(p)) {}

  static PhaseState zero(Eigen::Index d) { return {Vec::Zero(d), Vec::Zero(d)}; }

  Eigen::Index dim() const { return q.size(); }

  bool is_finite() const { return q.allFinite() && p.allFinite(); }

  // Both vectors present, equal length d >= 1, all components finite.
  void require_valid() const {
    if (q.size() != p.size() || q.size() < 1)
      throw InvalidArgument("phase state: q and p must have identical length d >= 1");
    if (!is_finite()) throw InvalidArgument("non-finite state");
  }
};

inline bool all_finite(const Vec& v) { return v.allFinite(); }

} // namespace chlu
