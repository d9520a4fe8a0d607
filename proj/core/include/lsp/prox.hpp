#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "lsp/models.hpp"

namespace lsp {

/// Proper convex lower-semicontinuous regularizers with closed-form
/// proximal maps: weighted l1 (soft threshold), box and ball indicators
/// (projections), and zero. No inner iterative solver anywhere, so the
/// nonexpansiveness properties are checkable to machine precision.
class Regularizer {
 public:
  enum class Kind { zero, l1, box, ball };

  static Regularizer zero();
  static Regularizer l1(double tau);
  static Regularizer box(Vec lo, Vec hi);
  static Regularizer ball(double radius);

  /// prox_{eta R}(v): argmin_x 1/2 |x - v|^2 + eta R(x), in closed form.
  Vec prox(const Vec& v, double eta) const;

  /// R(v); +infinity outside the feasible set of an indicator.
  double value(const Vec& v) const;

  Kind kind() const { return kind_; }
  std::string name() const;
  double tau() const { return tau_; }
  double radius() const { return radius_; }

 private:
  Regularizer(Kind kind) : kind_(kind) {}
  Kind kind_;
  double tau_ = 0.0;
  double radius_ = 0.0;
  Vec lo_, hi_;
};

/// Free-function form of the proximal map.
Vec prox(const Regularizer& reg, const Vec& v, double eta);

/// Composite objective value loss(theta) + R(theta).
double composite_objective(const QuadraticObjective& obj, const Regularizer& reg,
                           const Vec& theta);

/// Deterministic proximal gradient trajectory theta^{k+1} =
/// prox_{eta R}(theta^k - eta grad(theta^k)), steps+1 states. Requires
/// 0 < eta < 2/lip, the range on which the gradient half-step is
/// nonexpansive; out-of-range eta is rejected with the admissible interval
/// in the message.
std::vector<Vec> prox_gradient_run(const QuadraticObjective& obj, const Regularizer& reg,
                                   double eta, const Vec& theta0, std::size_t steps);

struct NonexpansivenessReport {
  std::size_t pairs = 0;
  double max_firm_violation = 0.0;       // max of |Tu-Tv|^2 - <Tu-Tv, u-v>
  double max_composite_lipschitz = 0.0;  // max |F(u)-F(v)| / |u-v|, F = prox o grad-step
  bool firm_ok = false;
  bool composite_ok = false;
  double tolerance = 0.0;
};

/// Property check over random pairs: firm nonexpansiveness of the prox and,
/// when an objective is supplied, the one-step Lipschitz constant of the
/// composite prox-gradient map (at most one).
NonexpansivenessReport nonexpansiveness_check(const Regularizer& reg,
                                              const QuadraticObjective* obj, double eta,
                                              std::size_t pairs, std::size_t dim,
                                              std::uint64_t seed, double tolerance = 1e-10);

}  // namespace lsp
