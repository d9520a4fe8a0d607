#include "lsp/prox.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "lsp/rng.hpp"

namespace lsp {

Regularizer Regularizer::zero() { return Regularizer(Kind::zero); }

Regularizer Regularizer::l1(double tau) {
  if (tau < 0.0) throw UsageError("l1 weight must be nonnegative");
  Regularizer r(Kind::l1);
  r.tau_ = tau;
  return r;
}

Regularizer Regularizer::box(Vec lo, Vec hi) {
  if (lo.size() != hi.size()) throw DimensionError("box bounds must have equal size");
  for (std::size_t i = 0; i < lo.size(); ++i) {
    if (lo[i] > hi[i]) throw UsageError("box bounds must satisfy lo <= hi");
  }
  Regularizer r(Kind::box);
  r.lo_ = std::move(lo);
  r.hi_ = std::move(hi);
  return r;
}

Regularizer Regularizer::ball(double radius) {
  if (radius <= 0.0) throw UsageError("ball radius must be positive");
  Regularizer r(Kind::ball);
  r.radius_ = radius;
  return r;
}

Vec Regularizer::prox(const Vec& v, double eta) const {
  if (eta <= 0.0) throw UsageError("prox: eta must be positive");
  switch (kind_) {
    case Kind::zero:
      return v;
    case Kind::l1: {
      const double th = eta * tau_;
      Vec out(v.size());
      for (std::size_t i = 0; i < v.size(); ++i) {
        const double mag = std::max(std::abs(v[i]) - th, 0.0);
        out[i] = v[i] >= 0.0 ? mag : -mag;
      }
      return out;
    }
    case Kind::box: {
      if (v.size() != lo_.size()) throw DimensionError("box prox: dimension mismatch");
      Vec out(v.size());
      for (std::size_t i = 0; i < v.size(); ++i) {
        out[i] = std::clamp(v[i], lo_[i], hi_[i]);
      }
      return out;
    }
    case Kind::ball: {
      const double n = norm2(v);
      if (n <= radius_) return v;
      return vscale(v, radius_ / n);
    }
  }
  return v;
}

double Regularizer::value(const Vec& v) const {
  constexpr double inf = std::numeric_limits<double>::infinity();
  switch (kind_) {
    case Kind::zero:
      return 0.0;
    case Kind::l1: {
      double s = 0.0;
      for (double x : v) s += std::abs(x);
      return tau_ * s;
    }
    case Kind::box: {
      if (v.size() != lo_.size()) throw DimensionError("box value: dimension mismatch");
      for (std::size_t i = 0; i < v.size(); ++i) {
        if (v[i] < lo_[i] - 1e-12 || v[i] > hi_[i] + 1e-12) return inf;
      }
      return 0.0;
    }
    case Kind::ball:
      return norm2(v) <= radius_ + 1e-12 ? 0.0 : inf;
  }
  return 0.0;
}

std::string Regularizer::name() const {
  switch (kind_) {
    case Kind::zero:
      return "zero";
    case Kind::l1:
      return "l1(" + std::to_string(tau_) + ")";
    case Kind::box:
      return "box";
    case Kind::ball:
      return "ball(" + std::to_string(radius_) + ")";
  }
  return "?";
}

Vec prox(const Regularizer& reg, const Vec& v, double eta) { return reg.prox(v, eta); }

double composite_objective(const QuadraticObjective& obj, const Regularizer& reg,
                           const Vec& theta) {
  return obj.loss(theta) + reg.value(theta);
}

std::vector<Vec> prox_gradient_run(const QuadraticObjective& obj, const Regularizer& reg,
                                   double eta, const Vec& theta0, std::size_t steps) {
  const double hi = 2.0 / obj.lip();
  if (!(eta > 0.0 && eta < hi)) {
    throw UsageError("prox_gradient_run: eta must lie in (0, " + std::to_string(hi) +
                     ") = (0, 2/lip)");
  }
  if (theta0.size() != obj.dim()) {
    throw DimensionError("prox_gradient_run: theta0 does not match objective dimension");
  }
  std::vector<Vec> trajectory;
  trajectory.reserve(steps + 1);
  trajectory.push_back(theta0);
  Vec theta = theta0;
  for (std::size_t k = 0; k < steps; ++k) {
    const Vec grad = obj.gradient(theta);
    Vec half(theta);
    for (std::size_t i = 0; i < half.size(); ++i) half[i] -= eta * grad[i];
    theta = reg.prox(half, eta);
    trajectory.push_back(theta);
  }
  return trajectory;
}

NonexpansivenessReport nonexpansiveness_check(const Regularizer& reg,
                                              const QuadraticObjective* obj, double eta,
                                              std::size_t pairs, std::size_t dim,
                                              std::uint64_t seed, double tolerance) {
  if (pairs == 0) throw UsageError("nonexpansiveness_check: need at least one pair");
  if (eta <= 0.0) throw UsageError("nonexpansiveness_check: eta must be positive");
  const CounterRng rng(seed);

  NonexpansivenessReport rep;
  rep.pairs = pairs;
  rep.tolerance = tolerance;
  double worst_firm = -std::numeric_limits<double>::infinity();
  double worst_lip = 0.0;

  for (std::size_t i = 0; i < pairs; ++i) {
    Vec u = rng.normal_vec(i, 0, dim);
    Vec v = rng.normal_vec(i, 1, dim);
    for (std::size_t j = 0; j < dim; ++j) {
      u[j] *= 3.0;  // spread pairs across and beyond typical feasible sets
      v[j] *= 3.0;
    }
    const Vec tu = reg.prox(u, eta);
    const Vec tv = reg.prox(v, eta);
    const Vec dt = vsub(tu, tv);
    const Vec duv = vsub(u, v);
    // Firm nonexpansiveness: |Tu - Tv|^2 <= <Tu - Tv, u - v>.
    worst_firm = std::max(worst_firm, dot(dt, dt) - dot(dt, duv));

    if (obj != nullptr && dim == obj->dim()) {
      const Vec gu = obj->gradient(u);
      const Vec gv = obj->gradient(v);
      Vec su(u), sv(v);
      for (std::size_t j = 0; j < dim; ++j) {
        su[j] -= eta * gu[j];
        sv[j] -= eta * gv[j];
      }
      const Vec fu = reg.prox(su, eta);
      const Vec fv = reg.prox(sv, eta);
      const double den = norm2(duv);
      if (den > 0.0) worst_lip = std::max(worst_lip, norm2(vsub(fu, fv)) / den);
    }
  }

  rep.max_firm_violation = worst_firm;
  rep.max_composite_lipschitz = worst_lip;
  rep.firm_ok = worst_firm <= tolerance;
  rep.composite_ok = obj == nullptr || worst_lip <= 1.0 + tolerance;
  return rep;
}

}  // namespace lsp
