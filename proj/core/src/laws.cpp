#include "lsp/laws.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "lsp/numerics.hpp"
#include "lsp/rng.hpp"

namespace lsp {

DissipativityEstimate estimate_dissipativity(const JacobianField& g,
                                             const std::vector<Vec>& probes) {
  if (probes.empty()) throw UsageError("estimate_dissipativity: no probes given");
  DissipativityEstimate est;
  est.samples = probes.size();
  est.sample_states = probes;
  double max_sym = -std::numeric_limits<double>::infinity();
  double max_norm = 0.0;
  for (const Vec& p : probes) {
    const Matrix jac = g(p);
    if (!jac.square()) {
      throw DimensionError("estimate_dissipativity: inner Jacobian must be square");
    }
    max_sym = std::max(max_sym, symmetric_part_max_eig(jac));
    max_norm = std::max(max_norm, spectral_norm_value(jac));
  }
  est.m = -max_sym;
  est.m_g = max_norm;
  return est;
}

DissipativityEstimate estimate_dissipativity(const LayerSpec& residual_layer,
                                             const std::vector<Vec>& probes) {
  if (!residual_layer.residual()) {
    throw UsageError("estimate_dissipativity: layer is not a residual block");
  }
  return estimate_dissipativity(
      [&residual_layer](const Vec& x) { return layer_inner_jacobian(residual_layer, x); },
      probes);
}

DissipativityEstimate certified_dissipativity(double m, double m_g) {
  if (m_g < 0.0) throw UsageError("certified_dissipativity: m_g must be nonnegative");
  DissipativityEstimate est;
  est.m = m;
  est.m_g = m_g;
  est.samples = 0;
  est.certified = true;
  return est;
}

std::vector<Vec> sample_probes(const Vec& center, std::size_t count, std::uint64_t seed,
                               double radius) {
  if (count == 0) throw UsageError("sample_probes: count must be >= 1");
  CounterRng rng(seed);
  std::vector<Vec> probes;
  probes.reserve(count);
  for (std::size_t i = 0; i < count; ++i) probes.push_back(rng.ball_point(i, center, radius));
  return probes;
}

CflReport cfl_report(const DissipativityEstimate& est, double h) {
  if (est.m_g <= 0.0) throw UsageError("cfl_report: m_g must be positive");
  if (h < 0.0) throw UsageError("cfl_report: h must be nonnegative");
  CflReport r;
  r.h = h;
  r.m = est.m;
  r.m_g = est.m_g;
  r.h_max = 2.0 * est.m / (est.m_g * est.m_g);
  const double radicand = 1.0 - 2.0 * h * est.m + h * h * est.m_g * est.m_g;
  r.c_x = std::sqrt(std::max(0.0, radicand));
  r.admissible = est.m > 0.0 && h > 0.0 && h < r.h_max;
  if (r.admissible) r.alpha_x_bound = 0.5 * std::log(radicand);
  return r;
}

SpectralLawReport spectral_law_check(const NetworkSpec& net, double rho, const Vec& x,
                                     double tolerance) {
  SpectralLawReport rep;
  rep.rho = rho;
  if (!(rho > 0.0 && rho < 1.0)) {
    rep.applicable = false;
    rep.reason = "rho must lie in (0,1)";
    return rep;
  }
  for (std::size_t k = 0; k < net.depth(); ++k) {
    if (net.layer(k).residual()) {
      rep.applicable = false;
      rep.reason = "layer " + std::to_string(k) + " is a residual block";
      return rep;
    }
    const double wn = spectral_norm_value(net.layer(k).weight);
    rep.weight_norms.push_back(wn);
    if (wn > rho + tolerance) {
      rep.applicable = false;
      rep.reason = "layer " + std::to_string(k) + " weight norm " + std::to_string(wn) +
                   " exceeds rho";
      return rep;
    }
  }
  rep.applicable = true;
  rep.exponent_bound = std::log(rho);

  const StabilityProfile profile = profile_network(net, x, /*generalized=*/false);
  rep.all_satisfied = true;
  double b = 1.0;
  for (std::size_t k = 1; k <= net.depth(); ++k) {
    b *= rho;
    const double measured = profile.entries[k - 1].sigma_x;
    rep.measured.push_back(measured);
    rep.bound.push_back(b);
    const bool ok = measured <= b + tolerance;
    rep.satisfied.push_back(ok);
    rep.all_satisfied = rep.all_satisfied && ok;
  }
  return rep;
}

OneStepBoundReport verify_one_step_bound(const NetworkSpec& net,
                                         const DissipativityEstimate& est, double h,
                                         const std::vector<Vec>& probes,
                                         double tolerance) {
  bool any_residual = false;
  for (std::size_t k = 0; k < net.depth(); ++k) {
    if (net.layer(k).residual()) {
      any_residual = true;
      if (std::abs(*net.layer(k).residual_step - h) > 1e-12) {
        throw UsageError("verify_one_step_bound: layer " + std::to_string(k) +
                         " has a different step size than h");
      }
    }
  }
  if (!any_residual) throw UsageError("verify_one_step_bound: net has no residual layers");

  const CflReport cfl = cfl_report(est, h);
  OneStepBoundReport rep;
  rep.c_x = cfl.c_x;
  rep.holds = true;
  for (const Vec& p : probes) {
    for (std::size_t k = 0; k < net.depth(); ++k) {
      const LayerSpec& layer = net.layer(k);
      if (!layer.residual()) continue;
      const double n = spectral_norm_value(layer_jacobian(layer, p));
      ++rep.checked;
      rep.worst_norm = std::max(rep.worst_norm, n);
      if (n > cfl.c_x + tolerance) rep.holds = false;
    }
  }
  rep.worst_ratio = cfl.c_x > 0.0
                        ? rep.worst_norm / cfl.c_x
                        : (rep.worst_norm <= tolerance ? 0.0
                                                       : std::numeric_limits<double>::infinity());
  return rep;
}

}  // namespace lsp
