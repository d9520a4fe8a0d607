#include "lsp/exponents.hpp"

#include <algorithm>
#include <cmath>

namespace lsp {

ExponentEstimate estimate_exponents(const StabilityProfile& profile) {
  if (profile.entries.empty()) {
    throw UsageError("estimate_exponents: profile is empty");
  }
  ExponentEstimate est;
  est.horizon = {profile.max_depth(), profile.max_time()};
  if (est.horizon.total() == 0) {
    throw UsageError("estimate_exponents: profile horizon is zero");
  }

  std::array<double, 3> sup{0.0, 0.0, 0.0};
  for (const auto& e : profile.entries) {
    sup[0] = std::max(sup[0], e.sigma_x);
    sup[1] = std::max(sup[1], e.sigma_theta);
    sup[2] = std::max(sup[2], e.sigma_u);
  }
  est.sup_signatures = sup;

  const double denom = static_cast<double>(est.horizon.total());
  std::array<double, 3> alpha{};
  for (std::size_t f = 0; f < 3; ++f) {
    if (sup[f] == 0.0) {
      est.zero_family[f] = true;
      alpha[f] = kLogZeroSentinel;
    } else {
      alpha[f] = std::log(sup[f]) / denom;
    }
  }
  est.alpha_x = alpha[0];
  est.alpha_theta = alpha[1];
  est.alpha_u = alpha[2];
  return est;
}

StabilityProfile terminal_slice(const StabilityProfile& profile) {
  StabilityProfile out;
  out.norm_kind = profile.norm_kind;
  const std::size_t kmax = profile.max_depth();
  const std::size_t tmax = profile.max_time();
  for (const auto& e : profile.entries) {
    if (e.index.depth == kmax && e.index.time == tmax) out.entries.push_back(e);
  }
  return out;
}

std::vector<ExponentEstimate> exponent_sequence(const NetworkSpec& net, const Vec& x,
                                                const std::vector<std::size_t>& horizons,
                                                NormKind norm, bool generalized) {
  if (horizons.empty()) throw UsageError("exponent_sequence: no horizons given");
  if (!net.square_composable()) {
    throw UsageError("exponent_sequence: architecture is not square-composable");
  }
  std::vector<ExponentEstimate> out;
  out.reserve(horizons.size());
  for (std::size_t r : horizons) {
    if (r == 0) throw UsageError("exponent_sequence: horizon must be >= 1");
    const NetworkSpec deep = net.replicated(r);
    const StabilityProfile profile = profile_network(deep, x, generalized, norm);
    out.push_back(estimate_exponents(terminal_slice(profile)));
  }
  return out;
}

double trend_slope(const std::vector<ExponentEstimate>& estimates, std::size_t family) {
  if (family > 2) throw UsageError("trend_slope: family must be 0, 1 or 2");
  if (estimates.size() < 2) throw UsageError("trend_slope: need at least two estimates");

  const std::size_t start = estimates.size() / 2;
  double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
  std::size_t n = 0;
  for (std::size_t i = (start > 0 ? start - 1 : 0); i < estimates.size(); ++i) {
    const auto& est = estimates[i];
    if (est.zero_family[family]) continue;
    const double h = static_cast<double>(est.horizon.total());
    const double y = std::log(est.sup_signatures[family]);
    sx += h;
    sy += y;
    sxx += h * h;
    sxy += h * y;
    ++n;
  }
  if (n < 2) return kLogZeroSentinel;
  const double denom = static_cast<double>(n) * sxx - sx * sx;
  if (denom == 0.0) return kLogZeroSentinel;
  return (static_cast<double>(n) * sxy - sx * sy) / denom;
}

StabilityVerdict classify(const ExponentEstimate& est, double margin) {
  if (margin < 0.0) throw UsageError("classify: margin must be nonnegative");
  StabilityVerdict v;
  v.margin = margin;
  const std::array<double, 3> a{est.alpha_x, est.alpha_theta, est.alpha_u};
  v.stable = std::all_of(a.begin(), a.end(), [&](double e) { return e <= margin; });
  v.strict = std::all_of(a.begin(), a.end(), [&](double e) { return e < -margin; });
  if (v.strict) v.indices = a;
  return v;
}

}  // namespace lsp
