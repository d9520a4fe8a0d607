#pragma once

#include <array>
#include <optional>

#include "lsp/profile.hpp"

namespace lsp {

struct Horizon {
  std::size_t depth = 0;
  std::size_t time = 0;
  std::size_t total() const { return depth + time; }
};

/// Reported stand-in for log 0 when a signature family is identically zero.
inline constexpr double kLogZeroSentinel = -1e9;

/// Finite-horizon exponent estimates: log of the supremum of each signature
/// family over the profile entries, divided by depth + time. The asymptotic
/// limit is never claimed; callers choose the grid path by choosing which
/// entries the profile contains.
struct ExponentEstimate {
  double alpha_x = 0.0;
  double alpha_theta = 0.0;
  double alpha_u = 0.0;
  Horizon horizon;
  std::array<double, 3> sup_signatures{0.0, 0.0, 0.0};
  std::array<bool, 3> zero_family{false, false, false};

  double alpha(std::size_t family) const {
    return family == 0 ? alpha_x : (family == 1 ? alpha_theta : alpha_u);
  }
};

ExponentEstimate estimate_exponents(const StabilityProfile& profile);

/// The sub-profile at the terminal grid index: entries with maximal depth
/// and maximal time. Feeding this to estimate_exponents realizes the
/// deepest-point reading of the finite-horizon exponent, the one under
/// which a rho-contractive family reports log(rho) instead of washing out
/// toward zero.
StabilityProfile terminal_slice(const StabilityProfile& profile);

/// Depth replication: the network stacked r times for each requested r,
/// profiled at x, with the per-horizon estimate formed from the terminal
/// entry. The per-horizon values converge like (1/L) log(sup) with the
/// alignment constant decaying as |log C| / L.
std::vector<ExponentEstimate> exponent_sequence(const NetworkSpec& net, const Vec& x,
                                                const std::vector<std::size_t>& horizons,
                                                NormKind norm = NormKind::op2,
                                                bool generalized = false);

/// Least-squares slope of log(sup signature) against horizon length over
/// the last half of the estimates; a trend summary for the reported
/// sequence. family: 0 = x, 1 = theta, 2 = u.
double trend_slope(const std::vector<ExponentEstimate>& estimates, std::size_t family);

struct StabilityVerdict {
  bool stable = false;
  bool strict = false;
  std::optional<std::array<double, 3>> indices;
  double margin = 0.0;
};

/// stable when every estimate <= margin; strict when every estimate
/// < -margin, in which case the estimates themselves are reported as
/// stability indices.
StabilityVerdict classify(const ExponentEstimate& est, double margin = 1e-6);

}  // namespace lsp
