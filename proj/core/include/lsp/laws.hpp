#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>

#include "lsp/profile.hpp"

namespace lsp {

/// State-dependent inner Jacobian G(x) of a residual block x + h g(x).
using JacobianField = std::function<Matrix(const Vec&)>;

/// Dissipativity constants measured over a probe set:
///   m    dissipation rate, -max over probes of the symmetric-part top
///        eigenvalue of G
///   m_g  max over probes of |G|_2
/// Estimates hold on the sampled set only unless certified is set (caller
/// supplied the constants).
struct DissipativityEstimate {
  double m = 0.0;
  double m_g = 0.0;
  std::size_t samples = 0;
  std::vector<Vec> sample_states;
  bool certified = false;

  bool dissipative() const { return m > 0.0; }
};

DissipativityEstimate estimate_dissipativity(const JacobianField& g,
                                             const std::vector<Vec>& probes);
DissipativityEstimate estimate_dissipativity(const LayerSpec& residual_layer,
                                             const std::vector<Vec>& probes);
DissipativityEstimate certified_dissipativity(double m, double m_g);

/// Default probe cloud: `count` states in the unit-radius ball around
/// `center`, from a fixed seed.
std::vector<Vec> sample_probes(const Vec& center, std::size_t count = 64,
                               std::uint64_t seed = 0x70726f6265ULL,
                               double radius = 1.0);

/// Step-size report for a residual block:
///   h_max       = 2 m / m_g^2
///   c_x         = sqrt(max(0, 1 - 2 h m + h^2 m_g^2))   one-step factor
///   admissible  = m > 0 and 0 < h < h_max
///   alpha_x_bound = (1/2) log(1 - 2 h m + h^2 m_g^2), present when admissible
struct CflReport {
  double h = 0.0;
  double h_max = 0.0;
  double c_x = 1.0;
  bool admissible = false;
  std::optional<double> alpha_x_bound;
  double m = 0.0;
  double m_g = 0.0;
};

CflReport cfl_report(const DissipativityEstimate& est, double h);

struct SpectralLawReport {
  bool applicable = false;
  std::string reason;
  double rho = 0.0;
  std::vector<double> weight_norms;  // per layer
  std::vector<double> measured;      // sigma_x at depths 1..L
  std::vector<double> bound;         // rho^k
  std::vector<bool> satisfied;
  bool all_satisfied = false;
  double exponent_bound = 0.0;  // log rho
};

/// Checks the depth-contraction law for a feedforward net whose weights all
/// have spectral norm at most rho < 1: measured sigma_x at depth k against
/// rho^k, plus the exponent bound log rho. Inapplicability (rho >= 1, or
/// some |W_k| > rho, or residual layers present) is reported, not thrown.
SpectralLawReport spectral_law_check(const NetworkSpec& net, double rho, const Vec& x,
                                     double tolerance = 1e-9);

struct OneStepBoundReport {
  bool holds = false;
  double worst_ratio = 0.0;  // max measured norm / c_x
  double worst_norm = 0.0;
  double c_x = 0.0;
  std::size_t checked = 0;
};

/// Verifies |d(x + h g(x))/dx|_2 <= c_x(h) + tol at every probe, for every
/// residual layer of the net whose step matches h.
OneStepBoundReport verify_one_step_bound(const NetworkSpec& net,
                                         const DissipativityEstimate& est, double h,
                                         const std::vector<Vec>& probes,
                                         double tolerance = 1e-8);

}  // namespace lsp
