#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>

#include "lsp/models.hpp"
#include "lsp/prox.hpp"

namespace lsp {

/// One-step flow map of a system under study, possibly time-varying.
using FlowMap = std::function<Vec(std::size_t t, const Vec&)>;

using EnergyFn = std::function<double(const Vec&)>;

struct Coercivity {
  double c1 = 0.0;
  double c2 = 0.0;
  bool certified = false;
};

/// Exactly coercive quadratic energy: weight * |s - center|^2, c1 = c2 = weight.
struct QuadraticEnergy {
  Vec center;
  double weight = 1.0;
  double value(const Vec& s) const;
  Coercivity coercivity() const { return {weight, weight, true}; }
  EnergyFn fn() const;
};

/// Truncated converse energy for a contractive flow:
///   E(s) = max over 0 <= n <= horizon of lambda^-n |flow_n(s)|^2.
/// When lambda exceeds the squared one-step contraction, the per-n terms are
/// dominated by a geometric sequence with ratio contraction^2 / lambda, the
/// maximum sits at small n, and one-step decay E(next) <= lambda E(current)
/// holds exactly despite the truncation.
class ConverseEnergy {
 public:
  struct Evaluation {
    double value = 0.0;
    std::size_t attained_at = 0;
  };

  ConverseEnergy(FlowMap flow, double lambda, std::size_t horizon, double contraction);

  Evaluation evaluate(const Vec& s) const;
  double value(const Vec& s) const { return evaluate(s).value; }
  EnergyFn fn() const;

  double lambda() const { return lambda_; }
  std::size_t horizon() const { return horizon_; }
  double measured_contraction() const { return contraction_; }
  /// Geometric ratio of the truncated tail.
  double tail_ratio() const { return contraction_ * contraction_ / lambda_; }
  /// Bound factor on the neglected tail relative to |s|^2.
  double truncation_factor() const;

 private:
  FlowMap flow_;
  double lambda_;
  std::size_t horizon_;
  double contraction_;
};

/// Tagged energy functional together with its coercivity data.
///   quadratic  exactly coercive, c1 = c2 = weight
///   converse   truncated-supremum energy of a contractive flow, c1 = 1
///   objective  composite loss + regularizer, proper l.s.c., bounded below
class EnergySpec {
 public:
  enum class Kind { quadratic, converse, objective };

  static EnergySpec quadratic(Vec center, double weight = 1.0);
  static EnergySpec converse(ConverseEnergy energy);
  static EnergySpec objective(const QuadraticObjective& obj, const Regularizer& reg);

  double value(const Vec& s) const { return eval_(s); }
  const EnergyFn& fn() const { return eval_; }
  Kind kind() const { return kind_; }
  const Coercivity& coercivity() const { return coercivity_; }

 private:
  EnergySpec(Kind kind, EnergyFn eval, Coercivity c)
      : kind_(kind), eval_(std::move(eval)), coercivity_(c) {}
  Kind kind_;
  EnergyFn eval_;
  Coercivity coercivity_;
};

struct ConverseBuildResult {
  bool accepted = false;
  std::string reason;
  double measured_contraction = 0.0;
  std::optional<ConverseEnergy> energy;

  /// The accepted construction wrapped as a tagged energy.
  EnergySpec as_energy_spec() const;
};

/// Measures the one-step contraction factor over probe pairs, then accepts
/// lambda only if it strictly exceeds the squared measured contraction
/// (otherwise the truncated supremum would grow with the horizon).
ConverseBuildResult build_converse_energy(const FlowMap& flow, double lambda,
                                          std::size_t horizon,
                                          const std::vector<Vec>& probes);

/// Default admissible lambda strictly inside (c^2, 1): c^2 + 0.1 (1 - c^2).
double suggest_lambda(double contraction);

struct DissipationStep {
  std::size_t t = 0;
  double delta_e = 0.0;
  double required = 0.0;  // -gamma |s|^2
  double budget = 0.0;
  bool satisfied = false;
};

struct DissipationReport {
  std::vector<DissipationStep> steps;
  double gamma_used = 0.0;
  bool all_satisfied = false;
  std::optional<std::size_t> first_violation;
};

/// Per-step check of E(s^{t+1}) - E(s^t) <= -gamma |s^t|^2 + budget_t
/// along a trajectory. The state norm is taken on the vectors as given;
/// unperturbed runs use a zero budget.
DissipationReport check_dissipation(const EnergyFn& energy, const std::vector<Vec>& trajectory,
                                    double gamma, const std::vector<double>& remainder_budget = {},
                                    double slack = 1e-12);

/// Sufficient-decrease check for proximal gradient trajectories:
/// Phi(t^{k+1}) - Phi(t^k) <= -c_eta |t^{k+1} - t^k|^2 with
/// c_eta = 1/(2 eta) - lip/2. For eta above 1/lip the constant is
/// nonpositive and the check degenerates to plain descent (weak mode).
struct ProxDescentReport {
  DissipationReport report;
  double c_eta = 0.0;
  bool weak_mode = false;
};
ProxDescentReport prox_descent_check(const QuadraticObjective& obj, const Regularizer& reg,
                                     const std::vector<Vec>& trajectory, double eta);

/// Deterministic system wrapper for the equivalence experiments.
struct SystemUnderStudy {
  std::size_t dim = 0;
  FlowMap flow;
  /// Spectral norm of the one-step Jacobian at a state (used to measure
  /// signature bounds); optional.
  std::function<double(const Vec&)> jacobian_norm;
  std::string name;
};

SystemUnderStudy make_network_system(const NetworkSpec& net);
/// Mean SGD flow theta -> theta - eta grad(theta).
SystemUnderStudy make_sgd_mean_system(const QuadraticObjective& obj, double eta);

enum class EquivalenceDirection { signatures_to_energy, energy_to_signatures };

struct EquivalenceReport {
  EquivalenceDirection direction;
  bool succeeded = false;
  bool construction_accepted = false;
  double measured_contraction = 0.0;
  double measured_signature_sup = 0.0;
  double lambda = 0.0;
  double gamma = 0.0;
  double measured_exponent = 0.0;   // per-step log-decay of the energy
  double exponent_to_gamma_ratio = 0.0;
  std::optional<std::size_t> violation_step;
  std::size_t trajectories = 0;
  std::string detail;
};

/// Runs one direction of the boundedness <-> dissipation equivalence on a
/// deterministic system.
///   signatures_to_energy: measure the one-step contraction, build the
///     converse energy (rejecting non-contractive systems), and check
///     one-step dissipation along sampled trajectories. For a
///     non-contractive system the consistent outcome is rejection plus an
///     exhibited quadratic-energy violation.
///   energy_to_signatures: check dissipation of the quadratic energy around
///     the flow's fixed point and measure the signature supremum along the
///     same trajectories.
EquivalenceReport equivalence_experiment(const SystemUnderStudy& system,
                                         EquivalenceDirection direction,
                                         std::size_t trajectories, std::size_t steps,
                                         std::uint64_t seed,
                                         std::optional<double> lambda_override = {},
                                         std::size_t horizon = 64);

/// Empirical first-order response constant C of an energy along a flow:
/// measures |E(flow(s + d)) - E(flow(s))| / |d| over probe pairs. Reported,
/// never certified.
double estimate_remainder_constant(const EnergyFn& energy, const FlowMap& flow,
                                   const std::vector<Vec>& probes, double delta);

}  // namespace lsp
