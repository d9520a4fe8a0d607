#include "lsp/energy.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "lsp/profile.hpp"
#include "lsp/rng.hpp"

namespace lsp {

double QuadraticEnergy::value(const Vec& s) const {
  const Vec d = vsub(s, center);
  return weight * dot(d, d);
}

EnergyFn QuadraticEnergy::fn() const {
  return [self = *this](const Vec& s) { return self.value(s); };
}

ConverseEnergy::ConverseEnergy(FlowMap flow, double lambda, std::size_t horizon,
                               double contraction)
    : flow_(std::move(flow)), lambda_(lambda), horizon_(horizon), contraction_(contraction) {
  if (horizon_ == 0) throw UsageError("converse energy horizon must be >= 1");
}

ConverseEnergy::Evaluation ConverseEnergy::evaluate(const Vec& s) const {
  Evaluation best{dot(s, s), 0};
  Vec state = s;
  double weight = 1.0;
  for (std::size_t n = 1; n <= horizon_; ++n) {
    state = flow_(n - 1, state);
    weight /= lambda_;
    const double term = weight * dot(state, state);
    if (term > best.value) best = {term, n};
  }
  return best;
}

EnergyFn ConverseEnergy::fn() const {
  return [self = *this](const Vec& s) { return self.value(s); };
}

double ConverseEnergy::truncation_factor() const {
  return std::pow(tail_ratio(), static_cast<double>(horizon_ + 1));
}

EnergySpec EnergySpec::quadratic(Vec center, double weight) {
  if (weight <= 0.0) throw UsageError("quadratic energy weight must be positive");
  QuadraticEnergy q{std::move(center), weight};
  return EnergySpec(Kind::quadratic, q.fn(), q.coercivity());
}

EnergySpec EnergySpec::converse(ConverseEnergy energy) {
  // The n = 0 term pins the lower coercivity constant at 1; the upper
  // constant is 1 as well whenever the tail ratio is below one.
  const Coercivity c{1.0, std::max(1.0, 1.0 / energy.lambda()), true};
  return EnergySpec(Kind::converse, energy.fn(), c);
}

EnergySpec EnergySpec::objective(const QuadraticObjective& obj, const Regularizer& reg) {
  // Proper and bounded below (by zero); not quadratically coercive in
  // general, so the certificate is withheld.
  return EnergySpec(
      Kind::objective,
      [obj, reg](const Vec& theta) { return composite_objective(obj, reg, theta); },
      Coercivity{0.0, 0.0, false});
}

EnergySpec ConverseBuildResult::as_energy_spec() const {
  if (!accepted || !energy.has_value()) {
    throw UsageError("construction was rejected; no energy to wrap");
  }
  return EnergySpec::converse(*energy);
}

ConverseBuildResult build_converse_energy(const FlowMap& flow, double lambda,
                                          std::size_t horizon,
                                          const std::vector<Vec>& probes) {
  if (!(lambda > 0.0 && lambda < 1.0)) {
    throw UsageError("build_converse_energy: lambda must lie in (0,1)");
  }
  if (horizon == 0) throw UsageError("build_converse_energy: horizon must be >= 1");
  if (probes.size() < 2) {
    throw UsageError("build_converse_energy: need at least two probe states");
  }

  // One-step contraction measured over all probe pairs.
  double c = 0.0;
  std::vector<Vec> mapped;
  mapped.reserve(probes.size());
  for (const Vec& p : probes) mapped.push_back(flow(0, p));
  for (std::size_t i = 0; i < probes.size(); ++i) {
    for (std::size_t j = i + 1; j < probes.size(); ++j) {
      const double den = norm2(vsub(probes[i], probes[j]));
      if (den == 0.0) continue;
      c = std::max(c, norm2(vsub(mapped[i], mapped[j])) / den);
    }
  }

  ConverseBuildResult result;
  result.measured_contraction = c;
  if (lambda <= c * c) {
    result.accepted = false;
    result.reason = "lambda " + std::to_string(lambda) +
                    " does not exceed squared measured contraction " +
                    std::to_string(c * c) + "; the truncated supremum would grow with the horizon";
    return result;
  }
  result.accepted = true;
  result.energy = ConverseEnergy(flow, lambda, horizon, c);
  return result;
}

double suggest_lambda(double contraction) {
  const double c2 = contraction * contraction;
  if (c2 >= 1.0) throw UsageError("suggest_lambda: system is not contractive");
  return c2 + 0.1 * (1.0 - c2);
}

DissipationReport check_dissipation(const EnergyFn& energy, const std::vector<Vec>& trajectory,
                                    double gamma, const std::vector<double>& remainder_budget,
                                    double slack) {
  if (trajectory.size() < 2) {
    throw UsageError("check_dissipation: trajectory must contain at least two states");
  }
  if (gamma <= 0.0) throw UsageError("check_dissipation: gamma must be positive");
  if (!remainder_budget.empty() && remainder_budget.size() < trajectory.size() - 1) {
    throw UsageError("check_dissipation: budget shorter than trajectory");
  }

  DissipationReport report;
  report.gamma_used = gamma;
  report.all_satisfied = true;
  double e_curr = energy(trajectory[0]);
  for (std::size_t t = 0; t + 1 < trajectory.size(); ++t) {
    const double e_next = energy(trajectory[t + 1]);
    DissipationStep step;
    step.t = t;
    step.delta_e = e_next - e_curr;
    step.required = -gamma * dot(trajectory[t], trajectory[t]);
    step.budget = remainder_budget.empty() ? 0.0 : remainder_budget[t];
    if (std::isinf(e_curr) && e_curr > 0.0) {
      // Stepping out of the infeasible region always dissipates.
      step.satisfied = true;
    } else {
      step.satisfied = step.delta_e <= step.required + step.budget +
                                           slack * std::max(1.0, std::abs(e_curr));
    }
    if (!step.satisfied && !report.first_violation) report.first_violation = t;
    report.all_satisfied = report.all_satisfied && step.satisfied;
    report.steps.push_back(step);
    e_curr = e_next;
  }
  return report;
}

ProxDescentReport prox_descent_check(const QuadraticObjective& obj, const Regularizer& reg,
                                     const std::vector<Vec>& trajectory, double eta) {
  if (eta <= 0.0) throw UsageError("prox_descent_check: eta must be positive");
  if (trajectory.size() < 2) {
    throw UsageError("prox_descent_check: trajectory must contain at least two states");
  }
  ProxDescentReport out;
  out.c_eta = 1.0 / (2.0 * eta) - obj.lip() / 2.0;
  out.weak_mode = out.c_eta <= 0.0;
  const double c = out.weak_mode ? 0.0 : out.c_eta;

  DissipationReport& rep = out.report;
  rep.gamma_used = c;
  rep.all_satisfied = true;
  for (std::size_t t = 0; t + 1 < trajectory.size(); ++t) {
    const double phi_curr = composite_objective(obj, reg, trajectory[t]);
    const double phi_next = composite_objective(obj, reg, trajectory[t + 1]);
    const Vec d = vsub(trajectory[t + 1], trajectory[t]);
    DissipationStep step;
    step.t = t;
    step.delta_e = phi_next - phi_curr;
    step.required = -c * dot(d, d);
    step.budget = 0.0;
    if (std::isinf(phi_curr) && phi_curr > 0.0) {
      step.satisfied = true;
    } else {
      step.satisfied =
          step.delta_e <= step.required + 1e-12 * std::max(1.0, std::abs(phi_curr));
    }
    if (!step.satisfied && !rep.first_violation) rep.first_violation = t;
    rep.all_satisfied = rep.all_satisfied && step.satisfied;
    rep.steps.push_back(step);
  }
  return out;
}

SystemUnderStudy make_network_system(const NetworkSpec& net) {
  if (!net.square_composable()) {
    throw UsageError("network system must map its state space to itself");
  }
  SystemUnderStudy sys;
  sys.dim = net.input_dim();
  sys.name = "network";
  sys.flow = [net](std::size_t, const Vec& s) { return forward(net, s).back(); };
  sys.jacobian_norm = [net](const Vec& s) {
    const auto sens = forward_sensitivity(net, s);
    return spectral_norm_value(sens.back().s_x);
  };
  return sys;
}

SystemUnderStudy make_sgd_mean_system(const QuadraticObjective& obj, double eta) {
  if (eta <= 0.0) throw UsageError("mean flow requires eta > 0");
  SystemUnderStudy sys;
  sys.dim = obj.dim();
  sys.name = "sgd-mean";
  sys.flow = [obj, eta](std::size_t, const Vec& theta) {
    const Vec g = obj.gradient(theta);
    Vec next(theta);
    for (std::size_t i = 0; i < next.size(); ++i) next[i] -= eta * g[i];
    return next;
  };
  sys.jacobian_norm = [obj, eta](const Vec&) {
    Matrix jac = obj.hessian().scaled(-eta);
    for (std::size_t i = 0; i < jac.rows(); ++i) jac(i, i) += 1.0;
    return spectral_norm_value(jac);
  };
  return sys;
}

namespace {

// Fixed point by iteration from the origin, with a divergence guard: flows
// without an attracting equilibrium report the origin.
Vec find_fixed_point(const FlowMap& flow, std::size_t dim) {
  Vec s(dim, 0.0);
  for (int i = 0; i < 512; ++i) {
    Vec next = flow(0, s);
    if (norm2(next) > 1e6) return Vec(dim, 0.0);
    const double gap = norm2(vsub(next, s));
    s = std::move(next);
    if (gap < 1e-14) break;
  }
  return s;
}

}  // namespace

EquivalenceReport equivalence_experiment(const SystemUnderStudy& system,
                                         EquivalenceDirection direction,
                                         std::size_t trajectories, std::size_t steps,
                                         std::uint64_t seed,
                                         std::optional<double> lambda_override,
                                         std::size_t horizon) {
  if (trajectories == 0 || steps == 0) {
    throw UsageError("equivalence_experiment: need trajectories and steps");
  }
  EquivalenceReport report;
  report.direction = direction;
  report.trajectories = trajectories;

  // Energies are built in coordinates centered at the flow's equilibrium:
  // the norm the construction contracts is the distance to the fixed point.
  const Vec fixed = find_fixed_point(system.flow, system.dim);
  const FlowMap centered_flow = [&system, fixed](std::size_t t, const Vec& v) {
    return vsub(system.flow(t, vadd(v, fixed)), fixed);
  };

  const CounterRng rng(seed);
  std::vector<Vec> starts;
  starts.reserve(trajectories);
  for (std::size_t i = 0; i < trajectories; ++i) {
    starts.push_back(rng.ball_point(i, fixed, 1.0));
  }

  // Contraction measured over the start cloud plus points along one orbit.
  std::vector<Vec> probes = starts;
  {
    Vec s = starts.front();
    for (std::size_t t = 0; t < std::min<std::size_t>(steps, 8); ++t) {
      s = system.flow(t, s);
      probes.push_back(s);
    }
  }
  double contraction = 0.0;
  if (system.jacobian_norm) {
    for (const Vec& p : probes) contraction = std::max(contraction, system.jacobian_norm(p));
  } else {
    for (std::size_t i = 0; i < probes.size(); ++i) {
      for (std::size_t j = i + 1; j < probes.size(); ++j) {
        const double den = norm2(vsub(probes[i], probes[j]));
        if (den == 0.0) continue;
        contraction = std::max(contraction, norm2(vsub(system.flow(0, probes[i]),
                                                       system.flow(0, probes[j]))) /
                                                den);
      }
    }
  }
  report.measured_contraction = contraction;

  auto sample_trajectory = [&](const Vec& start) {
    std::vector<Vec> traj;
    traj.reserve(steps + 1);
    traj.push_back(start);
    for (std::size_t t = 0; t < steps; ++t) traj.push_back(system.flow(t, traj.back()));
    return traj;
  };

  double signature_sup = 0.0;
  if (system.jacobian_norm) {
    for (const Vec& s : starts) {
      double along = 1.0;
      Vec state = s;
      for (std::size_t t = 0; t < steps; ++t) {
        along *= system.jacobian_norm(state);
        signature_sup = std::max(signature_sup, along);
        state = system.flow(t, state);
      }
    }
  }
  report.measured_signature_sup = signature_sup;

  // Probe states expressed relative to the equilibrium.
  std::vector<Vec> centered_probes;
  centered_probes.reserve(probes.size());
  for (const Vec& p : probes) centered_probes.push_back(vsub(p, fixed));

  if (direction == EquivalenceDirection::signatures_to_energy) {
    if (contraction >= 1.0) {
      // Construction must be rejected; the consistent outcome exhibits a
      // quadratic-energy violation on some trajectory.
      const double lambda = lambda_override.value_or(0.9);
      ConverseBuildResult build =
          build_converse_energy(centered_flow, lambda, horizon, centered_probes);
      report.construction_accepted = build.accepted;
      const QuadraticEnergy quad{fixed, 1.0};
      bool violation_found = false;
      for (const Vec& s : starts) {
        const auto traj = sample_trajectory(s);
        const auto rep = check_dissipation(quad.fn(), traj, 1e-6);
        if (!rep.all_satisfied) {
          violation_found = true;
          report.violation_step = rep.first_violation;
          break;
        }
      }
      report.succeeded = !build.accepted && violation_found;
      report.detail = build.accepted
                          ? "construction unexpectedly accepted for a non-contractive flow"
                          : (violation_found
                                 ? "construction rejected and quadratic energy violation exhibited"
                                 : "construction rejected but no energy violation found");
      return report;
    }

    const double lambda = lambda_override.value_or(suggest_lambda(contraction));
    report.lambda = lambda;
    ConverseBuildResult build =
        build_converse_energy(centered_flow, lambda, horizon, centered_probes);
    report.construction_accepted = build.accepted;
    if (!build.accepted) {
      report.succeeded = false;
      report.detail = build.reason;
      return report;
    }
    // One-step decay E(next) <= lambda E(curr), i.e. a dissipation rate of
    // (1 - lambda) c1 with c1 = 1 for the converse energy.
    report.gamma = (1.0 - lambda);
    const EnergyFn efn = build.energy->fn();
    bool all_ok = true;
    double worst_decay = 0.0;
    for (const Vec& s : starts) {
      const auto traj = sample_trajectory(s);
      double e_curr = efn(vsub(traj[0], fixed));
      for (std::size_t t = 0; t + 1 < traj.size(); ++t) {
        const double e_next = efn(vsub(traj[t + 1], fixed));
        if (e_next > lambda * e_curr + 1e-9 * std::max(1.0, e_curr)) {
          all_ok = false;
          if (!report.violation_step) report.violation_step = t;
        }
        if (e_curr > 0.0) worst_decay = std::max(worst_decay, e_next / e_curr);
        e_curr = e_next;
      }
    }
    report.measured_exponent = worst_decay > 0.0 ? 0.5 * std::log(worst_decay)
                                                 : -std::numeric_limits<double>::infinity();
    report.exponent_to_gamma_ratio =
        report.gamma > 0.0 ? report.measured_exponent / report.gamma : 0.0;
    report.succeeded = all_ok;
    report.detail = all_ok ? "converse energy dissipates along every sampled trajectory"
                           : "energy decay violated";
    return report;
  }

  // energy_to_signatures: quadratic energy about the flow's fixed point.
  const QuadraticEnergy quad{fixed, 1.0};
  const EnergyFn efn = quad.fn();
  bool all_ok = true;
  double gamma = std::numeric_limits<double>::infinity();
  double worst_decay = 0.0;
  for (const Vec& s : starts) {
    const auto traj = sample_trajectory(s);
    double e_curr = efn(traj[0]);
    for (std::size_t t = 0; t + 1 < traj.size(); ++t) {
      const double e_next = efn(traj[t + 1]);
      const double state_sq = dot(vsub(traj[t], fixed), vsub(traj[t], fixed));
      if (state_sq > 1e-24) {
        gamma = std::min(gamma, (e_curr - e_next) / state_sq);
        if (e_curr > 0.0) worst_decay = std::max(worst_decay, e_next / e_curr);
      }
      if (e_next > e_curr + 1e-12 * std::max(1.0, e_curr)) all_ok = false;
      e_curr = e_next;
    }
  }
  if (!std::isfinite(gamma)) gamma = 0.0;
  report.gamma = std::max(gamma, 0.0);
  report.measured_exponent = worst_decay > 0.0 ? 0.5 * std::log(worst_decay)
                                               : -std::numeric_limits<double>::infinity();
  report.exponent_to_gamma_ratio =
      report.gamma > 0.0 ? report.measured_exponent / report.gamma : 0.0;
  const bool signature_bounded =
      !system.jacobian_norm || signature_sup <= std::max(1.0, contraction) + 1e-9;
  report.succeeded = all_ok && report.gamma > 0.0 && signature_bounded;
  report.detail = report.succeeded
                      ? "quadratic energy dissipates and signatures stay uniformly bounded"
                      : "dissipation or signature boundedness failed";
  return report;
}

double estimate_remainder_constant(const EnergyFn& energy, const FlowMap& flow,
                                   const std::vector<Vec>& probes, double delta) {
  if (probes.empty()) throw UsageError("estimate_remainder_constant: no probes");
  if (delta <= 0.0) throw UsageError("estimate_remainder_constant: delta must be positive");
  double worst = 0.0;
  for (const Vec& p : probes) {
    const double base = energy(flow(0, p));
    for (std::size_t j = 0; j < p.size(); ++j) {
      Vec q = p;
      q[j] += delta;
      worst = std::max(worst, std::abs(energy(flow(0, q)) - base) / delta);
    }
  }
  return worst;
}

}  // namespace lsp
