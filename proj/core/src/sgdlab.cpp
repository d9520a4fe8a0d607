#include "lsp/sgdlab.hpp"

#include <algorithm>
#include <cmath>
#include <thread>

namespace lsp {

namespace {

// Run fn(trial) for trial in [0, trials) across `threads` workers. Each
// trial writes only its own output slots, so results are identical for any
// worker count; reductions happen afterwards, single-threaded and pairwise.
void for_each_trial(std::size_t trials, unsigned threads,
                    const std::function<void(std::size_t)>& fn) {
  if (threads <= 1 || trials < 2 * threads) {
    for (std::size_t i = 0; i < trials; ++i) fn(i);
    return;
  }
  std::vector<std::thread> workers;
  const std::size_t chunk = (trials + threads - 1) / threads;
  for (unsigned w = 0; w < threads; ++w) {
    const std::size_t lo = w * chunk;
    const std::size_t hi = std::min(trials, lo + chunk);
    if (lo >= hi) break;
    workers.emplace_back([lo, hi, &fn]() {
      for (std::size_t i = lo; i < hi; ++i) fn(i);
    });
  }
  for (auto& t : workers) t.join();
}

double mean_of(std::span<const double> v) {
  return pairwise_sum(v) / static_cast<double>(v.size());
}

// Standard error of the mean.
double sem_of(std::span<const double> v, double mean) {
  if (v.size() < 2) return 0.0;
  std::vector<double> sq(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) {
    const double d = v[i] - mean;
    sq[i] = d * d;
  }
  const double var = pairwise_sum(sq) / static_cast<double>(v.size() - 1);
  return std::sqrt(var / static_cast<double>(v.size()));
}

}  // namespace

SgdRegime SgdRegime::from(const QuadraticObjective& obj, const NoiseModel& noise) {
  SgdRegime r;
  r.mu = obj.mu();
  r.lip = obj.lip();
  r.sigma0 = noise.sigma0;
  r.sigma1 = noise.sigma1;
  r.lip_g = obj.lip();
  r.lip_u = noise.additive_update_gain(obj.dim());
  return r;
}

void SgdRegime::validate() const {
  if (mu <= 0.0) throw UsageError("regime: mu must be positive");
  if (lip < mu) throw UsageError("regime: lip must be >= mu");
  if (sigma0 < 0.0 || sigma1 < 0.0) throw UsageError("regime: sigmas must be nonnegative");
}

double SgdRegime::q_factor(double eta) const {
  if (eta <= 0.0) throw UsageError("q_factor: eta must be positive");
  return 1.0 - 2.0 * eta * mu + eta * eta * (lip * lip + sigma1 * sigma1);
}

double SgdRegime::eta_max() const { return 2.0 * mu / (lip * lip + sigma1 * sigma1); }

double StepSchedule::eta(std::size_t t) const {
  return a / std::pow(static_cast<double>(t + 1), p);
}

RecursionReport verify_recursion(const QuadraticObjective& obj, const NoiseModel& noise,
                                 const StepSchedule& schedule, const Vec& theta0,
                                 std::size_t trials, std::size_t steps, std::uint64_t seed,
                                 unsigned threads) {
  if (trials < 100) throw UsageError("verify_recursion: need at least 100 trials");
  if (steps == 0) throw UsageError("verify_recursion: need at least one step");
  noise.validate();
  const SgdRegime regime = SgdRegime::from(obj, noise);
  const std::size_t dim = obj.dim();
  const CounterRng rng(seed);

  // sq_err[t][trial] = |e^t|^2; slot writes keep the result independent of
  // the worker count.
  std::vector<std::vector<double>> sq_err(steps + 1, std::vector<double>(trials));
  for_each_trial(trials, threads, [&](std::size_t trial) {
    Vec theta = theta0;
    sq_err[0][trial] = dot(vsub(theta, obj.minimizer()), vsub(theta, obj.minimizer()));
    for (std::size_t t = 0; t < steps; ++t) {
      const Vec u = rng.normal_vec(trial, t, dim);
      theta = sgd_step(obj, noise, theta, schedule.eta(t), u);
      const Vec e = vsub(theta, obj.minimizer());
      sq_err[t + 1][trial] = dot(e, e);
    }
  });

  RecursionReport report;
  report.admissible_step = true;
  report.steps.reserve(steps);
  std::vector<double> slack(trials);
  for (std::size_t t = 0; t < steps; ++t) {
    const double eta = schedule.eta(t);
    const double q = regime.q_factor(eta);
    if (q >= 1.0) report.admissible_step = false;
    const double floor_term = eta * eta * regime.sigma0 * regime.sigma0;

    const double mean_curr = mean_of(sq_err[t]);
    const double mean_next = mean_of(sq_err[t + 1]);
    for (std::size_t i = 0; i < trials; ++i) {
      slack[i] = sq_err[t + 1][i] - q * sq_err[t][i];
    }
    const double mean_slack = mean_of(slack);
    const double se = sem_of(slack, mean_slack);

    RecursionStep step;
    step.t = t;
    step.empirical_next = mean_next;
    step.bound = q * mean_curr + floor_term;
    step.standard_error = se;
    // The relative epsilon covers the exactly-tight deterministic case,
    // where the simulated decay equals q to rounding.
    step.satisfied =
        mean_slack <= floor_term + 3.0 * se + 1e-12 * std::max(1.0, mean_curr);
    report.steps.push_back(step);
  }
  report.all_satisfied =
      std::all_of(report.steps.begin(), report.steps.end(),
                  [](const RecursionStep& s) { return s.satisfied; });

  const double eta0 = schedule.eta(0);
  const double q0 = regime.q_factor(eta0);
  if (schedule.p == 0.0 && q0 < 1.0) {
    report.stationary_bound = eta0 * eta0 * regime.sigma0 * regime.sigma0 / (1.0 - q0);
  }
  report.final_second_moment = mean_of(sq_err[steps]);
  report.final_standard_error =
      sem_of(sq_err[steps], report.final_second_moment);

  report.energy.times.reserve(steps + 1);
  report.energy.energies.reserve(steps + 1);
  for (std::size_t t = 0; t <= steps; ++t) {
    report.energy.times.push_back(static_cast<double>(t));
    report.energy.energies.push_back(mean_of(sq_err[t]));
    if (t > 0) {
      const double eta = schedule.eta(t - 1);
      const double q = regime.q_factor(eta);
      const double budget = eta * eta * regime.sigma0 * regime.sigma0;
      report.energy.residuals.push_back(report.energy.energies[t] -
                                        q * report.energy.energies[t - 1] - budget);
    }
  }
  return report;
}

ForgettingReport coupled_forgetting(const QuadraticObjective& obj, const NoiseModel& noise,
                                    double eta, const Vec& theta0_a, const Vec& theta0_b,
                                    std::size_t trials, std::size_t steps,
                                    std::uint64_t seed, unsigned threads) {
  if (eta <= 0.0) throw UsageError("coupled_forgetting: eta must be positive");
  if (steps == 0) throw UsageError("coupled_forgetting: need at least one step");
  if (theta0_a.size() != obj.dim() || theta0_b.size() != obj.dim()) {
    throw DimensionError("coupled_forgetting: initializations do not match objective");
  }
  noise.validate();
  const SgdRegime regime = SgdRegime::from(obj, noise);
  const double q = regime.q_factor(eta);
  const std::size_t dim = obj.dim();
  const CounterRng rng(seed);

  const Vec d0 = vsub(theta0_a, theta0_b);
  const double d0_sq = dot(d0, d0);

  std::vector<std::vector<double>> gap_sq(steps + 1, std::vector<double>(trials));
  for_each_trial(trials, threads, [&](std::size_t trial) {
    Vec a = theta0_a;
    Vec b = theta0_b;
    gap_sq[0][trial] = d0_sq;
    for (std::size_t t = 0; t < steps; ++t) {
      const Vec u = rng.normal_vec(trial, t, dim);  // shared noise stream
      a = sgd_step(obj, noise, a, eta, u);
      b = sgd_step(obj, noise, b, eta, u);
      const Vec d = vsub(a, b);
      gap_sq[t + 1][trial] = dot(d, d);
    }
  });

  ForgettingReport report;
  report.q = q;
  report.steps.reserve(steps + 1);
  double bound = d0_sq;
  const double d0_norm = std::sqrt(d0_sq);
  for (std::size_t t = 0; t <= steps; ++t) {
    ForgettingStep s;
    s.t = t;
    s.empirical_sq = mean_of(gap_sq[t]);
    s.bound_sq = bound;
    s.sigma_theta = d0_norm > 0.0 ? std::sqrt(s.empirical_sq) / d0_norm : 0.0;
    const double se = sem_of(gap_sq[t], s.empirical_sq);
    s.satisfied = s.empirical_sq <= s.bound_sq + 3.0 * se + 1e-12;
    report.steps.push_back(s);
    bound *= q;
  }
  report.all_within_bound =
      std::all_of(report.steps.begin(), report.steps.end(),
                  [](const ForgettingStep& s) { return s.satisfied; });

  const double sigma_final = report.steps.back().sigma_theta;
  report.alpha_theta_estimate = sigma_final > 0.0
                                    ? std::log(sigma_final) / static_cast<double>(steps)
                                    : -1e9;
  report.alpha_theta_bound_stated = std::log(q);
  report.alpha_theta_bound_derived = 0.5 * std::log(q);
  return report;
}

TemporalGainReport temporal_gain(const QuadraticObjective& obj, const NoiseModel& noise,
                                 double eta, std::size_t perturb_step, const Vec& delta_u,
                                 const Vec& theta0, std::size_t steps, std::uint64_t seed) {
  if (eta <= 0.0) throw UsageError("temporal_gain: eta must be positive");
  if (perturb_step >= steps) {
    throw UsageError("temporal_gain: perturbation index must precede the horizon");
  }
  if (delta_u.size() != obj.dim()) {
    throw DimensionError("temporal_gain: delta_u dimension mismatch");
  }
  noise.validate();
  const SgdRegime regime = SgdRegime::from(obj, noise);
  const std::size_t dim = obj.dim();
  const CounterRng rng(seed);

  TemporalGainReport report;
  report.perturb_step = perturb_step;
  report.first_step_bound = eta * regime.lip_u * norm2(delta_u);

  Vec a = theta0;
  Vec b = theta0;
  report.delta_norm.push_back(0.0);
  for (std::size_t t = 0; t < steps; ++t) {
    const Vec u = rng.normal_vec(0, t, dim);
    Vec u_pert = u;
    if (t == perturb_step) {
      for (std::size_t i = 0; i < dim; ++i) u_pert[i] += delta_u[i];
    }
    a = sgd_step(obj, noise, a, eta, u);
    b = sgd_step(obj, noise, b, eta, u_pert);
    report.delta_norm.push_back(norm2(vsub(a, b)));
  }

  report.first_step_value = report.delta_norm[perturb_step + 1];
  const double du = norm2(delta_u);
  report.sigma_u_first = du > 0.0 ? report.first_step_value / du : 0.0;
  report.sup_delta = *std::max_element(report.delta_norm.begin(), report.delta_norm.end());

  report.cumulative_bound.assign(report.delta_norm.size(), 0.0);
  for (std::size_t t = perturb_step + 1; t < report.cumulative_bound.size(); ++t) {
    report.cumulative_bound[t] =
        report.first_step_bound *
        std::pow(1.0 + eta * regime.lip_g,
                 static_cast<double>(t - perturb_step - 1));
  }
  return report;
}

DecreasingRunReport decreasing_step_run(const QuadraticObjective& obj,
                                        const NoiseModel& noise, double a, double p,
                                        const Vec& theta0, std::size_t trials,
                                        std::size_t steps, std::uint64_t seed,
                                        unsigned threads) {
  if (a <= 0.0) throw UsageError("decreasing_step_run: a must be positive");
  if (trials == 0 || steps == 0) {
    throw UsageError("decreasing_step_run: trials and steps must be positive");
  }
  noise.validate();
  const StepSchedule schedule{a, p};
  const std::size_t dim = obj.dim();
  const CounterRng rng(seed);

  DecreasingRunReport report;
  report.step_sum_diverges = p <= 1.0;
  report.step_sq_summable = p > 0.5;
  report.schedule_admissible = schedule.robbins_monro();

  // |e^t|^2 is recorded at logarithmically sampled times plus the endpoint.
  std::vector<std::size_t> sample_times;
  for (std::size_t t = 1; t < steps; t *= 2) sample_times.push_back(t);
  sample_times.push_back(steps);

  std::vector<std::vector<double>> sampled(sample_times.size(),
                                           std::vector<double>(trials));
  for_each_trial(trials, threads, [&](std::size_t trial) {
    Vec theta = theta0;
    std::size_t next_sample = 0;
    for (std::size_t t = 0; t < steps; ++t) {
      const Vec u = rng.normal_vec(trial, t, dim);
      theta = sgd_step(obj, noise, theta, schedule.eta(t), u);
      if (next_sample < sample_times.size() && t + 1 == sample_times[next_sample]) {
        const Vec e = vsub(theta, obj.minimizer());
        sampled[next_sample][trial] = dot(e, e);
        ++next_sample;
      }
    }
  });

  report.final_errors = sampled.back();
  report.mean_final = mean_of(report.final_errors);
  std::vector<double> sorted = report.final_errors;
  std::sort(sorted.begin(), sorted.end());
  report.median_final = sorted[sorted.size() / 2];

  for (std::size_t i = 0; i < sample_times.size(); ++i) {
    std::vector<double> vals = sampled[i];
    std::sort(vals.begin(), vals.end());
    report.median_trace.times.push_back(static_cast<double>(sample_times[i]));
    report.median_trace.energies.push_back(vals[vals.size() / 2]);
  }
  return report;
}

}  // namespace lsp
