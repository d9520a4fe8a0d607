#pragma once

#include <cstdint>
#include <vector>

#include "lsp/models.hpp"
#include "lsp/rng.hpp"

namespace lsp {

/// Constants of the stochastic gradient regime. For the quadratic objective
/// they are exact: mu and lip are the extreme Hessian eigenvalues, lip_g
/// equals lip (the oracle's deterministic part is linear), and lip_u is the
/// additive update gain sigma0 / sqrt(dim).
struct SgdRegime {
  double mu = 0.0;
  double lip = 0.0;
  double sigma0 = 0.0;
  double sigma1 = 0.0;
  double lip_g = 0.0;
  double lip_u = 0.0;

  static SgdRegime from(const QuadraticObjective& obj, const NoiseModel& noise);

  /// q(eta) = 1 - 2 eta mu + eta^2 (lip^2 + sigma1^2).
  double q_factor(double eta) const;
  /// eta_max = 2 mu / (lip^2 + sigma1^2); q < 1 exactly on (0, eta_max).
  double eta_max() const;

  void validate() const;
};

/// Constant or power-law schedule eta_t = a / (t+1)^p (p = 0 gives constant a).
struct StepSchedule {
  double a = 0.1;
  double p = 0.0;

  double eta(std::size_t t) const;
  static StepSchedule constant(double eta) { return {eta, 0.0}; }
  /// Divergent step sum requires p <= 1; square summability requires p > 1/2.
  bool robbins_monro() const { return p > 0.5 && p <= 1.0; }
};

struct EnergyTrace {
  std::vector<double> times;
  std::vector<double> energies;    // E |theta - theta*|^2 (Monte Carlo mean)
  std::vector<double> residuals;   // energy change minus permitted budget
};

struct RecursionStep {
  std::size_t t = 0;
  double empirical_next = 0.0;  // mean |e^{t+1}|^2
  double bound = 0.0;           // q_t * mean |e^t|^2 + eta_t^2 sigma0^2
  double standard_error = 0.0;  // of the per-trial slack statistic
  bool satisfied = false;
};

struct RecursionReport {
  std::vector<RecursionStep> steps;
  bool all_satisfied = false;
  double stationary_bound = 0.0;     // eta^2 sigma0^2 / (1-q), constant schedule with q<1
  double final_second_moment = 0.0;
  double final_standard_error = 0.0;
  bool admissible_step = false;      // q(eta) < 1 at every scheduled step
  EnergyTrace energy;
};

/// Monte Carlo check of the conditional mean-square recursion
///   E|e^{t+1}|^2 <= q_t |e^t|^2 + eta_t^2 sigma0^2
/// over `trials` independent runs; a step is flagged unsatisfied only beyond
/// three standard errors of the per-trial slack statistic.
RecursionReport verify_recursion(const QuadraticObjective& obj, const NoiseModel& noise,
                                 const StepSchedule& schedule, const Vec& theta0,
                                 std::size_t trials, std::size_t steps, std::uint64_t seed,
                                 unsigned threads = 1);

struct ForgettingStep {
  std::size_t t = 0;
  double empirical_sq = 0.0;  // E |theta^t - theta-bar^t|^2
  double bound_sq = 0.0;      // q^t |d0|^2
  double sigma_theta = 0.0;   // sqrt(empirical)/|d0|, the parameter signature
  bool satisfied = false;
};

struct ForgettingReport {
  std::vector<ForgettingStep> steps;
  bool all_within_bound = false;
  double q = 0.0;
  double alpha_theta_estimate = 0.0;      // log(sigma_theta at final t) / t
  double alpha_theta_bound_stated = 0.0;  // log q
  double alpha_theta_bound_derived = 0.0; // (1/2) log q, the per-step contraction rate
};

/// Two trajectories driven by the same noise stream from different
/// initializations; reports the mean-square gap against q(eta)^t |d0|^2 and
/// the parameter-exponent estimate from the terminal signature.
ForgettingReport coupled_forgetting(const QuadraticObjective& obj, const NoiseModel& noise,
                                    double eta, const Vec& theta0_a, const Vec& theta0_b,
                                    std::size_t trials, std::size_t steps,
                                    std::uint64_t seed, unsigned threads = 1);

struct TemporalGainReport {
  std::size_t perturb_step = 0;
  std::vector<double> delta_norm;      // |delta theta^t| for t = 0..steps
  double first_step_value = 0.0;       // |delta theta^{s+1}|
  double first_step_bound = 0.0;       // eta * lip_u * |delta u|
  std::vector<double> cumulative_bound;  // first-step bound * (1 + eta lip_g)^(t-s-1)
  double sup_delta = 0.0;
  double sigma_u_first = 0.0;          // |delta theta^{s+1}| / |delta u|
};

/// Response to a single-index perturbation of the update sequence: two runs
/// share every draw except step s, where one receives u^s + delta_u.
TemporalGainReport temporal_gain(const QuadraticObjective& obj, const NoiseModel& noise,
                                 double eta, std::size_t perturb_step, const Vec& delta_u,
                                 const Vec& theta0, std::size_t steps, std::uint64_t seed);

struct DecreasingRunReport {
  bool schedule_admissible = false;  // p in (1/2, 1]
  bool step_sum_diverges = false;    // p <= 1
  bool step_sq_summable = false;     // p > 1/2
  double median_final = 0.0;
  double mean_final = 0.0;
  std::vector<double> final_errors;  // per-trial |e^T|^2
  EnergyTrace median_trace;          // median |e^t|^2 at sampled times
};

/// Decreasing-step runs eta_t = a/(t+1)^p; inadmissible schedules are
/// reported and the run proceeds with a warning flag rather than an error.
DecreasingRunReport decreasing_step_run(const QuadraticObjective& obj,
                                        const NoiseModel& noise, double a, double p,
                                        const Vec& theta0, std::size_t trials,
                                        std::size_t steps, std::uint64_t seed,
                                        unsigned threads = 1);

}  // namespace lsp
