#pragma once

#include <optional>
#include <string>
#include <vector>

#include "lsp/matrix.hpp"
#include "lsp/numerics.hpp"

namespace lsp {

enum class ActivationKind { identity, relu, leaky_relu, hard_tanh };

/// Closed interval of attainable classical derivative values.
struct SlopeInterval {
  double lo = 1.0;
  double hi = 1.0;
  bool singleton() const { return lo == hi; }
};

/// Elementwise 1-Lipschitz activation with a deterministic slope selection
/// at kinks: relu picks 0 at the origin, leaky_relu picks its negative-side
/// slope, hard_tanh picks 0 at |x| = 1 (the saturated branch). Set-valued
/// analysis of the kinks lives in the profile module, not here.
class Activation {
 public:
  static Activation identity() { return Activation(ActivationKind::identity, 1.0); }
  static Activation relu() { return Activation(ActivationKind::relu, 0.0); }
  static Activation leaky_relu(double slope);
  static Activation hard_tanh() { return Activation(ActivationKind::hard_tanh, 0.0); }

  double apply(double x) const;
  double slope(double pre) const;
  SlopeInterval slope_interval() const;
  ActivationKind kind() const { return kind_; }
  double leak() const { return leak_; }
  std::string name() const;

 private:
  Activation(ActivationKind kind, double leak) : kind_(kind), leak_(leak) {}
  ActivationKind kind_;
  double leak_;
};

/// One layer: x -> act(W x + b), or the residual block x -> x + h act(W x + b)
/// when residual_step is set (weight square in that case).
struct LayerSpec {
  Matrix weight;
  Vec bias;
  Activation activation = Activation::identity();
  std::optional<double> residual_step;

  std::size_t in_dim() const { return weight.cols(); }
  std::size_t out_dim() const { return residual_step ? weight.cols() : weight.rows(); }
  bool residual() const { return residual_step.has_value(); }
  void validate(std::size_t layer_index) const;
};

class NetworkSpec {
 public:
  NetworkSpec(std::vector<LayerSpec> layers, std::size_t input_dim);

  std::size_t depth() const { return layers_.size(); }
  std::size_t input_dim() const { return input_dim_; }
  std::size_t output_dim() const { return layers_.back().out_dim(); }
  const LayerSpec& layer(std::size_t k) const { return layers_.at(k); }
  const std::vector<LayerSpec>& layers() const { return layers_; }

  /// Composable with itself (output feeds input), as required for
  /// depth replication.
  bool square_composable() const { return output_dim() == input_dim_; }

  /// The same layer stack repeated `times` times.
  NetworkSpec replicated(std::size_t times) const;

 private:
  std::vector<LayerSpec> layers_;
  std::size_t input_dim_;
};

Vec layer_preactivation(const LayerSpec& layer, const Vec& x);
Vec layer_apply(const LayerSpec& layer, const Vec& x);

/// Full trajectory X_0..X_L of the forward pass.
std::vector<Vec> forward(const NetworkSpec& net, const Vec& x);

/// Classical Jacobian of the layer map at x_in, with kink slopes chosen by
/// the activation's deterministic rule. D(pre) W for a plain layer,
/// I + h D(pre) W for a residual block.
Matrix layer_jacobian(const LayerSpec& layer, const Vec& x_in);

/// Jacobian of the residual inner map g(x) = act(W x + b), i.e. D(pre) W.
Matrix layer_inner_jacobian(const LayerSpec& layer, const Vec& x_in);

/// mu-strongly convex, lip-smooth quadratic: loss = 1/2 (t-t*)^T H (t-t*).
/// The curvature constants are exact by construction, so the step-size laws
/// built on top of them are sharply checkable.
class QuadraticObjective {
 public:
  QuadraticObjective(Matrix hessian, Vec minimizer);

  Vec gradient(const Vec& theta) const;
  double loss(const Vec& theta) const;

  double mu() const { return mu_; }
  double lip() const { return lip_; }
  std::size_t dim() const { return minimizer_.size(); }
  const Matrix& hessian() const { return hessian_; }
  const Vec& minimizer() const { return minimizer_; }

 private:
  Matrix hessian_;
  Vec minimizer_;
  double mu_;
  double lip_;
};

enum class NoiseKind { gaussian, rademacher_scaled };

/// Zero-mean gradient noise with conditional second moment exactly
/// sigma0^2 + sigma1^2 |theta - theta*|^2: noise = sqrt(sigma0^2 +
/// sigma1^2 |e|^2) * xi(u) with E[xi] = 0 and E|xi|^2 = 1. The direction
/// xi is the raw draw u scaled to unit expected square norm, so for
/// sigma1 = 0 the noise is linear in u with exact update gain
/// sigma0 / sqrt(dim).
struct NoiseModel {
  double sigma0 = 0.0;
  double sigma1 = 0.0;
  NoiseKind kind = NoiseKind::gaussian;

  /// xi(u): unit-expected-square-norm direction built from a raw standard
  /// normal draw.
  Vec direction(const Vec& raw) const;

  /// zeta(e, u) = sqrt(sigma0^2 + sigma1^2 |e|^2) xi(u).
  Vec noise(const Vec& err, const Vec& raw) const;

  double scale(double err_norm) const;

  /// Exact L_u^G of the additive (sigma1 = 0) oracle at dimension d.
  double additive_update_gain(std::size_t dim) const;

  void validate() const;
};

/// Stochastic gradient oracle G(theta, u) = grad(theta) + zeta(theta - theta*, u).
Vec stochastic_gradient(const QuadraticObjective& obj, const NoiseModel& noise,
                        const Vec& theta, const Vec& u);

/// theta - eta * G(theta, u). Deterministic given the draw u.
Vec sgd_step(const QuadraticObjective& obj, const NoiseModel& noise, const Vec& theta,
             double eta, const Vec& u);

}  // namespace lsp
