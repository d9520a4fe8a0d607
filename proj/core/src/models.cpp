#include "lsp/models.hpp"

#include <cmath>

namespace lsp {

Activation Activation::leaky_relu(double slope) {
  if (slope < 0.0 || slope > 1.0) {
    throw UsageError("leaky_relu slope must lie in [0,1]");
  }
  return Activation(ActivationKind::leaky_relu, slope);
}

double Activation::apply(double x) const {
  switch (kind_) {
    case ActivationKind::identity:
      return x;
    case ActivationKind::relu:
      return x > 0.0 ? x : 0.0;
    case ActivationKind::leaky_relu:
      return x > 0.0 ? x : leak_ * x;
    case ActivationKind::hard_tanh:
      return x > 1.0 ? 1.0 : (x < -1.0 ? -1.0 : x);
  }
  return x;
}

double Activation::slope(double pre) const {
  switch (kind_) {
    case ActivationKind::identity:
      return 1.0;
    case ActivationKind::relu:
      return pre > 0.0 ? 1.0 : 0.0;
    case ActivationKind::leaky_relu:
      return pre > 0.0 ? 1.0 : leak_;
    case ActivationKind::hard_tanh:
      return std::abs(pre) < 1.0 ? 1.0 : 0.0;
  }
  return 1.0;
}

SlopeInterval Activation::slope_interval() const {
  switch (kind_) {
    case ActivationKind::identity:
      return {1.0, 1.0};
    case ActivationKind::relu:
      return {0.0, 1.0};
    case ActivationKind::leaky_relu:
      return {leak_, 1.0};
    case ActivationKind::hard_tanh:
      return {0.0, 1.0};
  }
  return {1.0, 1.0};
}

std::string Activation::name() const {
  switch (kind_) {
    case ActivationKind::identity:
      return "identity";
    case ActivationKind::relu:
      return "relu";
    case ActivationKind::leaky_relu:
      return "leaky_relu(" + std::to_string(leak_) + ")";
    case ActivationKind::hard_tanh:
      return "hard_tanh";
  }
  return "?";
}

void LayerSpec::validate(std::size_t layer_index) const {
  const std::string where = "layer " + std::to_string(layer_index);
  if (weight.rows() == 0 || weight.cols() == 0) {
    throw DimensionError(where + ": empty weight");
  }
  if (!weight.all_finite() || !all_finite(bias)) {
    throw UsageError(where + ": non-finite weight or bias");
  }
  if (bias.size() != weight.rows()) {
    throw DimensionError(where + ": bias size " + std::to_string(bias.size()) +
                         " does not match weight rows " + std::to_string(weight.rows()));
  }
  if (residual_step) {
    if (*residual_step <= 0.0) throw UsageError(where + ": residual step must be positive");
    if (!weight.square()) {
      throw DimensionError(where + ": residual block requires a square weight, got " +
                           shape_string(weight));
    }
  }
}

NetworkSpec::NetworkSpec(std::vector<LayerSpec> layers, std::size_t input_dim)
    : layers_(std::move(layers)), input_dim_(input_dim) {
  if (layers_.empty()) throw UsageError("network must have depth >= 1");
  std::size_t dim = input_dim_;
  for (std::size_t k = 0; k < layers_.size(); ++k) {
    layers_[k].validate(k);
    if (layers_[k].in_dim() != dim) {
      throw DimensionError("layer " + std::to_string(k) + " expects input dim " +
                           std::to_string(layers_[k].in_dim()) + " but receives " +
                           std::to_string(dim));
    }
    dim = layers_[k].out_dim();
  }
}

NetworkSpec NetworkSpec::replicated(std::size_t times) const {
  if (times == 0) throw UsageError("replication count must be >= 1");
  if (!square_composable()) {
    throw UsageError("network is not square-composable and cannot be replicated");
  }
  std::vector<LayerSpec> stacked;
  stacked.reserve(layers_.size() * times);
  for (std::size_t r = 0; r < times; ++r) {
    for (const auto& l : layers_) stacked.push_back(l);
  }
  return NetworkSpec(std::move(stacked), input_dim_);
}

Vec layer_preactivation(const LayerSpec& layer, const Vec& x) {
  Vec pre = layer.weight * x;
  for (std::size_t i = 0; i < pre.size(); ++i) pre[i] += layer.bias[i];
  return pre;
}

Vec layer_apply(const LayerSpec& layer, const Vec& x) {
  Vec pre = layer_preactivation(layer, x);
  Vec act(pre.size());
  for (std::size_t i = 0; i < pre.size(); ++i) act[i] = layer.activation.apply(pre[i]);
  if (!layer.residual()) return act;
  Vec out(x);
  const double h = *layer.residual_step;
  for (std::size_t i = 0; i < out.size(); ++i) out[i] += h * act[i];
  return out;
}

std::vector<Vec> forward(const NetworkSpec& net, const Vec& x) {
  if (x.size() != net.input_dim()) {
    throw DimensionError("input has size " + std::to_string(x.size()) +
                         ", network expects " + std::to_string(net.input_dim()));
  }
  if (!all_finite(x)) throw UsageError("forward: input is not finite");
  std::vector<Vec> states;
  states.reserve(net.depth() + 1);
  states.push_back(x);
  for (std::size_t k = 0; k < net.depth(); ++k) {
    states.push_back(layer_apply(net.layer(k), states.back()));
  }
  return states;
}

Matrix layer_inner_jacobian(const LayerSpec& layer, const Vec& x_in) {
  if (x_in.size() != layer.in_dim()) {
    throw DimensionError("layer_inner_jacobian: input size mismatch");
  }
  const Vec pre = layer_preactivation(layer, x_in);
  Matrix jac(layer.weight.rows(), layer.weight.cols());
  for (std::size_t i = 0; i < jac.rows(); ++i) {
    const double d = layer.activation.slope(pre[i]);
    for (std::size_t j = 0; j < jac.cols(); ++j) jac(i, j) = d * layer.weight(i, j);
  }
  return jac;
}

Matrix layer_jacobian(const LayerSpec& layer, const Vec& x_in) {
  Matrix inner = layer_inner_jacobian(layer, x_in);
  if (!layer.residual()) return inner;
  const double h = *layer.residual_step;
  Matrix jac = inner.scaled(h);
  for (std::size_t i = 0; i < jac.rows(); ++i) jac(i, i) += 1.0;
  return jac;
}

QuadraticObjective::QuadraticObjective(Matrix hessian, Vec minimizer)
    : hessian_(std::move(hessian)), minimizer_(std::move(minimizer)) {
  if (!hessian_.square() || hessian_.rows() != minimizer_.size()) {
    throw DimensionError("objective hessian/minimizer dimensions do not chain");
  }
  for (std::size_t i = 0; i < hessian_.rows(); ++i) {
    for (std::size_t j = i + 1; j < hessian_.cols(); ++j) {
      if (std::abs(hessian_(i, j) - hessian_(j, i)) > 1e-12) {
        throw UsageError("objective hessian must be symmetric");
      }
    }
  }
  const Vec eig = symmetric_eigenvalues(hessian_);
  mu_ = eig.front();
  lip_ = eig.back();
  if (mu_ <= 0.0) throw UsageError("objective hessian must be positive definite");
}

Vec QuadraticObjective::gradient(const Vec& theta) const {
  return hessian_ * vsub(theta, minimizer_);
}

double QuadraticObjective::loss(const Vec& theta) const {
  const Vec e = vsub(theta, minimizer_);
  return 0.5 * dot(e, hessian_ * e);
}

void NoiseModel::validate() const {
  if (sigma0 < 0.0 || sigma1 < 0.0) throw UsageError("noise sigmas must be nonnegative");
}

Vec NoiseModel::direction(const Vec& raw) const {
  const double inv_sqrt_d = 1.0 / std::sqrt(static_cast<double>(raw.size()));
  Vec xi(raw.size());
  switch (kind) {
    case NoiseKind::gaussian:
      for (std::size_t i = 0; i < raw.size(); ++i) xi[i] = raw[i] * inv_sqrt_d;
      break;
    case NoiseKind::rademacher_scaled:
      for (std::size_t i = 0; i < raw.size(); ++i) {
        xi[i] = (raw[i] >= 0.0 ? 1.0 : -1.0) * inv_sqrt_d;
      }
      break;
  }
  return xi;
}

double NoiseModel::scale(double err_norm) const {
  return std::sqrt(sigma0 * sigma0 + sigma1 * sigma1 * err_norm * err_norm);
}

Vec NoiseModel::noise(const Vec& err, const Vec& raw) const {
  const double s = scale(norm2(err));
  Vec xi = direction(raw);
  for (double& x : xi) x *= s;
  return xi;
}

double NoiseModel::additive_update_gain(std::size_t dim) const {
  return sigma0 / std::sqrt(static_cast<double>(dim));
}

Vec stochastic_gradient(const QuadraticObjective& obj, const NoiseModel& noise,
                        const Vec& theta, const Vec& u) {
  if (u.size() != obj.dim()) throw DimensionError("draw dimension does not match objective");
  Vec g = obj.gradient(theta);
  const Vec z = noise.noise(vsub(theta, obj.minimizer()), u);
  for (std::size_t i = 0; i < g.size(); ++i) g[i] += z[i];
  return g;
}

Vec sgd_step(const QuadraticObjective& obj, const NoiseModel& noise, const Vec& theta,
             double eta, const Vec& u) {
  if (eta < 0.0) throw UsageError("sgd_step: eta must be nonnegative");
  const Vec g = stochastic_gradient(obj, noise, theta, u);
  Vec next(theta);
  for (std::size_t i = 0; i < next.size(); ++i) next[i] -= eta * g[i];
  return next;
}

}  // namespace lsp
