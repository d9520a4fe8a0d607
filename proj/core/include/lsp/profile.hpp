#pragma once

#include <cstdint>
#include <vector>

#include "lsp/models.hpp"

namespace lsp {

struct GridIndex {
  std::size_t depth = 0;
  std::size_t time = 0;
  friend bool operator==(const GridIndex&, const GridIndex&) = default;
};

enum class NormKind { op2, op_inf };

double matrix_norm(const Matrix& a, NormKind kind);

/// Directional sensitivity blocks of the state at a grid index: derivatives
/// with respect to the input, the initial parameters, and the update draws.
/// Blocks that do not exist in the analysis mode (frozen parameters, no
/// update variables) are zero-sized.
struct Sensitivities {
  Matrix s_x;
  Matrix s_theta;
  Matrix s_u;
  GridIndex index;
};

struct ProfileEntry {
  GridIndex index;
  double sigma_x = 0.0;
  double sigma_theta = 0.0;
  double sigma_u = 0.0;
  bool exact = true;  // false when a certified upper bound replaced enumeration
};

struct StabilityProfile {
  std::vector<ProfileEntry> entries;
  NormKind norm_kind = NormKind::op2;

  std::size_t max_depth() const;
  std::size_t max_time() const;
};

/// Cumulative input sensitivities S^x at depths 1..L: ordered products of
/// layer Jacobians along the stored forward trajectory. s_theta / s_u are
/// zero-sized (frozen-parameter analysis).
std::vector<Sensitivities> forward_sensitivity(const NetworkSpec& net, const Vec& x);

/// Number of flattened parameters of layers [0, upto): per layer, weights
/// row-major then bias. The order is fixed for reproducibility.
std::size_t flat_parameter_count(const NetworkSpec& net, std::size_t upto);

/// Jacobian of X_L with respect to the flattened parameter vector
/// (layer-major, weights row-major then bias), by the chain rule through
/// the stored trajectory.
Matrix parameter_sensitivity(const NetworkSpec& net, const Vec& x);

/// Same, for the state at a given depth; columns cover layers [0, depth).
Matrix parameter_sensitivity_at_depth(const NetworkSpec& net, const Vec& x,
                                      std::size_t depth);

struct ClarkeSignature {
  double value = 0.0;
  bool exact = true;
};

inline constexpr std::size_t kVertexEnumerationCap = 1u << 12;

/// Worst-case one-layer amplification over the activation's slope set:
/// sup over diagonal D with D_ii in the slope interval of |D W| (plain
/// layer) or |I + h D W| (residual block). The sup of a convex function of
/// D over a box is attained at a vertex, so vertices are enumerated exactly
/// while 2^rows stays within the cap; beyond it the certified bounds |W|
/// (plain) and 1 + h |W| (residual) are reported with exact = false.
ClarkeSignature clarke_signature(const LayerSpec& layer, NormKind norm = NormKind::op2);

/// The full profile over depths 1..L at time 0. Classical mode measures the
/// cumulative Jacobian products selected by the activation slopes at the
/// forward trajectory; generalized mode reports certified worst-case values
/// over the activations' slope sets (joint vertex enumeration when the
/// total combination count is within the cap, otherwise the product of
/// per-layer signatures). sigma_u is identically zero here: update
/// variables only exist in the stochastic-gradient laboratory.
StabilityProfile profile_network(const NetworkSpec& net, const Vec& x, bool generalized,
                                 NormKind norm = NormKind::op2);

}  // namespace lsp
