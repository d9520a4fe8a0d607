#pragma once

#include <functional>

#include "lsp/matrix.hpp"

namespace lsp {

/// Result of a spectral-norm estimation run.
///   value      estimated operator 2-norm (largest singular value)
///   iterations power-iteration steps consumed
///   residual   relative change of the estimate at termination
struct SpectralEstimate {
  double value = 0.0;
  int iterations = 0;
  double residual = 0.0;
};

/// Thrown when power iteration fails to converge within max_iter.
/// Carries the best estimate and its residual at the point of failure.
class SpectralConvergenceError : public std::runtime_error {
 public:
  SpectralConvergenceError(double best_value, double residual, int iterations)
      : std::runtime_error("spectral norm estimation did not converge after " +
                           std::to_string(iterations) +
                           " iterations (best " + std::to_string(best_value) +
                           ", residual " + std::to_string(residual) + ")"),
        best_value(best_value),
        residual(residual),
        iterations(iterations) {}
  double best_value;
  double residual;
  int iterations;
};

inline constexpr double kSpectralTol = 1e-10;
inline constexpr int kSpectralMaxIter = 10000;

/// Operator 2-norm by power iteration on A^T A. The start vector is the
/// normalized all-ones vector with a fixed deterministic jitter, so repeated
/// calls are bit-identical; canonical basis restarts cover starts that land
/// in the null space. Throws SpectralConvergenceError after max_iter.
SpectralEstimate spectral_norm(const Matrix& a, double tol = kSpectralTol,
                               int max_iter = kSpectralMaxIter);

/// Convenience accessor for the estimated value.
double spectral_norm_value(const Matrix& a, double tol = kSpectralTol,
                           int max_iter = kSpectralMaxIter);

/// Operator infinity-norm: max absolute row sum. Exact.
double operator_inf_norm(const Matrix& a);

/// Largest eigenvalue of (A + A^T)/2, computed by cyclic Jacobi sweeps.
/// The dissipation rate of an inner Jacobian G is m = -symmetric_part_max_eig(G).
double symmetric_part_max_eig(const Matrix& a);

/// All eigenvalues of a symmetric matrix (cyclic Jacobi), ascending.
Vec symmetric_eigenvalues(const Matrix& s);

using VectorMap = std::function<Vec(const Vec&)>;

/// Default central-difference step: cbrt(machine eps) * (1 + |x|_inf).
double default_fd_step(const Vec& x);

/// Central-difference Jacobian of f at x. Test oracle only; profile
/// computation never calls this. Propagates EvaluationError on non-finite
/// outputs of f.
Matrix finite_diff_jacobian(const VectorMap& f, const Vec& x, double step = 0.0);

}  // namespace lsp
