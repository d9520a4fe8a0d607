#include "lsp/numerics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "lsp/rng.hpp"

namespace lsp {

namespace {

// Fixed internal seed for the deterministic start-vector jitter.
constexpr std::uint64_t kStartVectorSeed = 0x5370656374726121ULL;

Vec start_vector(std::size_t n) {
  // All-ones, perturbed deterministically so the start is almost never
  // orthogonal to the top singular subspace.
  CounterRng rng(kStartVectorSeed);
  Vec v(n);
  for (std::size_t i = 0; i < n; ++i) {
    v[i] = 1.0 + 1e-3 * (rng.uniform01(i, 0, 0) - 0.5);
  }
  const double nv = norm2(v);
  for (double& x : v) x /= nv;
  return v;
}

bool normalize(Vec& v) {
  const double n = norm2(v);
  if (n == 0.0) return false;
  for (double& x : v) x /= n;
  return true;
}

}  // namespace

SpectralEstimate spectral_norm(const Matrix& a, double tol, int max_iter) {
  if (tol <= 0.0) throw UsageError("spectral_norm: tol must be positive");
  if (!a.all_finite()) throw UsageError("spectral_norm: matrix has non-finite entries");
  if (a.rows() == 0 || a.cols() == 0) return {0.0, 0, 0.0};

  bool zero = true;
  for (double v : a.data()) {
    if (v != 0.0) {
      zero = false;
      break;
    }
  }
  if (zero) return {0.0, 0, 0.0};

  const Matrix at = a.transposed();
  Vec v = start_vector(a.cols());
  std::size_t restart = 0;

  double value = 0.0;
  double prev_delta = std::numeric_limits<double>::infinity();
  int iter = 0;
  double residual = std::numeric_limits<double>::infinity();

  while (iter < max_iter) {
    ++iter;
    Vec w = a * v;          // value estimate: |Av| with |v| = 1
    const double s = norm2(w);
    if (s == 0.0) {
      // v is in the null space; restart from the next canonical basis vector.
      if (restart >= a.cols()) return {0.0, iter, 0.0};
      v.assign(a.cols(), 0.0);
      v[restart++] = 1.0;
      prev_delta = std::numeric_limits<double>::infinity();
      value = 0.0;
      continue;
    }
    Vec z = at * w;         // one power step on A^T A
    if (!normalize(z)) {
      value = s;
      residual = 0.0;
      return {value, iter, residual};
    }
    const double delta = std::abs(s - value);
    value = s;
    residual = delta / std::max(value, std::numeric_limits<double>::min());
    v = std::move(z);

    if (iter > 1 && residual <= tol) {
      // Geometric tail safeguard: successive deltas contract roughly by
      // (sigma2/sigma1)^2; accept only when the extrapolated remaining gap
      // is also below tolerance.
      const double ratio = prev_delta > 0.0 && std::isfinite(prev_delta)
                               ? delta / prev_delta
                               : 0.0;
      if (ratio <= 0.0 || ratio >= 1.0 || delta * ratio / (1.0 - ratio) <= tol * value) {
        return {value, iter, residual};
      }
    }
    prev_delta = delta;
  }
  throw SpectralConvergenceError(value, residual, max_iter);
}

double spectral_norm_value(const Matrix& a, double tol, int max_iter) {
  return spectral_norm(a, tol, max_iter).value;
}

double operator_inf_norm(const Matrix& a) {
  double m = 0.0;
  for (std::size_t i = 0; i < a.rows(); ++i) {
    double row = 0.0;
    for (std::size_t j = 0; j < a.cols(); ++j) row += std::abs(a(i, j));
    m = std::max(m, row);
  }
  return m;
}

Vec symmetric_eigenvalues(const Matrix& s) {
  if (!s.square()) throw DimensionError("symmetric_eigenvalues: matrix must be square");
  const std::size_t n = s.rows();
  Matrix m = s;

  auto off_norm = [&m, n]() {
    double sum = 0.0;
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j)
        if (i != j) sum += m(i, j) * m(i, j);
    return std::sqrt(sum);
  };

  double scale = 0.0;
  for (double v : m.data()) scale = std::max(scale, std::abs(v));
  if (scale == 0.0) return Vec(n, 0.0);

  const double stop = 1e-15 * scale * static_cast<double>(n);
  for (int sweep = 0; sweep < 100 && off_norm() > stop; ++sweep) {
    for (std::size_t p = 0; p + 1 < n; ++p) {
      for (std::size_t q = p + 1; q < n; ++q) {
        const double apq = m(p, q);
        if (std::abs(apq) <= 1e-300) continue;
        const double app = m(p, p);
        const double aqq = m(q, q);
        const double theta = (aqq - app) / (2.0 * apq);
        const double t = (theta >= 0.0 ? 1.0 : -1.0) /
                         (std::abs(theta) + std::sqrt(theta * theta + 1.0));
        const double c = 1.0 / std::sqrt(t * t + 1.0);
        const double sn = t * c;
        for (std::size_t k = 0; k < n; ++k) {
          const double mkp = m(k, p);
          const double mkq = m(k, q);
          m(k, p) = c * mkp - sn * mkq;
          m(k, q) = sn * mkp + c * mkq;
        }
        for (std::size_t k = 0; k < n; ++k) {
          const double mpk = m(p, k);
          const double mqk = m(q, k);
          m(p, k) = c * mpk - sn * mqk;
          m(q, k) = sn * mpk + c * mqk;
        }
      }
    }
  }

  Vec eig(n);
  for (std::size_t i = 0; i < n; ++i) eig[i] = m(i, i);
  std::sort(eig.begin(), eig.end());
  return eig;
}

double symmetric_part_max_eig(const Matrix& a) {
  if (!a.square()) throw DimensionError("symmetric_part_max_eig: matrix must be square");
  Matrix sym(a.rows(), a.cols());
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t j = 0; j < a.cols(); ++j)
      sym(i, j) = 0.5 * (a(i, j) + a(j, i));
  const Vec eig = symmetric_eigenvalues(sym);
  return eig.back();
}

double default_fd_step(const Vec& x) {
  const double eps = std::numeric_limits<double>::epsilon();
  return std::cbrt(eps) * (1.0 + norm_inf(x));
}

Matrix finite_diff_jacobian(const VectorMap& f, const Vec& x, double step) {
  if (step < 0.0) throw UsageError("finite_diff_jacobian: step must be positive");
  const double h = step == 0.0 ? default_fd_step(x) : step;

  const Vec fx = f(x);
  if (!all_finite(fx)) throw EvaluationError("finite_diff_jacobian: f(x) is not finite");

  Matrix jac(fx.size(), x.size());
  Vec xp = x;
  Vec xm = x;
  for (std::size_t j = 0; j < x.size(); ++j) {
    xp[j] = x[j] + h;
    xm[j] = x[j] - h;
    const Vec fp = f(xp);
    const Vec fm = f(xm);
    if (!all_finite(fp) || !all_finite(fm)) {
      throw EvaluationError("finite_diff_jacobian: f evaluated to a non-finite value near x");
    }
    if (fp.size() != fx.size() || fm.size() != fx.size()) {
      throw DimensionError("finite_diff_jacobian: f output dimension is not constant");
    }
    for (std::size_t i = 0; i < fx.size(); ++i) {
      jac(i, j) = (fp[i] - fm[i]) / (2.0 * h);
    }
    xp[j] = x[j];
    xm[j] = x[j];
  }
  return jac;
}

}  // namespace lsp
