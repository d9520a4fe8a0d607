#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "lsp/numerics.hpp"
#include "test_helpers.hpp"

using namespace lsp;
using lsp_test::random_matrix;
using lsp_test::svd_norm;

TEST_CASE("spectral_norm on closed-form cases") {
  CHECK(spectral_norm(Matrix::identity(3)).value == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(spectral_norm(Matrix::diagonal({3.0, 1.0})).value ==
        doctest::Approx(3.0).epsilon(1e-12));
  // Nilpotent 2x2: singular values are {1, 0}.
  const Matrix n = Matrix::from_rows({{0.0, 1.0}, {0.0, 0.0}});
  CHECK(spectral_norm(n).value == doctest::Approx(svd_norm(n)).epsilon(1e-10));
  CHECK(spectral_norm(n).value == doctest::Approx(1.0).epsilon(1e-10));
}

TEST_CASE("spectral_norm handles degenerate matrices") {
  CHECK(spectral_norm(Matrix(4, 4)).value == 0.0);
  // Start vector orthogonal traps are covered by canonical restarts:
  // a matrix whose range excludes the all-ones direction.
  const Matrix a = Matrix::from_rows({{1.0, -1.0}, {-1.0, 1.0}});
  CHECK(spectral_norm(a).value == doctest::Approx(2.0).epsilon(1e-10));
}

TEST_CASE("spectral_norm matches the dense SVD oracle up to 8x8") {
  for (std::size_t n = 1; n <= 8; ++n) {
    for (std::uint64_t trial = 0; trial < 25; ++trial) {
      const Matrix a = random_matrix(n, 1 + (trial % n == 0 ? n : trial % n), 1000 * n + trial);
      const double got = spectral_norm(a).value;
      const double want = svd_norm(a);
      CHECK(lsp_test::rel_err(got, want) < 1e-8);
    }
  }
}

TEST_CASE("spectral_norm residual is below tolerance on success") {
  const Matrix a = random_matrix(6, 6, 77);
  const SpectralEstimate est = spectral_norm(a, 1e-10, 10000);
  CHECK(est.residual <= 1e-10);
  CHECK(est.iterations > 0);
}

TEST_CASE("spectral_norm reports non-convergence with the best value") {
  const Matrix a = Matrix::diagonal({2.0, 1.0});
  try {
    spectral_norm(a, 1e-16, 1);
    FAIL("expected SpectralConvergenceError");
  } catch (const SpectralConvergenceError& e) {
    CHECK(e.best_value > 0.0);
    CHECK(e.iterations == 1);
  }
}

TEST_CASE("spectral_norm rejects bad inputs") {
  CHECK_THROWS_AS(spectral_norm(Matrix::identity(2), -1.0), UsageError);
  Matrix bad(2, 2);
  bad(0, 0) = std::numeric_limits<double>::quiet_NaN();
  CHECK_THROWS_AS(spectral_norm(bad), UsageError);
}

TEST_CASE("submultiplicativity of the estimated norm") {
  const double tol = kSpectralTol;
  for (std::uint64_t trial = 0; trial < 50; ++trial) {
    const Matrix a = random_matrix(4, 3, 10 + trial);
    const Matrix b = random_matrix(3, 5, 500 + trial);
    const double ab = spectral_norm(a * b).value;
    const double bound = spectral_norm(a).value * spectral_norm(b).value;
    CHECK(ab <= bound + 3.0 * tol);
  }
}

TEST_CASE("symmetric_part_max_eig on closed-form cases") {
  CHECK(symmetric_part_max_eig(Matrix::identity(2).scaled(-1.0)) ==
        doctest::Approx(-1.0).epsilon(1e-12));
  // [[0,2],[0,0]] has symmetric part [[0,1],[1,0]] with eigenvalues +-1.
  CHECK(symmetric_part_max_eig(Matrix::from_rows({{0.0, 2.0}, {0.0, 0.0}})) ==
        doctest::Approx(1.0).epsilon(1e-12));
  CHECK(symmetric_part_max_eig(Matrix::diagonal({-2.0, -0.5})) ==
        doctest::Approx(-0.5).epsilon(1e-12));
}

TEST_CASE("symmetric_part_max_eig is transpose-invariant exactly") {
  for (std::uint64_t trial = 0; trial < 20; ++trial) {
    const Matrix a = random_matrix(5, 5, 900 + trial);
    CHECK(symmetric_part_max_eig(a) == symmetric_part_max_eig(a.transposed()));
  }
}

TEST_CASE("symmetric_part_max_eig requires a square matrix") {
  CHECK_THROWS_AS(symmetric_part_max_eig(Matrix(2, 3)), DimensionError);
}

TEST_CASE("symmetric_eigenvalues against Eigen") {
  for (std::uint64_t trial = 0; trial < 20; ++trial) {
    Matrix a = random_matrix(6, 6, 40 + trial);
    Matrix s(6, 6);
    for (std::size_t i = 0; i < 6; ++i)
      for (std::size_t j = 0; j < 6; ++j) s(i, j) = 0.5 * (a(i, j) + a(j, i));
    const Vec got = symmetric_eigenvalues(s);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(lsp_test::to_eigen(s));
    for (std::size_t i = 0; i < 6; ++i) {
      CHECK(got[i] == doctest::Approx(solver.eigenvalues()(i)).epsilon(1e-10));
    }
  }
}

TEST_CASE("finite_diff_jacobian on closed-form maps") {
  const VectorMap ident = [](const Vec& v) { return v; };
  const Matrix ji = finite_diff_jacobian(ident, {0.3, -0.7});
  CHECK(lsp_test::max_abs_diff(ji, Matrix::identity(2)) < 1e-9);

  const Matrix w = Matrix::diagonal({3.0, 1.0});
  const VectorMap linear = [&w](const Vec& v) { return w * v; };
  const Matrix jl = finite_diff_jacobian(linear, {1.0, 1.0});
  CHECK(lsp_test::max_abs_diff(jl, w) < 1e-8);

  const VectorMap relu = [](const Vec& v) {
    Vec out(v.size());
    for (std::size_t i = 0; i < v.size(); ++i) out[i] = v[i] > 0.0 ? v[i] : 0.0;
    return out;
  };
  const Matrix jr = finite_diff_jacobian(relu, {2.0, -2.0});
  CHECK(lsp_test::max_abs_diff(jr, Matrix::diagonal({1.0, 0.0})) < 1e-9);
}

TEST_CASE("finite_diff_jacobian propagates non-finite evaluations") {
  const VectorMap bad = [](const Vec& v) {
    return Vec{std::log(v[0])};  // NaN for negative probe
  };
  CHECK_THROWS_AS(finite_diff_jacobian(bad, {0.0}), EvaluationError);
}

TEST_CASE("operator_inf_norm is the max absolute row sum") {
  const Matrix a = Matrix::from_rows({{1.0, -2.0}, {0.5, 0.25}});
  CHECK(operator_inf_norm(a) == doctest::Approx(3.0));
}

TEST_CASE("pairwise_sum matches plain summation on benign data") {
  std::vector<double> v(1000);
  for (std::size_t i = 0; i < v.size(); ++i) v[i] = 1.0 / static_cast<double>(i + 1);
  double plain = 0.0;
  for (double x : v) plain += x;
  CHECK(pairwise_sum(v) == doctest::Approx(plain).epsilon(1e-12));
}
