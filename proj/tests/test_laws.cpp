#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "lsp/exponents.hpp"
#include "lsp/laws.hpp"
#include "test_helpers.hpp"

using namespace lsp;
using lsp_test::random_matrix;

namespace {

LayerSpec linear_layer(Matrix w, std::optional<double> h = {}) {
  LayerSpec l;
  l.bias = Vec(w.rows(), 0.0);
  l.weight = std::move(w);
  l.residual_step = h;
  return l;
}

// G with symmetric part exactly -m I and spectral norm exactly m_g
// (skew completion; requires m_g >= m).
Matrix dissipative_2x2(double m, double m_g) {
  const double k = std::sqrt(m_g * m_g - m * m);
  return Matrix::from_rows({{-m, k}, {-k, -m}});
}

NetworkSpec rescaled_net(std::size_t depth, std::size_t width, double rho,
                         std::uint64_t seed) {
  std::vector<LayerSpec> layers;
  for (std::size_t k = 0; k < depth; ++k) {
    Matrix w = random_matrix(width, width, seed + k);
    for (int pass = 0; pass < 2; ++pass) {
      w = w.scaled(rho / spectral_norm_value(w));
    }
    LayerSpec l = linear_layer(std::move(w));
    l.activation = Activation::relu();
    layers.push_back(std::move(l));
  }
  return NetworkSpec(std::move(layers), width);
}

}  // namespace

TEST_CASE("estimate_dissipativity on constant linear fields") {
  const auto probes = sample_probes(Vec(2, 0.0), 16);

  const JacobianField neg_identity = [](const Vec&) {
    return Matrix::identity(2).scaled(-1.0);
  };
  DissipativityEstimate est = estimate_dissipativity(neg_identity, probes);
  CHECK(est.m == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(est.m_g == doctest::Approx(1.0).epsilon(1e-10));
  CHECK(est.dissipative());
  CHECK(est.samples == 16);

  const JacobianField stiffer = [](const Vec&) {
    return Matrix::identity(2).scaled(-2.0);
  };
  est = estimate_dissipativity(stiffer, probes);
  CHECK(est.m == doctest::Approx(2.0).epsilon(1e-12));
  CHECK(est.m_g == doctest::Approx(2.0).epsilon(1e-10));

  // Marginal witness: symmetric part [[-1, 1], [1, -1]] has top eigenvalue 0,
  // while the norm is 1 + sqrt(2).
  const JacobianField marginal = [](const Vec&) {
    return Matrix::from_rows({{-1.0, 2.0}, {0.0, -1.0}});
  };
  est = estimate_dissipativity(marginal, probes);
  CHECK(est.m == doctest::Approx(0.0).epsilon(1e-12));
  CHECK(!est.dissipative());
  CHECK(est.m_g == doctest::Approx(1.0 + std::sqrt(2.0)).epsilon(1e-10));

  CHECK_THROWS_AS(estimate_dissipativity(neg_identity, {}), UsageError);
}

TEST_CASE("cfl_report closed-form evaluation") {
  SUBCASE("admissible step") {
    const CflReport r = cfl_report(certified_dissipativity(1.0, 2.0), 0.25);
    CHECK(r.h_max == doctest::Approx(0.5).epsilon(1e-15));
    CHECK(r.c_x == doctest::Approx(std::sqrt(0.75)).epsilon(1e-15));
    CHECK(r.c_x == doctest::Approx(0.8660).epsilon(1e-4));
    CHECK(r.admissible);
    REQUIRE(r.alpha_x_bound.has_value());
    CHECK(*r.alpha_x_bound == doctest::Approx(0.5 * std::log(0.75)).epsilon(1e-15));
    CHECK(*r.alpha_x_bound == doctest::Approx(-0.1438).epsilon(1e-3));
  }
  SUBCASE("h = 0 is the neutral boundary") {
    const CflReport r = cfl_report(certified_dissipativity(1.0, 2.0), 0.0);
    CHECK(r.c_x == 1.0);
    CHECK(!r.admissible);
    CHECK(!r.alpha_x_bound.has_value());
  }
  SUBCASE("blow-up beyond h_max, exact linear case") {
    const CflReport r = cfl_report(certified_dissipativity(1.0, 1.0), 3.0);
    CHECK(r.h_max == doctest::Approx(2.0));
    CHECK(!r.admissible);
    // One-step Jacobian of x + h(-x) at h = 3 is -2I.
    const LayerSpec blk = linear_layer(Matrix::identity(2).scaled(-1.0), 3.0);
    CHECK(spectral_norm_value(layer_jacobian(blk, {0.1, 0.2})) ==
          doctest::Approx(2.0).epsilon(1e-10));
  }
  SUBCASE("non-dissipative estimates are inadmissible") {
    const CflReport r = cfl_report(certified_dissipativity(0.0, 1.0), 0.1);
    CHECK(!r.admissible);
  }
  CHECK_THROWS_AS(cfl_report(certified_dissipativity(1.0, 0.0), 0.1), UsageError);
}

TEST_CASE("cfl admissibility is exactly the contraction window") {
  // c_x < 1 iff 0 < h < 2m/m_g^2, quantified over a parameter grid.
  std::size_t checked = 0;
  for (int mi = 1; mi <= 10; ++mi) {
    for (int gi = 1; gi <= 10; ++gi) {
      const double m = 0.2 * mi;
      const double m_g = std::max(0.3 * gi, m);  // norm bound dominates the rate
      for (int hi = 1; hi <= 10; ++hi) {
        const double h_max = 2.0 * m / (m_g * m_g);
        const double h = 0.22 * hi * h_max;
        const CflReport r = cfl_report(certified_dissipativity(m, m_g), h);
        CHECK((r.c_x < 1.0) == (h > 0.0 && h < h_max));
        ++checked;
      }
    }
  }
  CHECK(checked == 1000);
}

TEST_CASE("verify_one_step_bound on closed-form blocks") {
  const auto probes = sample_probes(Vec(2, 0.0), 8);

  SUBCASE("g(x) = -x at h = 1 collapses to zero") {
    const NetworkSpec net({linear_layer(Matrix::identity(2).scaled(-1.0), 1.0)}, 2);
    const auto est = certified_dissipativity(1.0, 1.0);
    const auto rep = verify_one_step_bound(net, est, 1.0, probes);
    CHECK(rep.holds);
    CHECK(rep.worst_norm == doctest::Approx(0.0));
    CHECK(rep.c_x == doctest::Approx(0.0));
    CHECK(rep.worst_ratio == 0.0);
  }
  SUBCASE("random dissipative linear blocks at half the critical step") {
    for (std::uint64_t trial = 0; trial < 100; ++trial) {
      const double m = 0.2 + 0.05 * static_cast<double>(trial % 10);
      const double m_g = m + 0.1 + 0.07 * static_cast<double>(trial % 7);
      const Matrix g = dissipative_2x2(m, m_g);
      const auto est = estimate_dissipativity([&g](const Vec&) { return g; }, probes);
      CHECK(est.m == doctest::Approx(m).epsilon(1e-9));
      CHECK(est.m_g == doctest::Approx(m_g).epsilon(1e-9));
      const double h = 0.5 * 2.0 * m / (m_g * m_g);
      const NetworkSpec net({linear_layer(g, h)}, 2);
      const auto rep = verify_one_step_bound(net, est, h, probes);
      CHECK(rep.holds);
      CHECK(rep.worst_ratio <= 1.0 + 1e-9);
    }
  }
  SUBCASE("step mismatch is rejected") {
    const NetworkSpec net({linear_layer(Matrix::identity(2).scaled(-1.0), 0.5)}, 2);
    CHECK_THROWS_AS(
        verify_one_step_bound(net, certified_dissipativity(1.0, 1.0), 0.25, probes),
        UsageError);
  }
}

TEST_CASE("spectral_law_check on rescaled networks") {
  SUBCASE("rho = 0.9 depth 3") {
    const NetworkSpec net = rescaled_net(3, 4, 0.9, 4242);
    const auto rep = spectral_law_check(net, 0.9, {0.5, -0.5, 0.25, 1.0});
    CHECK(rep.applicable);
    CHECK(rep.all_satisfied);
    CHECK(rep.measured[2] <= 0.729 + 1e-9);
    CHECK(rep.exponent_bound == doctest::Approx(std::log(0.9)));
  }
  SUBCASE("rho must be inside (0,1)") {
    const NetworkSpec ident({linear_layer(Matrix::identity(2))}, 2);
    const auto rep = spectral_law_check(ident, 1.0, {1.0, 0.0});
    CHECK(!rep.applicable);
    CHECK(rep.reason.find("(0,1)") != std::string::npos);
  }
  SUBCASE("zero-weight networks satisfy every bound") {
    const NetworkSpec zero({linear_layer(Matrix(2, 2)), linear_layer(Matrix(2, 2))}, 2);
    const auto rep = spectral_law_check(zero, 0.5, {1.0, 1.0});
    CHECK(rep.applicable);
    CHECK(rep.all_satisfied);
    CHECK(rep.measured[1] == 0.0);
  }
  SUBCASE("oversized weights make the law inapplicable") {
    const NetworkSpec big({linear_layer(Matrix::identity(2).scaled(1.2))}, 2);
    const auto rep = spectral_law_check(big, 0.9, {1.0, 0.0});
    CHECK(!rep.applicable);
    CHECK(rep.reason.find("layer 0") != std::string::npos);
  }
}

TEST_CASE("admissible residual depth replication stays under the exponent bound") {
  // Links the step-size law to the exponent machinery: replicated residual
  // nets with h < h_max report terminal estimates below the bound + 2/L.
  const double m = 1.0, m_g = 1.5;
  const Matrix g = dissipative_2x2(m, m_g);
  const double h = 0.5 * 2.0 * m / (m_g * m_g);
  const CflReport cfl = cfl_report(certified_dissipativity(m, m_g), h);
  REQUIRE(cfl.admissible);

  const NetworkSpec block({linear_layer(g, h)}, 2);
  for (std::size_t L : {8, 16, 32}) {
    const NetworkSpec deep = block.replicated(L);
    const auto profile = profile_network(deep, {0.4, -0.2}, false);
    const auto est = estimate_exponents(terminal_slice(profile));
    CHECK(est.alpha_x <= *cfl.alpha_x_bound + 2.0 / static_cast<double>(L));
  }
}

TEST_CASE("probe sampling is deterministic and stays in the ball") {
  const Vec center{1.0, -1.0, 0.5};
  const auto a = sample_probes(center, 64, 7, 2.0);
  const auto b = sample_probes(center, 64, 7, 2.0);
  CHECK(a.size() == 64);
  for (std::size_t i = 0; i < a.size(); ++i) {
    CHECK(a[i] == b[i]);
    CHECK(norm2(vsub(a[i], center)) <= 2.0 + 1e-12);
  }
  CHECK_THROWS_AS(sample_probes(center, 0), UsageError);
}
