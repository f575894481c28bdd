#include <doctest.h>

#include <cmath>
#include <vector>

#include "qgfem/common.hpp"
#include "qgfem/diagnostics.hpp"
#include "qgfem/mesh.hpp"
#include "qgfem/problems.hpp"
#include "qgfem/time_stepper.hpp"

using namespace qg;

namespace {

// Closed-form norms of sin^2(pi x) sin^2(pi y) on the unit square.
constexpr double kSinSqL2 = 0.375;                     // sqrt(9/64)
const double kSinSqH1 = M_PI * std::sqrt(3.0 / 8.0);   // 1.92382474...
const double kSinSqH2 = std::sqrt(2.0) * M_PI * M_PI;  // 13.9577...

}  // namespace

TEST_CASE("norms of the zero field vanish") {
  const RectMesh mesh = build_mesh(0.0, 1.0, 0.0, 1.0, 4, 4);
  const DofMap dofmap = build_dofmap(mesh);
  const NormReport nr = norms(mesh, dofmap, Eigen::VectorXd::Zero(dofmap.n_free));
  CHECK(nr.l2 == 0.0);
  CHECK(nr.h1_semi == 0.0);
  CHECK(nr.h2_broken == 0.0);
}

TEST_CASE("interpolant norms approach the closed forms") {
  const RectMesh mesh = build_mesh(0.0, 1.0, 0.0, 1.0, 32, 32);
  const DofMap dofmap = build_dofmap(mesh);
  const State st = initial_state(SinSqField{}, mesh, dofmap);
  const NormReport nr = norms(mesh, dofmap, st.coeffs);

  CHECK(nr.l2 == doctest::Approx(kSinSqL2).epsilon(1e-3));
  CHECK(nr.h1_semi == doctest::Approx(kSinSqH1).epsilon(1e-3));
  CHECK(nr.h2_broken == doctest::Approx(kSinSqH2).epsilon(1e-2));
}

TEST_CASE("error_norms") {
  const RectMesh mesh = build_mesh(0.0, 1.0, 0.0, 1.0, 32, 32);
  const DofMap dofmap = build_dofmap(mesh);
  const State st = initial_state(SinSqField{}, mesh, dofmap);

  SUBCASE("against the zero field they reduce to plain norms") {
    const NormReport a = error_norms(mesh, dofmap, st.coeffs, ZeroField{}, 0.0);
    const NormReport b = norms(mesh, dofmap, st.coeffs);
    CHECK(a.l2 == doctest::Approx(b.l2).epsilon(1e-14));
    CHECK(a.h1_semi == doctest::Approx(b.h1_semi).epsilon(1e-14));
    CHECK(a.h2_broken == doctest::Approx(b.h2_broken).epsilon(1e-14));
  }

  SUBCASE("interpolation error is small at h = 1/32") {
    const NormReport e = error_norms(mesh, dofmap, st.coeffs, SinSqField{}, 0.0);
    CHECK(e.l2 <= 1e-5);
    CHECK(e.h1_semi <= 1e-3);
    CHECK(e.h2_broken <= 0.1);
  }

  SUBCASE("zero coefficients measure the exact field itself") {
    const Eigen::VectorXd zero = Eigen::VectorXd::Zero(dofmap.n_free);
    const NormReport e = error_norms(mesh, dofmap, zero, SinSqField{}, 0.0);
    CHECK(e.l2 == doctest::Approx(kSinSqL2).epsilon(1e-6));
    CHECK(e.h1_semi == doctest::Approx(kSinSqH1).epsilon(1e-6));
    CHECK(e.h2_broken == doctest::Approx(kSinSqH2).epsilon(1e-6));
  }

  SUBCASE("the evaluation time is forwarded to the exact field") {
    // The manufactured field vanishes identically at t = 0.
    const Eigen::VectorXd zero = Eigen::VectorXd::Zero(dofmap.n_free);
    const NormReport e0 =
        error_norms(mesh, dofmap, zero, ManufacturedSolution{}, 0.0);
    CHECK(e0.l2 <= 1e-12);
    const NormReport e1 =
        error_norms(mesh, dofmap, zero, ManufacturedSolution{}, 0.1);
    CHECK(e1.l2 == doctest::Approx(kSinSqL2).epsilon(1e-6));
  }
}

TEST_CASE("eoc computes log2 error ratios per norm") {
  EocTable table;
  table.h = {0.25, 0.125, 0.0625};
  NormReport r0, r1, r2;
  r0.l2 = 16.0;
  r1.l2 = 1.0;
  r2.l2 = 0.0625;
  r0.h1_semi = 8.0;
  r1.h1_semi = 1.0;
  r2.h1_semi = 0.125;
  r0.h2_broken = 4.0;
  r1.h2_broken = 1.0;
  r2.h2_broken = 0.25;
  table.error = {r0, r1, r2};

  const EocResult res = eoc(table);
  REQUIRE(res.l2.size() == 2);
  CHECK(res.l2[0] == doctest::Approx(4.0));
  CHECK(res.l2[1] == doctest::Approx(4.0));
  CHECK(res.h1[0] == doctest::Approx(3.0));
  CHECK(res.h2[0] == doctest::Approx(2.0));
}

TEST_CASE("eoc rejects malformed tables") {
  NormReport ok;
  ok.l2 = ok.h1_semi = ok.h2_broken = 1.0;

  EocTable mismatched;
  mismatched.h = {0.5, 0.25};
  mismatched.error = {ok};
  CHECK_THROWS_AS(eoc(mismatched), DataError);

  EocTable empty;
  CHECK_THROWS_AS(eoc(empty), DataError);

  EocTable nonhalving;
  nonhalving.h = {0.5, 0.3};
  nonhalving.error = {ok, ok};
  CHECK_THROWS_AS(eoc(nonhalving), DataError);

  EocTable nonpositive;
  nonpositive.h = {0.5, 0.25};
  NormReport zero;
  nonpositive.error = {ok, zero};
  CHECK_THROWS_AS(eoc(nonpositive), DataError);
}

TEST_CASE("decay_rate fits the log-energy slope") {
  std::vector<double> t, e;
  for (int i = 0; i <= 200; ++i) {
    t.push_back(0.005 * i);
    e.push_back(5.0 * std::exp(-2.0 * t.back()));
  }

  SUBCASE("pure exponential gives its exponent and a perfect fit") {
    const FitResult fit = decay_rate(t, e);
    CHECK(fit.rate == doctest::Approx(-2.0).epsilon(1e-10));
    CHECK(fit.r2 >= 1.0 - 1e-12);
  }

  SUBCASE("the window fraction selects the trailing samples") {
    // Corrupt the early samples; a trailing window must not see them.
    std::vector<double> mixed = e;
    for (int i = 0; i < 50; ++i) mixed[i] = 3.0;
    const FitResult fit = decay_rate(t, mixed, 0.5);
    CHECK(fit.rate == doctest::Approx(-2.0).epsilon(1e-10));
  }

  SUBCASE("constant energy gives zero rate and r2 one") {
    const std::vector<double> flat(t.size(), 0.7);
    const FitResult fit = decay_rate(t, flat);
    CHECK(fit.rate == doctest::Approx(0.0));
    CHECK(fit.r2 == doctest::Approx(1.0));
  }

  SUBCASE("malformed inputs raise DataError") {
    CHECK_THROWS_AS(decay_rate({0.0, 1.0}, {1.0}), DataError);
    CHECK_THROWS_AS(decay_rate(t, e, 0.0), DataError);
    CHECK_THROWS_AS(decay_rate(t, e, 1.5), DataError);
    CHECK_THROWS_AS(decay_rate({0.5}, {1.0}), DataError);
    CHECK_THROWS_AS(decay_rate({1.0, 1.0}, {1.0, 2.0}), DataError);
    std::vector<double> touched = e;
    touched.back() = 0.0;
    CHECK_THROWS_AS(decay_rate(t, touched), DataError);
  }
}

TEST_CASE("steady_state compares trailing variation against the tolerance") {
  std::vector<double> settled;
  for (int i = 0; i < 100; ++i)
    settled.push_back(2.0 + (i < 80 ? 0.5 * std::exp(-0.2 * i) : 1e-8));

  CHECK(steady_state(settled, 10, 1e-6));
  CHECK_FALSE(steady_state(settled, 100, 1e-6));

  std::vector<double> drifting;
  for (int i = 0; i < 100; ++i) drifting.push_back(1.0 + 0.01 * i);
  CHECK_FALSE(steady_state(drifting, 10, 1e-6));
  CHECK(steady_state(drifting, 10, 0.2));

  CHECK_THROWS_AS(steady_state(settled, 1, 1e-6), DataError);
  CHECK_THROWS_AS(steady_state(settled, 101, 1e-6), DataError);
}
