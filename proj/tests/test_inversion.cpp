#include <doctest.h>

#include <cmath>
#include <random>

#include "polsar/error.hpp"
#include "polsar/inversion.hpp"
#include "polsar/scenario.hpp"
#include "test_support.hpp"

using namespace polsar;
using polsar::test::deg;
using polsar::test::relative_error;

namespace {

double max_param_error(const ModelParams& got, const ModelParams& want) {
  double e = 0.0;
  e = std::max(e, relative_error(got.f_v, want.f_v));
  e = std::max(e, relative_error(got.f_d, want.f_d));
  e = std::max(e, relative_error(got.f_s, want.f_s));
  e = std::max(e, relative_error(got.alpha.real(), want.alpha.real()));
  e = std::max(e, relative_error(got.alpha.imag(), want.alpha.imag()));
  e = std::max(e, relative_error(got.beta, want.beta));
  e = std::max(e, relative_error(got.psi_d, want.psi_d));
  e = std::max(e, relative_error(got.psi_s, want.psi_s));
  return e;
}

double norm2(const std::array<double, kObservables>& r) {
  double s = 0.0;
  for (double x : r) s += x * x;
  return s;
}

}  // namespace

TEST_CASE("residual examples") {
  std::mt19937_64 g(31);
  const auto p = test::random_params(g);
  const auto t = assemble(p);
  for (double x : residual(t, p)) CHECK(x == 0.0);

  ModelParams zero;
  zero.alpha = p.alpha;
  zero.beta = p.beta;
  const auto r0 = residual(t, zero);
  const auto c = t.components();
  for (int i = 0; i < kObservables; ++i) CHECK(r0[i] == c[i]);

  const double delta = 0.01;
  ModelParams q = p;
  q.f_v += delta;
  const auto r = residual(t, q);
  CHECK(r[0] == doctest::Approx(-delta / 2).epsilon(1e-9));
  CHECK(r[1] == doctest::Approx(-delta / 4).epsilon(1e-9));
  CHECK(r[2] == doctest::Approx(-delta / 4).epsilon(1e-9));
  for (int i = 3; i < kObservables; ++i) CHECK(std::abs(r[i]) < 1e-15);
}

TEST_CASE("residual norm is the Hermitian Frobenius cost with off-diagonals counted once") {
  std::mt19937_64 g(32);
  const auto t = test::random_psd(g);
  const auto p = test::random_params(g);
  const auto d = t - assemble(p);
  const double expected = d.t11 * d.t11 + d.t22 * d.t22 + d.t33 * d.t33 + std::norm(d.t12) +
                          std::norm(d.t13) + std::norm(d.t23);
  CHECK(norm2(residual(t, p)) == doctest::Approx(expected).epsilon(1e-14));
}

TEST_CASE("initial_guesses") {
  const auto vol = volume_coherency(2.0);
  FitOptions opts;
  const auto guesses = initial_guesses(vol, opts);
  CHECK(guesses.size() == static_cast<std::size_t>(opts.n_random_starts + 1));
  CHECK(guesses[0].f_v == doctest::Approx(2.0).epsilon(0.05));
  CHECK(guesses[0].f_d < 0.1 * 2.0);
  CHECK(guesses[0].f_s < 0.1 * 2.0);
  CHECK(guesses == initial_guesses(vol, opts));

  opts.n_random_starts = 0;
  CHECK(initial_guesses(vol, opts).size() == 1);

  opts.n_random_starts = 20;
  for (const auto& p : initial_guesses(vol, opts)) {
    CHECK_NOTHROW(p.validate());
  }
  FitOptions other;
  other.start_seed = 1234;
  CHECK(initial_guesses(vol, other)[1] != initial_guesses(vol, FitOptions{})[1]);
}

TEST_CASE("fit options validation") {
  FitOptions o;
  o.cost_tolerance = 0.0;
  CHECK_THROWS_AS(o.validate(), ValidationError);
  o = {};
  o.n_random_starts = -1;
  CHECK_THROWS_AS(o.validate(), ValidationError);
  o = {};
  o.max_iterations = 0;
  CHECK_THROWS_AS(o.validate(), ValidationError);
  CHECK_THROWS_AS((void)fit(CoherencyMatrix{}), DomainError);
}

TEST_CASE("fit recovers identifiable parameter sets exactly") {
  std::mt19937_64 g(33);
  for (int k = 0; k < 25; ++k) {
    const auto p = test::random_identifiable_params(g);
    const auto t = assemble(p);
    const double span = t.trace();
    const auto r = fit(t);
    CAPTURE(k);
    CHECK(r.converged);
    CHECK(r.cost <= 1e-10 * span * span);
    CHECK(max_param_error(r.params, p) < 1e-3);
    CHECK(r.identifiable.alpha);
    CHECK(r.identifiable.beta);
  }
}

TEST_CASE("fit scales with the span") {
  std::mt19937_64 g(34);
  const auto p = test::random_identifiable_params(g);
  for (double scale : {1e-3, 1.0, 250.0}) {
    ModelParams q = p;
    q.f_v *= scale;
    q.f_d *= scale;
    q.f_s *= scale;
    const auto r = fit(assemble(q));
    CHECK(r.cost <= 1e-10 * std::pow(assemble(q).trace(), 2));
    ModelParams unscaled = r.params;
    unscaled.f_v /= scale;
    unscaled.f_d /= scale;
    unscaled.f_s /= scale;
    CHECK(max_param_error(unscaled, p) < 1e-3);
  }
}

TEST_CASE("reported cost and residual match the returned parameters") {
  std::mt19937_64 g(35);
  for (int k = 0; k < 10; ++k) {
    const auto t = test::random_psd(g);
    const auto r = fit(t);
    CHECK(r.cost == norm2(residual(t, r.params)));
    CHECK(r.t_residual == t - assemble(r.params));
    CHECK(r.cost >= 0.0);
    CHECK_NOTHROW(r.params.validate());
    CHECK(r.n_starts_used >= 1);
    CHECK(r.start_index_of_winner < r.n_starts_used);
  }
}

TEST_CASE("fit is deterministic") {
  std::mt19937_64 g(36);
  const auto t = test::random_psd(g);
  const auto a = fit(t);
  const auto b = fit(t);
  CHECK(a.params == b.params);
  CHECK(a.cost == b.cost);
  CHECK(a.n_iterations == b.n_iterations);
}

TEST_CASE("volume-only matrix") {
  const auto r = fit(volume_coherency(1.0));
  CHECK(r.params.f_v == doctest::Approx(1.0).epsilon(1e-6));
  CHECK(r.params.f_d < 1e-6);
  CHECK(r.params.f_s < 1e-6);
  CHECK(r.cost < 1e-20);
  CHECK_FALSE(r.identifiable.alpha);
  CHECK_FALSE(r.identifiable.beta);
  CHECK_FALSE(r.identifiable.psi_d);
  CHECK_FALSE(r.identifiable.psi_s);
}

TEST_CASE("real-valued scenes admit a family of exact fits") {
  // With real alpha the model matrix is real: six equations, seven unknowns.
  const auto truth =
      scenario_to_params(make_scenario(5.0, 45.0, 15.0, 10.0, {0.01, 0.68, 0.31}));
  REQUIRE(std::abs(truth.alpha.imag()) < 1e-15);
  const auto t = assemble(truth);
  const auto r = fit(t);
  CHECK(r.converged);
  CHECK(r.cost <= 1e-10);
  CHECK(assemble(r.params).max_abs_diff(t) < 1e-5);
  // a second parameter set reproducing the same matrix
  CHECK(max_param_error(r.params, truth) > 1e-3);
  MESSAGE("exact fit of the real scene: f_v=" << r.params.f_v << " f_d=" << r.params.f_d
                                              << " f_s=" << r.params.f_s
                                              << " alpha=" << r.params.alpha
                                              << " beta=" << r.params.beta);
  // The same scene with a complex alpha is recovered uniquely.
  Scenario s = make_scenario(5.0, 45.0, 15.0, 10.0, {0.01, 0.68, 0.31});
  s.alpha = cdouble{0.6, 0.3};
  const auto p = scenario_to_params(s);
  REQUIRE(std::abs(p.alpha.imag()) > 0.1);
  const auto rc = fit(assemble(p));
  CHECK(max_param_error(rc.params, p) < 1e-3);
}

TEST_CASE("property: rotation equivariance") {
  std::mt19937_64 g(37);
  int checked = 0;
  while (checked < 10) {
    auto p = test::random_identifiable_params(g);
    p.psi_d *= 0.5;
    p.psi_s *= 0.5;
    const double psi = deg(7.0);
    const auto a = fit(assemble(p));
    const auto b = fit(rotate(assemble(p), psi));
    ++checked;
    CHECK(b.params.psi_d == doctest::Approx(a.params.psi_d + psi).epsilon(1e-3));
    CHECK(b.params.psi_s == doctest::Approx(a.params.psi_s + psi).epsilon(1e-3));
    CHECK(relative_error(b.params.f_v, a.params.f_v) < 1e-3);
    CHECK(relative_error(b.params.f_d, a.params.f_d) < 1e-3);
    CHECK(relative_error(b.params.f_s, a.params.f_s) < 1e-3);
    CHECK(std::abs(b.params.alpha - a.params.alpha) < 1e-3);
    CHECK(std::abs(b.params.beta - a.params.beta) < 1e-3);
  }
}

TEST_CASE("fix_imag_alpha pins the imaginary part") {
  std::mt19937_64 g(38);
  const auto t = test::random_psd(g);
  FitOptions o;
  o.fix_imag_alpha = true;
  const auto r = fit(t, o);
  CHECK(r.params.alpha.imag() == 0.0);
}

TEST_CASE("noisy or non-model matrices never throw") {
  std::mt19937_64 g(39);
  for (int k = 0; k < 30; ++k) {
    const auto t = test::random_psd(g);
    FitResult r;
    CHECK_NOTHROW(r = fit(t));
    CHECK(std::isfinite(r.cost));
  }
}
