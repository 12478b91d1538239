#include <doctest.h>

#include <boost/math/distributions/chi_squared.hpp>
#include <boost/math/distributions/normal.hpp>

#include <algorithm>
#include <array>
#include <cmath>
#include <random>

#include "polsar/assessment.hpp"
#include "polsar/error.hpp"
#include "test_support.hpp"

using namespace polsar;
using polsar::test::deg;

namespace {

ModelParams synthetic_truth() {
  return {1.0, 0.5, 0.5, {0.3, 0.2}, 0.4, deg(40), deg(-20)};
}

TrialRecord record_from(const ModelParams& p, int index = 0) {
  TrialRecord r;
  r.trial_index = index;
  r.params = p;
  const auto m = mechanism_powers(p);
  r.frac_v = m.volume_fraction();
  r.frac_s = m.surface_fraction();
  r.frac_d = m.double_fraction();
  r.converged = true;
  r.observed_span = m.span;
  return r;
}

const ParamStats& find(const std::vector<ParamStats>& s, const std::string& name) {
  return *std::find_if(s.begin(), s.end(), [&](const auto& x) { return x.name == name; });
}

Scenario identifiable_scene() {
  Scenario s = make_scenario(5.0, 45.0, 15.0, -10.0, {0.2, 0.5, 0.3});
  s.alpha = cdouble{0.5, 0.3};
  return s;
}

void check_same_records(const std::vector<TrialRecord>& a, const std::vector<TrialRecord>& b) {
  REQUIRE(a.size() == b.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    REQUIRE(a[i].trial_index == b[i].trial_index);
    REQUIRE(a[i].params == b[i].params);
    REQUIRE(a[i].cost == b[i].cost);
    REQUIRE(a[i].converged == b[i].converged);
    REQUIRE(a[i].frac_d == b[i].frac_d);
  }
}

}  // namespace

TEST_CASE("summarize: estimates equal to the truth") {
  const auto truth = synthetic_truth();
  std::vector<TrialRecord> recs(5, record_from(truth));
  for (const auto& s : summarize(recs, truth)) {
    CAPTURE(s.name);
    CHECK(s.bias == 0.0);
    CHECK(s.std == 0.0);
    CHECK(s.rel_error_pct == 0.0);
    CHECK(s.n_effective == 5);
  }
}

TEST_CASE("summarize: hand-computed mean and sample std") {
  const auto truth = synthetic_truth();
  auto a = truth, b = truth;
  a.f_v = 0.9;
  b.f_v = 1.1;
  const auto stats = summarize({record_from(a), record_from(b)}, truth);
  const auto& fv = find(stats, "f_v");
  CHECK(fv.mean == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(std::abs(fv.rel_error_pct) < 1e-12);
  CHECK(fv.std == doctest::Approx(0.14142135623730950).epsilon(1e-14));
  CHECK(fv.unit == StatUnit::Power);

  // three values: mean 2, deviations -1, 0, 1 -> std 1 with n - 1
  auto c = truth;
  std::vector<TrialRecord> recs;
  for (double beta : {0.3, 0.4, 0.5}) {
    c.beta = beta;
    recs.push_back(record_from(c));
  }
  const auto& beta = find(summarize(recs, truth), "beta");
  CHECK(beta.mean == doctest::Approx(0.4).epsilon(1e-15));
  CHECK(beta.std == doctest::Approx(0.1).epsilon(1e-14));
}

TEST_CASE("summarize: fractions in percentage points") {
  const auto truth = synthetic_truth();
  const auto m = mechanism_powers(truth);
  auto r1 = record_from(truth), r2 = record_from(truth);
  r1.frac_v = m.volume_fraction() + 0.01;
  r2.frac_v = m.volume_fraction() + 0.03;
  const auto& pv = find(summarize({r1, r2}, truth), "pv_span");
  CHECK(pv.unit == StatUnit::Fraction);
  CHECK(pv.bias == doctest::Approx(2.0).epsilon(1e-12));
  CHECK(pv.abs_error == doctest::Approx(2.0).epsilon(1e-12));
  CHECK(pv.std == doctest::Approx(std::sqrt(2.0)).epsilon(1e-12));
  CHECK(pv.rel_error_pct == doctest::Approx(100.0 * 0.02 / m.volume_fraction()).epsilon(1e-12));
}

TEST_CASE("summarize: angles wrap under the quarter-turn symmetry") {
  const auto truth = synthetic_truth();  // psi_d = 40 deg
  auto a = truth, b = truth;
  a.psi_d = deg(-44);  // 6 deg past the truth across the cell edge
  b.psi_d = deg(44);
  const auto& s = find(summarize({record_from(a), record_from(b)}, truth), "psi_d");
  CHECK(s.unit == StatUnit::Degrees);
  CHECK(s.bias == doctest::Approx(5.0).epsilon(1e-12));
  CHECK(s.mean == doctest::Approx(45.0).epsilon(1e-12));
  CHECK(s.std == doctest::Approx(std::sqrt(2.0)).epsilon(1e-12));
  CHECK(s.rel_error_pct == doctest::Approx(100.0 * 5.0 / 40.0).epsilon(1e-12));

  auto zero_truth = truth;
  zero_truth.psi_s = 0.0;
  a = b = zero_truth;
  a.psi_s = deg(1);
  b.psi_s = deg(3);
  const auto& z = find(summarize({record_from(a), record_from(b)}, zero_truth), "psi_s");
  CHECK(z.rel_error_pct == doctest::Approx(2.0).epsilon(1e-12));
}

TEST_CASE("summarize: exclusions") {
  const auto truth = synthetic_truth();
  auto good = record_from(truth);
  auto failed = good;
  failed.converged = false;
  failed.params.f_v = 100.0;
  CHECK_THROWS_AS((void)summarize({good, failed}, truth), InsufficientDataError);
  CHECK_THROWS_AS((void)summarize({}, truth), InsufficientDataError);

  const auto stats = summarize({good, good, failed}, truth);
  CHECK(find(stats, "f_v").n_effective == 2);
  CHECK(find(stats, "f_v").bias == 0.0);

  auto unident = good;
  unident.identifiable.alpha = false;
  unident.params.alpha = {-0.9, 0.0};
  const auto s2 = summarize({good, good, unident}, truth);
  CHECK(find(s2, "alpha_re").n_effective == 2);
  CHECK(find(s2, "f_d").n_effective == 3);

  // no double bounce in the truth: its shape and angle are not assessed
  auto no_dbl = truth;
  no_dbl.f_d = 0.0;
  const auto s3 = summarize({good, good}, no_dbl);
  CHECK(find(s3, "alpha_re").n_effective == 0);
  CHECK(std::isnan(find(s3, "alpha_re").std));
  CHECK(std::isnan(find(s3, "pd_span").rel_error_pct));
}

TEST_CASE("property: summarize is invariant to record order") {
  std::mt19937_64 g(41);
  const auto truth = synthetic_truth();
  std::vector<TrialRecord> recs;
  for (int i = 0; i < 300; ++i) recs.push_back(record_from(test::random_params(g), i));
  const auto base = summarize(recs, truth);
  for (int k = 0; k < 5; ++k) {
    std::shuffle(recs.begin(), recs.end(), g);
    const auto s = summarize(recs, truth);
    for (std::size_t i = 0; i < s.size(); ++i) {
      CHECK(s[i].mean == base[i].mean);
      CHECK(s[i].std == base[i].std);
    }
  }
}

TEST_CASE("histogram examples") {
  auto h = histogram({0, 1, 2, 3}, 2, std::pair{0.0, 4.0});
  CHECK(h.counts == std::vector<int>{2, 2});
  CHECK(h.edges == std::vector<double>{0.0, 2.0, 4.0});
  CHECK(h.underflow == 0);
  CHECK(h.overflow == 0);

  h = histogram({2.5, 2.5, 2.5}, 5);
  CHECK(h.edges.front() == 2.0);
  CHECK(h.edges.back() == 3.0);
  CHECK(std::count_if(h.counts.begin(), h.counts.end(), [](int c) { return c > 0; }) == 1);
  CHECK(h.total() == 3);

  h = histogram({-1.0, 0.0, 4.0, 5.0}, 4, std::pair{0.0, 4.0});
  CHECK(h.underflow == 1);
  CHECK(h.overflow == 2);
  CHECK(h.counts[0] == 1);

  h = histogram({0.0, 1.0}, 3);
  CHECK(h.counts == std::vector<int>{1, 0, 1});

  CHECK_THROWS_AS((void)histogram({}, 3), InsufficientDataError);
  CHECK_THROWS_AS((void)histogram({1.0}, 0), ValidationError);
}

TEST_CASE("property: histogram conserves counts with increasing edges") {
  std::mt19937_64 g(42);
  std::normal_distribution<double> n(0.0, 2.0);
  for (int k = 0; k < 50; ++k) {
    std::vector<double> v(1 + g() % 500);
    for (auto& x : v) x = n(g);
    const int bins = 1 + static_cast<int>(g() % 60);
    for (const auto& h : {histogram(v, bins), histogram(v, bins, std::pair{-1.0, 1.5})}) {
      REQUIRE(h.total() == static_cast<int>(v.size()));
      REQUIRE(h.counts.size() == static_cast<std::size_t>(bins));
      for (std::size_t i = 1; i < h.edges.size(); ++i) REQUIRE(h.edges[i] > h.edges[i - 1]);
    }
  }
}

TEST_CASE("histogram of normal draws passes a chi-square test") {
  std::mt19937_64 g(43);
  std::normal_distribution<double> n(0.0, 1.0);
  std::vector<double> v(10000);
  for (auto& x : v) x = n(g);
  const auto h = histogram(v, 50);
  boost::math::normal_distribution<double> z;
  double chi2 = 0.0;
  int used = 0;
  for (std::size_t i = 0; i < h.counts.size(); ++i) {
    const double p = boost::math::cdf(z, h.edges[i + 1]) - boost::math::cdf(z, h.edges[i]);
    const double expected = p * static_cast<double>(v.size());
    if (expected < 5.0) continue;
    chi2 += std::pow(h.counts[i] - expected, 2) / expected;
    ++used;
  }
  REQUIRE(used > 20);
  const boost::math::chi_squared_distribution<double> dist(used - 1);
  CHECK(chi2 < boost::math::quantile(dist, 0.999));
}

TEST_CASE("run_trials estimates converge as speckle vanishes") {
  // Error shrinks as 1/sqrt(looks); the inverse problem amplifies element
  // noise roughly tenfold, so the check compares two look counts.
  const auto worst_errors = [](int looks) {
    const auto set = run_trials(identifiable_scene(), 10, {looks, 5, 0}, {});
    const auto& t = set.info.truth;
    const auto m = set.info.true_powers;
    std::array<double, 11> w{};
    for (const auto& r : set.records) {
      REQUIRE(r.converged);
      const auto& p = r.params;
      const double e[11] = {test::relative_error(p.f_v, t.f_v),
                            test::relative_error(p.f_d, t.f_d),
                            test::relative_error(p.f_s, t.f_s),
                            std::abs(p.alpha.real() - t.alpha.real()),
                            std::abs(p.alpha.imag() - t.alpha.imag()),
                            std::abs(p.beta - t.beta),
                            std::abs(p.psi_d - t.psi_d),
                            std::abs(p.psi_s - t.psi_s),
                            test::relative_error(r.frac_v, m.volume_fraction()),
                            test::relative_error(r.frac_s, m.surface_fraction()),
                            test::relative_error(r.frac_d, m.double_fraction())};
      for (int i = 0; i < 11; ++i) w[i] = std::max(w[i], e[i]);
    }
    return w;
  };
  const auto coarse = worst_errors(10000);
  const auto fine = worst_errors(1000000);
  for (int i = 0; i < 11; ++i) {
    CAPTURE(i);
    CHECK(fine[i] < coarse[i] / 4.0);
  }
  for (int i = 8; i < 11; ++i) CHECK(fine[i] < 0.01);
}

TEST_CASE("run_trials metadata and determinism") {
  const auto scene = make_scenario(5.0, 45.0, 15.0, 10.0, {0.01, 0.68, 0.31});
  const auto a = run_trials(scene, 40, {49, 7, 0}, {});
  CHECK(a.info.entropy == doctest::Approx(0.5495).epsilon(1e-3));
  CHECK(a.info.true_powers.double_fraction() == doctest::Approx(0.31));
  CHECK(a.records.size() == 40);
  for (int i = 0; i < 40; ++i) CHECK(a.records[i].trial_index == i);
  for (const auto& r : a.records) {
    CHECK(r.frac_v + r.frac_s + r.frac_d == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(r.frac_v >= 0.0);
    CHECK(r.frac_v <= 1.0 + 1e-9);
  }
  check_same_records(a.records, run_trials(scene, 40, {49, 7, 0}, {}).records);
  check_same_records(a.records, run_trials_serial(scene, 40, {49, 7, 0}, {}).records);
  const auto other = run_trials(scene, 40, {49, 8, 0}, {});
  CHECK(other.records[0].params != a.records[0].params);
}

TEST_CASE("std estimates stabilise as trials grow") {
  const auto scene = identifiable_scene();
  const auto s200 = summarize(run_trials(scene, 200, {49, 3, 0}, {}).records,
                              scenario_to_params(scene));
  const auto s400 = summarize(run_trials(scene, 400, {49, 3, 0}, {}).records,
                              scenario_to_params(scene));
  for (const char* name : {"pv_span", "ps_span", "pd_span"}) {
    CAPTURE(name);
    const double ratio = find(s400, name).std / find(s200, name).std;
    CHECK(std::abs(ratio - 1.0) < 3.0 / std::sqrt(200.0));
  }
}

TEST_CASE("sweep scenario construction") {
  Scenario base = make_scenario(5.0, 45.0, 20.0, 0.0, {0.0, 0.0, 1.0}, 0.2);
  const auto s = sweep_scenario(base, 0.6);
  CHECK(s.span == doctest::Approx(0.8));
  CHECK(s.fractions.volume == doctest::Approx(0.75));
  CHECK(s.fractions.double_bounce == doctest::Approx(0.25));
  const auto p = scenario_to_params(s);
  CHECK(mechanism_powers(p).p_d == doctest::Approx(0.2));
  CHECK(p.f_v == doctest::Approx(0.6));

  base.fractions = {0.0, 0.5, 0.5};
  CHECK_THROWS_AS((void)sweep_scenario(base, 0.1), ValidationError);
}

TEST_CASE("entropy sweep") {
  Scenario base = make_scenario(5.0, 45.0, 20.0, 0.0, {0.0, 0.0, 1.0}, 0.2);
  base.alpha = cdouble{0.3, 0.4};
  const std::vector<double> grid{0.0, 0.1, 0.3, 0.8, 1.8};
  const auto pts = entropy_sweep(base, grid, 20, {49, 9, 0}, {});
  REQUIRE(pts.size() == grid.size());
  for (std::size_t i = 1; i < pts.size(); ++i) CHECK(pts[i].entropy >= pts[i - 1].entropy - 1e-9);
  CHECK(pts.front().entropy < 1e-9);
  CHECK(pts.back().entropy > 0.9);
  // no volume: the double-bounce shape is recovered from every sample
  const auto& first = pts.front();
  CHECK(first.stat("pd_span").std < 1e-4);
  CHECK(first.stat("alpha_re").abs_error < 1e-6);
  CHECK(first.stat("alpha_im").abs_error < 1e-6);
  CHECK(first.stat("psi_d").abs_error < 1e-4);

  CHECK_THROWS_AS((void)entropy_sweep(base, {}, 5, {}, {}), ValidationError);
  CHECK_THROWS_AS((void)entropy_sweep(base, {0.2, 0.1}, 5, {}, {}), ValidationError);
  CHECK_THROWS_AS((void)first.stat("nope"), std::invalid_argument);
}

TEST_CASE("property: noise-free entropy is non-decreasing along the volume sweep") {
  const Scenario base = make_scenario(5.0, 45.0, 15.0, 0.0, {0.0, 0.0, 1.0}, 0.2);
  double prev = -1.0;
  for (int k = 0; k <= 200; ++k) {
    const double h = entropy(assemble(scenario_to_params(sweep_scenario(base, 1.8 * k / 200))));
    REQUIRE(h >= prev - 1e-9);
    prev = h;
  }
}

TEST_CASE("spearman") {
  const std::vector<double> x{1, 2, 3, 4, 5};
  CHECK(spearman(x, {1, 4, 9, 16, 25}) == doctest::Approx(1.0));
  CHECK(spearman(x, {5, 4, 3, 2, 1}) == doctest::Approx(-1.0));
  // ties take average ranks: y ranks (1.5, 1.5, 3, 4, 5)
  CHECK(spearman(x, {1, 1, 2, 3, 4}) == doctest::Approx(0.9746794344808963));
  CHECK(std::isnan(spearman(x, {2, 2, 2, 2, 2})));
  CHECK_THROWS_AS((void)spearman({1.0}, {1.0}), InsufficientDataError);
}
