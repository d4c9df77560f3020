#include <cmath>
#include <numbers>

#include "doctest.h"
#include "mgsched/error.hpp"
#include "mgsched/stochastic_models.hpp"
#include "oracles.hpp"

using namespace mgsched;
using doctest::Approx;

TEST_CASE("pv density: uniform, symmetric and normalised") {
  const PvModel uniform{1.0, 1.0, 120.0};
  CHECK(pv_output_pdf(uniform, 60.0) == Approx(1.0 / 120.0).epsilon(1e-14));

  const PvModel sym{2.0, 2.0, 120.0};
  CHECK(pv_output_pdf(sym, 30.0) == Approx(pv_output_pdf(sym, 90.0)).epsilon(1e-14));

  const PvModel skew{2.0, 5.0, 120.0};
  const double mass = oracle::integrate([&](double p) { return pv_output_pdf(skew, p); }, 0.0, 120.0);
  CHECK(mass == Approx(1.0).epsilon(1e-6));
}

TEST_CASE("pv cdf agrees with the integrated density") {
  const PvModel m{2.3, 1.7, 84.0};
  for (double p : {5.0, 20.0, 41.5, 70.0, 84.0}) {
    const double ref = oracle::integrate([&](double x) { return pv_output_pdf(m, x); }, 0.0, p);
    CHECK(pv_output_cdf(m, p) == Approx(ref).epsilon(1e-9));
  }
}

TEST_CASE("pv density rejects powers outside its support") {
  const PvModel m{2.0, 2.0, 120.0};
  CHECK_THROWS_AS(pv_output_pdf(m, -1.0), Error);
  CHECK_THROWS_AS(pv_output_pdf(m, 121.0), Error);
  try {
    pv_output_pdf(m, 130.0);
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::domain);
  }
}

TEST_CASE("pv rating from irradiance") {
  const PvModel m{2.0, 2.0, 120.0};
  CHECK(pv_power_from_irradiance(m, 1000.0) == Approx(0.093 * 1300.0));
}

TEST_CASE("wind power curve") {
  const WtModel m{2.0, 8.0};
  CHECK(wt_power_curve(m, 3.0) == 0.0);
  CHECK(wt_power_curve(m, 2.0) == 0.0);
  CHECK(wt_power_curve(m, 9.0) == Approx(30.0));
  CHECK(wt_power_curve(m, 15.0) == Approx(60.0));
  CHECK(wt_power_curve(m, 20.0) == Approx(60.0));
  CHECK(wt_power_curve(m, 25.5) == 0.0);
  double prev = 0.0;
  for (double v = 0.0; v <= 15.0; v += 0.01) {
    const double p = wt_power_curve(m, v);
    CHECK(p >= prev);
    prev = p;
  }
}

TEST_CASE("wind output: density plus atoms has unit mass") {
  for (double k : {1.0, 1.8, 2.0, 3.2}) {
    for (double c : {5.0, 8.0, 11.0}) {
      const WtModel m{k, c};
      const double ramp = oracle::integrate([&](double p) { return wt_output_pdf(m, p); }, 0.0, 60.0);
      const double below = wind_speed_cdf(m, m.v_in);
      const double above = 1.0 - wind_speed_cdf(m, m.v_out);
      const double rated = std::exp(-std::pow(15.0 / c, k)) - std::exp(-std::pow(25.0 / c, k));
      CHECK(wt_rated_mass(m) == Approx(rated).epsilon(1e-12));
      CHECK(wt_zero_mass(m) == Approx(below + above).epsilon(1e-12));
      CHECK(ramp + below + above + rated == Approx(1.0).epsilon(1e-6));
    }
  }
}

TEST_CASE("wind output with k = 1 is an exponential in power") {
  const WtModel m{1.0, 8.0};
  // v = v_in (1 + h p / p_rated) is affine in p, so log-density is affine too.
  const double d1 = std::log(wt_output_pdf(m, 10.0));
  const double d2 = std::log(wt_output_pdf(m, 20.0));
  const double d3 = std::log(wt_output_pdf(m, 30.0));
  CHECK(d2 - d1 == Approx(d3 - d2).epsilon(1e-10));
}

TEST_CASE("wind interval mass matches the mixed distribution") {
  const WtModel m{2.0, 7.0};
  const double ramp = oracle::integrate([&](double p) { return wt_output_pdf(m, p); }, 10.0, 25.0);
  CHECK(m.interval_mass(10.0, 25.0) == Approx(ramp).epsilon(1e-9));
  CHECK(m.interval_mass(0.0, 60.0) == Approx(1.0).epsilon(1e-12));
}

TEST_CASE("load density") {
  const LoadModel m = LoadModel::from_fluctuation(100.0, 0.10, 195.0);
  CHECK(m.sigma == Approx(10.0));
  CHECK(load_pdf(m, 100.0) == Approx(1.0 / (10.0 * std::sqrt(2.0 * std::numbers::pi))));
  CHECK(load_pdf(m, 87.0) == Approx(load_pdf(m, 113.0)).epsilon(1e-14));
  const double mass = oracle::integrate([&](double p) { return load_pdf(m, p); }, 0.0, 195.0);
  CHECK(mass == Approx(1.0).epsilon(1e-6));
  const double ref = oracle::integrate([&](double p) { return load_pdf(m, p); }, 0.0, 93.0);
  CHECK(load_cdf(m, 93.0) == Approx(ref).epsilon(1e-9));
}

TEST_CASE("equivalent load arithmetic") {
  CHECK(equivalent_load(100, 20, 30) == 50.0);
  CHECK(equivalent_load(100, 0, 0) == 100.0);
  CHECK(equivalent_load(50, 40, 30) == -20.0);
  CHECK(equivalent_load(70 + 5, 12, 3) == equivalent_load(70, 12, 3) + 5);
}
