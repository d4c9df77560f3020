#include "mgsched/stochastic_models.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include <boost/math/special_functions/beta.hpp>
#include <fmt/format.h>

#include "mgsched/error.hpp"

namespace mgsched {
namespace {

void require(bool ok, const char* what) {
  if (!ok) throw Error(ErrorKind::invalid_argument, what);
}

}  // namespace

void PvModel::validate() const {
  require(lambda1 > 0.0, "pv lambda1 must be > 0");
  require(lambda2 > 0.0, "pv lambda2 must be > 0");
  require(p_max >= 0.0, "pv p_max must be >= 0");
  require(eta > 0.0 && eta <= 1.0, "pv eta must lie in (0, 1]");
  require(area > 0.0, "pv area must be > 0");
  require(r_max > 0.0, "pv r_max must be > 0");
}

double PvModel::interval_mass(double lo, double hi) const {
  return pv_output_cdf(*this, hi) - pv_output_cdf(*this, lo);
}

double pv_output_pdf(const PvModel& model, double p) {
  if (!(p >= 0.0 && p <= model.p_max) || model.p_max <= 0.0) {
    throw Error(ErrorKind::domain,
                fmt::format("pv output {} outside [0, {}]", p, model.p_max));
  }
  const double x = p / model.p_max;
  // The Beta normalising constant, via lgamma for large shape factors.
  const double log_norm = std::lgamma(model.lambda1 + model.lambda2) -
                          std::lgamma(model.lambda1) - std::lgamma(model.lambda2);
  const double a = model.lambda1 - 1.0;
  const double b = model.lambda2 - 1.0;
  if ((x == 0.0 && a != 0.0) || (x == 1.0 && b != 0.0)) {
    if ((x == 0.0 && a < 0.0) || (x == 1.0 && b < 0.0)) return INFINITY;
    return 0.0;
  }
  const double log_density = log_norm + (a != 0.0 ? a * std::log(x) : 0.0) +
                             (b != 0.0 ? b * std::log1p(-x) : 0.0);
  return std::exp(log_density) / model.p_max;
}

double pv_output_cdf(const PvModel& model, double p) {
  if (model.p_max <= 0.0) return p < 0.0 ? 0.0 : 1.0;
  if (p <= 0.0) return 0.0;
  if (p >= model.p_max) return 1.0;
  return boost::math::ibeta(model.lambda1, model.lambda2, p / model.p_max);
}

double pv_power_from_irradiance(const PvModel& model, double irradiance) {
  return irradiance * model.eta * model.area / 1000.0;
}

void WtModel::validate() const {
  require(k > 0.0, "wt shape k must be > 0");
  require(scale > 0.0, "wt scale must be > 0");
  require(v_in > 0.0 && v_in < v_rated && v_rated < v_out,
          "wt speeds must satisfy 0 < v_in < v_rated < v_out");
  require(p_rated > 0.0, "wt p_rated must be > 0");
}

double wind_speed_pdf(const WtModel& model, double v) {
  if (v < 0.0) return 0.0;
  const double z = v / model.scale;
  return (model.k / model.scale) * std::pow(z, model.k - 1.0) *
         std::exp(-std::pow(z, model.k));
}

double wind_speed_cdf(const WtModel& model, double v) {
  if (v <= 0.0) return 0.0;
  return -std::expm1(-std::pow(v / model.scale, model.k));
}

double wt_power_curve(const WtModel& model, double v) {
  if (v < model.v_in || v > model.v_out) return 0.0;
  if (v < model.v_rated) {
    return (v - model.v_in) / (model.v_rated - model.v_in) * model.p_rated;
  }
  if (v < model.v_out) return model.p_rated;
  return 0.0;  // exactly at cut-off
}

double wt_output_pdf(const WtModel& model, double p) {
  if (!(p >= 0.0 && p <= model.p_rated)) {
    throw Error(ErrorKind::domain,
                fmt::format("wt output {} outside [0, {}]", p, model.p_rated));
  }
  const double h = model.h();
  const double z = (1.0 + h * p / model.p_rated) * model.v_in / model.scale;
  return (model.k * h * model.v_in / (model.scale * model.p_rated)) *
         std::pow(z, model.k - 1.0) * std::exp(-std::pow(z, model.k));
}

double wt_zero_mass(const WtModel& model) {
  return wind_speed_cdf(model, model.v_in) +
         (1.0 - wind_speed_cdf(model, model.v_out));
}

double wt_rated_mass(const WtModel& model) {
  return wind_speed_cdf(model, model.v_out) -
         wind_speed_cdf(model, model.v_rated);
}

double WtModel::interval_mass(double lo, double hi) const {
  lo = std::max(lo, 0.0);
  hi = std::min(hi, p_rated);
  if (hi < lo) return 0.0;
  // Ramp part: the power curve is invertible there.
  auto speed_at = [this](double p) { return v_in + (v_rated - v_in) * p / p_rated; };
  double mass = wind_speed_cdf(*this, speed_at(hi)) - wind_speed_cdf(*this, speed_at(lo));
  if (lo <= 0.0) mass += wt_zero_mass(*this);
  if (hi >= p_rated) mass += wt_rated_mass(*this);
  return mass;
}

LoadModel LoadModel::from_fluctuation(double mu, double fluctuation, double p_max) {
  return LoadModel{mu, fluctuation * mu, fluctuation, p_max};
}

void LoadModel::validate() const {
  require(mu >= 0.0, "load mu must be >= 0");
  require(sigma >= 0.0, "load sigma must be >= 0");
  require(p_max > 0.0, "load p_max must be > 0");
}

double load_pdf(const LoadModel& model, double p) {
  const double z = (p - model.mu) / model.sigma;
  return std::exp(-0.5 * z * z) / (model.sigma * std::sqrt(2.0 * std::numbers::pi));
}

double load_cdf(const LoadModel& model, double p) {
  if (model.sigma == 0.0) return p < model.mu ? 0.0 : 1.0;
  return 0.5 * std::erfc(-(p - model.mu) / (model.sigma * std::numbers::sqrt2));
}

double LoadModel::interval_mass(double lo, double hi) const {
  lo = std::max(lo, 0.0);
  hi = std::min(hi, p_max);
  if (hi < lo) return 0.0;
  if (sigma == 0.0) {
    // Point mass: attribute it to the half-open bin [lo, hi) except at p_max.
    return (mu >= lo && (mu < hi || (hi == p_max && mu <= hi))) ? 1.0 : 0.0;
  }
  return load_cdf(*this, hi) - load_cdf(*this, lo);
}

double equivalent_load(double p_load, double p_pv, double p_wt) {
  return p_load - (p_pv + p_wt);
}

}  // namespace mgsched
